//! Operators of the variational bicomplex on graded differential polynomials.

mod divergence;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::kernel::{
    int, total_ghost_of, Expr, Generator, KernelError, Kind, MultiIndex, Parity, Side, SpaceSpec, Var,
};

pub use divergence::{divergence_normal_form, solve_divergence, DivergenceNormalForm};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JetError {
    #[error("coordinate index {index} out of range for dimension {dim}")]
    CoordinateOutOfRange { index: usize, dim: usize },
    #[error("expected a local function (form degree 0)")]
    NotLocalFunction,
    #[error("unknown variable {0}")]
    UnknownVar(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Total derivative ∂_ν along coordinate `nu`, acting on every jet kind.
pub fn d(e: &Expr, nu: usize) -> Expr {
    e.apply_derivation(Parity::Even, |g| match g.kind {
        Kind::Coordinate if g.base as usize == nu => Some(Expr::one()),
        Kind::Coordinate | Kind::BasisForm => None,
        _ => Some(Expr::gen(g.raised(nu))),
    })
}

/// Range-checked total derivative.
pub fn total_derivative(e: &Expr, nu: usize, space: &SpaceSpec) -> Result<Expr, JetError> {
    if nu >= space.dim() {
        return Err(JetError::CoordinateOutOfRange {
            index: nu,
            dim: space.dim(),
        });
    }
    Ok(d(e, nu))
}

/// ∂_(μ) for a multi-index; the empty index is the identity.
pub fn multi_total_derivative(e: &Expr, mi: &MultiIndex) -> Expr {
    let mut acc = e.clone();
    for mu in mi.entries() {
        if acc.is_zero() {
            break;
        }
        acc = d(&acc, mu);
    }
    acc
}

/// Memoized total derivatives ∂_(μ)e of one expression.
#[derive(Clone, Debug)]
pub struct Derivatives {
    cache: HashMap<MultiIndex, Expr>,
}

impl Derivatives {
    pub fn new(base: Expr) -> Self {
        let mut cache = HashMap::new();
        cache.insert(MultiIndex::empty(), base);
        Derivatives { cache }
    }

    pub fn get(&mut self, mi: &MultiIndex) -> Expr {
        if let Some(e) = self.cache.get(mi) {
            return e.clone();
        }
        let mu = mi.max_entry().expect("empty index is always cached");
        let lower = mi.lowered(mu).unwrap();
        let prev = self.get(&lower);
        let out = d(&prev, mu);
        self.cache.insert(*mi, out.clone());
        out
    }
}

/// d_H ω = dx^ν ∂_ν ω. Top forms map to zero.
pub fn horizontal_differential(omega: &Expr, dim: usize) -> Expr {
    let mut out = Expr::zero();
    for nu in 0..dim {
        let dn = d(omega, nu);
        if !dn.is_zero() {
            out += &Expr::basis_form(nu) * &dn;
        }
    }
    out
}

/// Evolutionary vector field Q^z ∂/∂z on any dependent variables
/// (fields, ghosts or antifields); missing entries are zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct EvolutionaryField {
    pub characteristics: BTreeMap<Var, Expr>,
}

impl EvolutionaryField {
    pub fn new(characteristics: BTreeMap<Var, Expr>) -> Self {
        let characteristics = characteristics.into_iter().filter(|(_, e)| !e.is_zero()).collect();
        EvolutionaryField { characteristics }
    }

    pub fn zero() -> Self {
        EvolutionaryField::default()
    }

    /// Builds a field over the physical fields from a list of components.
    pub fn on_fields(components: Vec<Expr>) -> Self {
        EvolutionaryField::new(
            components
                .into_iter()
                .enumerate()
                .map(|(i, e)| (Var::field(i), e))
                .collect(),
        )
    }

    pub fn get(&self, v: &Var) -> Expr {
        self.characteristics.get(v).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.characteristics.is_empty()
    }

    /// Field components in order for `n` physical fields.
    pub fn field_components(&self, n: usize) -> Vec<Expr> {
        (0..n).map(|i| self.get(&Var::field(i))).collect()
    }

    /// Parity of the derivation δ_Q, `None` if the components disagree.
    pub fn parity(&self) -> Option<Parity> {
        let mut out: Option<Parity> = None;
        for (v, q) in &self.characteristics {
            let p = q.parity()?.plus(v.parity());
            match out {
                None => out = Some(p),
                Some(o) if o != p => return None,
                _ => {}
            }
        }
        Some(out.unwrap_or(Parity::Even))
    }

    pub fn scale(&self, c: &crate::kernel::Coeff) -> Self {
        EvolutionaryField::new(self.characteristics.iter().map(|(v, e)| (*v, e.scale(c))).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut m = self.characteristics.clone();
        for (v, e) in &other.characteristics {
            *m.entry(*v).or_default() += e;
        }
        EvolutionaryField::new(m)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&int(-1)))
    }

    /// δ_Q e = Σ ∂_(μ)Q^z ∂e/∂z_(μ), a graded derivation of parity |Q|.
    pub fn prolong(&self, e: &Expr) -> Expr {
        if self.is_zero() || e.is_zero() {
            return Expr::zero();
        }
        let parity = self.parity().expect("evolutionary field must be parity-homogeneous");
        let mut caches: HashMap<Var, Derivatives> = HashMap::new();
        e.apply_derivation(parity, |g| {
            let v = g.var()?;
            let q = self.characteristics.get(&v)?;
            Some(
                caches
                    .entry(v)
                    .or_insert_with(|| Derivatives::new(q.clone()))
                    .get(&g.jet),
            )
        })
    }
}

pub fn prolong_evolutionary(q: &EvolutionaryField, e: &Expr) -> Expr {
    q.prolong(e)
}

/// Generalized vector field P^μ ∂/∂x^μ + R^i ∂/∂φ^i.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GeneralizedField {
    pub p: Vec<Expr>,
    pub r: BTreeMap<Var, Expr>,
}

impl GeneralizedField {
    /// The evolutionary representative Q^i = R^i − P^μ ∂_μ φ^i for the given
    /// dependent variables.
    pub fn evolutionary_part(&self, vars: &BTreeSet<Var>) -> EvolutionaryField {
        let mut chars = BTreeMap::new();
        for v in vars {
            let mut q = self.r.get(v).cloned().unwrap_or_default();
            for (mu, pmu) in self.p.iter().enumerate() {
                if !pmu.is_zero() {
                    q -= pmu * &Expr::jet(*v, MultiIndex::single(mu));
                }
            }
            chars.insert(*v, q);
        }
        EvolutionaryField::new(chars)
    }

    /// pr X ω = δ_Q ω + P^μ ∂_μ ω + d_H P^μ ∂ω/∂dx^μ.
    pub fn prolong(&self, omega: &Expr) -> Expr {
        let dim = self.p.len();
        let mut vars: BTreeSet<Var> = omega.vars();
        vars.extend(self.r.keys().copied());
        let q = self.evolutionary_part(&vars);
        let mut out = q.prolong(omega);
        for (mu, pmu) in self.p.iter().enumerate() {
            if pmu.is_zero() {
                continue;
            }
            out += pmu * &d(omega, mu);
            let dform = omega.partial_derivative(&Generator::basis_form(mu), Side::Left);
            if !dform.is_zero() {
                out += &horizontal_differential(pmu, dim) * &dform;
            }
        }
        out
    }
}

pub fn prolong_generalized(x: &GeneralizedField, omega: &Expr) -> Expr {
    x.prolong(omega)
}

/// δf/δz = Σ_(μ) (−∂)_(μ) ∂f/∂z_(μ) without input checks.
pub fn euler_lagrange_unchecked(f: &Expr, var: Var, side: Side) -> Expr {
    let mut out = Expr::zero();
    for g in f.generators() {
        if g.var() != Some(var) {
            continue;
        }
        let partial = f.partial_derivative(&g, side);
        let mut term = multi_total_derivative(&partial, &g.jet);
        if g.jet.len() % 2 == 1 {
            term = -term;
        }
        out += term;
    }
    out
}

/// Euler–Lagrange derivative of a local function. The input must be of form
/// degree zero and homogeneous in total ghost number and parity.
pub fn euler_lagrange(f: &Expr, var: Var, side: Side) -> Result<Expr, JetError> {
    if f.contains_kind(|g| g.kind == Kind::BasisForm) {
        return Err(JetError::NotLocalFunction);
    }
    total_ghost_of(f).map_err(KernelError::from)?;
    Ok(euler_lagrange_unchecked(f, var, side))
}

/// Range-checked variant resolving a variable against a schema's sizes.
pub fn euler_lagrange_checked(
    f: &Expr,
    var: Var,
    side: Side,
    schema: &crate::kernel::Schema,
) -> Result<Expr, JetError> {
    let ok = match var.kind {
        Kind::FieldJet | Kind::FieldAntifieldJet => var.index() < schema.fields.len(),
        Kind::GhostJet | Kind::GhostAntifieldJet => var.index() < schema.params.len(),
        _ => false,
    };
    if !ok {
        return Err(JetError::UnknownVar(format!("{var:?}")));
    }
    euler_lagrange(f, var, side)
}

/// True iff two integrands define the same local functional, i.e. all
/// Euler–Lagrange derivatives of their difference vanish.
pub fn functionals_equal(l1: &Expr, l2: &Expr) -> bool {
    is_null_lagrangian(&(l1 - l2))
}

/// All Euler–Lagrange derivatives of `l` vanish identically.
pub fn is_null_lagrangian(l: &Expr) -> bool {
    l.vars()
        .into_iter()
        .all(|v| euler_lagrange_unchecked(l, v, Side::Left).is_zero())
}
