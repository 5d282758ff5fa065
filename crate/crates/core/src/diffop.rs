//! Total differential operators O^a_b = Σ O^{a(μ)}_b ∂_(μ) and
//! bi-differential operators.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::jet::{Derivatives, EvolutionaryField};
use crate::kernel::{Expr, MultiIndex, Schema, Side, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiffOpError {
    #[error("index mismatch: cannot compose an operator taking {left} with one producing {right}")]
    IndexMismatch { left: IndexRange, right: IndexRange },
    #[error("expected an operator with a single output row, got {0}")]
    NotRow(IndexRange),
}

/// What an index of an operator runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexLabel {
    /// A single component.
    Scalar,
    /// Fields, or equations of motion of a variational theory.
    Field,
    /// Gauge parameters.
    Param,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IndexRange {
    pub label: IndexLabel,
    pub len: usize,
}

impl IndexRange {
    pub const SCALAR: IndexRange = IndexRange {
        label: IndexLabel::Scalar,
        len: 1,
    };

    pub fn fields(n: usize) -> Self {
        IndexRange {
            label: IndexLabel::Field,
            len: n,
        }
    }

    pub fn params(n: usize) -> Self {
        IndexRange {
            label: IndexLabel::Param,
            len: n,
        }
    }
}

impl fmt::Display for IndexRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = match self.label {
            IndexLabel::Scalar => "scalar",
            IndexLabel::Field => "field",
            IndexLabel::Param => "parameter",
        };
        write!(f, "{l}[{}]", self.len)
    }
}

type Key = (usize, usize, MultiIndex);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TotalDiffOp {
    out: IndexRange,
    inp: IndexRange,
    coeffs: BTreeMap<Key, Expr>,
}

impl TotalDiffOp {
    pub fn zero(out: IndexRange, inp: IndexRange) -> Self {
        TotalDiffOp {
            out,
            inp,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn identity(range: IndexRange) -> Self {
        let mut o = TotalDiffOp::zero(range, range);
        for a in 0..range.len {
            o.add_coeff(a, a, MultiIndex::empty(), Expr::one());
        }
        o
    }

    /// The scalar operator e·∂_(μ).
    pub fn scalar(e: Expr, mi: MultiIndex) -> Self {
        let mut o = TotalDiffOp::zero(IndexRange::SCALAR, IndexRange::SCALAR);
        o.add_coeff(0, 0, mi, e);
        o
    }

    pub fn out_range(&self) -> IndexRange {
        self.out
    }

    pub fn in_range(&self) -> IndexRange {
        self.inp
    }

    /// Adds `e` to the coefficient of ∂_(mi) in entry (a, b).
    pub fn add_coeff(&mut self, a: usize, b: usize, mi: MultiIndex, e: Expr) {
        assert!(a < self.out.len && b < self.inp.len, "operator entry out of range");
        if e.is_zero() {
            return;
        }
        let slot = self.coeffs.entry((a, b, mi)).or_default();
        *slot += e;
        if slot.is_zero() {
            self.coeffs.remove(&(a, b, mi));
        }
    }

    pub fn coeff(&self, a: usize, b: usize, mi: &MultiIndex) -> Expr {
        self.coeffs.get(&(a, b, *mi)).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&Key, &Expr)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn order(&self) -> usize {
        self.coeffs.keys().map(|(_, _, m)| m.len()).max().unwrap_or(0)
    }

    /// (O f)^a = Σ O^{a(μ)}_b ∂_(μ) f^b; missing inputs read as zero.
    pub fn apply(&self, f: &[Expr]) -> Vec<Expr> {
        let mut caches: BTreeMap<usize, Derivatives> = BTreeMap::new();
        let mut out = vec![Expr::zero(); self.out.len];
        for ((a, b, mi), c) in &self.coeffs {
            let Some(fb) = f.get(*b) else { continue };
            if fb.is_zero() {
                continue;
            }
            let df = caches.entry(*b).or_insert_with(|| Derivatives::new(fb.clone())).get(mi);
            out[*a] += c * &df;
        }
        out
    }

    /// Applies the coefficient map `g` entrywise.
    pub fn map_coeffs(&self, mut g: impl FnMut(&Expr) -> Expr) -> Self {
        let mut o = TotalDiffOp::zero(self.out, self.inp);
        for ((a, b, mi), c) in &self.coeffs {
            o.add_coeff(*a, *b, *mi, g(c));
        }
        o
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        self.map_coeffs(|e| e.scale(c))
    }

    /// Left multiplication of every coefficient by `e`.
    pub fn times(&self, e: &Expr) -> Self {
        self.map_coeffs(|c| e * c)
    }

    pub fn add(&self, other: &Self) -> Result<Self, DiffOpError> {
        self.same_shape(other)?;
        let mut o = self.clone();
        for ((a, b, mi), c) in &other.coeffs {
            o.add_coeff(*a, *b, *mi, c.clone());
        }
        Ok(o)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, DiffOpError> {
        self.add(&other.scale(&-BigRational::from_integer(1.into())))
    }

    fn same_shape(&self, other: &Self) -> Result<(), DiffOpError> {
        if self.inp != other.inp {
            return Err(DiffOpError::IndexMismatch {
                left: self.inp,
                right: other.inp,
            });
        }
        if self.out != other.out {
            return Err(DiffOpError::IndexMismatch {
                left: self.out,
                right: other.out,
            });
        }
        Ok(())
    }

    /// self ∘ other, expanding ∂_(μ)(c ∂_(ν)) by the Leibniz rule.
    pub fn compose(&self, other: &Self) -> Result<Self, DiffOpError> {
        if self.inp != other.out {
            return Err(DiffOpError::IndexMismatch {
                left: self.inp,
                right: other.out,
            });
        }
        let mut o = TotalDiffOp::zero(self.out, other.inp);
        let mut caches: BTreeMap<(usize, usize, MultiIndex), Derivatives> = BTreeMap::new();
        for ((a, b, mu), c1) in &self.coeffs {
            for ((b2, c, nu), c2) in other.coeffs.range((*b, 0, MultiIndex::empty())..) {
                if b2 != b {
                    break;
                }
                let cache = caches
                    .entry((*b, *c, *nu))
                    .or_insert_with(|| Derivatives::new(c2.clone()));
                for (beta, mult) in mu.splits() {
                    let alpha = mu.checked_sub(&beta).unwrap();
                    let dc = cache.get(&alpha);
                    if dc.is_zero() {
                        continue;
                    }
                    let term = (c1 * &dc).scale(&BigRational::from_integer(mult));
                    o.add_coeff(*a, *c, beta.add(nu), term);
                }
            }
        }
        Ok(o)
    }

    /// Formal adjoint: (O†)^{b(β)}_a = Σ_{μ⊇β} (−1)^{|μ|} C(μ,β) ∂_{μ−β} O^{a(μ)}_b.
    pub fn adjoint(&self) -> Self {
        let mut o = TotalDiffOp::zero(self.inp, self.out);
        for ((a, b, mu), c) in &self.coeffs {
            let mut cache = Derivatives::new(c.clone());
            let sign = if mu.len() % 2 == 1 { -1 } else { 1 };
            for (beta, mult) in mu.splits() {
                let rest = mu.checked_sub(&beta).unwrap();
                let dc = cache.get(&rest);
                o.add_coeff(
                    *b,
                    *a,
                    beta,
                    dc.scale(&BigRational::from_integer(mult * BigInt::from(sign))),
                );
            }
        }
        o
    }

    /// δ_Q acting on the coefficients.
    pub fn prolong(&self, q: &EvolutionaryField) -> Self {
        self.map_coeffs(|c| q.prolong(c))
    }

    pub fn render(&self, schema: &Schema) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let names = schema as &dyn crate::kernel::Names;
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|((a, b, mi), c)| {
                let dpart = if mi.is_empty() {
                    String::new()
                } else {
                    format!("*d{}", crate::kernel::render::render_jet(mi, names))
                };
                format!("[{a},{b}]: ({}){dpart}", schema.render(c))
            })
            .collect();
        parts.join("; ")
    }
}

/// Fréchet derivative (D_P)^a_j = ∂P^a/∂φ^j_(ν) ∂_(ν) over `n_fields` fields.
pub fn frechet(p: &[Expr], out: IndexLabel, n_fields: usize) -> TotalDiffOp {
    let mut o = TotalDiffOp::zero(
        IndexRange {
            label: out,
            len: p.len(),
        },
        IndexRange::fields(n_fields),
    );
    for (a, pa) in p.iter().enumerate() {
        for g in pa.generators() {
            let Some(v) = g.var() else { continue };
            if v.kind != Var::field(0).kind || v.index() >= n_fields {
                continue;
            }
            o.add_coeff(a, v.index(), g.jet, pa.partial_derivative(&g, Side::Left));
        }
    }
    o
}

/// Fréchet derivative of the characteristic of an evolutionary field.
pub fn frechet_of_field(q: &EvolutionaryField, n_fields: usize) -> TotalDiffOp {
    frechet(&q.field_components(n_fields), IndexLabel::Field, n_fields)
}

fn require_row(n: &TotalDiffOp) -> Result<(), DiffOpError> {
    if n.out.len != 1 {
        return Err(DiffOpError::NotRow(n.out));
    }
    Ok(())
}

/// For a row operator N^i: (D_N)^i_j = (D_{N^{i(μ)}})_j ∘ ∂_(μ).
pub fn frechet_of_operator(n: &TotalDiffOp, n_fields: usize) -> Result<TotalDiffOp, DiffOpError> {
    require_row(n)?;
    let mut o = TotalDiffOp::zero(n.inp, IndexRange::fields(n_fields));
    for ((_, i, mu), c) in &n.coeffs {
        let dc = frechet(std::slice::from_ref(c), IndexLabel::Scalar, n_fields);
        for ((_, j, nu), k) in &dc.coeffs {
            o.add_coeff(*i, *j, nu.add(mu), k.clone());
        }
    }
    Ok(o)
}

/// Σ_μ (D_{N^{i(μ)}})† ∘ ∂_(μ): the coefficientwise-adjoint Fréchet
/// derivative of a row operator, with output over fields and input over
/// N's components.
pub fn frechet_adjoint_of_operator(n: &TotalDiffOp, n_fields: usize) -> Result<TotalDiffOp, DiffOpError> {
    require_row(n)?;
    let mut o = TotalDiffOp::zero(IndexRange::fields(n_fields), n.inp);
    for ((_, i, mu), c) in &n.coeffs {
        let dc = frechet(std::slice::from_ref(c), IndexLabel::Scalar, n_fields).adjoint();
        let composed = dc.compose(&TotalDiffOp::scalar(Expr::one(), *mu))?;
        for ((j, _, nu), k) in &composed.coeffs {
            o.add_coeff(*j, *i, *nu, k.clone());
        }
    }
    Ok(o)
}

/// Variationality test: D_E equals its own adjoint.
pub fn helmholtz_check(e: &[Expr]) -> bool {
    let de = frechet(e, IndexLabel::Field, e.len());
    de.adjoint() == de
}

/// Σ_a N^a[E_a] vanishes identically.
pub fn is_noether(n: &TotalDiffOp, e: &[Expr]) -> bool {
    n.apply(e).iter().all(Expr::is_zero)
}

/// (Q·N)^i = δ_Q N^i − N^j ∘ (D_Q^i_j)†.
pub fn module_action(q: &EvolutionaryField, n: &TotalDiffOp, n_fields: usize) -> Result<TotalDiffOp, DiffOpError> {
    let dq = frechet_of_field(q, n_fields).adjoint();
    n.prolong(q).sub(&n.compose(&dq)?)
}

/// ρ(N)^i = N^{†i}(1).
pub fn rho(n: &TotalDiffOp) -> Result<EvolutionaryField, DiffOpError> {
    require_row(n)?;
    let comps = n.adjoint().apply(&[Expr::one()]);
    Ok(EvolutionaryField::on_fields(comps))
}

type BiKey = (usize, usize, usize, MultiIndex, MultiIndex);

/// C^γ(f1, f2) = Σ C^{γ(μ)(ν)}_{αβ} ∂_(μ)f1^α ∂_(ν)f2^β.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BiDiffOp {
    n: usize,
    coeffs: BTreeMap<BiKey, Expr>,
}

impl BiDiffOp {
    pub fn zero(n: usize) -> Self {
        BiDiffOp {
            n,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_coeff(&mut self, gamma: usize, alpha: usize, beta: usize, mu: MultiIndex, nu: MultiIndex, e: Expr) {
        assert!(
            gamma < self.n && alpha < self.n && beta < self.n,
            "structure entry out of range"
        );
        let key = (gamma, alpha, beta, mu, nu);
        let slot = self.coeffs.entry(key).or_default();
        *slot += e;
        if slot.is_zero() {
            self.coeffs.remove(&key);
        }
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&BiKey, &Expr)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, key: &BiKey) -> Expr {
        self.coeffs.get(key).cloned().unwrap_or_default()
    }

    pub fn map_coeffs(&self, mut g: impl FnMut(&Expr) -> Expr) -> Self {
        let mut o = BiDiffOp::zero(self.n);
        for ((c, a, b, mu, nu), e) in &self.coeffs {
            o.add_coeff(*c, *a, *b, *mu, *nu, g(e));
        }
        o
    }

    pub fn apply(&self, f1: &[Expr], f2: &[Expr]) -> Vec<Expr> {
        let mut c1: BTreeMap<usize, Derivatives> = BTreeMap::new();
        let mut c2: BTreeMap<usize, Derivatives> = BTreeMap::new();
        let mut out = vec![Expr::zero(); self.n];
        for ((gamma, alpha, beta, mu, nu), c) in &self.coeffs {
            let (Some(a), Some(b)) = (f1.get(*alpha), f2.get(*beta)) else {
                continue;
            };
            if a.is_zero() || b.is_zero() {
                continue;
            }
            let da = c1.entry(*alpha).or_insert_with(|| Derivatives::new(a.clone())).get(mu);
            let db = c2.entry(*beta).or_insert_with(|| Derivatives::new(b.clone())).get(nu);
            out[*gamma] += &(c * &da) * &db;
        }
        out
    }

    /// C^{γ(μ)(ν)}_{αβ} = −C^{γ(ν)(μ)}_{βα}, i.e. C(f1,f2) = −C(f2,f1) on even
    /// arguments.
    pub fn is_skew(&self) -> bool {
        self.coeffs.iter().all(|((g, a, b, mu, nu), c)| {
            let partner = self.coeff(&(*g, *b, *a, *nu, *mu));
            (c + &partner).is_zero()
        })
    }

    pub fn order(&self) -> usize {
        self.coeffs
            .keys()
            .map(|(_, _, _, m, n)| m.len().max(n.len()))
            .max()
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::d;
    use crate::kernel::int;

    fn q(jet: &[usize]) -> Expr {
        Expr::jet(Var::field(0), MultiIndex::from_entries(jet))
    }

    fn dt(n: usize) -> TotalDiffOp {
        let mut o = TotalDiffOp::zero(IndexRange::fields(1), IndexRange::fields(1));
        o.add_coeff(0, 0, MultiIndex::from_entries(&vec![0; n]), Expr::one());
        o
    }

    fn mult(e: Expr) -> TotalDiffOp {
        let mut o = TotalDiffOp::zero(IndexRange::fields(1), IndexRange::fields(1));
        o.add_coeff(0, 0, MultiIndex::empty(), e);
        o
    }

    #[test]
    fn apply_examples() {
        assert_eq!(dt(1).apply(&[q(&[])]), vec![q(&[0])]);
        assert_eq!(
            TotalDiffOp::identity(IndexRange::fields(1)).apply(&[q(&[0])]),
            vec![q(&[0])]
        );
        let mut o = TotalDiffOp::zero(IndexRange::fields(1), IndexRange::fields(1));
        o.add_coeff(0, 0, MultiIndex::single(0), q(&[]));
        assert_eq!(o.apply(&[q(&[])]), vec![&q(&[]) * &q(&[0])]);
    }

    #[test]
    fn compose_examples() {
        assert_eq!(dt(1).compose(&dt(1)).unwrap(), dt(2));
        let mut qdt = TotalDiffOp::zero(IndexRange::fields(1), IndexRange::fields(1));
        qdt.add_coeff(0, 0, MultiIndex::single(0), q(&[]));
        assert_eq!(mult(q(&[])).compose(&dt(1)).unwrap(), qdt);
        let expected = mult(q(&[0])).add(&qdt).unwrap();
        assert_eq!(dt(1).compose(&mult(q(&[]))).unwrap(), expected);
        let scalar = TotalDiffOp::scalar(Expr::one(), MultiIndex::empty());
        assert!(matches!(dt(1).compose(&scalar), Err(DiffOpError::IndexMismatch { .. })));
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(dt(1).adjoint(), dt(1).scale(&int(-1)));
        assert_eq!(mult(q(&[])).adjoint(), mult(q(&[])));
        let mut o = TotalDiffOp::zero(IndexRange::fields(1), IndexRange::fields(1));
        o.add_coeff(0, 0, MultiIndex::from_entries(&[0, 0]), &q(&[]) * &q(&[0]));
        assert_eq!(o.adjoint().adjoint(), o);
    }

    #[test]
    fn frechet_examples() {
        assert_eq!(
            frechet(&[q(&[])], IndexLabel::Field, 1),
            TotalDiffOp::identity(IndexRange::fields(1))
        );
        assert_eq!(frechet(&[-q(&[0, 0])], IndexLabel::Field, 1), dt(2).scale(&int(-1)));
        assert_eq!(
            frechet(&[q(&[]).pow(2)], IndexLabel::Field, 1),
            mult(q(&[]).scale(&int(2)))
        );
    }

    fn row(entries: &[(MultiIndex, Expr)]) -> TotalDiffOp {
        let mut o = TotalDiffOp::zero(IndexRange::SCALAR, IndexRange::fields(1));
        for (m, e) in entries {
            o.add_coeff(0, 0, *m, e.clone());
        }
        o
    }

    #[test]
    fn operator_frechet_examples() {
        let constant = row(&[(MultiIndex::single(0), Expr::int(3))]);
        assert!(frechet_of_operator(&constant, 1).unwrap().is_zero());
        let qrow = row(&[(MultiIndex::empty(), q(&[]))]);
        assert_eq!(
            frechet_of_operator(&qrow, 1).unwrap(),
            TotalDiffOp::identity(IndexRange::fields(1))
        );
        let qdt = row(&[(MultiIndex::single(0), q(&[]))]);
        assert_eq!(frechet_of_operator(&qdt, 1).unwrap(), dt(1));
    }

    #[test]
    fn helmholtz_examples() {
        assert!(helmholtz_check(&[-q(&[0, 0])]));
        assert!(!helmholtz_check(&[q(&[0])]));
        assert!(helmholtz_check(&[q(&[])]));
    }

    #[test]
    fn noether_examples() {
        let e = vec![-q(&[0, 0])];
        assert!(!is_noether(&row(&[(MultiIndex::empty(), Expr::one())]), &e));
        assert!(is_noether(
            &TotalDiffOp::zero(IndexRange::SCALAR, IndexRange::fields(1)),
            &e
        ));
        // (∂E)·1 − E ∂_t annihilates E
        let et = d(&e[0], 0);
        let trivial = row(&[(MultiIndex::empty(), et), (MultiIndex::single(0), -e[0].clone())]);
        assert!(is_noether(&trivial, &e));
    }

    #[test]
    fn rho_examples() {
        let g = q(&[0]);
        assert_eq!(
            rho(&row(&[(MultiIndex::empty(), g.clone())]))
                .unwrap()
                .get(&Var::field(0)),
            g
        );
        assert!(rho(&row(&[])).unwrap().is_zero());
        let eps = Expr::coordinate(0).pow(2);
        let n = row(&[(MultiIndex::single(0), eps.clone())]);
        assert_eq!(rho(&n).unwrap().get(&Var::field(0)), -d(&eps, 0));
    }

    #[test]
    fn module_action_of_zero_and_shift() {
        let n = row(&[(MultiIndex::single(0), Expr::one())]);
        let zero = module_action(&EvolutionaryField::zero(), &n, 1).unwrap();
        assert!(zero.is_zero());
        let shift = EvolutionaryField::on_fields(vec![Expr::one()]);
        assert!(module_action(&shift, &n, 1).unwrap().is_zero());
    }

    #[test]
    fn frechet_adjoint_matches_rho_on_trivial_identity() {
        let e = -q(&[0, 0]);
        let n = row(&[(MultiIndex::empty(), d(&e, 0)), (MultiIndex::single(0), -e.clone())]);
        let r = rho(&n).unwrap();
        let lhs = frechet_of_field(&r, 1).adjoint();
        let rhs = frechet_adjoint_of_operator(&n, 1).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(lhs, dt(3).scale(&int(2)));
    }

    #[test]
    fn bidiff_skew() {
        let mut c = BiDiffOp::zero(2);
        c.add_coeff(0, 0, 1, MultiIndex::empty(), MultiIndex::single(0), Expr::one());
        assert!(!c.is_skew());
        c.add_coeff(0, 1, 0, MultiIndex::single(0), MultiIndex::empty(), Expr::int(-1));
        assert!(c.is_skew());
        let t = Expr::coordinate(0);
        let f1 = vec![t.clone(), Expr::one()];
        let f2 = vec![Expr::one(), t.pow(2)];
        let a = c.apply(&f1, &f2);
        let b = c.apply(&f2, &f1);
        assert_eq!(a[0], -b[0].clone());
    }
}
