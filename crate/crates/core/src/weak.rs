//! Membership in the differential ideal generated by the equations of
//! motion, with explicit certificates.
//!
//! A certificate is a finite family k^{a(μ)} with f = Σ k^{a(μ)} ∂_(μ)E_a.
//! The search enumerates polynomial ansatz monomials for every k^{a(μ)} and
//! solves the resulting exact linear system. Columns are pruned with every
//! additive grading under which all equations are homogeneous, which is
//! sound: components of other gradings can be cancelled by zero
//! coefficients.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::Zero;

use crate::diffop::TotalDiffOp;
use crate::jet::{multi_total_derivative, Derivatives};
use crate::kernel::{Coeff, Expr, Factor, Generator, Kind, Monomial, MultiIndex, MAX_DIM};
use crate::linsolve::{Echelon, SparseRow};

/// Bounds of the certificate search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AnsatzConfig {
    /// Highest derivative order of the equations in a certificate.
    pub max_jet_order: usize,
    /// Polynomial degree of coefficients in jet variables.
    pub max_coeff_degree: usize,
    /// Highest jet order of variables inside coefficients.
    pub max_coeff_jet_order: usize,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        AnsatzConfig {
            max_jet_order: 2,
            max_coeff_degree: 2,
            max_coeff_jet_order: 2,
        }
    }
}

/// f = Σ k^{a(μ)} ∂_(μ)E_a.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WeakCertificate {
    pub k: BTreeMap<(usize, MultiIndex), Expr>,
}

impl WeakCertificate {
    pub fn is_trivial(&self) -> bool {
        self.k.is_empty()
    }

    fn insert(&mut self, a: usize, mi: MultiIndex, e: Expr) {
        if e.is_zero() {
            return;
        }
        let slot = self.k.entry((a, mi)).or_default();
        *slot += e;
        if slot.is_zero() {
            self.k.remove(&(a, mi));
        }
    }

    pub fn reconstruct(&self, e: &[Expr]) -> Expr {
        let mut out = Expr::zero();
        for ((a, mi), k) in &self.k {
            out += k * &multi_total_derivative(&e[*a], mi);
        }
        out
    }

    /// Certificate for f + g.
    pub fn add(&self, other: &WeakCertificate) -> WeakCertificate {
        let mut out = self.clone();
        for ((a, mi), k) in &other.k {
            out.insert(*a, *mi, k.clone());
        }
        out
    }

    /// Certificate for h·f.
    pub fn times(&self, h: &Expr) -> WeakCertificate {
        let mut out = WeakCertificate::default();
        for ((a, mi), k) in &self.k {
            out.insert(*a, *mi, h * k);
        }
        out
    }

    /// Certificate for ∂_ν f, by the Leibniz rule.
    pub fn differentiate(&self, nu: usize) -> WeakCertificate {
        let mut out = WeakCertificate::default();
        for ((a, mi), k) in &self.k {
            out.insert(*a, *mi, crate::jet::d(k, nu));
            out.insert(*a, mi.raised(nu), k.clone());
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeakResult {
    Certificate(WeakCertificate),
    /// No certificate within the search bounds; not a proof of non-membership.
    NotFound,
}

impl WeakResult {
    pub fn is_certified(&self) -> bool {
        matches!(self, WeakResult::Certificate(_))
    }

    pub fn certificate(&self) -> Option<&WeakCertificate> {
        match self {
            WeakResult::Certificate(c) => Some(c),
            WeakResult::NotFound => None,
        }
    }
}

/// Searches for a certificate of f ≈ 0. Any returned certificate has been
/// checked to reconstruct `f` exactly.
pub fn weakly_zero(f: &Expr, e: &[Expr], cfg: &AnsatzConfig) -> WeakResult {
    if f.is_zero() {
        return WeakResult::Certificate(WeakCertificate::default());
    }
    let e_has_x = e.iter().any(|ea| ea.contains_kind(|g| g.kind == Kind::Coordinate));
    let cert = if e_has_x {
        search(f, e, cfg, true)
    } else {
        // x-free equations: each coordinate monomial of f is handled apart
        let parts = f.split_by(|fs| {
            fs.iter()
                .filter(|(g, _)| g.kind == Kind::Coordinate)
                .copied()
                .collect::<Vec<_>>()
        });
        let mut total = WeakCertificate::default();
        for (xs, part) in parts {
            let x = Expr::from_monomials([Monomial::new(Coeff::from_integer(1.into()), xs.clone())]);
            let stripped = strip_coordinates(&part);
            match search(&stripped, e, cfg, false) {
                Some(c) => total = total.add(&c.times(&x)),
                None => return WeakResult::NotFound,
            }
        }
        Some(total)
    };
    match cert {
        Some(c) if c.reconstruct(e) == *f => WeakResult::Certificate(c),
        _ => WeakResult::NotFound,
    }
}

fn strip_coordinates(e: &Expr) -> Expr {
    Expr::from_monomials(e.terms().map(|(fs, c)| {
        Monomial::new(
            c.clone(),
            fs.iter().filter(|(g, _)| g.kind != Kind::Coordinate).copied().collect(),
        )
    }))
}

pub fn weakly_equal(f: &Expr, g: &Expr, e: &[Expr], cfg: &AnsatzConfig) -> WeakResult {
    weakly_zero(&(f - g), e, cfg)
}

/// Additive gradings of a factor list: per-coordinate (jet count −
/// coordinate exponent), weight Σ(order+1) − x-degree, jet degree, and the
/// number of jets of each variable kind.
const NG: usize = MAX_DIM + 6;
type GradeVec = [i64; NG];

fn grade(fs: &[Factor]) -> GradeVec {
    let mut v = [0i64; NG];
    for (g, e) in fs {
        let e = *e as i64;
        match g.kind {
            Kind::Coordinate => {
                v[g.base as usize] -= e;
                v[MAX_DIM] -= e;
            }
            Kind::BasisForm => {}
            k => {
                for (mu, slot) in v.iter_mut().take(MAX_DIM).enumerate() {
                    *slot += g.jet.count(mu) as i64 * e;
                }
                v[MAX_DIM] += (g.order() as i64 + 1) * e;
                v[MAX_DIM + 1] += e;
                let slot = match k {
                    Kind::FieldJet => 2,
                    Kind::GhostJet => 3,
                    Kind::FieldAntifieldJet => 4,
                    _ => 5,
                };
                v[MAX_DIM + slot] += e;
            }
        }
    }
    v
}

fn shift(mi: &MultiIndex) -> GradeVec {
    let mut v = [0i64; NG];
    for (mu, slot) in v.iter_mut().take(MAX_DIM).enumerate() {
        *slot = mi.count(mu) as i64;
    }
    v[MAX_DIM] = mi.len() as i64;
    v
}

fn masked(v: &GradeVec, mask: &[bool; NG]) -> GradeVec {
    let mut out = *v;
    for (slot, keep) in out.iter_mut().zip(mask) {
        if !keep {
            *slot = 0;
        }
    }
    out
}

fn add(a: &GradeVec, b: &GradeVec) -> GradeVec {
    let mut out = *a;
    for (x, y) in out.iter_mut().zip(b) {
        *x += y;
    }
    out
}

fn sub(a: &GradeVec, b: &GradeVec) -> GradeVec {
    let mut out = *a;
    for (x, y) in out.iter_mut().zip(b) {
        *x -= y;
    }
    out
}

/// All canonical monomials of degree ≤ `max_degree` over `pool`.
fn monomials(pool: &[Generator], max_degree: usize) -> Vec<Vec<Factor>> {
    let mut out: Vec<Vec<Factor>> = vec![Vec::new()];
    let mut frontier: Vec<(usize, Vec<Factor>)> = vec![(0, Vec::new())];
    for _ in 0..max_degree {
        let mut next = Vec::new();
        for (start, fs) in &frontier {
            for (i, g) in pool.iter().enumerate().skip(*start) {
                let mut m = fs.clone();
                match m.last_mut() {
                    Some(last) if last.0 == *g => {
                        if g.is_odd() {
                            continue;
                        }
                        last.1 += 1;
                    }
                    _ => m.push((*g, 1)),
                }
                next.push((i, m));
            }
        }
        out.extend(next.iter().map(|(_, m)| m.clone()));
        frontier = next;
    }
    out
}

fn search(f: &Expr, e: &[Expr], cfg: &AnsatzConfig, with_coordinates: bool) -> Option<WeakCertificate> {
    let dim = e
        .iter()
        .chain(std::iter::once(f))
        .flat_map(|x| x.generators())
        .map(|g| match g.kind {
            Kind::Coordinate | Kind::BasisForm => g.base as usize + 1,
            _ => g.jet.max_entry().map_or(0, |m| m + 1),
        })
        .max()
        .unwrap_or(1)
        .max(1);

    // gradings in which every equation is homogeneous
    let mut mask = [true; NG];
    let mut e_grade: Vec<Option<GradeVec>> = Vec::with_capacity(e.len());
    for ea in e {
        let grades: Vec<GradeVec> = ea.terms().map(|(fs, _)| grade(fs)).collect();
        if let Some(g0) = grades.first() {
            for g in &grades[1..] {
                for i in 0..NG {
                    if g[i] != g0[i] {
                        mask[i] = false;
                    }
                }
            }
        }
        e_grade.push(grades.first().copied());
    }
    let targets: BTreeSet<GradeVec> = f.terms().map(|(fs, _)| masked(&grade(fs), &mask)).collect();

    let mut vars: BTreeSet<crate::kernel::Var> = f.vars();
    for ea in e {
        vars.extend(ea.vars());
    }
    let mut pool: Vec<Generator> = Vec::new();
    if with_coordinates {
        pool.extend((0..dim).map(Generator::coordinate));
    }
    for v in &vars {
        for mi in MultiIndex::all_up_to(dim, cfg.max_coeff_jet_order) {
            pool.push(v.jet(mi));
        }
    }
    pool.sort();
    let mut buckets: HashMap<GradeVec, Vec<Vec<Factor>>> = HashMap::new();
    for m in monomials(&pool, cfg.max_coeff_degree) {
        buckets.entry(masked(&grade(&m), &mask)).or_default().push(m);
    }

    let mut columns: Vec<(usize, MultiIndex, Vec<Factor>)> = Vec::new();
    let mut images: Vec<Expr> = Vec::new();
    for (a, ea) in e.iter().enumerate() {
        let Some(ga) = e_grade[a] else { continue };
        let mut cache = Derivatives::new(ea.clone());
        for mi in MultiIndex::all_up_to(dim, cfg.max_jet_order) {
            let base = masked(&add(&ga, &shift(&mi)), &mask);
            let mut de: Option<Expr> = None;
            for t in &targets {
                let need = masked(&sub(t, &base), &mask);
                let Some(ms) = buckets.get(&need) else { continue };
                let de = de.get_or_insert_with(|| cache.get(&mi));
                for m in ms {
                    let mexpr = Expr::from_monomials([Monomial::new(Coeff::from_integer(1.into()), m.clone())]);
                    let img = &mexpr * de;
                    if img.is_zero() {
                        continue;
                    }
                    columns.push((a, mi, m.clone()));
                    images.push(img);
                }
            }
        }
    }

    let mut rows: BTreeMap<&Vec<Factor>, SparseRow> = BTreeMap::new();
    for (col, img) in images.iter().enumerate() {
        for (fs, c) in img.terms() {
            rows.entry(fs).or_default().entries.insert(col, c.clone());
        }
    }
    for (fs, c) in f.terms() {
        rows.entry(fs).or_default().rhs = c.clone();
    }
    let mut ech = Echelon::new();
    for row in rows.into_values() {
        if !ech.push(row) {
            return None;
        }
    }
    let x = ech.solve(columns.len())?;
    let mut cert = WeakCertificate::default();
    for ((a, mi, m), c) in columns.into_iter().zip(x) {
        if !c.is_zero() {
            cert.insert(a, mi, Expr::from_monomials([Monomial::new(c, m)]));
        }
    }
    Some(cert)
}

/// Per-coefficient certificates of an operator.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OperatorCertificate {
    pub entries: BTreeMap<(usize, usize, MultiIndex), WeakCertificate>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OperatorResult {
    Certificate(OperatorCertificate),
    /// The first coefficient without a certificate.
    NotFound {
        entry: (usize, usize, MultiIndex),
    },
}

impl OperatorResult {
    pub fn is_certified(&self) -> bool {
        matches!(self, OperatorResult::Certificate(_))
    }
}

/// Coefficientwise weak vanishing of an operator.
pub fn weakly_zero_coefficients(o: &TotalDiffOp, e: &[Expr], cfg: &AnsatzConfig) -> OperatorResult {
    let mut out = OperatorCertificate::default();
    for (key, c) in o.coeffs() {
        match weakly_zero(c, e, cfg) {
            WeakResult::Certificate(k) => {
                out.entries.insert(*key, k);
            }
            WeakResult::NotFound => return OperatorResult::NotFound { entry: *key },
        }
    }
    OperatorResult::Certificate(out)
}

/// Both sides of the irreducibility statement for a candidate Z: weak
/// vanishing of Z∘R† and of Z itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorWeakReport {
    pub composition: OperatorResult,
    pub operator: OperatorResult,
}

pub fn weakly_zero_operator(
    z: &TotalDiffOp,
    r_adjoint: &TotalDiffOp,
    e: &[Expr],
    cfg: &AnsatzConfig,
) -> Result<OperatorWeakReport, crate::diffop::DiffOpError> {
    let composed = z.compose(r_adjoint)?;
    Ok(OperatorWeakReport {
        composition: weakly_zero_coefficients(&composed, e, cfg),
        operator: weakly_zero_coefficients(z, e, cfg),
    })
}

/// Value of `f` on an explicit configuration φ^i = sol[i](x).
pub fn evaluate_on_solution(f: &Expr, sol: &[Expr]) -> Expr {
    let mut map = HashMap::new();
    for g in f.generators() {
        if g.kind == Kind::FieldJet {
            let s = sol.get(g.base as usize).cloned().unwrap_or_default();
            map.insert(g, multi_total_derivative(&s, &g.jet));
        }
    }
    f.substitute_unchecked(&map)
}

/// `Some(value)` when `f` is nonzero on a configuration that solves the
/// equations, which disproves weak vanishing.
pub fn refute_on_solution(f: &Expr, e: &[Expr], sol: &[Expr]) -> Option<Expr> {
    if !e.iter().all(|ea| evaluate_on_solution(ea, sol).is_zero()) {
        return None;
    }
    let v = evaluate_on_solution(f, sol);
    (!v.is_zero()).then_some(v)
}
