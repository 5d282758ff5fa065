//! Symmetries, the gauge algebroid and conserved currents.
//!
//! Conventions: the anchor sends a gauge parameter f to the evolutionary
//! field R_f = R^i_α(f^α), and the structure operators are normalised so
//! that [R_{f1}, R_{f2}] = R_{[f1,f2]_A} with
//! [f1,f2]_A = C(f1,f2) + δ_{f1}f2 − δ_{f2}f1.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::diffop::frechet_of_field;
use crate::jet::{d, divergence_normal_form, is_null_lagrangian, EvolutionaryField};
use crate::kernel::{Expr, Kind, MultiIndex, Parity, Var};
use crate::theory::{Theory, TheoryError};
use crate::weak::{refute_on_solution, weakly_zero, AnsatzConfig, WeakCertificate, WeakResult};

/// A gauge parameter: one local function per gauge parameter index.
pub type GaugeParameter = Vec<Expr>;

/// Value of an expression on a named solution that disproves weak vanishing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refutation {
    pub solution: String,
    pub value: Expr,
}

/// Outcome of checking that a family of expressions vanishes weakly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeakVerdict {
    IdenticallyZero,
    Certified(Vec<WeakCertificate>),
    NotCertified {
        component: usize,
        residual: Expr,
        refutation: Option<Refutation>,
    },
}

impl WeakVerdict {
    pub fn holds(&self) -> bool {
        !matches!(self, WeakVerdict::NotCertified { .. })
    }

    pub fn is_identically_zero(&self) -> bool {
        matches!(self, WeakVerdict::IdenticallyZero)
    }
}

/// Checks every component for weak vanishing. A component that is nonzero
/// on a named solution cannot vanish weakly, so solutions are tried before
/// the certificate search.
pub fn weak_verdict(theory: &Theory, components: &[Expr], cfg: &AnsatzConfig) -> WeakVerdict {
    if components.iter().all(Expr::is_zero) {
        return WeakVerdict::IdenticallyZero;
    }
    let e = theory.equations_of_motion();
    let refute = |c: &Expr| {
        theory.solutions.iter().find_map(|s| {
            refute_on_solution(c, e, &s.values).map(|value| Refutation {
                solution: s.name.clone(),
                value,
            })
        })
    };
    for (i, c) in components.iter().enumerate() {
        if let Some(r) = refute(c) {
            return WeakVerdict::NotCertified {
                component: i,
                residual: c.clone(),
                refutation: Some(r),
            };
        }
    }
    let mut certs = Vec::with_capacity(components.len());
    for (i, c) in components.iter().enumerate() {
        match weakly_zero(c, e, cfg) {
            WeakResult::Certificate(k) => certs.push(k),
            WeakResult::NotFound => {
                return WeakVerdict::NotCertified {
                    component: i,
                    residual: c.clone(),
                    refutation: None,
                };
            }
        }
    }
    WeakVerdict::Certified(certs)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VariationalVerdict {
    /// δ_Q L = ∂_μ k^μ with the given k.
    Witness(Vec<Expr>),
    /// δ_Q L has a nonvanishing Euler–Lagrange derivative.
    No,
    /// δ_Q L is a null Lagrangian but no explicit k was found.
    NotDivergence,
}

/// Decides δ_Q L ≃ 0 through the divergence normal form, and cross-checks
/// against δ_Q E_j + (D_Q^i_j)†[E_i] = 0.
pub fn is_variational_symmetry(theory: &Theory, q: &EvolutionaryField) -> Result<VariationalVerdict, TheoryError> {
    check_field_only(q)?;
    let n = theory.n_fields();
    let e = theory.equations_of_motion();
    let dql = q.prolong(&theory.lagrangian);
    let nf = divergence_normal_form(&dql, theory.dim());
    let by_divergence = is_null_lagrangian(&nf.core);

    let adj = frechet_of_field(q, n).adjoint().apply(e);
    let by_equations = e.iter().zip(&adj).all(|(ej, aj)| (&q.prolong(ej) + aj).is_zero());
    if by_divergence != by_equations {
        return Err(TheoryError::InternalConsistency(
            "divergence test and equation-of-motion test disagree on a variational symmetry".into(),
        ));
    }
    Ok(if !by_divergence {
        VariationalVerdict::No
    } else if nf.core.is_zero() {
        VariationalVerdict::Witness(nf.witness)
    } else {
        VariationalVerdict::NotDivergence
    })
}

fn check_field_only(q: &EvolutionaryField) -> Result<(), TheoryError> {
    if q.characteristics.keys().any(|v| v.kind != Kind::FieldJet) {
        return Err(TheoryError::InternalConsistency(
            "symmetry must act on physical fields only".into(),
        ));
    }
    Ok(())
}

/// δ_Q E_a ≈ 0 for every equation.
pub fn is_eom_symmetry(theory: &Theory, q: &EvolutionaryField, cfg: &AnsatzConfig) -> WeakVerdict {
    let images: Vec<Expr> = theory.equations_of_motion().iter().map(|e| q.prolong(e)).collect();
    weak_verdict(theory, &images, cfg)
}

/// [Q1,Q2]^v = δ_{Q1}Q2^v − (−1)^{|Q1||Q2|} δ_{Q2}Q1^v.
pub fn ev_bracket(q1: &EvolutionaryField, q2: &EvolutionaryField) -> EvolutionaryField {
    let p1 = q1.parity().unwrap_or(Parity::Even);
    let p2 = q2.parity().unwrap_or(Parity::Even);
    let sign_flip = p1.is_odd() && p2.is_odd();
    let mut keys: Vec<Var> = q1.characteristics.keys().copied().collect();
    keys.extend(q2.characteristics.keys().copied());
    keys.sort();
    keys.dedup();
    let mut out = BTreeMap::new();
    for v in keys {
        let a = q1.prolong(&q2.get(&v));
        let b = q2.prolong(&q1.get(&v));
        out.insert(v, if sign_flip { &a + &b } else { &a - &b });
    }
    EvolutionaryField::new(out)
}

/// a(f) = R_f with R_f^i = R^i_α(f^α).
pub fn anchor(theory: &Theory, f: &[Expr]) -> EvolutionaryField {
    EvolutionaryField::on_fields(theory.generators.apply(f))
}

/// [f1,f2]_A = C(f1,f2) + δ_{f1}f2 − δ_{f2}f1.
pub fn algebroid_bracket(theory: &Theory, f1: &[Expr], f2: &[Expr]) -> Result<GaugeParameter, TheoryError> {
    let c = theory.require_structure()?;
    let q1 = anchor(theory, f1);
    let q2 = anchor(theory, f2);
    let mut out = c.apply(f1, f2);
    for (gamma, slot) in out.iter_mut().enumerate() {
        let a = f2.get(gamma).map(|x| q1.prolong(x)).unwrap_or_default();
        let b = f1.get(gamma).map(|x| q2.prolong(x)).unwrap_or_default();
        *slot += &a - &b;
    }
    Ok(out)
}

/// [R_{f1}, R_{f2}] − R_{[f1,f2]_A}, one component per field.
pub fn closure_residual(theory: &Theory, f1: &[Expr], f2: &[Expr]) -> Result<Vec<Expr>, TheoryError> {
    let lhs = ev_bracket(&anchor(theory, f1), &anchor(theory, f2));
    let rhs = anchor(theory, &algebroid_bracket(theory, f1, f2)?);
    Ok((0..theory.n_fields())
        .map(|i| &lhs.get(&Var::field(i)) - &rhs.get(&Var::field(i)))
        .collect())
}

/// Test parameters: for each gauge parameter slot, the constants, the
/// coordinates and their pairwise products, and single field jets up to the
/// configured order.
pub fn test_parameter_basis(theory: &Theory, cfg: &AnsatzConfig) -> Vec<GaugeParameter> {
    let dim = theory.dim();
    let mut scalars = vec![Expr::one()];
    for mu in 0..dim {
        scalars.push(Expr::coordinate(mu));
    }
    for mu in 0..dim {
        for nu in mu..dim {
            scalars.push(&Expr::coordinate(mu) * &Expr::coordinate(nu));
        }
    }
    for i in 0..theory.n_fields() {
        for mi in MultiIndex::all_up_to(dim, cfg.max_coeff_jet_order) {
            scalars.push(Expr::jet(Var::field(i), mi));
        }
    }
    let m = theory.n_params();
    let mut out = Vec::new();
    for alpha in 0..m {
        for s in &scalars {
            let mut f = vec![Expr::zero(); m];
            f[alpha] = s.clone();
            out.push(f);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureReport {
    pub basis: Vec<GaugeParameter>,
    /// Verdicts in pair order, up to and including the first failure.
    pub pairs: Vec<((usize, usize), WeakVerdict)>,
}

impl ClosureReport {
    pub fn holds(&self) -> bool {
        self.pairs.iter().all(|(_, v)| v.holds())
    }

    pub fn identically_zero(&self) -> bool {
        self.pairs.iter().all(|(_, v)| v.is_identically_zero())
    }

    pub fn first_failure(&self) -> Option<&((usize, usize), WeakVerdict)> {
        self.pairs.iter().find(|(_, v)| !v.holds())
    }
}

const CLOSURE_CHUNK: usize = 64;

/// Verifies [R_{f1}, R_{f2}] ≈ R_{[f1,f2]_A} on all unordered pairs of
/// distinct test parameters. Pairs are checked in parallel chunks and the
/// scan stops after the chunk holding the first failure.
pub fn closure_check(theory: &Theory, cfg: &AnsatzConfig) -> Result<ClosureReport, TheoryError> {
    theory.require_structure()?;
    let basis = test_parameter_basis(theory, cfg);
    let pairs: Vec<(usize, usize)> = (0..basis.len())
        .flat_map(|i| (i + 1..basis.len()).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::with_capacity(pairs.len());
    for chunk in pairs.chunks(CLOSURE_CHUNK) {
        let results: Result<Vec<_>, TheoryError> = chunk
            .par_iter()
            .map(|&(i, j)| {
                let residual = closure_residual(theory, &basis[i], &basis[j])?;
                Ok(((i, j), weak_verdict(theory, &residual, cfg)))
            })
            .collect();
        let results = results?;
        if let Some(k) = results.iter().position(|(_, v)| !v.holds()) {
            out.extend(results.into_iter().take(k + 1));
            break;
        }
        out.extend(results);
    }
    Ok(ClosureReport { basis, pairs: out })
}

/// Cyclic sum [f1,[f2,f3]] + [f2,[f3,f1]] + [f3,[f1,f2]] and the weak
/// vanishing of its image under the anchor.
pub fn jacobi_check_a(
    theory: &Theory,
    f1: &[Expr],
    f2: &[Expr],
    f3: &[Expr],
    cfg: &AnsatzConfig,
) -> Result<WeakVerdict, TheoryError> {
    let br = |a: &[Expr], b: &[Expr]| algebroid_bracket(theory, a, b);
    let mut sum = vec![Expr::zero(); theory.n_params()];
    for (a, b, c) in [(f1, f2, f3), (f2, f3, f1), (f3, f1, f2)] {
        let inner = br(b, c)?;
        for (s, t) in sum.iter_mut().zip(br(a, &inner)?) {
            *s += t;
        }
    }
    if sum.iter().all(Expr::is_zero) {
        return Ok(WeakVerdict::IdenticallyZero);
    }
    let image = anchor(theory, &sum).field_components(theory.n_fields());
    Ok(weak_verdict(theory, &image, cfg))
}

/// Reducibility parameter test: R^i_α(f^α) ≈ 0.
pub fn reducibility_check(theory: &Theory, f: &[Expr], cfg: &AnsatzConfig) -> WeakVerdict {
    let image = anchor(theory, f).field_components(theory.n_fields());
    weak_verdict(theory, &image, cfg)
}

/// ∂_μ j^μ ≈ 0.
pub fn conserved_current_check(theory: &Theory, j: &[Expr], cfg: &AnsatzConfig) -> WeakVerdict {
    let mut div = Expr::zero();
    for (mu, jm) in j.iter().enumerate() {
        div += d(jm, mu);
    }
    weak_verdict(theory, &[div], cfg)
}

/// Representative −δ_{Q1} j2 of the bracket of two current classes.
pub fn current_bracket(q1: &EvolutionaryField, j2: &[Expr]) -> Vec<Expr> {
    j2.iter().map(|j| -q1.prolong(j)).collect()
}

/// Sufficient test for a trivial current class: every component vanishes
/// weakly. In one dimension this is also necessary up to constants.
pub fn current_is_trivial(theory: &Theory, j: &[Expr], cfg: &AnsatzConfig) -> WeakVerdict {
    weak_verdict(theory, j, cfg)
}
