//! The antifield layer: Koszul–Tate and longitudinal differentials, the
//! antibracket and the master equation for closed gauge algebras.
//!
//! Conventions. With z = (φ, C) and z* = (φ*, C*), the antibracket integrand
//! is (A,B) = δ^R A/δz δ^L B/δz* − δ^R A/δz* δ^L B/δz, and the vector field
//! of a functional A has characteristics z* ↦ δ^R A/δz, z ↦ −δ^R A/δz*, so
//! that applying it to b agrees with (A, b) up to a total divergence.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::jet::{divergence_normal_form, euler_lagrange_unchecked, is_null_lagrangian, EvolutionaryField};
use crate::kernel::{rat, total_ghost_of, Expr, Grading, Side, Var};
use crate::theory::{Theory, TheoryError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BvError {
    #[error("theory has no structure operators")]
    MissingStructure,
    #[error("quadratic master action does not satisfy the master equation; higher-order terms are needed")]
    NeedsHigherOrder { residual: Expr },
    #[error("master equation fails; run the master check first")]
    MasterEquationFails { residual: Expr },
    #[error("functional is not BRST-closed: (S, S1) is not a total divergence")]
    NotCocycle,
    #[error(transparent)]
    Theory(#[from] TheoryError),
}

/// A theory together with its ghosts and antifields.
#[derive(Clone, Debug)]
pub struct ExtendedTheory {
    pub base: Theory,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MasterCheck {
    Zero,
    /// Reduced integrand of ½(S,S).
    Residual(Expr),
}

impl MasterCheck {
    pub fn is_zero(&self) -> bool {
        matches!(self, MasterCheck::Zero)
    }
}

/// Residuals of the nilpotency identities on one undifferentiated generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorResiduals {
    pub generator: Var,
    pub delta_squared: Expr,
    pub gamma_squared: Expr,
    pub anticommutator: Expr,
}

impl GeneratorResiduals {
    pub fn all_zero(&self) -> bool {
        self.delta_squared.is_zero() && self.gamma_squared.is_zero() && self.anticommutator.is_zero()
    }
}

fn var_expr(vars: &[Var]) -> Vec<Expr> {
    vars.iter().map(|v| Expr::var(*v)).collect()
}

impl ExtendedTheory {
    pub fn new(base: Theory) -> Self {
        ExtendedTheory { base }
    }

    fn fields(&self) -> Vec<Var> {
        self.base.schema.field_vars()
    }

    fn ghosts(&self) -> Vec<Var> {
        self.base.schema.ghost_vars()
    }

    fn field_antifields(&self) -> Vec<Var> {
        (0..self.base.n_fields()).map(Var::field_antifield).collect()
    }

    fn ghost_antifields(&self) -> Vec<Var> {
        (0..self.base.n_params()).map(Var::ghost_antifield).collect()
    }

    /// All undifferentiated generators: φ, C, φ*, C*.
    pub fn generators(&self) -> Vec<Var> {
        self.base.schema.extended_vars()
    }

    /// R^i_α(C^α).
    fn gauge_of_ghosts(&self) -> Vec<Expr> {
        self.base.generators.apply(&var_expr(&self.ghosts()))
    }

    /// φ*_i R^i_α(C^α).
    fn antifield_gauge_term(&self) -> Expr {
        self.field_antifields()
            .iter()
            .zip(self.gauge_of_ghosts())
            .map(|(a, r)| &Expr::var(*a) * &r)
            .sum()
    }

    /// ½ C*_γ C^γ(C, C).
    fn structure_term(&self) -> Result<Expr, BvError> {
        let c = self.base.structure.as_ref().ok_or(BvError::MissingStructure)?;
        let ghosts = var_expr(&self.ghosts());
        let ccc = c.apply(&ghosts, &ghosts);
        Ok(self
            .ghost_antifields()
            .iter()
            .zip(ccc)
            .map(|(a, x)| (&Expr::var(*a) * &x).scale(&rat(1, 2)))
            .sum())
    }

    /// The Koszul–Tate differential as an evolutionary field:
    /// φ*_a ↦ E_a, C*_α ↦ R^{†a}_α[φ*_a].
    pub fn koszul_tate_field(&self) -> EvolutionaryField {
        let mut chars = BTreeMap::new();
        for (a, e) in self.field_antifields().into_iter().zip(self.base.equations_of_motion()) {
            chars.insert(a, e.clone());
        }
        let rt = self.base.noether_operators().apply(&var_expr(&self.field_antifields()));
        for (c, r) in self.ghost_antifields().into_iter().zip(rt) {
            chars.insert(c, r);
        }
        EvolutionaryField::new(chars)
    }

    pub fn koszul_tate(&self, e: &Expr) -> Expr {
        self.koszul_tate_field().prolong(e)
    }

    /// The longitudinal differential: φ ↦ R(C), C ↦ −½C(C,C), and on
    /// antifields the resolution-degree-preserving part of the BRST
    /// differential, φ*_i ↦ δ^R(φ*R(C))/δφ^i, C*_α ↦ δ^R(½C*C(C,C))/δC^α.
    pub fn longitudinal_field(&self) -> Result<EvolutionaryField, BvError> {
        let c = self.base.structure.as_ref().ok_or(BvError::MissingStructure)?;
        let ghosts = var_expr(&self.ghosts());
        let mut chars = BTreeMap::new();
        for (f, r) in self.fields().into_iter().zip(self.gauge_of_ghosts()) {
            chars.insert(f, r);
        }
        for (g, x) in self.ghosts().into_iter().zip(c.apply(&ghosts, &ghosts)) {
            chars.insert(g, x.scale(&rat(-1, 2)));
        }
        let gauge = self.antifield_gauge_term();
        for (a, f) in self.field_antifields().into_iter().zip(self.fields()) {
            chars.insert(a, euler_lagrange_unchecked(&gauge, f, Side::Right));
        }
        let st = self.structure_term()?;
        for (a, g) in self.ghost_antifields().into_iter().zip(self.ghosts()) {
            chars.insert(a, euler_lagrange_unchecked(&st, g, Side::Right));
        }
        Ok(EvolutionaryField::new(chars))
    }

    pub fn longitudinal(&self, e: &Expr) -> Result<Expr, BvError> {
        Ok(self.longitudinal_field()?.prolong(e))
    }

    /// δ², γ² and δγ + γδ on every generator.
    pub fn nilpotency_residuals(&self) -> Result<Vec<GeneratorResiduals>, BvError> {
        let delta = self.koszul_tate_field();
        let gamma = self.longitudinal_field()?;
        Ok(self
            .generators()
            .into_iter()
            .map(|v| {
                let g = Expr::var(v);
                let dg = delta.prolong(&g);
                let gg = gamma.prolong(&g);
                GeneratorResiduals {
                    generator: v,
                    delta_squared: delta.prolong(&dg),
                    gamma_squared: gamma.prolong(&gg),
                    anticommutator: &delta.prolong(&gg) + &gamma.prolong(&dg),
                }
            })
            .collect())
    }

    /// S = L + φ*_i R^i_α(C^α) + ½ C*_γ C^γ_{αβ}(C^α, C^β), unverified.
    pub fn assemble_master_action(&self) -> Result<Expr, BvError> {
        Ok(&(&self.base.lagrangian + &self.antifield_gauge_term()) + &self.structure_term()?)
    }

    /// The quadratic master action, returned only when it satisfies the
    /// master equation with field-independent structure operators.
    pub fn build_master_action(&self) -> Result<Expr, BvError> {
        let s = self.assemble_master_action()?;
        let structure = self.base.structure.as_ref().ok_or(BvError::MissingStructure)?;
        let field_free = structure.coeffs().all(|(_, c)| c.vars().is_empty());
        match self.check_master(&s) {
            MasterCheck::Zero if field_free => Ok(s),
            MasterCheck::Zero => Err(BvError::NeedsHigherOrder { residual: Expr::zero() }),
            MasterCheck::Residual(r) => Err(BvError::NeedsHigherOrder { residual: r }),
        }
    }

    fn conjugate_pairs(&self) -> Vec<(Var, Var)> {
        let mut out: Vec<(Var, Var)> = self.fields().into_iter().zip(self.field_antifields()).collect();
        out.extend(self.ghosts().into_iter().zip(self.ghost_antifields()));
        out
    }

    /// Integrand of (A, B).
    pub fn antibracket(&self, a: &Expr, b: &Expr) -> Expr {
        let mut out = Expr::zero();
        for (z, zs) in self.conjugate_pairs() {
            let ra_z = euler_lagrange_unchecked(a, z, Side::Right);
            if !ra_z.is_zero() {
                out += &ra_z * &euler_lagrange_unchecked(b, zs, Side::Left);
            }
            let ra_zs = euler_lagrange_unchecked(a, zs, Side::Right);
            if !ra_zs.is_zero() {
                out -= &ra_zs * &euler_lagrange_unchecked(b, z, Side::Left);
            }
        }
        out
    }

    /// The evolutionary field of a functional.
    pub fn functional_vf(&self, a: &Expr) -> EvolutionaryField {
        let mut chars = BTreeMap::new();
        for (z, zs) in self.conjugate_pairs() {
            chars.insert(zs, euler_lagrange_unchecked(a, z, Side::Right));
            chars.insert(z, -euler_lagrange_unchecked(a, zs, Side::Right));
        }
        EvolutionaryField::new(chars)
    }

    /// ½(S,S) tested against zero as a functional.
    pub fn check_master(&self, s: &Expr) -> MasterCheck {
        let half = self.antibracket(s, s).scale(&rat(1, 2));
        if is_null_lagrangian(&half) {
            MasterCheck::Zero
        } else {
            MasterCheck::Residual(divergence_normal_form(&half, self.base.dim()).core)
        }
    }

    /// The BRST differential s = (S, ·), available only when S solves the
    /// master equation.
    pub fn brst_field(&self, s: &Expr) -> Result<EvolutionaryField, BvError> {
        match self.check_master(s) {
            MasterCheck::Zero => Ok(self.functional_vf(s)),
            MasterCheck::Residual(residual) => Err(BvError::MasterEquationFails { residual }),
        }
    }

    pub fn brst(&self, s: &Expr, e: &Expr) -> Result<Expr, BvError> {
        Ok(self.brst_field(s)?.prolong(e))
    }

    /// For each generator, s g minus its δ and γ parts split by resolution
    /// degree. All zero for closed algebras.
    pub fn decomposition_residuals(&self, s: &Expr) -> Result<Vec<(Var, Expr, Expr, Expr)>, BvError> {
        let sf = self.brst_field(s)?;
        let delta = self.koszul_tate_field();
        let gamma = self.longitudinal_field()?;
        Ok(self
            .generators()
            .into_iter()
            .map(|v| {
                let g = Expr::var(v);
                let r = v.kind.resolution() as i64;
                let parts = sf
                    .prolong(&g)
                    .split_by(|f| Grading::of_factors(f).resolution as i64 - r);
                let get = |k: i64| parts.get(&k).cloned().unwrap_or_default();
                let higher: Expr = parts.iter().filter(|(k, _)| **k > 0).map(|(_, e)| e.clone()).sum();
                (v, &get(-1) - &delta.prolong(&g), &get(0) - &gamma.prolong(&g), higher)
            })
            .collect())
    }

    /// [(A, (S1, B))] after checking that S1 is BRST-closed as a functional.
    pub fn derived_bracket(&self, a: &Expr, b: &Expr, s1: &Expr) -> Result<Expr, BvError> {
        let s = self.assemble_master_action()?;
        if !is_null_lagrangian(&self.antibracket(&s, s1)) {
            return Err(BvError::NotCocycle);
        }
        let inner = self.antibracket(s1, b);
        let outer = self.antibracket(a, &inner);
        Ok(divergence_normal_form(&outer, self.base.dim()).core)
    }
}

/// Total ghost number of a homogeneous functional integrand.
pub fn ghost_number(e: &Expr) -> Option<i32> {
    total_ghost_of(e).ok().map(|(g, _)| g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffop::{IndexRange, TotalDiffOp};
    use crate::kernel::{MultiIndex, Schema, SpaceSpec};

    fn em2d() -> ExtendedTheory {
        let schema = Schema::new(
            SpaceSpec::new(vec!["t", "x"]).unwrap(),
            vec!["A0".into(), "A1".into()],
            vec!["eps".into()],
        );
        let a = |i: usize, mu: usize| Expr::jet(Var::field(i), MultiIndex::single(mu));
        let f = &a(1, 0) - &a(0, 1);
        let l = (&f * &f).scale(&rat(-1, 2));
        let mut r = TotalDiffOp::zero(IndexRange::fields(2), IndexRange::params(1));
        r.add_coeff(0, 0, MultiIndex::single(0), Expr::one());
        r.add_coeff(1, 0, MultiIndex::single(1), Expr::one());
        let t = Theory::new(schema, l, r, Some(crate::diffop::BiDiffOp::zero(1)), vec![]).unwrap();
        ExtendedTheory::new(t)
    }

    fn mechanics() -> ExtendedTheory {
        let schema = Schema::new(SpaceSpec::new(vec!["t"]).unwrap(), vec!["q".into()], vec![]);
        let l = Expr::jet(Var::field(0), MultiIndex::single(0)).pow(2).scale(&rat(1, 2));
        let t = Theory::new(
            schema,
            l,
            TotalDiffOp::zero(IndexRange::fields(1), IndexRange::params(0)),
            None,
            vec![],
        )
        .unwrap();
        ExtendedTheory::new(t)
    }

    #[test]
    fn koszul_tate_examples() {
        let m = mechanics();
        let qtt = Expr::jet(Var::field(0), MultiIndex::from_entries(&[0, 0]));
        assert_eq!(m.koszul_tate(&Expr::var(Var::field_antifield(0))), -qtt);
        assert!(m.koszul_tate(&Expr::var(Var::field(0))).is_zero());
        let em = em2d();
        let d_af = |i: usize, mu: usize| Expr::jet(Var::field_antifield(i), MultiIndex::single(mu));
        // R = ∂_a, so R† = −∂_a
        assert_eq!(
            em.koszul_tate(&Expr::var(Var::ghost_antifield(0))),
            -(&d_af(0, 0) + &d_af(1, 1))
        );
    }

    #[test]
    fn em_longitudinal_and_brst() {
        let em = em2d();
        let c = |mu: usize| Expr::jet(Var::ghost(0), MultiIndex::single(mu));
        assert_eq!(em.longitudinal(&Expr::var(Var::field(0))).unwrap(), c(0));
        assert!(em.longitudinal(&Expr::var(Var::ghost(0))).unwrap().is_zero());
        assert!(em.longitudinal(&Expr::var(Var::field_antifield(0))).unwrap().is_zero());
        let s = em.build_master_action().unwrap();
        assert_eq!(em.brst(&s, &Expr::var(Var::field(1))).unwrap(), c(1));
        let e = em.base.equations_of_motion().to_vec();
        assert_eq!(em.brst(&s, &Expr::var(Var::field_antifield(0))).unwrap(), e[0]);
        let sc = em.brst(&s, &Expr::var(Var::ghost_antifield(0))).unwrap();
        assert!(em.brst(&s, &sc).unwrap().is_zero());
        assert!(em.brst(&s, &Expr::coordinate(0)).unwrap().is_zero());
        for r in em.nilpotency_residuals().unwrap() {
            assert!(r.all_zero(), "{r:?}");
        }
        for (v, a, b, c) in em.decomposition_residuals(&s).unwrap() {
            assert!(a.is_zero() && b.is_zero() && c.is_zero(), "{v:?}");
        }
    }

    #[test]
    fn antibracket_of_gauge_terms() {
        let em = em2d();
        let g = em.antifield_gauge_term();
        assert!(is_null_lagrangian(&em.antibracket(&g, &g)));
        let l = em.base.lagrangian.clone();
        assert!(em.antibracket(&l, &l).is_zero());
    }

    #[test]
    fn derived_bracket_trivial_inputs() {
        let em = em2d();
        let cstar = Expr::var(Var::ghost_antifield(0));
        let l = em.base.lagrangian.clone();
        assert!(em.derived_bracket(&cstar, &cstar, &Expr::zero()).unwrap().is_zero());
        assert!(em.derived_bracket(&Expr::zero(), &cstar, &l).unwrap().is_zero());
    }

    #[test]
    fn ghost_number_is_additive_plus_one() {
        let em = em2d();
        let a = &Expr::var(Var::field_antifield(0)) * &Expr::jet(Var::ghost(0), MultiIndex::single(0));
        let b = Expr::var(Var::ghost_antifield(0));
        let ab = em.antibracket(&b, &a);
        assert!(!ab.is_zero());
        assert_eq!(
            ghost_number(&ab),
            Some(ghost_number(&a).unwrap() + ghost_number(&b).unwrap() + 1)
        );
    }
}
