//! Gauge theories: field content, Lagrangian, generating set and optional
//! structure operators, validated on construction.

use thiserror::Error;

use crate::diffop::{helmholtz_check, BiDiffOp, IndexRange, TotalDiffOp};
use crate::jet::euler_lagrange;
use crate::kernel::{Expr, KernelError, Kind, Schema, Side, Var};
use crate::weak::evaluate_on_solution;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TheoryError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("lagrangian may only depend on coordinates and field jets")]
    LagrangianContent,
    #[error("equations of motion are not variational (Helmholtz condition fails)")]
    NotVariational,
    #[error("generating set has the wrong shape: expected {expected}, got {got}")]
    GeneratorShape { expected: String, got: String },
    #[error("generator coefficients may only depend on coordinates and field jets")]
    GeneratorContent,
    #[error("Noether identity fails for gauge parameter `{param}`: residual {residual}")]
    NoetherIdentity { param: String, residual: String },
    #[error("structure operators are not skew-symmetric")]
    StructureNotSkew,
    #[error("structure operators have {got} parameters, theory has {expected}")]
    StructureShape { expected: usize, got: usize },
    #[error("named solution `{name}` does not solve equation {equation}: residual {residual}")]
    InvalidSolution {
        name: String,
        equation: String,
        residual: String,
    },
    #[error("theory has no structure operators")]
    MissingStructure,
    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),
}

/// An explicit configuration φ^i(x) solving the equations of motion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedSolution {
    pub name: String,
    pub values: Vec<Expr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theory {
    pub schema: Schema,
    pub lagrangian: Expr,
    /// R^i_α as an operator from gauge parameters to fields.
    pub generators: TotalDiffOp,
    pub structure: Option<BiDiffOp>,
    pub solutions: Vec<NamedSolution>,
    eom: Vec<Expr>,
}

fn field_only(e: &Expr) -> bool {
    !e.contains_kind(|g| !matches!(g.kind, Kind::Coordinate | Kind::FieldJet))
}

impl Theory {
    /// Builds and validates a theory: the Lagrangian must be variational,
    /// the generating set must satisfy its Noether identities identically,
    /// structure operators must be skew and named solutions must solve the
    /// equations.
    pub fn new(
        schema: Schema,
        lagrangian: Expr,
        generators: TotalDiffOp,
        structure: Option<BiDiffOp>,
        solutions: Vec<NamedSolution>,
    ) -> Result<Theory, TheoryError> {
        schema.check_expr(&lagrangian)?;
        if !field_only(&lagrangian) {
            return Err(TheoryError::LagrangianContent);
        }
        let n = schema.fields.len();
        let m = schema.params.len();
        let expected = (IndexRange::fields(n), IndexRange::params(m));
        if (generators.out_range(), generators.in_range()) != expected {
            return Err(TheoryError::GeneratorShape {
                expected: format!("{} <- {}", expected.0, expected.1),
                got: format!("{} <- {}", generators.out_range(), generators.in_range()),
            });
        }
        for (_, c) in generators.coeffs() {
            schema.check_expr(c)?;
            if !field_only(c) {
                return Err(TheoryError::GeneratorContent);
            }
        }
        let eom = (0..n)
            .map(|i| euler_lagrange(&lagrangian, Var::field(i), Side::Left))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| match e {
                crate::jet::JetError::Kernel(k) => TheoryError::Kernel(k),
                other => TheoryError::InternalConsistency(other.to_string()),
            })?;
        if !helmholtz_check(&eom) {
            return Err(TheoryError::NotVariational);
        }
        let theory = Theory {
            schema,
            lagrangian,
            generators,
            structure,
            solutions,
            eom,
        };
        let residual = theory.noether_residuals();
        if let Some((alpha, r)) = residual.iter().enumerate().find(|(_, r)| !r.is_zero()) {
            return Err(TheoryError::NoetherIdentity {
                param: theory.schema.params[alpha].clone(),
                residual: theory.schema.render(r),
            });
        }
        if let Some(c) = &theory.structure {
            if c.len() != m {
                return Err(TheoryError::StructureShape {
                    expected: m,
                    got: c.len(),
                });
            }
            for (_, e) in c.coeffs() {
                theory.schema.check_expr(e)?;
            }
            if !c.is_skew() {
                return Err(TheoryError::StructureNotSkew);
            }
        }
        for sol in &theory.solutions {
            for (i, ei) in theory.eom.iter().enumerate() {
                let r = evaluate_on_solution(ei, &sol.values);
                if !r.is_zero() {
                    return Err(TheoryError::InvalidSolution {
                        name: sol.name.clone(),
                        equation: theory.schema.fields[i].clone(),
                        residual: theory.schema.render(&r),
                    });
                }
            }
        }
        Ok(theory)
    }

    pub fn dim(&self) -> usize {
        self.schema.dim()
    }

    pub fn n_fields(&self) -> usize {
        self.schema.fields.len()
    }

    pub fn n_params(&self) -> usize {
        self.schema.params.len()
    }

    /// E_i = δL/δφ^i.
    pub fn equations_of_motion(&self) -> &[Expr] {
        &self.eom
    }

    /// The Noether operators R^{†a}_α, one row per gauge parameter.
    pub fn noether_operators(&self) -> TotalDiffOp {
        self.generators.adjoint()
    }

    /// R^{†a}_α[E_a] for every α; all zero for a valid theory.
    pub fn noether_residuals(&self) -> Vec<Expr> {
        self.noether_operators().apply(&self.eom)
    }

    /// The row operator of the Noether identity for parameter α.
    pub fn noether_row(&self, alpha: usize) -> TotalDiffOp {
        let mut row = TotalDiffOp::zero(IndexRange::SCALAR, IndexRange::fields(self.n_fields()));
        for ((a, b, mi), c) in self.noether_operators().coeffs() {
            if *a == alpha {
                row.add_coeff(0, *b, *mi, c.clone());
            }
        }
        row
    }

    pub fn require_structure(&self) -> Result<&BiDiffOp, TheoryError> {
        self.structure.as_ref().ok_or(TheoryError::MissingStructure)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{rat, MultiIndex, SpaceSpec};

    fn mechanics(l: Expr) -> Result<Theory, TheoryError> {
        let schema = Schema::new(SpaceSpec::new(vec!["t"]).unwrap(), vec!["q".into()], vec![]);
        Theory::new(
            schema,
            l,
            TotalDiffOp::zero(IndexRange::fields(1), IndexRange::params(0)),
            None,
            vec![],
        )
    }

    fn q(jet: &[usize]) -> Expr {
        Expr::jet(Var::field(0), MultiIndex::from_entries(jet))
    }

    #[test]
    fn mechanics_equations() {
        let t = mechanics(q(&[0]).pow(2).scale(&rat(1, 2))).unwrap();
        assert_eq!(t.equations_of_motion(), &[-q(&[0, 0])]);
        let zero = mechanics(Expr::zero()).unwrap();
        assert!(zero.equations_of_motion()[0].is_zero());
    }

    #[test]
    fn rejects_antifields_in_lagrangian() {
        let l = &Expr::var(Var::field_antifield(0)) * &q(&[0]);
        assert_eq!(mechanics(l), Err(TheoryError::LagrangianContent));
    }

    #[test]
    fn rejects_wrong_solution() {
        let schema = Schema::new(SpaceSpec::new(vec!["t"]).unwrap(), vec!["q".into()], vec![]);
        let sol = NamedSolution {
            name: "bad".into(),
            values: vec![Expr::coordinate(0).pow(2)],
        };
        let r = Theory::new(
            schema,
            q(&[0]).pow(2).scale(&rat(1, 2)),
            TotalDiffOp::zero(IndexRange::fields(1), IndexRange::params(0)),
            None,
            vec![sol],
        );
        assert!(matches!(r, Err(TheoryError::InvalidSolution { .. })));
    }

    #[test]
    fn rejects_non_gauge_generator() {
        let schema = Schema::new(SpaceSpec::new(vec!["t"]).unwrap(), vec!["q".into()], vec!["e".into()]);
        let mut r = TotalDiffOp::zero(IndexRange::fields(1), IndexRange::params(1));
        r.add_coeff(0, 0, MultiIndex::empty(), Expr::one());
        let res = Theory::new(schema, q(&[0]).pow(2).scale(&rat(1, 2)), r, None, vec![]);
        assert!(matches!(res, Err(TheoryError::NoetherIdentity { .. })));
    }
}
