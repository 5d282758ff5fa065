//! Graded differential polynomials over the extended jet space.
//!
//! Generators are coordinates x^μ, jet coordinates of fields, ghosts and
//! antifields, and basis one-forms dx^μ. Expressions are kept in a unique
//! canonical form: factors sorted by a fixed total order, signs from moving
//! odd generators absorbed into the (exact rational) coefficient, like terms
//! merged and zero terms dropped.

mod expr;
mod generator;
mod grading;
mod multi_index;
pub mod render;

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

pub use expr::{int, mul_factors, rat, sort_factors, Coeff, Expr, Factor, Monomial, Side};
pub use generator::{Generator, Kind, Parity, Var};
pub use grading::{grading_of, total_ghost_of, Grading, Inhomogeneous};
pub use multi_index::{binomial, MultiIndex, MAX_DIM};
pub use render::{render_expr, GenericNames, Names};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("invalid space: {0}")]
    Space(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("inhomogeneous expression: `{first}` and `{second}` have different gradings")]
    Inhomogeneous { first: String, second: String },
    #[error("substitution error: image of {generator} has the wrong parity")]
    ParityMismatch { generator: String },
}

impl From<Inhomogeneous> for KernelError {
    fn from(e: Inhomogeneous) -> Self {
        KernelError::Inhomogeneous {
            first: e.first,
            second: e.second,
        }
    }
}

/// Spacetime dimension and coordinate names.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpaceSpec {
    coord_names: Vec<String>,
}

impl SpaceSpec {
    pub fn new<S: Into<String>>(coord_names: Vec<S>) -> Result<Self, KernelError> {
        let coord_names: Vec<String> = coord_names.into_iter().map(Into::into).collect();
        if coord_names.is_empty() || coord_names.len() > MAX_DIM {
            return Err(KernelError::Space(format!(
                "dimension must be between 1 and {MAX_DIM}, got {}",
                coord_names.len()
            )));
        }
        let distinct: BTreeSet<&String> = coord_names.iter().collect();
        if distinct.len() != coord_names.len() {
            return Err(KernelError::Space("coordinate names must be distinct".into()));
        }
        Ok(SpaceSpec { coord_names })
    }

    pub fn dim(&self) -> usize {
        self.coord_names.len()
    }

    pub fn coord_names(&self) -> &[String] {
        &self.coord_names
    }

    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.coord_names.iter().position(|c| c == name)
    }
}

/// Field content an expression lives over: spacetime, physical fields and
/// gauge parameters (which index ghosts and ghost antifields).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Schema {
    pub space: SpaceSpec,
    pub fields: Vec<String>,
    pub params: Vec<String>,
}

impl Schema {
    pub fn new(space: SpaceSpec, fields: Vec<String>, params: Vec<String>) -> Self {
        Schema { space, fields, params }
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn field_vars(&self) -> Vec<Var> {
        (0..self.fields.len()).map(Var::field).collect()
    }

    pub fn ghost_vars(&self) -> Vec<Var> {
        (0..self.params.len()).map(Var::ghost).collect()
    }

    /// Fields, ghosts, field antifields, ghost antifields.
    pub fn extended_vars(&self) -> Vec<Var> {
        let mut v = self.field_vars();
        v.extend(self.ghost_vars());
        v.extend((0..self.fields.len()).map(Var::field_antifield));
        v.extend((0..self.params.len()).map(Var::ghost_antifield));
        v
    }

    pub fn check_generator(&self, g: &Generator) -> Result<(), KernelError> {
        let b = g.base as usize;
        let (limit, what) = match g.kind {
            Kind::Coordinate | Kind::BasisForm => (self.dim(), "coordinate"),
            Kind::FieldJet | Kind::FieldAntifieldJet => (self.fields.len(), "field"),
            Kind::GhostJet | Kind::GhostAntifieldJet => (self.params.len(), "gauge parameter"),
        };
        if b >= limit {
            return Err(KernelError::Schema(format!("unknown {what} id {b}")));
        }
        if let Some(mu) = g.jet.max_entry() {
            if mu >= self.dim() {
                return Err(KernelError::Schema(format!(
                    "jet index {mu} out of range for dimension {}",
                    self.dim()
                )));
            }
        }
        if !g.is_jet() && !g.jet.is_empty() {
            return Err(KernelError::Schema("coordinates and forms carry no jet index".into()));
        }
        Ok(())
    }

    pub fn check_expr(&self, e: &Expr) -> Result<(), KernelError> {
        e.generators().iter().try_for_each(|g| self.check_generator(g))
    }

    pub fn render(&self, e: &Expr) -> String {
        render_expr(e, self)
    }
}

impl Names for Schema {
    fn coord(&self, mu: usize) -> String {
        self.space.coord_names[mu].clone()
    }
    fn field(&self, i: usize) -> String {
        self.fields[i].clone()
    }
    fn param(&self, alpha: usize) -> String {
        self.params[alpha].clone()
    }
    fn compact_coords(&self) -> bool {
        self.space.coord_names.iter().all(|c| c.chars().count() == 1)
    }
}

/// Canonical form of an unsorted list of monomials over `schema`.
pub fn canonicalize(raw: Vec<Monomial>, schema: &Schema) -> Result<Expr, KernelError> {
    for m in &raw {
        for (g, _) in &m.factors {
            schema.check_generator(g)?;
        }
    }
    Ok(Expr::from_monomials(raw))
}

pub fn graded_product(a: &Expr, b: &Expr) -> Expr {
    a * b
}

pub fn partial_derivative(e: &Expr, g: &Generator, side: Side) -> Expr {
    e.partial_derivative(g, side)
}

/// Simultaneous graded substitution; each image must match its generator's
/// parity.
pub fn substitute(e: &Expr, map: &HashMap<Generator, Expr>) -> Result<Expr, KernelError> {
    for (g, img) in map {
        if img.is_zero() {
            continue;
        }
        match img.parity() {
            Some(p) if p == g.parity() => {}
            _ => {
                return Err(KernelError::ParityMismatch {
                    generator: render::generic_generator_name(g),
                });
            }
        }
    }
    Ok(e.substitute_unchecked(map))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Schema {
        Schema::new(SpaceSpec::new(vec!["t"]).unwrap(), vec!["q".into()], vec!["e".into()])
    }

    #[test]
    fn unknown_ids_are_schema_errors() {
        let raw = vec![Monomial::new(int(1), vec![(Var::field(3).gen(), 1)])];
        assert!(matches!(canonicalize(raw, &schema()), Err(KernelError::Schema(_))));
        let raw = vec![Monomial::new(
            int(1),
            vec![(Var::field(0).jet(MultiIndex::single(1)), 1)],
        )];
        assert!(matches!(canonicalize(raw, &schema()), Err(KernelError::Schema(_))));
    }

    #[test]
    fn space_limits() {
        assert!(SpaceSpec::new(Vec::<String>::new()).is_err());
        assert!(SpaceSpec::new(vec!["a", "b", "c", "d", "e"]).is_err());
        assert!(SpaceSpec::new(vec!["t", "t"]).is_err());
    }

    #[test]
    fn substitution_examples() {
        let q = Var::field(0).gen();
        let qt = Var::field(0).jet(MultiIndex::single(0));
        let e = &(&Expr::gen(q) * &Expr::gen(qt)) + &Expr::gen(qt).pow(2);
        let map = HashMap::from([(q, Expr::zero())]);
        assert_eq!(substitute(&e, &map).unwrap(), Expr::gen(qt).pow(2));

        let map = HashMap::from([(qt, Expr::gen(q))]);
        assert_eq!(substitute(&Expr::gen(qt).pow(2), &map).unwrap(), Expr::gen(q).pow(2));

        let c = Var::ghost(0).gen();
        let map = HashMap::from([(c, Expr::gen(c))]);
        assert_eq!(substitute(&Expr::gen(c), &map).unwrap(), Expr::gen(c));

        let bad = HashMap::from([(c, Expr::gen(q))]);
        assert!(matches!(
            substitute(&Expr::gen(c), &bad),
            Err(KernelError::ParityMismatch { .. })
        ));
    }

    #[test]
    fn rendering_uses_schema_names() {
        let s = schema();
        let e = &Expr::jet(Var::field(0), MultiIndex::from_entries(&[0, 0])).scale(&rat(-1, 2))
            + &Expr::var(Var::ghost_antifield(0));
        assert_eq!(s.render(&e), "-1/2*q_[tt] + ag.e");
    }
}
