//! Symbolic variational-bicomplex calculus for irreducible gauge theories.
//!
//! The crate is layered bottom-up:
//!
//! * [`kernel`] – canonical graded differential polynomials;
//! * [`jet`] – total derivatives, prolongations, Euler–Lagrange derivatives
//!   and divergence normal forms;
//! * [`diffop`] – total differential operators, adjoints, Fréchet derivatives
//!   and Noether operators;
//! * [`weak`] – on-shell (weak) equality with explicit certificates;
//! * [`algebroid`] – symmetries, the gauge algebroid and conserved currents;
//! * [`bv`] – the antifield layer, antibracket and master equation;
//! * [`dsl`] and [`pipeline`] – theory files, verification pipelines and
//!   reports for the `jetbrane` command.

pub mod algebroid;
pub mod bv;
pub mod diffop;
pub mod dsl;
pub mod jet;
pub mod kernel;
pub mod linsolve;
pub mod pipeline;
pub mod random;
pub mod theory;
pub mod weak;

pub use kernel::{Expr, Generator, MultiIndex, Parity, Schema, SpaceSpec, Var};
pub use theory::Theory;
