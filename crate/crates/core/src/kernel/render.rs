//! Deterministic text form of expressions. The output is accepted by the
//! theory-file expression parser, so it round-trips.

use num_traits::{One, Signed};

use super::expr::{Coeff, Expr, Factor};
use super::generator::{Generator, Kind};
use super::multi_index::MultiIndex;

/// Supplies display names for coordinates, fields and gauge parameters.
pub trait Names {
    fn coord(&self, mu: usize) -> String;
    fn field(&self, i: usize) -> String;
    fn param(&self, alpha: usize) -> String;

    /// Whether every coordinate name is one character, so jet suffixes can
    /// be written without separators.
    fn compact_coords(&self) -> bool {
        true
    }
}

/// Placeholder names `x0…`, `u0…`, `p0…` used when no schema is at hand.
pub struct GenericNames;

impl Names for GenericNames {
    fn coord(&self, mu: usize) -> String {
        format!("x{mu}")
    }
    fn field(&self, i: usize) -> String {
        format!("u{i}")
    }
    fn param(&self, alpha: usize) -> String {
        format!("p{alpha}")
    }
    fn compact_coords(&self) -> bool {
        false
    }
}

pub fn render_jet(jet: &MultiIndex, names: &dyn Names) -> String {
    if jet.is_empty() {
        return String::new();
    }
    let parts: Vec<String> = jet.entries().iter().map(|&mu| names.coord(mu)).collect();
    if names.compact_coords() {
        format!("_[{}]", parts.concat())
    } else {
        format!("_[{}]", parts.join(","))
    }
}

pub fn render_generator(g: &Generator, names: &dyn Names) -> String {
    let b = g.base as usize;
    let jet = render_jet(&g.jet, names);
    match g.kind {
        Kind::Coordinate => names.coord(b),
        Kind::FieldJet => format!("{}{jet}", names.field(b)),
        Kind::GhostJet => format!("gh.{}{jet}", names.param(b)),
        Kind::FieldAntifieldJet => format!("af.{}{jet}", names.field(b)),
        Kind::GhostAntifieldJet => format!("ag.{}{jet}", names.param(b)),
        Kind::BasisForm => format!("dx.{}", names.coord(b)),
    }
}

pub(crate) fn generic_generator_name(g: &Generator) -> String {
    render_generator(g, &GenericNames)
}

pub fn render_coeff(c: &Coeff) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn render_factors(factors: &[Factor], names: &dyn Names) -> String {
    factors
        .iter()
        .map(|(g, e)| {
            let s = render_generator(g, names);
            if *e == 1 {
                s
            } else {
                format!("{s}^{e}")
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

pub fn render_expr(e: &Expr, names: &dyn Names) -> String {
    if e.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (factors, c)) in e.terms().enumerate() {
        let negative = c.is_negative();
        let mag = c.abs();
        if i == 0 {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        if factors.is_empty() {
            out.push_str(&render_coeff(&mag));
        } else if mag.is_one() {
            out.push_str(&render_factors(factors, names));
        } else {
            out.push_str(&render_coeff(&mag));
            out.push('*');
            out.push_str(&render_factors(factors, names));
        }
    }
    out
}
