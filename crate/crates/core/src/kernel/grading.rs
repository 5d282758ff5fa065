use std::fmt;

use super::expr::{Expr, Factor};
use super::generator::Parity;

/// Multi-grading of a homogeneous expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Grading {
    /// Pure ghost number (ghosts count +1).
    pub ghost: i32,
    /// Antifield (resolution) degree.
    pub resolution: u32,
    pub form_degree: u32,
    pub parity: Parity,
}

impl Grading {
    pub const ZERO: Grading = Grading {
        ghost: 0,
        resolution: 0,
        form_degree: 0,
        parity: Parity::Even,
    };

    /// Total ghost number: pure ghost number minus resolution degree.
    pub fn total_ghost(&self) -> i32 {
        self.ghost - self.resolution as i32
    }

    pub fn of_factors(factors: &[Factor]) -> Grading {
        let mut g = Grading::ZERO;
        for (gen, e) in factors {
            let e = *e;
            g.ghost += gen.kind.pure_ghost() * e as i32;
            g.resolution += gen.kind.resolution() * e;
            g.form_degree += gen.kind.form_degree() * e;
            if gen.is_odd() {
                g.parity = g.parity.plus(Parity::Odd);
            }
        }
        g
    }
}

impl fmt::Display for Grading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ghost {} resolution {} form {} {}",
            self.ghost,
            self.resolution,
            self.form_degree,
            if self.parity.is_odd() { "odd" } else { "even" }
        )
    }
}

/// Two terms of an expression with different gradings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inhomogeneous {
    pub first: String,
    pub second: String,
}

/// The common grading of all terms, or the first clashing pair.
pub fn grading_of(e: &Expr) -> Result<Grading, Inhomogeneous> {
    common(e, Grading::of_factors)
}

/// Total ghost number and parity, which stay homogeneous on sums such as a
/// master action even though the separate degrees vary.
pub fn total_ghost_of(e: &Expr) -> Result<(i32, Parity), Inhomogeneous> {
    common(e, |f| {
        let g = Grading::of_factors(f);
        (g.total_ghost(), g.parity)
    })
}

fn common<K: PartialEq + Copy>(e: &Expr, key: impl Fn(&[Factor]) -> K) -> Result<K, Inhomogeneous> {
    let mut first: Option<(K, &Vec<Factor>)> = None;
    for (factors, _) in e.terms() {
        let k = key(factors);
        match &first {
            None => first = Some((k, factors)),
            Some((k0, f0)) if *k0 != k => {
                let name = |f: &Vec<Factor>| {
                    super::render::render_expr(
                        &Expr::from_monomials([super::expr::Monomial::new(super::expr::int(1), f.clone())]),
                        &super::render::GenericNames,
                    )
                };
                return Err(Inhomogeneous {
                    first: name(f0),
                    second: name(factors),
                });
            }
            _ => {}
        }
    }
    Ok(first.map(|(k, _)| k).unwrap_or_else(|| key(&[])))
}
