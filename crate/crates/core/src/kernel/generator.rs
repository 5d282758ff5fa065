use std::fmt;

use super::multi_index::MultiIndex;

/// Grassmann parity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_bit(odd: bool) -> Self {
        if odd {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    pub fn bit(self) -> u8 {
        self as u8
    }

    /// Sum of parities (mod 2).
    pub fn plus(self, other: Parity) -> Parity {
        Parity::from_bit(self.is_odd() != other.is_odd())
    }
}

/// The six generator families of the extended jet space. The declaration
/// order is the canonical factor order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Coordinate,
    FieldJet,
    GhostJet,
    FieldAntifieldJet,
    GhostAntifieldJet,
    BasisForm,
}

impl Kind {
    pub fn parity(self) -> Parity {
        match self {
            Kind::Coordinate | Kind::FieldJet | Kind::GhostAntifieldJet => Parity::Even,
            Kind::GhostJet | Kind::FieldAntifieldJet | Kind::BasisForm => Parity::Odd,
        }
    }

    /// Pure ghost number.
    pub fn pure_ghost(self) -> i32 {
        match self {
            Kind::GhostJet => 1,
            _ => 0,
        }
    }

    /// Antifield (resolution) degree.
    pub fn resolution(self) -> u32 {
        match self {
            Kind::FieldAntifieldJet => 1,
            Kind::GhostAntifieldJet => 2,
            _ => 0,
        }
    }

    pub fn form_degree(self) -> u32 {
        match self {
            Kind::BasisForm => 1,
            _ => 0,
        }
    }

    pub fn is_jet(self) -> bool {
        !matches!(self, Kind::Coordinate | Kind::BasisForm)
    }
}

/// A dependent variable: a field, ghost or antifield without derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub kind: Kind,
    pub base: u16,
}

impl Var {
    pub fn field(i: usize) -> Self {
        Var {
            kind: Kind::FieldJet,
            base: i as u16,
        }
    }

    pub fn ghost(alpha: usize) -> Self {
        Var {
            kind: Kind::GhostJet,
            base: alpha as u16,
        }
    }

    pub fn field_antifield(i: usize) -> Self {
        Var {
            kind: Kind::FieldAntifieldJet,
            base: i as u16,
        }
    }

    pub fn ghost_antifield(alpha: usize) -> Self {
        Var {
            kind: Kind::GhostAntifieldJet,
            base: alpha as u16,
        }
    }

    pub fn parity(self) -> Parity {
        self.kind.parity()
    }

    pub fn index(self) -> usize {
        self.base as usize
    }

    /// The jet coordinate of this variable with derivative multi-index `jet`.
    pub fn jet(self, jet: MultiIndex) -> Generator {
        debug_assert!(self.kind.is_jet());
        Generator {
            kind: self.kind,
            base: self.base,
            jet,
        }
    }

    pub fn gen(self) -> Generator {
        self.jet(MultiIndex::empty())
    }

    /// The canonically conjugate variable (z ↔ z*).
    pub fn conjugate(self) -> Var {
        let kind = match self.kind {
            Kind::FieldJet => Kind::FieldAntifieldJet,
            Kind::FieldAntifieldJet => Kind::FieldJet,
            Kind::GhostJet => Kind::GhostAntifieldJet,
            Kind::GhostAntifieldJet => Kind::GhostJet,
            k => k,
        };
        Var { kind, base: self.base }
    }
}

/// One generator of the graded algebra: a coordinate x^μ, a jet coordinate
/// of a field/ghost/antifield, or a basis one-form dx^μ.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator {
    pub kind: Kind,
    pub base: u16,
    pub jet: MultiIndex,
}

impl Generator {
    pub fn coordinate(mu: usize) -> Self {
        Generator {
            kind: Kind::Coordinate,
            base: mu as u16,
            jet: MultiIndex::empty(),
        }
    }

    pub fn basis_form(mu: usize) -> Self {
        Generator {
            kind: Kind::BasisForm,
            base: mu as u16,
            jet: MultiIndex::empty(),
        }
    }

    pub fn parity(&self) -> Parity {
        self.kind.parity()
    }

    pub fn is_odd(&self) -> bool {
        self.kind.parity().is_odd()
    }

    pub fn is_jet(&self) -> bool {
        self.kind.is_jet()
    }

    /// The dependent variable of a jet generator.
    pub fn var(&self) -> Option<Var> {
        self.is_jet().then_some(Var {
            kind: self.kind,
            base: self.base,
        })
    }

    pub fn order(&self) -> usize {
        self.jet.len()
    }

    /// The jet generator with one more derivative along `mu`.
    pub fn raised(&self, mu: usize) -> Generator {
        debug_assert!(self.is_jet());
        Generator {
            jet: self.jet.raised(mu),
            ..*self
        }
    }
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::render::generic_generator_name(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grading_table() {
        let kinds = [
            (Kind::FieldJet, 0, 0, 0, Parity::Even),
            (Kind::GhostJet, 1, 0, 0, Parity::Odd),
            (Kind::FieldAntifieldJet, 0, 1, 0, Parity::Odd),
            (Kind::GhostAntifieldJet, 0, 2, 0, Parity::Even),
            (Kind::BasisForm, 0, 0, 1, Parity::Odd),
        ];
        let total_ghost = [0, 1, -1, -2, 0];
        for ((k, pg, res, form, par), gh) in kinds.into_iter().zip(total_ghost) {
            assert_eq!(k.pure_ghost(), pg);
            assert_eq!(k.resolution(), res);
            assert_eq!(k.form_degree(), form);
            assert_eq!(k.parity(), par);
            assert_eq!(k.pure_ghost() - k.resolution() as i32, gh);
        }
    }

    #[test]
    fn generator_order_follows_kind_then_base_then_jet() {
        let x = Generator::coordinate(3);
        let q = Var::field(0).gen();
        let qt = Var::field(0).jet(MultiIndex::single(0));
        let p = Var::field(1).gen();
        let c = Var::ghost(0).gen();
        let dx = Generator::basis_form(0);
        let mut v = vec![dx, c, p, qt, q, x];
        v.sort();
        assert_eq!(v, vec![x, q, qt, p, c, dx]);
    }
}
