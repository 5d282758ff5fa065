use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::generator::{Generator, Parity, Var};
use super::multi_index::MultiIndex;

pub type Coeff = BigRational;

/// A generator raised to a power. Odd generators only ever carry exponent 1.
pub type Factor = (Generator, u32);

pub fn rat(n: i64, d: i64) -> Coeff {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Coeff {
    BigRational::from_integer(BigInt::from(n))
}

/// Which side a graded partial derivative acts from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// A coefficient times an ordered product of generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub coeff: Coeff,
    pub factors: Vec<Factor>,
}

impl Monomial {
    pub fn new(coeff: Coeff, factors: Vec<Factor>) -> Self {
        Monomial { coeff, factors }
    }

    pub fn parity(&self) -> Parity {
        factors_parity(&self.factors)
    }
}

pub(crate) fn factors_parity(factors: &[Factor]) -> Parity {
    let odd = factors.iter().filter(|(g, _)| g.is_odd()).count();
    Parity::from_bit(odd % 2 == 1)
}

/// Brings an arbitrary factor list into canonical order.
///
/// Returns `None` when an odd generator occurs twice (the product vanishes),
/// otherwise the sign picked up by transposing odd generators.
pub fn sort_factors(raw: &[Factor]) -> Option<(bool, Vec<Factor>)> {
    let mut v: Vec<Factor> = Vec::with_capacity(raw.len());
    let mut negate = false;
    for &(g, e) in raw {
        if e == 0 {
            continue;
        }
        if g.is_odd() && e > 1 {
            return None;
        }
        // Insertion: count odd factors jumped over.
        let mut pos = v.len();
        while pos > 0 && v[pos - 1].0 > g {
            pos -= 1;
        }
        if pos > 0 && v[pos - 1].0 == g {
            if g.is_odd() {
                return None;
            }
            v[pos - 1].1 += e;
            continue;
        }
        if g.is_odd() {
            let jumped = v[pos..].iter().filter(|(h, _)| h.is_odd()).count();
            if jumped % 2 == 1 {
                negate = !negate;
            }
        }
        v.insert(pos, (g, e));
    }
    Some((negate, v))
}

/// Product of two canonical factor lists, with the reordering sign.
pub fn mul_factors(a: &[Factor], b: &[Factor]) -> Option<(bool, Vec<Factor>)> {
    if b.is_empty() {
        return Some((false, a.to_vec()));
    }
    if a.is_empty() {
        return Some((false, b.to_vec()));
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut odd_left_in_a = a.iter().filter(|(g, _)| g.is_odd()).count();
    let mut negate = false;
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let (ga, ea) = a[i];
        let (gb, eb) = b[j];
        if ga < gb {
            if ga.is_odd() {
                odd_left_in_a -= 1;
            }
            out.push((ga, ea));
            i += 1;
        } else if gb < ga {
            if gb.is_odd() && odd_left_in_a % 2 == 1 {
                negate = !negate;
            }
            out.push((gb, eb));
            j += 1;
        } else {
            if ga.is_odd() {
                return None;
            }
            out.push((ga, ea + eb));
            i += 1;
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((negate, out))
}

/// A canonical graded differential polynomial with exact rational
/// coefficients. Terms are keyed by their canonical factor list, so equal
/// expressions are structurally equal.
#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Expr {
    terms: BTreeMap<Vec<Factor>, Coeff>,
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn one() -> Self {
        Expr::constant(Coeff::one())
    }

    pub fn constant(c: Coeff) -> Self {
        let mut e = Expr::zero();
        e.add_term(Vec::new(), c);
        e
    }

    pub fn int(n: i64) -> Self {
        Expr::constant(int(n))
    }

    pub fn gen(g: Generator) -> Self {
        let mut e = Expr::zero();
        e.add_term(vec![(g, 1)], Coeff::one());
        e
    }

    pub fn coordinate(mu: usize) -> Self {
        Expr::gen(Generator::coordinate(mu))
    }

    pub fn var(v: Var) -> Self {
        Expr::gen(v.gen())
    }

    pub fn jet(v: Var, jet: MultiIndex) -> Self {
        Expr::gen(v.jet(jet))
    }

    pub fn basis_form(mu: usize) -> Self {
        Expr::gen(Generator::basis_form(mu))
    }

    /// Canonicalizes an unsorted list of monomials: orders factors with the
    /// odd-transposition sign, drops vanishing products, merges like terms.
    pub fn from_monomials<I: IntoIterator<Item = Monomial>>(raw: I) -> Self {
        let mut e = Expr::zero();
        for m in raw {
            if m.coeff.is_zero() {
                continue;
            }
            if let Some((neg, factors)) = sort_factors(&m.factors) {
                let c = if neg { -m.coeff } else { m.coeff };
                e.add_term(factors, c);
            }
        }
        e
    }

    /// Adds `coeff · factors` where `factors` is already canonical.
    pub(crate) fn add_term(&mut self, factors: Vec<Factor>, coeff: Coeff) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(factors) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Vec<Factor>, &Coeff)> + '_ {
        self.terms.iter()
    }

    pub fn monomials(&self) -> Vec<Monomial> {
        self.terms
            .iter()
            .map(|(f, c)| Monomial::new(c.clone(), f.clone()))
            .collect()
    }

    pub fn coefficient_of(&self, factors: &[Factor]) -> Coeff {
        self.terms.get(factors).cloned().unwrap_or_else(Coeff::zero)
    }

    /// The constant term.
    pub fn constant_term(&self) -> Coeff {
        self.coefficient_of(&[])
    }

    /// `Some(c)` if the expression is a constant.
    pub fn as_constant(&self) -> Option<Coeff> {
        match self.terms.len() {
            0 => Some(Coeff::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, c: &Coeff) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr {
            terms: self.terms.iter().map(|(f, k)| (f.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Expr {
        let mut acc = Expr::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Multiplies `left · self · right` for canonical factor lists.
    pub(crate) fn sandwich(&self, left: &[Factor], right: &[Factor], scale: &Coeff, out: &mut Expr) {
        for (f, c) in &self.terms {
            let Some((n1, lf)) = mul_factors(left, f) else { continue };
            let Some((n2, full)) = mul_factors(&lf, right) else {
                continue;
            };
            let mut k = c * scale;
            if n1 != n2 {
                k = -k;
            }
            out.add_term(full, k);
        }
    }

    /// All distinct generators occurring in the expression.
    pub fn generators(&self) -> BTreeSet<Generator> {
        self.terms.keys().flat_map(|f| f.iter().map(|(g, _)| *g)).collect()
    }

    /// All dependent variables whose jets occur in the expression.
    pub fn vars(&self) -> BTreeSet<Var> {
        self.generators().iter().filter_map(|g| g.var()).collect()
    }

    pub fn contains_kind(&self, pred: impl Fn(&Generator) -> bool) -> bool {
        self.terms.keys().any(|f| f.iter().any(|(g, _)| pred(g)))
    }

    /// Highest jet order of any jet generator.
    pub fn max_jet_order(&self) -> usize {
        self.generators()
            .iter()
            .filter(|g| g.is_jet())
            .map(|g| g.order())
            .max()
            .unwrap_or(0)
    }

    /// Parity if all terms agree.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|f| factors_parity(f));
        let first = it.next().unwrap_or(Parity::Even);
        it.all(|p| p == first).then_some(first)
    }

    /// Graded partial derivative with respect to a single generator.
    ///
    /// The left derivative first moves `g` to the front of each monomial, the
    /// right derivative to the back; on even generators they coincide.
    pub fn partial_derivative(&self, g: &Generator, side: Side) -> Expr {
        let mut out = Expr::zero();
        for (factors, c) in &self.terms {
            let Some(pos) = factors.iter().position(|(h, _)| h == g) else {
                continue;
            };
            let (_, e) = factors[pos];
            let mut rest = factors.clone();
            let mut coeff = c.clone();
            if g.is_odd() {
                let passed = match side {
                    Side::Left => &factors[..pos],
                    Side::Right => &factors[pos + 1..],
                };
                if passed.iter().filter(|(h, _)| h.is_odd()).count() % 2 == 1 {
                    coeff = -coeff;
                }
                rest.remove(pos);
            } else {
                coeff *= int(e as i64);
                if e == 1 {
                    rest.remove(pos);
                } else {
                    rest[pos].1 -= 1;
                }
            }
            out.add_term(rest, coeff);
        }
        out
    }

    /// Applies the graded derivation of parity `parity` determined by its
    /// values on generators (`None` = 0). The rule is
    /// D(A g B) = (−1)^{|D||A|} A D(g) B.
    pub fn apply_derivation<F>(&self, parity: Parity, mut image: F) -> Expr
    where
        F: FnMut(&Generator) -> Option<Expr>,
    {
        let mut cache: HashMap<Generator, Option<Expr>> = HashMap::new();
        let mut out = Expr::zero();
        for (factors, c) in &self.terms {
            let mut odd_before = 0usize;
            for (pos, &(g, e)) in factors.iter().enumerate() {
                let img = cache.entry(g).or_insert_with(|| image(&g).filter(|x| !x.is_zero()));
                if let Some(img) = img {
                    let mut left: Vec<Factor> = factors[..pos].to_vec();
                    if e > 1 {
                        left.push((g, e - 1));
                    }
                    let right = &factors[pos + 1..];
                    let mut k = c * int(e as i64);
                    if parity.is_odd() && odd_before % 2 == 1 {
                        k = -k;
                    }
                    img.sandwich(&left, right, &k, &mut out);
                }
                if g.is_odd() {
                    odd_before += 1;
                }
            }
        }
        out
    }

    /// Simultaneous substitution of generators by expressions. Generators
    /// not in the map are kept. Parity of images is the caller's contract
    /// (checked by [`crate::kernel::substitute`]).
    pub fn substitute_unchecked(&self, map: &HashMap<Generator, Expr>) -> Expr {
        let mut out = Expr::zero();
        for (factors, c) in &self.terms {
            let mut acc = Expr::constant(c.clone());
            for &(g, e) in factors {
                let piece = match map.get(&g) {
                    Some(img) => img.pow(e),
                    None => {
                        let mut t = Expr::zero();
                        t.add_term(vec![(g, e)], Coeff::one());
                        t
                    }
                };
                acc = &acc * &piece;
                if acc.is_zero() {
                    break;
                }
            }
            out += acc;
        }
        out
    }

    /// Keeps only the terms satisfying `pred`.
    pub fn filter_terms(&self, mut pred: impl FnMut(&[Factor]) -> bool) -> Expr {
        Expr {
            terms: self
                .terms
                .iter()
                .filter(|(f, _)| pred(f))
                .map(|(f, c)| (f.clone(), c.clone()))
                .collect(),
        }
    }

    /// Splits the expression by a key computed per term.
    pub fn split_by<K: Ord>(&self, mut key: impl FnMut(&[Factor]) -> K) -> BTreeMap<K, Expr> {
        let mut out: BTreeMap<K, Expr> = BTreeMap::new();
        for (f, c) in &self.terms {
            out.entry(key(f)).or_default().add_term(f.clone(), c.clone());
        }
        out
    }

    /// Largest absolute numerator/denominator; used for diagnostics.
    pub fn max_coeff_height(&self) -> BigInt {
        self.terms
            .values()
            .map(|c| c.numer().abs().max(c.denom().abs()))
            .max()
            .unwrap_or_else(BigInt::zero)
    }
}

impl<'a> Add<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn add(self, rhs: &'a Expr) -> Expr {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(mut self, rhs: Expr) -> Expr {
        self += rhs;
        self
    }
}

impl AddAssign<&Expr> for Expr {
    fn add_assign(&mut self, rhs: &Expr) {
        for (f, c) in &rhs.terms {
            self.add_term(f.clone(), c.clone());
        }
    }
}

impl AddAssign for Expr {
    fn add_assign(&mut self, rhs: Expr) {
        if self.terms.is_empty() {
            *self = rhs;
            return;
        }
        for (f, c) in rhs.terms {
            self.add_term(f, c);
        }
    }
}

impl SubAssign<&Expr> for Expr {
    fn sub_assign(&mut self, rhs: &Expr) {
        for (f, c) in &rhs.terms {
            self.add_term(f.clone(), -c.clone());
        }
    }
}

impl SubAssign for Expr {
    fn sub_assign(&mut self, rhs: Expr) {
        for (f, c) in rhs.terms {
            self.add_term(f, -c);
        }
    }
}

impl<'a> Sub<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn sub(self, rhs: &'a Expr) -> Expr {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(mut self, rhs: Expr) -> Expr {
        self -= rhs;
        self
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr {
            terms: self.terms.iter().map(|(f, c)| (f.clone(), -c.clone())).collect(),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(mut self) -> Expr {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl<'a> Mul<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn mul(self, rhs: &'a Expr) -> Expr {
        let mut out = Expr::zero();
        for (fa, ca) in &self.terms {
            for (fb, cb) in &rhs.terms {
                if let Some((neg, f)) = mul_factors(fa, fb) {
                    let c = ca * cb;
                    out.add_term(f, if neg { -c } else { c });
                }
            }
        }
        out
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        &self * &rhs
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        let mut acc = Expr::zero();
        for e in iter {
            acc += e;
        }
        acc
    }
}

impl std::fmt::Debug for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", super::render::render_expr(self, &super::render::GenericNames))
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", super::render::render_expr(self, &super::render::GenericNames))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::multi_index::MultiIndex;

    fn q() -> Expr {
        Expr::var(Var::field(0))
    }
    fn qt() -> Expr {
        Expr::jet(Var::field(0), MultiIndex::single(0))
    }
    fn ghost(a: usize) -> Expr {
        Expr::var(Var::ghost(a))
    }

    #[test]
    fn odd_generators_anticommute() {
        let c1 = ghost(0);
        let c2 = ghost(1);
        assert!((&(&c1 * &c2) + &(&c2 * &c1)).is_zero());
        assert!((&c1 * &c1).is_zero());
    }

    #[test]
    fn like_terms_merge() {
        let e = &qt().scale(&int(3)) + &qt().scale(&int(2));
        assert_eq!(e, qt().scale(&int(5)));
    }

    #[test]
    fn raw_canonicalization_tracks_reordering_sign() {
        let d0 = Generator::basis_form(0);
        let d1 = Generator::basis_form(1);
        // dx0·dx1 − dx1·dx0, and dx1·dx0 = (−1)·dx0·dx1
        let raw = vec![
            Monomial::new(int(1), vec![(d0, 1), (d1, 1)]),
            Monomial::new(int(-1), vec![(d1, 1), (d0, 1)]),
        ];
        let e = Expr::from_monomials(raw);
        assert_eq!(e, (&Expr::basis_form(0) * &Expr::basis_form(1)).scale(&int(2)));
    }

    #[test]
    fn canonicalize_is_idempotent_and_drops_odd_squares() {
        let c = Var::ghost(0).gen();
        let raw = vec![
            Monomial::new(int(2), vec![(c, 1), (c, 1)]),
            Monomial::new(int(1), vec![(c, 1)]),
        ];
        let e = Expr::from_monomials(raw);
        assert_eq!(e, ghost(0));
        assert_eq!(Expr::from_monomials(e.monomials()), e);
    }

    #[test]
    fn left_and_right_derivatives_of_ghost_product() {
        let c1 = Var::ghost(0).gen();
        let e = &ghost(0) * &ghost(1);
        assert_eq!(e.partial_derivative(&c1, Side::Left), ghost(1));
        assert_eq!(e.partial_derivative(&c1, Side::Right), -ghost(1));
    }

    #[test]
    fn even_partial_derivative() {
        let e = &q() * &qt();
        assert_eq!(
            e.partial_derivative(&Var::field(0).jet(MultiIndex::single(0)), Side::Left),
            q()
        );
        assert!(Expr::coordinate(0)
            .partial_derivative(&Var::field(0).gen(), Side::Left)
            .is_zero());
        let sq = qt().pow(3);
        let d = sq.partial_derivative(&Var::field(0).jet(MultiIndex::single(0)), Side::Right);
        assert_eq!(d, qt().pow(2).scale(&int(3)));
    }

    #[test]
    fn odd_times_odd_supercommutes() {
        let c = ghost(0);
        let a = Expr::var(Var::field_antifield(0));
        assert_eq!(&c * &a, -(&a * &c));
    }
}
