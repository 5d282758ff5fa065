//! Splitting an integrand into a core and an explicit total divergence.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use super::{d, is_null_lagrangian};
use crate::kernel::{Coeff, Expr, Factor, Generator, Kind, MultiIndex, Side, Var, MAX_DIM};
use crate::linsolve::{Echelon, SparseRow};

/// Upper bound on integration-by-parts steps before the remaining terms are
/// moved to the core unchanged.
const STEP_BUDGET: usize = 20_000;

/// `input = core + Σ_μ ∂_μ witness[μ]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivergenceNormalForm {
    pub core: Expr,
    pub witness: Vec<Expr>,
}

impl DivergenceNormalForm {
    pub fn reconstruct(&self) -> Expr {
        let mut out = self.core.clone();
        for (mu, k) in self.witness.iter().enumerate() {
            out += d(k, mu);
        }
        out
    }
}

/// Integrates by parts until no monomial can be peeled, then tries an exact
/// linear ansatz when the leftover is still a null Lagrangian.
pub fn divergence_normal_form(l: &Expr, dim: usize) -> DivergenceNormalForm {
    let mut witness = vec![Expr::zero(); dim];
    let mut core = Expr::zero();
    let mut rest = l.clone();
    let mut steps = 0usize;

    while !rest.is_zero() {
        steps += 1;
        if steps > STEP_BUDGET {
            core += rest;
            break;
        }
        let (factors, c) = pick_highest(&rest);
        let m = Expr::from_monomials([crate::kernel::Monomial::new(c.clone(), factors.clone())]);
        rest -= &m;

        if factors.iter().all(|(g, _)| g.kind == Kind::Coordinate) {
            let (nu, k) = integrate_polynomial(&factors, &c, dim);
            witness[nu] += k;
            continue;
        }
        match peel(&m, &factors, &c) {
            Some((nu, w, remainder)) => {
                witness[nu] += w;
                rest += remainder;
            }
            None => core += m,
        }
    }

    if !core.is_zero() && is_null_lagrangian(&core) {
        if let Some(k) = solve_divergence(&core, dim) {
            for (mu, km) in k.into_iter().enumerate() {
                witness[mu] += km;
            }
            core = Expr::zero();
        }
    }
    DivergenceNormalForm { core, witness }
}

/// Jet with the highest (order, generator) rank; coordinates rank lowest.
fn leading_jet(factors: &[Factor]) -> Option<(Generator, u32)> {
    factors
        .iter()
        .filter(|(g, _)| g.is_jet())
        .max_by(|a, b| (a.0.order(), a.0).cmp(&(b.0.order(), b.0)))
        .copied()
}

fn pick_highest(e: &Expr) -> (Vec<Factor>, Coeff) {
    let rank = |f: &[Factor]| leading_jet(f).map(|(g, _)| (g.order(), g));
    let (f, c) = e
        .terms()
        .max_by(|a, b| rank(a.0).cmp(&rank(b.0)).then(a.0.cmp(b.0)))
        .unwrap();
    (f.clone(), c.clone())
}

/// c·x^a = ∂_ν(c·x^{a+e_ν}/(a_ν+1)) for the first ν with a_ν > 0.
fn integrate_polynomial(factors: &[Factor], c: &Coeff, dim: usize) -> (usize, Expr) {
    let nu = factors.first().map(|(g, _)| g.base as usize).unwrap_or(0).min(dim - 1);
    let mut raised = factors.to_vec();
    let a = match raised.iter_mut().find(|(g, _)| g.base as usize == nu) {
        Some(slot) => {
            slot.1 += 1;
            slot.1 - 1
        }
        None => {
            raised.push((Generator::coordinate(nu), 1));
            0
        }
    };
    let k = Expr::from_monomials([crate::kernel::Monomial::new(
        c / Coeff::from_integer((a as i64 + 1).into()),
        raised,
    )]);
    (nu, k)
}

/// One integration by parts of `m = c·u_J·P` with u_J = ∂_ν u_K linear and
/// of strictly highest order: m = ∂_ν(u_K P) − u_K ∂_ν P. When m itself
/// reappears on the right it is solved for.
fn peel(m: &Expr, factors: &[Factor], c: &Coeff) -> Option<(usize, Expr, Expr)> {
    let (g, exp) = leading_jet(factors)?;
    let top = g.order();
    if exp != 1 || top == 0 {
        return None;
    }
    let second = factors
        .iter()
        .filter(|(h, _)| h.is_jet() && *h != g)
        .map(|(h, _)| h.order())
        .max();
    if second.is_some_and(|s| s >= top) {
        return None;
    }
    let nu = g.jet.max_entry()?;
    let lower = Generator {
        jet: g.jet.lowered(nu)?,
        ..g
    };
    let p = m.partial_derivative(&g, Side::Left);
    let u_k = Expr::gen(lower);
    let w = &u_k * &p;
    let t = &u_k * &d(&p, nu);
    let lambda = t.coefficient_of(factors);
    let steep = second.is_none_or(|s| s + 2 <= top);
    if !steep && lambda.is_zero() {
        return None;
    }
    let denom = c + &lambda;
    if denom.is_zero() {
        return None;
    }
    let ratio = c / &denom;
    let t_rest = t.filter_terms(|f| f != factors);
    Some((nu, w.scale(&ratio), -t_rest.scale(&ratio)))
}

type Signature = (Vec<(Var, u32)>, [i32; MAX_DIM]);

/// Variable multiset and the vector (jet counts − coordinate exponents).
/// A total derivative ∂_μ raises the vector by e_μ and fixes the multiset.
fn signature(factors: &[Factor]) -> Signature {
    let mut vars: BTreeMap<Var, u32> = BTreeMap::new();
    let mut w = [0i32; MAX_DIM];
    for (g, e) in factors {
        match g.var() {
            Some(v) => {
                *vars.entry(v).or_default() += e;
                for (mu, slot) in w.iter_mut().enumerate() {
                    *slot += (g.jet.count(mu) as i32) * (*e as i32);
                }
            }
            None if g.kind == Kind::Coordinate => w[g.base as usize] -= *e as i32,
            None => {}
        }
    }
    (vars.into_iter().collect(), w)
}

/// Exact linear search for k^μ with Σ ∂_μ k^μ = `core`. Ansatz monomials
/// share the variable content of the core and stay within its jet order and
/// one more power of each coordinate.
pub fn solve_divergence(core: &Expr, dim: usize) -> Option<Vec<Expr>> {
    let max_order = core.max_jet_order();
    let max_x = core
        .terms()
        .flat_map(|(f, _)| f.iter().filter(|(g, _)| g.kind == Kind::Coordinate).map(|(_, e)| *e))
        .max()
        .unwrap_or(0)
        + 1;

    let groups = core.split_by(signature);
    let mut witness = vec![Expr::zero(); dim];
    for ((vars, w), part) in groups {
        let mut columns: Vec<(usize, Vec<Factor>)> = Vec::new();
        for mu in 0..dim {
            let mut target = w;
            target[mu] -= 1;
            for f in ansatz_monomials(&vars, target, dim, max_order, max_x) {
                columns.push((mu, f));
            }
        }
        let images: Vec<Expr> = columns
            .iter()
            .map(|(mu, f)| {
                d(
                    &Expr::from_monomials([crate::kernel::Monomial::new(Coeff::from_integer(1.into()), f.clone())]),
                    *mu,
                )
            })
            .collect();
        let mut rows: BTreeMap<Vec<Factor>, SparseRow> = BTreeMap::new();
        for (col, img) in images.iter().enumerate() {
            for (f, c) in img.terms() {
                rows.entry(f.clone()).or_default().entries.insert(col, c.clone());
            }
        }
        for (f, c) in part.terms() {
            rows.entry(f.clone()).or_default().rhs = c.clone();
        }
        let mut ech = Echelon::new();
        for row in rows.into_values() {
            if !ech.push(row) {
                return None;
            }
        }
        let x = ech.solve(columns.len())?;
        for ((mu, f), coef) in columns.into_iter().zip(x) {
            if !coef.is_zero() {
                witness[mu] += Expr::from_monomials([crate::kernel::Monomial::new(coef, f)]);
            }
        }
    }
    let mut check = Expr::zero();
    for (mu, k) in witness.iter().enumerate() {
        check += d(k, mu);
    }
    (check == *core).then_some(witness)
}

/// Canonical monomials (coefficient dropped) with the given variable multiset
/// and jet-minus-coordinate vector.
fn ansatz_monomials(
    vars: &[(Var, u32)],
    target: [i32; MAX_DIM],
    dim: usize,
    max_order: usize,
    max_x: u32,
) -> BTreeSet<Vec<Factor>> {
    let occurrences: Vec<Var> = vars
        .iter()
        .flat_map(|(v, e)| std::iter::repeat_n(*v, *e as usize))
        .collect();
    let mut out = BTreeSet::new();
    let mut xs = [0u32; MAX_DIM];
    loop {
        let mut counts = [0i32; MAX_DIM];
        let mut ok = true;
        for mu in 0..MAX_DIM {
            counts[mu] = target[mu] + xs[mu] as i32;
            if counts[mu] < 0 || (mu >= dim && counts[mu] != 0) {
                ok = false;
            }
        }
        if ok {
            let mut jets = Vec::with_capacity(occurrences.len());
            distribute(&occurrences, counts, max_order, dim, &mut jets, &mut |jets| {
                let mut raw: Vec<Factor> = occurrences.iter().zip(jets).map(|(v, j)| (v.jet(*j), 1)).collect();
                for (mu, &a) in xs.iter().enumerate().take(dim) {
                    if a > 0 {
                        raw.push((Generator::coordinate(mu), a));
                    }
                }
                let e = Expr::from_monomials([crate::kernel::Monomial::new(Coeff::from_integer(1.into()), raw)]);
                if let Some(f) = e.terms().next().map(|(f, _)| f.clone()) {
                    out.insert(f);
                };
            });
        }
        // next coordinate exponent vector
        let mut mu = 0;
        loop {
            if mu == dim {
                return out;
            }
            if xs[mu] < max_x {
                xs[mu] += 1;
                break;
            }
            xs[mu] = 0;
            mu += 1;
        }
    }
}

fn distribute(
    occurrences: &[Var],
    remaining: [i32; MAX_DIM],
    max_order: usize,
    dim: usize,
    acc: &mut Vec<MultiIndex>,
    emit: &mut dyn FnMut(&[MultiIndex]),
) {
    let i = acc.len();
    if i == occurrences.len() {
        if remaining.iter().all(|&r| r == 0) {
            emit(acc);
        }
        return;
    }
    // identical consecutive occurrences take non-increasing indices
    let bound = if i > 0 && occurrences[i - 1] == occurrences[i] {
        Some(acc[i - 1])
    } else {
        None
    };
    for mi in MultiIndex::all_up_to(dim, max_order) {
        if bound.is_some_and(|b| mi > b) {
            continue;
        }
        let mut next = remaining;
        let mut fits = true;
        for (mu, slot) in next.iter_mut().enumerate() {
            *slot -= mi.count(mu) as i32;
            if *slot < 0 {
                fits = false;
            }
        }
        if !fits {
            continue;
        }
        acc.push(mi);
        distribute(occurrences, next, max_order, dim, acc, emit);
        acc.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{int, rat};

    fn q(jet: &[usize]) -> Expr {
        Expr::jet(Var::field(0), MultiIndex::from_entries(jet))
    }

    fn v(jet: &[usize]) -> Expr {
        Expr::jet(Var::field(1), MultiIndex::from_entries(jet))
    }

    #[test]
    fn exact_divergence_has_zero_core() {
        let l = d(&q(&[]).pow(2), 0);
        let nf = divergence_normal_form(&l, 1);
        assert!(nf.core.is_zero());
        assert_eq!(nf.witness, vec![q(&[]).pow(2)]);
    }

    #[test]
    fn kinetic_term_stays_in_core() {
        let l = q(&[0]).pow(2).scale(&rat(1, 2));
        let nf = divergence_normal_form(&l, 1);
        assert!(!nf.core.is_zero());
        assert_eq!(nf.reconstruct(), l);
    }

    #[test]
    fn zero_is_trivial() {
        let nf = divergence_normal_form(&Expr::zero(), 2);
        assert!(nf.core.is_zero());
        assert!(nf.witness.iter().all(Expr::is_zero));
    }

    #[test]
    fn coordinate_polynomials_integrate() {
        let t = Expr::coordinate(0);
        let x = Expr::coordinate(1);
        let l = &(&t * &x) + &Expr::int(3);
        let nf = divergence_normal_form(&l, 2);
        assert!(nf.core.is_zero());
        assert_eq!(nf.reconstruct(), l);
    }

    #[test]
    fn by_parts_moves_derivative_off() {
        // x·q_t = ∂_t(x q) − q
        let l = &Expr::coordinate(0) * &q(&[0]);
        let nf = divergence_normal_form(&l, 1);
        assert_eq!(nf.core, -q(&[]));
        assert_eq!(nf.witness[0], &Expr::coordinate(0) * &q(&[]));
    }

    #[test]
    fn mixed_divergence_needs_the_linear_fallback() {
        // ∂_x(u v_t) − ∂_t(u v_x) = u_x v_t − u_t v_x
        let l = &(&q(&[1]) * &v(&[0])) - &(&q(&[0]) * &v(&[1]));
        let nf = divergence_normal_form(&l, 2);
        assert!(nf.core.is_zero());
        assert_eq!(nf.reconstruct(), l);
    }

    #[test]
    fn second_order_cross_term() {
        let l = d(&(&q(&[0]) * &v(&[0])), 0);
        let nf = divergence_normal_form(&l, 1);
        assert!(nf.core.is_zero());
        assert_eq!(nf.reconstruct(), l);
        let bad = &q(&[0, 0]) * &v(&[0]);
        let nf = divergence_normal_form(&bad, 1);
        assert!(!nf.core.is_zero());
        assert_eq!(nf.reconstruct(), bad);
    }

    #[test]
    fn odd_variables_integrate_with_signs() {
        let c0 = Expr::var(Var::ghost(0));
        let c1 = Expr::var(Var::ghost(1));
        let k = &c0 * &c1;
        let l = d(&k, 0);
        let nf = divergence_normal_form(&l, 1);
        assert!(nf.core.is_zero());
        assert_eq!(nf.reconstruct(), l);
        let l = d(&(&c0 * &d(&c0, 0)), 0).scale(&int(3));
        let nf = divergence_normal_form(&l, 1);
        assert!(nf.core.is_zero());
        assert_eq!(nf.reconstruct(), l);
    }
}
