//! Seeded samplers of polynomial local functions, forms, evolutionary fields
//! and operators, for property checks and randomized pipeline steps.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diffop::{IndexRange, TotalDiffOp};
use crate::jet::EvolutionaryField;
use crate::kernel::{rat, Coeff, Expr, Generator, MultiIndex, Var};

#[derive(Clone, Debug)]
pub struct Sampler {
    rng: ChaCha8Rng,
    pub dim: usize,
    pub n_fields: usize,
    /// Ghost slots available to [`Sampler::graded_function`].
    pub n_ghosts: usize,
    pub max_order: usize,
    pub max_terms: usize,
    pub max_degree: usize,
}

impl Sampler {
    pub fn new(seed: u64, dim: usize, n_fields: usize) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            dim,
            n_fields,
            n_ghosts: 0,
            max_order: 2,
            max_terms: 3,
            max_degree: 2,
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn multi_index(&mut self, max_len: usize) -> MultiIndex {
        let len = self.rng.gen_range(0..=max_len);
        let entries: Vec<usize> = (0..len).map(|_| self.rng.gen_range(0..self.dim)).collect();
        MultiIndex::from_entries(&entries)
    }

    /// A nonzero rational with small numerator and denominator.
    pub fn coeff(&mut self) -> Coeff {
        let n = *[-3i64, -2, -1, 1, 2, 3].choose(&mut self.rng).unwrap();
        let d = self.rng.gen_range(1..=3);
        rat(n, d)
    }

    fn field_jet(&mut self) -> Generator {
        let i = self.rng.gen_range(0..self.n_fields);
        let mi = self.multi_index(self.max_order);
        Var::field(i).jet(mi)
    }

    fn even_factor(&mut self) -> Expr {
        if self.n_fields == 0 || self.rng.gen_bool(0.25) {
            Expr::coordinate(self.rng.gen_range(0..self.dim))
        } else {
            Expr::gen(self.field_jet())
        }
    }

    /// A polynomial in coordinates and field jets.
    pub fn local_function(&mut self) -> Expr {
        let terms = self.rng.gen_range(1..=self.max_terms);
        let mut out = Expr::zero();
        for _ in 0..terms {
            let deg = self.rng.gen_range(0..=self.max_degree);
            let mut m = Expr::constant(self.coeff());
            for _ in 0..deg {
                m = &m * &self.even_factor();
            }
            out += m;
        }
        out
    }

    /// Like [`Sampler::local_function`] but each term may carry up to two
    /// ghost jets, so the result mixes parities.
    pub fn graded_function(&mut self) -> Expr {
        let mut out = self.local_function();
        if self.n_ghosts == 0 {
            return out;
        }
        let terms = self.rng.gen_range(1..=self.max_terms);
        for _ in 0..terms {
            let mut m = &Expr::constant(self.coeff()) * &self.even_factor();
            for _ in 0..self.rng.gen_range(1..=2) {
                let a = self.rng.gen_range(0..self.n_ghosts);
                let mi = self.multi_index(self.max_order);
                m = &m * &Expr::jet(Var::ghost(a), mi);
            }
            out += m;
        }
        out
    }

    /// A horizontal form Σ f_I dx^I of the given degree.
    pub fn horizontal_form(&mut self, degree: usize) -> Expr {
        let mut out = Expr::zero();
        for _ in 0..self.rng.gen_range(1..=2) {
            let mut mus: Vec<usize> = (0..self.dim).collect();
            mus.shuffle(&mut self.rng);
            let mut term = self.graded_function();
            for &mu in mus.iter().take(degree) {
                term = &term * &Expr::basis_form(mu);
            }
            out += term;
        }
        out
    }

    /// An even evolutionary field on the physical fields.
    pub fn evolutionary_field(&mut self) -> EvolutionaryField {
        let comps: Vec<Expr> = (0..self.n_fields).map(|_| self.local_function()).collect();
        EvolutionaryField::on_fields(comps)
    }

    pub fn vector(&mut self, len: usize) -> Vec<Expr> {
        (0..len).map(|_| self.local_function()).collect()
    }

    /// A total differential operator with a few nonzero entries of order at
    /// most `max_order`.
    pub fn operator(&mut self, out: IndexRange, inp: IndexRange) -> TotalDiffOp {
        let mut op = TotalDiffOp::zero(out, inp);
        for _ in 0..self.rng.gen_range(1..=3) {
            let a = self.rng.gen_range(0..out.len);
            let b = self.rng.gen_range(0..inp.len);
            let mi = self.multi_index(self.max_order);
            let c = self.local_function();
            op.add_coeff(a, b, mi, c);
        }
        op
    }
}
