//! Exact sparse Gaussian elimination over the rationals.
//!
//! Rows are reduced one at a time against an echelon basis whose pivot is
//! the smallest column of each stored row. A particular solution is read off
//! by back-substitution with all free unknowns set to zero, so the result is
//! deterministic for a fixed row and column order.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::kernel::Coeff;

/// One linear equation `Σ row[c]·x_c = rhs`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseRow {
    pub entries: BTreeMap<usize, Coeff>,
    pub rhs: Coeff,
}

impl SparseRow {
    pub fn new(entries: BTreeMap<usize, Coeff>, rhs: Coeff) -> Self {
        SparseRow { entries, rhs }
    }
}

#[derive(Debug, Default)]
pub struct Echelon {
    pivots: BTreeMap<usize, SparseRow>,
    inconsistent: bool,
}

impl Echelon {
    pub fn new() -> Self {
        Echelon::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_consistent(&self) -> bool {
        !self.inconsistent
    }

    /// Adds an equation. Returns `false` once the system became inconsistent.
    pub fn push(&mut self, mut row: SparseRow) -> bool {
        if self.inconsistent {
            return false;
        }
        row.entries.retain(|_, v| !v.is_zero());
        let mut cursor = 0usize;
        loop {
            let next = row.entries.range(cursor..).next().map(|(c, v)| (*c, v.clone()));
            let Some((col, val)) = next else {
                if !row.rhs.is_zero() {
                    self.inconsistent = true;
                    return false;
                }
                return true;
            };
            match self.pivots.get(&col) {
                Some(pivot) => {
                    for (pc, pv) in &pivot.entries {
                        let delta = &val * pv;
                        let slot = row.entries.entry(*pc).or_insert_with(Coeff::zero);
                        *slot -= delta;
                        if slot.is_zero() {
                            row.entries.remove(pc);
                        }
                    }
                    row.rhs -= &val * &pivot.rhs;
                    cursor = col + 1;
                }
                None => {
                    let inv = Coeff::one() / val;
                    for v in row.entries.values_mut() {
                        *v *= &inv;
                    }
                    row.rhs *= &inv;
                    self.pivots.insert(col, row);
                    return true;
                }
            }
        }
    }

    /// A particular solution over `ncols` unknowns, free unknowns zero.
    pub fn solve(&self, ncols: usize) -> Option<Vec<Coeff>> {
        if self.inconsistent {
            return None;
        }
        let mut x = vec![Coeff::zero(); ncols];
        for (col, row) in self.pivots.iter().rev() {
            let mut acc = row.rhs.clone();
            for (c, v) in row.entries.range(col + 1..) {
                if !x[*c].is_zero() {
                    acc -= v * &x[*c];
                }
            }
            x[*col] = acc;
        }
        Some(x)
    }
}

/// Solves a full system, or returns `None` when it is inconsistent.
pub fn solve(rows: Vec<SparseRow>, ncols: usize) -> Option<Vec<Coeff>> {
    let mut ech = Echelon::new();
    for r in rows {
        if !ech.push(r) {
            return None;
        }
    }
    ech.solve(ncols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{int, rat};

    fn row(entries: &[(usize, i64)], rhs: i64) -> SparseRow {
        SparseRow::new(entries.iter().map(|&(c, v)| (c, int(v))).collect(), int(rhs))
    }

    fn check(rows: &[SparseRow], x: &[Coeff]) {
        for r in rows {
            let lhs: Coeff = r.entries.iter().map(|(c, v)| v * &x[*c]).sum();
            assert_eq!(lhs, r.rhs);
        }
    }

    #[test]
    fn solves_square_system() {
        let rows = vec![row(&[(0, 2), (1, 1)], 3), row(&[(0, 1), (1, -1)], 0)];
        let x = solve(rows.clone(), 2).unwrap();
        assert_eq!(x, vec![int(1), int(1)]);
        check(&rows, &x);
    }

    #[test]
    fn underdetermined_sets_free_to_zero() {
        let rows = vec![row(&[(0, 1), (1, 1), (2, 1)], 6), row(&[(1, 2), (2, 1)], 4)];
        let x = solve(rows.clone(), 3).unwrap();
        check(&rows, &x);
        assert_eq!(x[2], int(0));
    }

    #[test]
    fn detects_inconsistency() {
        let rows = vec![row(&[(0, 1), (1, 1)], 1), row(&[(0, 2), (1, 2)], 3)];
        assert!(solve(rows, 2).is_none());
    }

    #[test]
    fn rational_pivots() {
        let rows = vec![row(&[(0, 3)], 1), row(&[(0, 1), (1, 3)], 0)];
        let x = solve(rows, 2).unwrap();
        assert_eq!(x, vec![rat(1, 3), rat(-1, 9)]);
    }
}
