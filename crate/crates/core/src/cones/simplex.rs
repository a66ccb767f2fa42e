//! Phase-one simplex over exact rationals on a sparse tableau.
//!
//! Solves `M x = b, x >= 0` and returns either a feasible point or a Farkas
//! vector `y` with `Mᵀy >= 0` and `bᵀy < 0`. Pricing is Dantzig's rule while
//! pivots make progress and Bland's rule during degenerate stalls, so the
//! method terminates on every input.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};

use super::linalg::{RationalMatrix, RationalVector};
use super::rational::Rational;

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const STALL_LIMIT: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Phase1 {
    Feasible(RationalVector),
    /// `y` with `Mᵀy >= 0` componentwise and `bᵀy < 0`.
    Infeasible(RationalVector),
}

#[derive(Clone, Debug, Default)]
struct SparseRow {
    idx: Vec<usize>,
    val: Vec<Rational>,
}

impl SparseRow {
    fn get(&self, j: usize) -> Option<&Rational> {
        self.idx.binary_search(&j).ok().map(|k| &self.val[k])
    }

    fn scale(&mut self, f: &Rational) {
        for v in &mut self.val {
            *v *= f;
        }
    }

    /// `self -= f * other`, dropping cancelled entries.
    fn sub_scaled(&mut self, f: &Rational, other: &SparseRow) {
        let mut idx = Vec::with_capacity(self.idx.len() + other.idx.len());
        let mut val = Vec::with_capacity(idx.capacity());
        let (mut a, mut b) = (0, 0);
        let self_val = std::mem::take(&mut self.val);
        let mut self_val = self_val.into_iter();
        let mut pending = self_val.next();
        while a < self.idx.len() || b < other.idx.len() {
            let ord = match (self.idx.get(a), other.idx.get(b)) {
                (Some(i), Some(j)) => i.cmp(j),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    idx.push(self.idx[a]);
                    val.push(pending.take().unwrap());
                    pending = self_val.next();
                    a += 1;
                }
                Ordering::Greater => {
                    idx.push(other.idx[b]);
                    val.push(-(f * &other.val[b]));
                    b += 1;
                }
                Ordering::Equal => {
                    let v = pending.take().unwrap() - f * &other.val[b];
                    pending = self_val.next();
                    if !v.is_zero() {
                        idx.push(self.idx[a]);
                        val.push(v);
                    }
                    a += 1;
                    b += 1;
                }
            }
        }
        self.idx = idx;
        self.val = val;
    }
}

struct Tableau {
    /// Number of structural columns; artificial `i` is column `n + i`.
    n: usize,
    rows: Vec<SparseRow>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Reduced costs over all columns.
    cost: SparseRow,
    /// Current phase-one objective (sum of artificials).
    objective: Rational,
}

impl Tableau {
    fn new(m: &RationalMatrix, b: &[Rational], sign: &[bool]) -> Self {
        let (rows_n, n) = (m.rows(), m.cols());
        let mut rows = Vec::with_capacity(rows_n);
        let mut rhs = Vec::with_capacity(rows_n);
        let mut col_sums = vec![Rational::zero(); n];
        for i in 0..rows_n {
            let mut row = SparseRow::default();
            for (j, a) in m.row_entries(i) {
                let a = if sign[i] { -a } else { a.clone() };
                col_sums[*j] += &a;
                row.idx.push(*j);
                row.val.push(a);
            }
            row.idx.push(n + i);
            row.val.push(Rational::one());
            rows.push(row);
            rhs.push(if sign[i] { -&b[i] } else { b[i].clone() });
        }
        let mut cost = SparseRow::default();
        for (j, s) in col_sums.into_iter().enumerate() {
            if !s.is_zero() {
                cost.idx.push(j);
                cost.val.push(-s);
            }
        }
        let objective = rhs.iter().fold(Rational::zero(), |acc, x| acc + x);
        Tableau {
            n,
            basis: (n..n + rows_n).collect(),
            rows,
            rhs,
            cost,
            objective,
        }
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, &Rational)> = None;
        for (k, &j) in self.cost.idx.iter().enumerate() {
            if j >= self.n {
                break;
            }
            let c = &self.cost.val[k];
            if !c.is_negative() {
                continue;
            }
            if bland {
                return Some(j);
            }
            if best.is_none_or(|(_, b)| c < b) {
                best = Some((j, c));
            }
        }
        best.map(|(j, _)| j)
    }

    fn leaving(&self, q: usize) -> Option<usize> {
        let mut best: Option<(usize, Rational)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            let Some(a) = row.get(q) else { continue };
            if !a.is_positive() {
                continue;
            }
            let ratio = &self.rhs[i] / a;
            let better = match &best {
                None => true,
                Some((r, br)) => match ratio.cmp(br) {
                    Ordering::Less => true,
                    Ordering::Equal => self.basis[i] < self.basis[*r],
                    Ordering::Greater => false,
                },
            };
            if better {
                best = Some((i, ratio));
            }
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let inv = self.rows[r].get(q).expect("pivot entry").recip();
        self.rows[r].scale(&inv);
        self.rhs[r] *= &inv;
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            if let Some(f) = self.rows[i].get(q).cloned() {
                self.rows[i].sub_scaled(&f, &pivot_row);
                let delta = &f * &self.rhs[r];
                self.rhs[i] -= delta;
            }
        }
        if let Some(f) = self.cost.get(q).cloned() {
            self.cost.sub_scaled(&f, &pivot_row);
            self.objective += &f * &self.rhs[r];
        }
        self.rows[r] = pivot_row;
        self.basis[r] = q;
    }

    fn run(&mut self) {
        let mut stall = 0;
        loop {
            if self.objective.is_zero() {
                return;
            }
            let Some(q) = self.entering(stall >= STALL_LIMIT) else {
                return;
            };
            let Some(r) = self.leaving(q) else {
                // Unbounded is impossible for phase one (objective >= 0).
                unreachable!("phase-one objective is bounded below");
            };
            let before = self.objective.clone();
            self.pivot(r, q);
            if self.objective < before {
                stall = 0;
            } else {
                stall += 1;
            }
        }
    }
}

/// Decides `M x = b, x >= 0`.
pub fn solve_nonnegative(m: &RationalMatrix, b: &RationalVector) -> Phase1 {
    assert_eq!(m.rows(), b.dim(), "right-hand side length");
    let sign: Vec<bool> = b.entries().iter().map(|x| x.is_negative()).collect();
    let mut t = Tableau::new(m, b.entries(), &sign);
    t.run();
    if t.objective.is_zero() {
        let mut x = vec![Rational::zero(); t.n];
        for (i, &j) in t.basis.iter().enumerate() {
            if j < t.n {
                x[j] = t.rhs[i].clone();
            }
        }
        return Phase1::Feasible(RationalVector::new(x));
    }
    // Simplex multipliers pi_i = 1 - (reduced cost of artificial i); they
    // satisfy M'ᵀpi <= 0 and b'ᵀpi > 0 for the sign-normalised system.
    let y = (0..m.rows())
        .map(|i| {
            let rc = t.cost.get(t.n + i).cloned().unwrap_or_else(Rational::zero);
            let pi = Rational::one() - rc;
            if sign[i] {
                pi
            } else {
                -pi
            }
        })
        .collect();
    Phase1::Infeasible(RationalVector::new(y))
}
