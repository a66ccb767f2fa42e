//! Exact reductions of the positive-kernel problem `Ax = 0, x >= 0, x != 0`.
//!
//! Every reduction is recorded so that a witness of the reduced problem
//! lifts to a witness of the original, and a Stiemke certificate of the
//! reduced problem lifts to one of the original.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_traits::{One, Signed, Zero};

use super::linalg::RationalMatrix;
use super::rational::Rational;

type Column = BTreeMap<usize, Rational>;

#[derive(Debug)]
enum Step {
    /// Every entry of `row` has the same sign, so its columns are zero.
    Forcing {
        row: usize,
        positive: bool,
        columns: Vec<(usize, Column)>,
    },
    /// `row` reads `a x_j + b x_k = 0` with `ab < 0`; `x_k = t x_j` and
    /// column `k` is folded into `j`.
    Merge {
        row: usize,
        j: usize,
        k: usize,
        t: Rational,
        col_j: Column,
        col_k: Column,
    },
    /// Column `k` is a positive multiple of another live column.
    Parallel { k: usize },
}

pub(crate) enum Outcome {
    /// Unnormalized nonnegative kernel vector of the original matrix.
    Witness(Vec<Rational>),
    /// What is left: original indices of live rows and columns and the
    /// reduced matrix on them.
    Reduced {
        rows: Vec<usize>,
        cols: Vec<usize>,
        matrix: RationalMatrix,
    },
}

pub(crate) struct Presolve {
    m: usize,
    n: usize,
    steps: Vec<Step>,
    cols: Vec<Option<Column>>,
    rows: Vec<BTreeSet<usize>>,
    queue: VecDeque<usize>,
    queued: Vec<bool>,
}

impl Presolve {
    pub(crate) fn run(a: &RationalMatrix) -> (Self, Outcome) {
        let (m, n) = (a.rows(), a.cols());
        let mut cols: Vec<Option<Column>> = vec![Some(Column::new()); n];
        let mut rows = vec![BTreeSet::new(); m];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, v) in a.row_entries(i) {
                cols[*j].as_mut().unwrap().insert(i, v.clone());
                row.insert(*j);
            }
        }
        let mut p = Presolve {
            m,
            n,
            steps: Vec::new(),
            cols,
            rows,
            queue: (0..m).collect(),
            queued: vec![true; m],
        };
        let outcome = p.reduce();
        (p, outcome)
    }

    fn touch(&mut self, i: usize) {
        if !self.queued[i] {
            self.queued[i] = true;
            self.queue.push_back(i);
        }
    }

    fn zero_column(&self) -> Option<usize> {
        self.cols
            .iter()
            .position(|c| c.as_ref().is_some_and(BTreeMap::is_empty))
    }

    fn reduce(&mut self) -> Outcome {
        loop {
            if let Some(j) = self.zero_column() {
                let mut x = vec![Rational::zero(); self.n];
                x[j] = Rational::one();
                return Outcome::Witness(self.lift_witness(x));
            }
            while let Some(r) = self.queue.pop_front() {
                self.queued[r] = false;
                if let Some(j) = self.reduce_row(r) {
                    let mut x = vec![Rational::zero(); self.n];
                    x[j] = Rational::one();
                    return Outcome::Witness(self.lift_witness(x));
                }
            }
            if !self.drop_parallel() {
                break;
            }
        }
        let rows: Vec<usize> = (0..self.m).filter(|&i| !self.rows[i].is_empty()).collect();
        let cols: Vec<usize> = (0..self.n).filter(|&j| self.cols[j].is_some()).collect();
        let row_pos: HashMap<usize, usize> = rows.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let mut matrix = RationalMatrix::zeros(rows.len(), cols.len());
        for (q, &j) in cols.iter().enumerate() {
            for (i, v) in self.cols[j].as_ref().unwrap() {
                matrix.set(row_pos[i], q, v.clone());
            }
        }
        Outcome::Reduced { rows, cols, matrix }
    }

    /// Applies a forcing or doubleton reduction to row `r`. Returns a column
    /// that became zero, if any.
    fn reduce_row(&mut self, r: usize) -> Option<usize> {
        let live: Vec<usize> = self.rows[r].iter().copied().collect();
        if live.is_empty() {
            return None;
        }
        let value = |p: &Self, j: usize| p.cols[j].as_ref().unwrap()[&r].clone();
        let positive = value(self, live[0]).is_positive();
        if live.iter().all(|&j| value(self, j).is_positive() == positive) {
            let mut columns = Vec::with_capacity(live.len());
            for j in live {
                let col = self.cols[j].take().unwrap();
                for &i in col.keys() {
                    self.rows[i].remove(&j);
                    self.touch(i);
                }
                columns.push((j, col));
            }
            self.steps.push(Step::Forcing {
                row: r,
                positive,
                columns,
            });
            return None;
        }
        if live.len() != 2 {
            return None;
        }
        let (j, k) = (live[0], live[1]);
        let t = -(value(self, j) / value(self, k));
        let col_k = self.cols[k].take().unwrap();
        let col_j = self.cols[j].clone().unwrap();
        let merged = self.cols[j].as_mut().unwrap();
        for (&i, v) in &col_k {
            let entry = merged.remove(&i).unwrap_or_else(Rational::zero) + &t * v;
            self.rows[i].remove(&k);
            if entry.is_zero() {
                self.rows[i].remove(&j);
            } else {
                merged.insert(i, entry);
                self.rows[i].insert(j);
            }
        }
        let empty = merged.is_empty();
        for &i in col_k.keys() {
            self.touch(i);
        }
        self.steps.push(Step::Merge {
            row: r,
            j,
            k,
            t,
            col_j,
            col_k,
        });
        empty.then_some(j)
    }

    /// Removes columns that are positive multiples of an earlier live
    /// column. Returns whether anything changed.
    fn drop_parallel(&mut self) -> bool {
        let mut seen: HashMap<Vec<(usize, Rational)>, usize> = HashMap::new();
        let mut changed = false;
        for k in 0..self.n {
            let Some(col) = &self.cols[k] else { continue };
            let Some(scale) = col.values().next().map(Signed::abs) else {
                continue;
            };
            let key: Vec<(usize, Rational)> = col.iter().map(|(&i, v)| (i, v / &scale)).collect();
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(key) {
                e.insert(k);
            } else {
                let col = self.cols[k].take().unwrap();
                for &i in col.keys() {
                    self.rows[i].remove(&k);
                    self.touch(i);
                }
                self.steps.push(Step::Parallel { k });
                changed = true;
            }
        }
        changed
    }

    /// Expands a kernel vector of the reduced problem (indexed by original
    /// columns, zero on eliminated ones).
    pub(crate) fn lift_witness(&self, mut x: Vec<Rational>) -> Vec<Rational> {
        for step in self.steps.iter().rev() {
            match step {
                Step::Merge { j, k, t, .. } => x[*k] = t * &x[*j],
                Step::Parallel { k } => x[*k] = Rational::zero(),
                Step::Forcing { .. } => {}
            }
        }
        x
    }

    /// Expands a certificate of the reduced problem (indexed by original
    /// rows, zero on eliminated ones) to one of the original matrix.
    pub(crate) fn lift_certificate(&self, mut y: Vec<Rational>) -> Vec<Rational> {
        let dot = |col: &Column, y: &[Rational], skip: usize| -> Rational {
            col.iter()
                .filter(|(&i, _)| i != skip)
                .map(|(&i, v)| v * &y[i])
                .sum()
        };
        for step in self.steps.iter().rev() {
            match step {
                Step::Forcing {
                    row,
                    positive,
                    columns,
                } => {
                    // a_j·y_r must exceed -v_j for every column of the row.
                    let mut need = Rational::zero();
                    for (_, col) in columns {
                        let v = dot(col, &y, *row);
                        let bound = -v / col[row].abs();
                        if bound > need {
                            need = bound;
                        }
                    }
                    let mag = need + Rational::one();
                    y[*row] = if *positive { mag } else { -mag };
                }
                Step::Merge {
                    row, col_j, col_k, ..
                } => {
                    let mut lo: Option<Rational> = None;
                    let mut hi: Option<Rational> = None;
                    for col in [col_j, col_k] {
                        let c = &col[row];
                        let bound = -dot(col, &y, *row) / c;
                        if c.is_positive() {
                            lo = Some(bound);
                        } else {
                            hi = Some(bound);
                        }
                    }
                    let (lo, hi) = (lo.expect("one positive entry"), hi.expect("one negative entry"));
                    debug_assert!(lo < hi, "reduced certificate lifts through a doubleton row");
                    y[*row] = (lo + hi) / Rational::from_integer(2.into());
                }
                Step::Parallel { .. } => {}
            }
        }
        y
    }
}
