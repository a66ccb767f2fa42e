//! Dense exact vectors and matrices, plus fraction-free elimination.

use std::fmt;
use std::ops::Index;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::rational::{self, Rational};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct RationalVector(Vec<Rational>);

impl RationalVector {
    pub fn new(entries: Vec<Rational>) -> Self {
        RationalVector(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        RationalVector(vec![Rational::zero(); dim])
    }

    /// The `i`-th standard basis vector of length `dim`.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = Rational::one();
        v
    }

    pub fn from_i64(entries: &[i64]) -> Self {
        RationalVector(entries.iter().map(|&x| rational::int(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Rational> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|x| !x.is_negative())
    }

    /// Indices of nonzero entries.
    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| !self.0[i].is_zero()).collect()
    }

    pub fn sum(&self) -> Rational {
        self.0.iter().fold(Rational::zero(), |acc, x| acc + x)
    }

    pub fn dot(&self, other: &RationalVector) -> Rational {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .filter(|(a, b)| !a.is_zero() && !b.is_zero())
            .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn scaled(&self, s: &Rational) -> RationalVector {
        RationalVector(self.0.iter().map(|x| x * s).collect())
    }

    pub fn add(&self, other: &RationalVector) -> RationalVector {
        debug_assert_eq!(self.dim(), other.dim());
        RationalVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &RationalVector) -> RationalVector {
        debug_assert_eq!(self.dim(), other.dim());
        RationalVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> RationalVector {
        RationalVector(self.0.iter().map(|x| -x).collect())
    }

    /// Concatenation of several vectors.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a RationalVector>) -> RationalVector {
        RationalVector(parts.into_iter().flat_map(|v| v.0.iter().cloned()).collect())
    }
}

impl Index<usize> for RationalVector {
    type Output = Rational;

    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl From<Vec<Rational>> for RationalVector {
    fn from(v: Vec<Rational>) -> Self {
        RationalVector(v)
    }
}

impl fmt::Display for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Exact rational matrix stored as sorted sparse rows.
///
/// The logical content is the dense row-major `rows × cols` array; explicit
/// zeros are never stored, so structural equality is value equality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<(usize, Rational)>>,
}

impl RationalMatrix {
    /// Builds from a dense row-major entry list of length `rows · cols`.
    pub fn new(rows: usize, cols: usize, entries: Vec<Rational>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::mismatch("matrix entries", rows * cols, entries.len()));
        }
        let mut data = vec![Vec::new(); rows];
        for (k, v) in entries.into_iter().enumerate() {
            if !v.is_zero() {
                data[k / cols.max(1)].push((k % cols.max(1), v));
            }
        }
        Ok(RationalMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![Vec::new(); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        RationalMatrix {
            rows: n,
            cols: n,
            data: (0..n).map(|i| vec![(i, Rational::one())]).collect(),
        }
    }

    /// Builds from integer rows; panics on ragged input.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            for (j, &x) in r.iter().enumerate() {
                if x != 0 {
                    m.data[i].push((j, rational::int(x)));
                }
            }
        }
        m
    }

    /// Matrix whose columns are the given vectors, each of length `rows`.
    pub fn from_columns(rows: usize, columns: &[RationalVector]) -> Result<Self> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.dim() != rows {
                return Err(Error::mismatch("matrix column", rows, c.dim()));
            }
            for i in 0..rows {
                if !c[i].is_zero() {
                    m.data[i].push((j, c[i].clone()));
                }
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Dense row-major copy of the entries.
    pub fn to_dense(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.rows * self.cols];
        for (i, row) in self.data.iter().enumerate() {
            for (j, v) in row {
                out[i * self.cols + j] = v.clone();
            }
        }
        out
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        match self.data[i].binary_search_by_key(&j, |(c, _)| *c) {
            Ok(k) => self.data[i][k].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        let row = &mut self.data[i];
        match row.binary_search_by_key(&j, |(c, _)| *c) {
            Ok(k) if v.is_zero() => {
                row.remove(k);
            }
            Ok(k) => row[k].1 = v,
            Err(_) if v.is_zero() => {}
            Err(k) => row.insert(k, (j, v)),
        }
    }

    /// Nonzero entries of row `i` as `(column, value)`, sorted by column.
    pub fn row_entries(&self, i: usize) -> &[(usize, Rational)] {
        &self.data[i]
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }

    pub fn column(&self, j: usize) -> RationalVector {
        RationalVector((0..self.rows).map(|i| self.get(i, j)).collect())
    }

    pub fn transpose(&self) -> RationalMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for (i, row) in self.data.iter().enumerate() {
            for (j, v) in row {
                t.data[*j].push((i, v.clone()));
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &RationalVector) -> Result<RationalVector> {
        if x.dim() != self.cols {
            return Err(Error::mismatch("matrix-vector product", self.cols, x.dim()));
        }
        Ok(RationalVector(
            self.data
                .iter()
                .map(|row| {
                    row.iter()
                        .filter(|(j, _)| !x[*j].is_zero())
                        .fold(Rational::zero(), |acc, (j, a)| acc + a * &x[*j])
                })
                .collect(),
        ))
    }

    /// `Aᵀ y`.
    pub fn tr_mul_vec(&self, y: &RationalVector) -> Result<RationalVector> {
        if y.dim() != self.rows {
            return Err(Error::mismatch("transpose-vector product", self.rows, y.dim()));
        }
        let mut out = vec![Rational::zero(); self.cols];
        for (i, row) in self.data.iter().enumerate() {
            if y[i].is_zero() {
                continue;
            }
            for (j, a) in row {
                out[*j] += a * &y[i];
            }
        }
        Ok(RationalVector(out))
    }

    pub fn mul(&self, other: &RationalMatrix) -> Result<RationalMatrix> {
        if self.cols != other.rows {
            return Err(Error::mismatch("matrix product", self.cols, other.rows));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        let mut acc: Vec<Rational> = vec![Rational::zero(); other.cols];
        let mut touched: Vec<usize> = Vec::new();
        for (i, row) in self.data.iter().enumerate() {
            for (k, a) in row {
                for (j, b) in &other.data[*k] {
                    if acc[*j].is_zero() {
                        touched.push(*j);
                    }
                    acc[*j] += a * b;
                }
            }
            touched.sort_unstable();
            touched.dedup();
            for &j in &touched {
                let v = std::mem::replace(&mut acc[j], Rational::zero());
                if !v.is_zero() {
                    out.data[i].push((j, v));
                }
            }
            touched.clear();
        }
        Ok(out)
    }

    pub fn neg(&self) -> RationalMatrix {
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|r| r.iter().map(|(j, v)| (*j, -v)).collect())
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Vec::is_empty)
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &RationalMatrix) -> Result<RationalMatrix> {
        if self.cols != other.cols {
            return Err(Error::mismatch("vertical stack", self.cols, other.cols));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(RationalMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &RationalMatrix) -> Result<RationalMatrix> {
        if self.rows != other.rows {
            return Err(Error::mismatch("horizontal stack", self.rows, other.rows));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| {
                let mut r = a.clone();
                r.extend(b.iter().map(|(j, v)| (j + self.cols, v.clone())));
                r
            })
            .collect();
        Ok(RationalMatrix {
            rows: self.rows,
            cols: self.cols + other.cols,
            data,
        })
    }

    /// Copies `block` into this matrix with its top-left corner at `(r0, c0)`,
    /// adding to whatever is already there.
    pub fn add_block(&mut self, r0: usize, c0: usize, block: &RationalMatrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for (i, row) in block.data.iter().enumerate() {
            for (j, v) in row {
                let cur = self.get(r0 + i, c0 + j);
                self.set(r0 + i, c0 + j, cur + v);
            }
        }
    }

    /// Multiplies every entry of row `i` by `s`.
    pub fn scale_row(&mut self, i: usize, s: &Rational) {
        if s.is_zero() {
            self.data[i].clear();
        } else {
            for (_, v) in &mut self.data[i] {
                *v *= s;
            }
        }
    }

    pub fn rank(&self) -> usize {
        Echelon::new(self).pivots.len()
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let cells: Vec<String> = (0..self.cols)
                .map(|j| format!("{:>4}", self.get(i, j)))
                .collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

type IntRow = Vec<(usize, BigInt)>;

/// Integer row-echelon form from fraction-free elimination.
///
/// Each row is scaled to primitive integers; eliminating column `c` from row
/// `i` with pivot row `r` replaces `i` by `r[c]·i − i[c]·r` divided by its
/// content. Only rows that actually hold column `c` are touched, so banded
/// coboundaries keep their sparsity.
struct Echelon {
    /// Pivot rows in elimination order; `pivots[k]` is the leading column of
    /// `rows[k]`, and `rows[k]` has no entries left of it.
    rows: Vec<IntRow>,
    pivots: Vec<usize>,
    cols: usize,
}

fn primitive_row(row: IntRow) -> IntRow {
    let g = row.iter().fold(BigInt::zero(), |acc, (_, v)| acc.gcd(v));
    if g.is_zero() || g.is_one() {
        return row;
    }
    row.into_iter().map(|(j, v)| (j, v / &g)).collect()
}

fn eliminate(target: &IntRow, pivot: &IntRow, c: usize) -> IntRow {
    let p = &pivot[pivot.binary_search_by_key(&c, |e| e.0).unwrap()].1;
    let t = &target[target.binary_search_by_key(&c, |e| e.0).unwrap()].1;
    let mut out = Vec::with_capacity(target.len() + pivot.len());
    let (mut a, mut b) = (0, 0);
    while a < target.len() || b < pivot.len() {
        let ja = target.get(a).map(|e| e.0);
        let jb = pivot.get(b).map(|e| e.0);
        let (j, v) = match (ja, jb) {
            (Some(x), Some(y)) if x == y => {
                let v = p * &target[a].1 - t * &pivot[b].1;
                a += 1;
                b += 1;
                (x, v)
            }
            (Some(x), Some(y)) if x < y => {
                a += 1;
                (x, p * &target[a - 1].1)
            }
            (Some(x), None) => {
                a += 1;
                (x, p * &target[a - 1].1)
            }
            (_, Some(y)) => {
                b += 1;
                (y, -(t * &pivot[b - 1].1))
            }
            (None, None) => unreachable!(),
        };
        if !v.is_zero() {
            out.push((j, v));
        }
    }
    primitive_row(out)
}

impl Echelon {
    fn new(a: &RationalMatrix) -> Self {
        // Clear denominators row by row; this preserves the row space.
        let mut work: Vec<Option<IntRow>> = a
            .data
            .iter()
            .map(|row| {
                let l = row.iter().fold(BigInt::one(), |acc, (_, x)| acc.lcm(x.denom()));
                let r: IntRow = row
                    .iter()
                    .map(|(j, x)| (*j, x.numer() * (&l / x.denom())))
                    .collect();
                (!r.is_empty()).then(|| primitive_row(r))
            })
            .collect();
        // Column -> rows currently holding a nonzero there.
        let mut holders: Vec<std::collections::BTreeSet<usize>> =
            vec![Default::default(); a.cols()];
        for (i, r) in work.iter().enumerate() {
            if let Some(r) = r {
                for (j, _) in r {
                    holders[*j].insert(i);
                }
            }
        }
        let mut rows = Vec::new();
        let mut pivots = Vec::new();
        for c in 0..a.cols() {
            let Some(&p) = holders[c]
                .iter()
                .min_by_key(|&&i| (work[i].as_ref().map_or(usize::MAX, Vec::len), i))
            else {
                continue;
            };
            let prow = work[p].take().unwrap();
            for (j, _) in &prow {
                holders[*j].remove(&p);
            }
            let others: Vec<usize> = holders[c].iter().copied().collect();
            for i in others {
                let old = work[i].take().unwrap();
                for (j, _) in &old {
                    holders[*j].remove(&i);
                }
                let new = eliminate(&old, &prow, c);
                for (j, _) in &new {
                    holders[*j].insert(i);
                }
                if !new.is_empty() {
                    work[i] = Some(new);
                }
            }
            rows.push(prow);
            pivots.push(c);
        }
        Echelon {
            rows,
            pivots,
            cols: a.cols(),
        }
    }
}

/// Exact basis of `{x : A x = 0}`, one primitive integer vector per free
/// column (free coordinate set to a positive value). Empty iff the kernel is
/// trivial.
pub fn kernel_basis(a: &RationalMatrix) -> Vec<RationalVector> {
    let ech = Echelon::new(a);
    let mut is_pivot = vec![false; ech.cols];
    for &p in &ech.pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::new();
    for free in (0..ech.cols).filter(|&c| !is_pivot[c]) {
        let mut x = vec![Rational::zero(); ech.cols];
        x[free] = Rational::one();
        // Pivot rows only reference columns at or right of their pivot, and
        // pivots increase, so reverse order is a valid back-substitution.
        for (row, &p) in ech.rows.iter().zip(&ech.pivots).rev() {
            let mut acc = Rational::zero();
            let mut lead = None;
            for (j, v) in row {
                if *j == p {
                    lead = Some(v);
                } else if !x[*j].is_zero() {
                    acc += Rational::from_integer(v.clone()) * &x[*j];
                }
            }
            if !acc.is_zero() {
                x[p] = -acc / Rational::from_integer(lead.unwrap().clone());
            }
        }
        basis.push(primitive(x));
    }
    basis
}

/// Scales a nonzero rational vector to coprime integers, keeping its direction.
fn primitive(x: Vec<Rational>) -> RationalVector {
    let l = x.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let ints: Vec<BigInt> = x.iter().map(|v| v.numer() * (&l / v.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    let g = if g.is_zero() { BigInt::one() } else { g };
    RationalVector(
        ints.into_iter()
            .map(|v| Rational::from_integer(v / &g))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::rational::{int, ratio};

    #[test]
    fn identity_has_trivial_kernel() {
        assert!(kernel_basis(&RationalMatrix::identity(2)).is_empty());
    }

    #[test]
    fn zero_matrix_kernel_is_everything() {
        let k = kernel_basis(&RationalMatrix::zeros(1, 3));
        assert_eq!(k.len(), 3);
    }

    #[test]
    fn kernel_with_fractions() {
        // x/2 + y/3 - z = 0
        let a = RationalMatrix::new(1, 3, vec![ratio(1, 2), ratio(1, 3), int(-1)]).unwrap();
        let k = kernel_basis(&a);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(a.mul_vec(v).unwrap().is_zero());
        }
        assert_eq!(RationalMatrix::from_columns(3, &k).unwrap().rank(), 2);
    }

    #[test]
    fn rank_deficient_with_skipped_column() {
        let a = RationalMatrix::from_i64_rows(&[&[0, 1, 2, 3], &[0, 2, 4, 7], &[0, 3, 6, 10]]);
        assert_eq!(a.rank(), 2);
        let k = kernel_basis(&a);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(a.mul_vec(v).unwrap().is_zero());
        }
    }

    #[test]
    fn products_and_stacks() {
        let a = RationalMatrix::from_i64_rows(&[&[1, 2], &[3, 4]]);
        let x = RationalVector::from_i64(&[1, -1]);
        assert_eq!(a.mul_vec(&x).unwrap(), RationalVector::from_i64(&[-1, -1]));
        assert_eq!(a.tr_mul_vec(&x).unwrap(), RationalVector::from_i64(&[-2, -2]));
        assert_eq!(a.mul(&RationalMatrix::identity(2)).unwrap(), a);
        assert_eq!(a.transpose().transpose(), a);
        assert_eq!(a.vstack(&a).unwrap().rows(), 4);
        assert_eq!(a.hstack(&a).unwrap().cols(), 4);
        assert!(a.mul_vec(&RationalVector::zeros(3)).is_err());
        assert!(RationalMatrix::new(2, 2, vec![int(1)]).is_err());
    }
}
