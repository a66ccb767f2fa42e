//! Exact rational linear algebra, polyhedral cones, and positive-kernel
//! feasibility with checkable certificates.

pub mod linalg;
mod presolve;
pub mod rational;
pub mod simplex;

use num_traits::{One, Signed, Zero};

pub use linalg::{kernel_basis, RationalMatrix, RationalVector};
pub use rational::Rational;

use crate::error::{Error, Result};
use presolve::{Outcome, Presolve};
use simplex::{solve_nonnegative, Phase1};

/// Finitely generated cone `{ Σ λᵢ gᵢ : λ >= 0 }` in `ℚ^ambient_dim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyhedralCone {
    ambient_dim: usize,
    generators: Vec<RationalVector>,
    labels: Option<Vec<String>>,
    free: bool,
}

impl PolyhedralCone {
    /// Cone on explicit generators. Generators must be nonzero and of the
    /// ambient dimension; redundant generators are allowed.
    pub fn new(
        ambient_dim: usize,
        generators: Vec<RationalVector>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        for g in &generators {
            if g.dim() != ambient_dim {
                return Err(Error::mismatch("cone generator", ambient_dim, g.dim()));
            }
            if g.is_zero() {
                return Err(Error::Input("cone generator is the zero vector".into()));
            }
        }
        if let Some(l) = &labels {
            if l.len() != generators.len() {
                return Err(Error::mismatch("cone labels", generators.len(), l.len()));
            }
        }
        let free = generators.len() == ambient_dim
            && generators
                .iter()
                .enumerate()
                .all(|(i, g)| *g == RationalVector::unit(ambient_dim, i));
        Ok(PolyhedralCone {
            ambient_dim,
            generators,
            labels,
            free,
        })
    }

    /// Free cone (nonnegative orthant) on the given labels.
    pub fn free(labels: Vec<String>) -> Self {
        let d = labels.len();
        PolyhedralCone {
            ambient_dim: d,
            generators: (0..d).map(|i| RationalVector::unit(d, i)).collect(),
            labels: Some(labels),
            free: true,
        }
    }

    pub fn orthant(dim: usize) -> Self {
        let mut c = Self::free(Vec::new());
        c.ambient_dim = dim;
        c.generators = (0..dim).map(|i| RationalVector::unit(dim, i)).collect();
        c.labels = None;
        c
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn generators(&self) -> &[RationalVector] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// True when the generators are exactly the standard basis.
    pub fn is_free(&self) -> bool {
        self.free
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of generator `i`, or a positional name when unlabeled.
    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => format!("g{i}"),
        }
    }

    /// `ambient_dim × len` matrix with the generators as columns.
    pub fn generator_matrix(&self) -> RationalMatrix {
        RationalMatrix::from_columns(self.ambient_dim, &self.generators)
            .expect("generator dimensions checked at construction")
    }

    /// `Σ λᵢ gᵢ`.
    pub fn combine(&self, lambda: &RationalVector) -> Result<RationalVector> {
        self.generator_matrix().mul_vec(lambda)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FeasibilityStatus {
    Feasible,
    Infeasible,
}

/// Outcome of the positive-kernel problem: either a witness `x >= 0`,
/// `Σx = 1`, `Ax = 0`, or a Stiemke certificate `y` with `Aᵀy > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasibilityResult {
    pub status: FeasibilityStatus,
    pub witness: Option<RationalVector>,
    pub certificate: Option<RationalVector>,
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        self.status == FeasibilityStatus::Feasible
    }

    fn feasible(x: RationalVector) -> Self {
        FeasibilityResult {
            status: FeasibilityStatus::Feasible,
            witness: Some(x),
            certificate: None,
        }
    }

    fn infeasible(y: RationalVector) -> Self {
        FeasibilityResult {
            status: FeasibilityStatus::Infeasible,
            witness: None,
            certificate: Some(y),
        }
    }
}

/// Decides whether `ker A` meets the nonnegative orthant away from the
/// origin.
///
/// Forcing rows, doubleton rows and parallel columns are eliminated first;
/// the rest is solved as `A x = 0, 1ᵀx = 1, x >= 0`. When that system is
/// infeasible the phase-one Farkas multipliers `(u, w)` satisfy
/// `Aᵀu + w·1 >= 0` with `w < 0`, so `u` itself is a Stiemke certificate,
/// which is then lifted back through the eliminations. A matrix with no
/// columns has no nonzero point at all and yields the (vacuous) zero
/// certificate.
pub fn lp_positive_kernel(a: &RationalMatrix) -> FeasibilityResult {
    let (m, n) = (a.rows(), a.cols());
    if n == 0 {
        return FeasibilityResult::infeasible(RationalVector::zeros(m));
    }
    let (pre, outcome) = Presolve::run(a);
    let result = match outcome {
        Outcome::Witness(x) => FeasibilityResult::feasible(normalized(x)),
        Outcome::Reduced { rows, cols, matrix } => match reduced_kernel(&matrix) {
            Ok(xr) => {
                let mut x = vec![Rational::zero(); n];
                for (q, &j) in cols.iter().enumerate() {
                    x[j] = xr[q].clone();
                }
                FeasibilityResult::feasible(normalized(pre.lift_witness(x)))
            }
            Err(yr) => {
                let mut y = vec![Rational::zero(); m];
                for (p, &i) in rows.iter().enumerate() {
                    y[i] = yr[p].clone();
                }
                FeasibilityResult::infeasible(RationalVector::new(pre.lift_certificate(y)))
            }
        },
    };
    debug_assert!(match (&result.witness, &result.certificate) {
        (Some(x), _) => x.is_nonnegative() && a.mul_vec(x).unwrap().is_zero(),
        (_, Some(y)) => is_valid_certificate(a, y).unwrap(),
        _ => false,
    });
    result
}

fn normalized(x: Vec<Rational>) -> RationalVector {
    let s: Rational = x.iter().sum();
    RationalVector::new(x.into_iter().map(|v| v / &s).collect())
}

/// Simplex on the reduced matrix: `Ok(x)` with `Ax = 0, 1ᵀx = 1, x >= 0`, or
/// `Err(y)` with `Aᵀy > 0`.
fn reduced_kernel(a: &RationalMatrix) -> std::result::Result<Vec<Rational>, Vec<Rational>> {
    let (m, n) = (a.rows(), a.cols());
    if n == 0 {
        return Err(vec![Rational::zero(); m]);
    }
    let ones = RationalMatrix::new(1, n, vec![Rational::one(); n]).expect("1×n");
    let system = a.vstack(&ones).expect("same width");
    let rhs = RationalVector::unit(m + 1, m);
    match solve_nonnegative(&system, &rhs) {
        Phase1::Feasible(x) => Ok(x.into_entries()),
        Phase1::Infeasible(y) => {
            let mut y = y.into_entries();
            y.pop();
            Err(y)
        }
    }
}

/// True iff every component of `Aᵀy` is strictly positive.
pub fn is_valid_certificate(a: &RationalMatrix, y: &RationalVector) -> Result<bool> {
    let aty = a.tr_mul_vec(y)?;
    Ok(aty.entries().iter().all(|v| v.is_positive()))
}

/// Decides `v ∈ K` by solving `G λ = v, λ >= 0` on the generator matrix.
/// The zero vector is a member (empty combination).
pub fn cone_membership(v: &RationalVector, k: &PolyhedralCone) -> Result<bool> {
    if v.dim() != k.ambient_dim() {
        return Err(Error::mismatch("cone membership", k.ambient_dim(), v.dim()));
    }
    if v.is_zero() {
        return Ok(true);
    }
    if k.is_free() {
        return Ok(v.is_nonnegative());
    }
    if k.is_empty() {
        return Ok(false);
    }
    Ok(matches!(
        solve_nonnegative(&k.generator_matrix(), v),
        Phase1::Feasible(_)
    ))
}

/// Nonnegative coefficients expressing `v` over the generators of `K`, if any.
pub fn cone_coordinates(v: &RationalVector, k: &PolyhedralCone) -> Result<Option<RationalVector>> {
    if v.dim() != k.ambient_dim() {
        return Err(Error::mismatch("cone coordinates", k.ambient_dim(), v.dim()));
    }
    if k.is_empty() {
        return Ok(v.is_zero().then(RationalVector::default));
    }
    Ok(match solve_nonnegative(&k.generator_matrix(), v) {
        Phase1::Feasible(x) => Some(x),
        Phase1::Infeasible(_) => None,
    })
}

/// `K ∩ −K = ∅` on nonzero elements: no nonzero nonnegative combination of
/// generators vanishes.
pub fn is_positive_cone(k: &PolyhedralCone) -> bool {
    if k.is_free() {
        return true;
    }
    !lp_positive_kernel(&k.generator_matrix()).is_feasible()
}
