//! Dense small-matrix primitives: symmetric matrices, PSD and Loewner-order
//! tests, spectral radius, and the discrete Lyapunov equation.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default relative tolerance for order and PSD checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A closed loop counts as stable only when `rho < 1 - STABILITY_MARGIN`.
pub const STABILITY_MARGIN: f64 = 1e-8;

/// Above this state dimension the Lyapunov solver switches from the
/// vectorized linear system to squared Smith iteration.
pub const KRONECKER_MAX_DIM: usize = 32;

const EIGEN_MAX_ITER: usize = 10_000;

/// Dense real matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix(DMatrix<f64>);

impl Matrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::BadShape {
                rows,
                cols,
                len: entries.len(),
            });
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(r, c, &flat)
    }

    pub fn from_dmatrix(m: DMatrix<f64>) -> Result<Self> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Matrix(m))
    }

    pub fn scalar(x: f64) -> Result<Self> {
        Self::new(1, 1, &[x])
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Matrix(DMatrix::identity(n, n))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn transpose(&self) -> Matrix {
        Matrix(self.0.transpose())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0
            .row_iter()
            .map(|row| row.iter().copied().collect())
            .collect()
    }

    pub fn row_major(&self) -> Vec<f64> {
        self.0.transpose().as_slice().to_vec()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }
}

/// Symmetric matrix. Stored densely, but every constructor mirrors one
/// triangle onto the other so `M == M^T` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

/// The Riccati iterate / value matrix.
pub type CostMatrix = SymmetricMatrix;

impl SymmetricMatrix {
    /// Builds from the upper triangle listed row by row:
    /// `m00, m01, .., m0n, m11, m12, ..`.
    pub fn from_upper(dim: usize, upper: &[f64]) -> Result<Self> {
        let expected = dim * (dim + 1) / 2;
        if dim == 0 || upper.len() != expected {
            return Err(Error::BadShape {
                rows: dim,
                cols: dim,
                len: upper.len(),
            });
        }
        let mut m = DMatrix::zeros(dim, dim);
        let mut k = 0;
        for i in 0..dim {
            for j in i..dim {
                m[(i, j)] = upper[k];
                m[(j, i)] = upper[k];
                k += 1;
            }
        }
        Self::checked(m)
    }

    /// Symmetrizes `(M + M^T) / 2`. Floating-point addition commutes, so the
    /// result is exactly symmetric.
    pub fn from_dmatrix(m: &DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        Self::checked((m + m.transpose()) * 0.5)
    }

    /// Accepts a matrix only if it is already symmetric up to `tol` relative.
    pub fn from_dmatrix_strict(m: &DMatrix<f64>, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let asym = (m - m.transpose()).norm();
        if asym > tol * (1.0 + m.norm()) {
            return Err(Error::InvalidSystem(format!(
                "matrix is not symmetric (asymmetry {asym:e})"
            )));
        }
        Self::from_dmatrix(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = Matrix::from_rows(rows)?;
        Self::from_dmatrix_strict(m.as_dmatrix(), 1e-12)
    }

    fn checked(m: DMatrix<f64>) -> Result<Self> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(SymmetricMatrix(m))
    }

    pub fn scalar(x: f64) -> Result<Self> {
        Self::from_upper(1, &[x])
    }

    pub fn zeros(dim: usize) -> Self {
        SymmetricMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        SymmetricMatrix(DMatrix::identity(dim, dim))
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        Self::checked(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix(self.0.clone())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.to_matrix().to_rows()
    }

    pub fn row_major(&self) -> Vec<f64> {
        self.to_matrix().row_major()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn sub(&self, other: &SymmetricMatrix) -> Result<SymmetricMatrix> {
        same_dim(self, other)?;
        Ok(SymmetricMatrix(&self.0 - &other.0))
    }

    pub fn add(&self, other: &SymmetricMatrix) -> Result<SymmetricMatrix> {
        same_dim(self, other)?;
        Ok(SymmetricMatrix(&self.0 + &other.0))
    }

    pub fn scale(&self, c: f64) -> SymmetricMatrix {
        SymmetricMatrix(&self.0 * c)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let eig = SymmetricEigen::try_new(self.0.clone(), f64::EPSILON, EIGEN_MAX_ITER)
            .ok_or(Error::EigenNoConvergence)?;
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        Ok(vals)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    /// Symmetric PSD square root. Eigenvalues down to `-tol (1 + |M|)` are
    /// clipped to zero; anything more negative is rejected.
    pub fn sqrt_psd(&self, tol: f64) -> Result<SymmetricMatrix> {
        let eig = SymmetricEigen::try_new(self.0.clone(), f64::EPSILON, EIGEN_MAX_ITER)
            .ok_or(Error::EigenNoConvergence)?;
        let floor = -tol * (1.0 + self.frobenius_norm());
        if eig.eigenvalues.iter().any(|&l| l < floor) {
            return Err(Error::NotPositiveDefinite(
                "square root of an indefinite matrix",
            ));
        }
        let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let v = &eig.eigenvectors;
        SymmetricMatrix::from_dmatrix(&(v * DMatrix::from_diagonal(&roots) * v.transpose()))
    }
}

fn same_dim(x: &SymmetricMatrix, y: &SymmetricMatrix) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            x.dim(),
            x.dim(),
            y.dim(),
            y.dim()
        )));
    }
    Ok(())
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Matrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

impl Serialize for SymmetricMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymmetricMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        SymmetricMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Result of comparing two symmetric matrices in the Loewner order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    GreaterEqual,
    LessEqual,
    Equal,
    Incomparable,
}

impl Relation {
    pub fn flipped(self) -> Relation {
        match self {
            Relation::GreaterEqual => Relation::LessEqual,
            Relation::LessEqual => Relation::GreaterEqual,
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingResult {
    pub relation: Relation,
    /// Smallest eigenvalue of `X - Y`.
    pub min_eig_forward: f64,
    /// Smallest eigenvalue of `Y - X`.
    pub min_eig_backward: f64,
    pub tolerance: f64,
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "tolerance must be >= 0, got {tol}"
        )));
    }
    Ok(())
}

/// `lambda_min(M) >= -tol (1 + |M|_F)`.
pub fn is_psd(m: &SymmetricMatrix, tol: f64) -> Result<bool> {
    check_tol(tol)?;
    Ok(m.min_eigenvalue()? >= -tol * (1.0 + m.frobenius_norm()))
}

/// Strict positive definiteness: `lambda_min(M) > tol (1 + |M|_F)`.
pub fn is_pd(m: &SymmetricMatrix, tol: f64) -> Result<bool> {
    check_tol(tol)?;
    Ok(m.min_eigenvalue()? > tol * (1.0 + m.frobenius_norm()))
}

/// Largest eigenvalue modulus, complex eigenvalues included.
pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if m.rows() == 1 {
        return Ok(m.get(0, 0).abs());
    }
    let schur = Schur::try_new(m.as_dmatrix().clone(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::EigenNoConvergence)?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

pub fn loewner_compare(
    x: &SymmetricMatrix,
    y: &SymmetricMatrix,
    tol: f64,
) -> Result<OrderingResult> {
    check_tol(tol)?;
    let diff = x.sub(y)?;
    let eigs = diff.eigenvalues()?;
    let min_eig_forward = eigs[0];
    let min_eig_backward = -eigs[eigs.len() - 1];
    let threshold = -tol * (1.0 + x.frobenius_norm().max(y.frobenius_norm()));
    let ge = min_eig_forward >= threshold;
    let le = min_eig_backward >= threshold;
    let relation = match (ge, le) {
        (true, true) => Relation::Equal,
        (true, false) => Relation::GreaterEqual,
        (false, true) => Relation::LessEqual,
        (false, false) => Relation::Incomparable,
    };
    Ok(OrderingResult {
        relation,
        min_eig_forward,
        min_eig_backward,
        tolerance: tol,
    })
}

/// Solves `X = A^T X A + W` for stable `A`.
///
/// Fails with [`Error::UnstableClosedLoop`] when `rho(A) >= 1 - STABILITY_MARGIN`.
pub fn solve_discrete_lyapunov(a: &Matrix, w: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if a.rows() != w.dim() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, W is {}x{}",
            a.rows(),
            a.cols(),
            w.dim(),
            w.dim()
        )));
    }
    let rho = spectral_radius(a)?;
    if rho >= 1.0 - STABILITY_MARGIN {
        return Err(Error::UnstableClosedLoop {
            rho,
            margin: STABILITY_MARGIN,
        });
    }
    let x = if a.rows() <= KRONECKER_MAX_DIM {
        lyapunov_kronecker(a.as_dmatrix(), w.as_dmatrix())?
    } else {
        lyapunov_smith(a.as_dmatrix(), w.as_dmatrix())?
    };
    SymmetricMatrix::from_dmatrix(&x)
}

// vec(A^T X A) = (A^T (x) A^T) vec(X) with column-major vec.
fn lyapunov_kronecker(a: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if n == 1 {
        let a0 = a[(0, 0)];
        return Ok(DMatrix::from_element(1, 1, w[(0, 0)] / (1.0 - a0 * a0)));
    }
    let at = a.transpose();
    let lhs = DMatrix::identity(n * n, n * n) - at.kronecker(&at);
    let rhs = DVector::from_column_slice(w.as_slice());
    let sol = lhs
        .lu()
        .solve(&rhs)
        .ok_or(Error::Singular("I - A^T (x) A^T"))?;
    Ok(DMatrix::from_column_slice(n, n, sol.as_slice()))
}

fn lyapunov_smith(a: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut x = w.clone();
    let mut ak = a.clone();
    for _ in 0..64 {
        let inc = ak.transpose() * &x * &ak;
        x += &inc;
        ak = &ak * &ak;
        if inc.norm() <= f64::EPSILON * x.norm() || ak.norm() == 0.0 {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence {
        iterations: 64,
        change: ak.norm(),
    })
}

/// Numerical rank via singular values, cutoff `max(rows, cols) * eps * sigma_max`.
pub fn rank(m: &DMatrix<f64>) -> Result<usize> {
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::EigenNoConvergence)?;
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok(0);
    }
    let cutoff = m.nrows().max(m.ncols()) as f64 * f64::EPSILON * smax;
    Ok(svd.singular_values.iter().filter(|&&s| s > cutoff).count())
}
