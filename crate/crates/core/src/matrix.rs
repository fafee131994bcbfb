//! Dense complex matrices.
//!
//! Everything in the crate is a plain [`faer::Mat`] over `c64`. Tensor
//! products use lexicographic index flattening with the leftmost factor most
//! significant, so `kron(X, Y)[(i1 * ry + i2, j1 * cy + j2)] = X[(i1, j1)] * Y[(i2, j2)]`.

use faer::{Mat, MatRef, Side};
use thiserror::Error;

pub use faer::c64 as C64;

/// Dense complex matrix, column-major storage, row-major index semantics.
pub type CMatrix = Mat<C64>;

/// Default tolerance for validating projections.
pub const PROJECTION_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("not an orthogonal projection: |P^2 - P| = {idempotency:.3e}, |P* - P| = {self_adjointness:.3e}")]
    NotAProjection {
        idempotency: f64,
        self_adjointness: f64,
    },
    #[error("columns are not orthonormal: |V*V - I| = {0:.3e}")]
    NotAnIsometry(f64),
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("eigendecomposition failed to converge")]
    NoConvergence,
}

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn adjoint(x: MatRef<'_, C64>) -> CMatrix {
    x.adjoint().to_owned()
}

/// Entrywise complex conjugate.
pub fn conj(x: MatRef<'_, C64>) -> CMatrix {
    x.conjugate().to_owned()
}

pub fn transpose(x: MatRef<'_, C64>) -> CMatrix {
    x.transpose().to_owned()
}

pub fn scale(s: C64, x: MatRef<'_, C64>) -> CMatrix {
    CMatrix::from_fn(x.nrows(), x.ncols(), |i, j| s * x[(i, j)])
}

/// Kronecker product, first factor most significant.
pub fn kron(x: MatRef<'_, C64>, y: MatRef<'_, C64>) -> CMatrix {
    let (ry, cy) = (y.nrows(), y.ncols());
    CMatrix::from_fn(x.nrows() * ry, x.ncols() * cy, |i, j| {
        x[(i / ry, j / cy)] * y[(i % ry, j % cy)]
    })
}

/// Column vector from a slice.
pub fn column(v: &[C64]) -> CMatrix {
    CMatrix::from_fn(v.len(), 1, |i, _| v[i])
}

/// Rank-one projection onto the line spanned by `v`.
pub fn rank_one_projection(v: &[C64]) -> CMatrix {
    let norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    CMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj() / norm_sq)
}

pub fn trace(x: MatRef<'_, C64>) -> C64 {
    (0..x.nrows().min(x.ncols())).map(|i| x[(i, i)]).sum()
}

pub fn frobenius_norm(x: MatRef<'_, C64>) -> f64 {
    x.norm_l2()
}

/// Largest singular value. Zero for empty matrices.
pub fn operator_norm(x: MatRef<'_, C64>) -> f64 {
    if x.nrows() == 0 || x.ncols() == 0 {
        return 0.0;
    }
    // The spectral norm of a very flat matrix is cheaper through its Gram matrix.
    let (r, k) = (x.nrows(), x.ncols());
    if r > 4 * k || k > 4 * r {
        let gram = if r > k { x.adjoint() * x } else { x * x.adjoint() };
        let top = hermitian_eigenvalues(gram.as_ref())
            .map(|ev| ev.last().copied().unwrap_or(0.0))
            .unwrap_or(f64::NAN);
        return top.max(0.0).sqrt();
    }
    match x.singular_values() {
        Ok(s) => s.first().copied().unwrap_or(0.0),
        Err(_) => f64::NAN,
    }
}

/// Hermitian part `(X + X*)/2`.
pub fn hermitian_part(x: MatRef<'_, C64>) -> CMatrix {
    CMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
        (x[(i, j)] + x[(j, i)].conj()) * 0.5
    })
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Only the lower triangle is read.
pub fn hermitian_eigen(h: MatRef<'_, C64>) -> Result<(Vec<f64>, CMatrix), MatrixError> {
    if h.nrows() != h.ncols() {
        return Err(MatrixError::NotSquare {
            rows: h.nrows(),
            cols: h.ncols(),
        });
    }
    if h.nrows() == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| MatrixError::NoConvergence)?;
    let values = evd.S().column_vector().iter().map(|z| z.re).collect();
    Ok((values, evd.U().to_owned()))
}

pub fn hermitian_eigenvalues(h: MatRef<'_, C64>) -> Result<Vec<f64>, MatrixError> {
    if h.nrows() == 0 {
        return Ok(Vec::new());
    }
    h.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| MatrixError::NoConvergence)
}

/// Matrix with orthonormal columns.
#[derive(Clone, Debug)]
pub struct Isometry(CMatrix);

impl Isometry {
    /// Accepts `v` if `|V*V - I| <= tol`.
    pub fn new(v: CMatrix, tol: f64) -> Result<Self, MatrixError> {
        let defect = isometry_defect(v.as_ref());
        if defect > tol {
            return Err(MatrixError::NotAnIsometry(defect));
        }
        Ok(Isometry(v))
    }

    /// Wraps `v` without checking orthonormality.
    pub(crate) fn new_unchecked(v: CMatrix) -> Self {
        Isometry(v)
    }

    pub fn identity(n: usize) -> Self {
        Isometry(identity(n))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Dimension of the range.
    pub fn rank(&self) -> usize {
        self.0.ncols()
    }

    /// Dimension of the ambient space.
    pub fn ambient_dim(&self) -> usize {
        self.0.nrows()
    }

    /// The range projection `V V*`.
    pub fn projection(&self) -> CMatrix {
        &self.0 * self.0.adjoint()
    }
}

/// `|V*V - I|` in operator norm.
pub fn isometry_defect(v: MatRef<'_, C64>) -> f64 {
    let mut gram = v.adjoint() * v;
    for i in 0..gram.nrows() {
        gram[(i, i)] -= C64::new(1.0, 0.0);
    }
    operator_norm(gram.as_ref())
}

/// Orthonormal basis of the range of an orthogonal projection.
///
/// Diagonalizes the Hermitian part of `p` and keeps the eigenvectors whose
/// eigenvalue exceeds 1/2.
pub fn range_basis(p: MatRef<'_, C64>, tol: f64) -> Result<Isometry, MatrixError> {
    if p.nrows() != p.ncols() {
        return Err(MatrixError::NotSquare {
            rows: p.nrows(),
            cols: p.ncols(),
        });
    }
    let skew = &p - p.adjoint();
    let self_adjointness = operator_norm(skew.as_ref());
    let idempotency = operator_norm((p * p - p).as_ref());
    if idempotency > tol || self_adjointness > tol {
        return Err(MatrixError::NotAProjection {
            idempotency,
            self_adjointness,
        });
    }
    let (values, vectors) = hermitian_eigen(hermitian_part(p).as_ref())?;
    Ok(select_columns(&values, &vectors, |v| v > 0.5))
}

/// Columns of `vectors` whose eigenvalue satisfies `keep`, in ascending eigenvalue order.
pub(crate) fn select_columns(values: &[f64], vectors: &CMatrix, keep: impl Fn(f64) -> bool) -> Isometry {
    let picked: Vec<usize> = (0..values.len()).filter(|&k| keep(values[k])).collect();
    let n = vectors.nrows();
    Isometry(CMatrix::from_fn(n, picked.len(), |i, j| vectors[(i, picked[j])]))
}

/// Columns `cols` of `x` as a new matrix.
pub fn take_columns(x: MatRef<'_, C64>, cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(x.nrows(), cols.len(), |i, j| x[(i, cols[j])])
}

/// Rows `rows` of `x` as a new matrix.
pub fn take_rows(x: MatRef<'_, C64>, rows: impl IntoIterator<Item = usize>) -> CMatrix {
    let rows: Vec<usize> = rows.into_iter().collect();
    CMatrix::from_fn(rows.len(), x.ncols(), |i, j| x[(rows[i], j)])
}

/// Absolute-gap clustering of an ascending sequence. Returns index ranges.
pub(crate) fn cluster_sorted(values: &[f64], gap: f64) -> Vec<std::ops::Range<usize>> {
    let mut clusters = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > gap {
            if k > start {
                clusters.push(start..k);
            }
            start = k;
        }
    }
    clusters
}
