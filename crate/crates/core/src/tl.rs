//! Temperley-Lieb tensors and polynomials.
//!
//! A quadratic polynomial `sum a_ij X_i X_j` is identified with the
//! anti-linear operator `A` on `C^m` whose matrix is `(a_ij)`; `A` acts by
//! `xi -> M conj(xi)`. The polynomial is Temperley-Lieb exactly when `A^2`
//! is a scalar multiple of a unitary. Up to rescaling and a unitary change of
//! variables such an operator is anti-diagonal,
//!
//! ```text
//!     P = sum_i a_i X_i X_{m-i+1},    |a_i a_{m-i+1}| = 1,
//! ```
//!
//! and [`normal_form`] finds that basis together with canonical coefficients.

use std::cmp::Ordering;
use std::f64::consts::PI;

use faer::MatRef;
use thiserror::Error;

use crate::matrix::{
    self, c, cluster_sorted, hermitian_eigen, hermitian_part, kron, operator_norm, take_columns, CMatrix,
    MatrixError, C64,
};

/// Tolerance of the TL condition `(A^2)* A^2 = alpha 1`.
pub const TL_TOL: f64 = 1e-9;
/// Tolerance on `|a_i a_{m-i+1}| = 1`.
pub const COEFF_TOL: f64 = 1e-10;
/// Absolute gap used to merge eigenvalues of `|A|` and of `U^2`.
pub const CLUSTER_GAP: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum TlError {
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("operator is zero")]
    ZeroOperator,
    #[error("not Temperley-Lieb: (A^2)*A^2 deviates from a scalar by {deviation:.3e}")]
    NotTemperleyLieb { deviation: f64 },
    #[error("bad coefficients: {0}")]
    BadCoefficients(String),
    #[error("a_i conj(a_(m-i+1)) is not a constant sign, tau is undefined")]
    TauUndefined,
    #[error("spectral classification failed: {0}")]
    Classification(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Anti-linear operator `xi -> M conj(xi)` on `C^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct AntiLinearOp {
    matrix: CMatrix,
}

impl AntiLinearOp {
    pub fn new(matrix: CMatrix) -> Result<Self, TlError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(MatrixError::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            }
            .into());
        }
        if matrix.nrows() < 2 {
            return Err(TlError::DimensionTooSmall(matrix.nrows()));
        }
        Ok(AntiLinearOp { matrix })
    }

    /// The anti-diagonal operator `F_P` of `P = sum a_i X_i X_{m-i+1}`.
    pub fn from_coefficients(coeffs: &[C64]) -> Result<Self, TlError> {
        let m = coeffs.len();
        let mut f = CMatrix::zeros(m, m);
        for (i, &a) in coeffs.iter().enumerate() {
            f[(m - 1 - i, i)] = a;
        }
        AntiLinearOp::new(f)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let m = self.dim();
        (0..m)
            .map(|i| (0..m).map(|j| self.matrix[(i, j)] * v[j].conj()).sum())
            .collect()
    }

    /// Matrix of the linear operator `A^2`, i.e. `M conj(M)`.
    pub fn square_matrix(&self) -> CMatrix {
        &self.matrix * self.matrix.conjugate()
    }

    /// Matrix of the anti-linear adjoint `A*`, which is `M^T`.
    pub fn adjoint_matrix(&self) -> CMatrix {
        matrix::transpose(self.matrix.as_ref())
    }

    /// Matrix of the positive operator `A*A`, i.e. `M^T conj(M)`.
    pub fn modulus_squared(&self) -> CMatrix {
        self.matrix.transpose() * self.matrix.conjugate()
    }

    /// `U A U*` for a unitary `U`; its matrix is `U M U^T`.
    pub fn conjugated_by(&self, u: MatRef<'_, C64>) -> AntiLinearOp {
        AntiLinearOp {
            matrix: u * &self.matrix * u.transpose(),
        }
    }

    pub fn scaled(&self, s: f64) -> AntiLinearOp {
        AntiLinearOp {
            matrix: matrix::scale(c(s, 0.0), self.matrix.as_ref()),
        }
    }

    /// `sum |M_ij|^2 = Tr A*A`.
    pub fn hilbert_schmidt_sq(&self) -> f64 {
        self.matrix.norm_l2().powi(2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TlScalars {
    /// `(A^2)* A^2 = alpha 1`.
    pub alpha: f64,
    /// Temperley-Lieb parameter, `lambda = alpha^{-1} (Tr A*A)^2`.
    pub lambda: f64,
    /// `||(A^2)* A^2 - alpha 1||`.
    pub deviation: f64,
}

/// Checks that `A^2` is a positive multiple of a unitary and returns the scalars.
pub fn tl_check(a: &AntiLinearOp) -> Result<TlScalars, TlError> {
    let hs = a.hilbert_schmidt_sq();
    if hs == 0.0 {
        return Err(TlError::ZeroOperator);
    }
    let m = a.dim();
    let sq = a.square_matrix();
    let mut gram = sq.adjoint() * &sq;
    let alpha = matrix::trace(gram.as_ref()).re / m as f64;
    for i in 0..m {
        gram[(i, i)] -= c(alpha, 0.0);
    }
    let deviation = operator_norm(gram.as_ref());
    // scale-aware so that rescaled inputs are judged alike
    if !(deviation <= TL_TOL * alpha.max(1.0)) || alpha <= TL_TOL {
        return Err(TlError::NotTemperleyLieb { deviation });
    }
    Ok(TlScalars {
        alpha,
        lambda: hs * hs / alpha,
        deviation,
    })
}

/// The tensor `xi_A = sum_i xi_i (x) A xi_i`; component `(i, j)` is `M[j, i]`.
pub fn vector_of(a: &AntiLinearOp) -> Vec<C64> {
    let m = a.dim();
    (0..m * m).map(|k| a.matrix[(k % m, k / m)]).collect()
}

/// Sign `tau` with `a_i conj(a_{m-i+1}) = -tau` for every `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tau {
    Plus,
    Minus,
}

impl Tau {
    pub fn value(self) -> f64 {
        match self {
            Tau::Plus => 1.0,
            Tau::Minus => -1.0,
        }
    }
}

/// Solves `x + 1/x = s` for `x` in `(0, 1]`, `s >= 2`.
pub fn inverse_quantum_two(s: f64) -> f64 {
    let disc = (s * s - 4.0).max(0.0).sqrt();
    2.0 / (s + disc)
}

/// A validated Temperley-Lieb polynomial `P = sum a_i X_i X_{m-i+1}` with its
/// derived parameters and the projection onto `C P`.
#[derive(Clone, Debug)]
pub struct TlSystem {
    coeffs: Vec<C64>,
    lambda: f64,
    q: f64,
    t: f64,
    tau: Option<Tau>,
    xi: Vec<C64>,
    e: CMatrix,
}

impl TlSystem {
    /// Builds the system for the anti-diagonal polynomial with the given coefficients.
    pub fn from_coefficients(coeffs: &[C64]) -> Result<Self, TlError> {
        let m = coeffs.len();
        if m < 2 {
            return Err(TlError::DimensionTooSmall(m));
        }
        for i in 0..m {
            let p = (coeffs[i] * coeffs[m - 1 - i]).norm();
            if !((p - 1.0).abs() <= COEFF_TOL) {
                return Err(TlError::BadCoefficients(format!(
                    "|a_{} a_{}| = {p} (must be 1)",
                    i + 1,
                    m - i
                )));
            }
        }
        let s: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
        let tau = tau_of(coeffs);
        let xi = vector_of(&AntiLinearOp::from_coefficients(coeffs)?);
        let e = matrix::rank_one_projection(&xi);
        Ok(TlSystem {
            coeffs: coeffs.to_vec(),
            lambda: s * s,
            q: inverse_quantum_two(s),
            t: inverse_quantum_two(m as f64),
            tau,
            xi,
            e,
        })
    }

    pub fn m(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn tau(&self) -> Option<Tau> {
        self.tau
    }

    pub fn require_tau(&self) -> Result<Tau, TlError> {
        self.tau.ok_or(TlError::TauUndefined)
    }

    /// `xi_P = sum a_i xi_i (x) xi_{m-i+1}`, not normalized.
    pub fn xi(&self) -> &[C64] {
        &self.xi
    }

    /// The rank-one projection `e` onto `C xi_P`.
    pub fn projection(&self) -> &CMatrix {
        &self.e
    }

    /// `[2]_q = q + 1/q = sum |a_i|^2`.
    pub fn quantum_two(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn relation_residuals(&self) -> (f64, f64) {
        tl_relation_residuals(self.e.as_ref(), self.m(), self.lambda)
    }
}

fn tau_of(coeffs: &[C64]) -> Option<Tau> {
    let m = coeffs.len();
    let signs: Vec<C64> = (0..m).map(|i| coeffs[i] * coeffs[m - 1 - i].conj()).collect();
    if signs.iter().all(|z| (z - c(-1.0, 0.0)).norm() <= COEFF_TOL) {
        Some(Tau::Plus)
    } else if signs.iter().all(|z| (z - c(1.0, 0.0)).norm() <= COEFF_TOL) {
        Some(Tau::Minus)
    } else {
        None
    }
}

pub fn params_from_polynomial(coeffs: &[C64]) -> Result<TlSystem, TlError> {
    TlSystem::from_coefficients(coeffs)
}

pub fn projection_of(system: &TlSystem) -> CMatrix {
    system.projection().clone()
}

/// Operator-norm residuals of both Temperley-Lieb relations on `H^{(x)3}`:
/// `(e1 e2 e1 - e1/lambda, e2 e1 e2 - e2/lambda)` with `e1 = e (x) 1`, `e2 = 1 (x) e`.
pub fn tl_relation_residuals(e: MatRef<'_, C64>, m: usize, lambda: f64) -> (f64, f64) {
    let id = matrix::identity(m);
    let e1 = kron(e, id.as_ref());
    let e2 = kron(id.as_ref(), e);
    let inv = c(1.0 / lambda, 0.0);
    let r1 = &e1 * &e2 * &e1 - matrix::scale(inv, e1.as_ref());
    let r2 = &e2 * &e1 * &e2 - matrix::scale(inv, e2.as_ref());
    (operator_norm(r1.as_ref()), operator_norm(r2.as_ref()))
}

/// One pair `(beta, Z_beta)` of the classification invariant.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantBlock {
    /// Eigenvalue of `|A|` in `(0, 1]`.
    pub beta: f64,
    /// Eigenvalues of `U^2` on the `beta`-eigenspace of `|A|`, with multiplicity.
    pub phases: Vec<C64>,
}

/// The complete unitary-conjugacy invariant of an operator with unitary square.
#[derive(Clone, Debug, PartialEq)]
pub struct TlInvariants {
    pub blocks: Vec<InvariantBlock>,
}

impl TlInvariants {
    pub fn dimension(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| if b.beta < 1.0 { 2 * b.phases.len() } else { b.phases.len() })
            .sum()
    }

    /// `Z_1` is closed under conjugation and every phase is on the unit circle.
    pub fn is_consistent(&self, tol: f64) -> bool {
        let on_circle = self
            .blocks
            .iter()
            .flat_map(|b| &b.phases)
            .all(|z| (z.norm() - 1.0).abs() <= tol);
        let conj_closed = match self.blocks.iter().find(|b| b.beta == 1.0) {
            Some(b) => {
                let conj: Vec<C64> = b.phases.iter().map(|z| z.conj()).collect();
                multiset_close(&b.phases, &conj, tol)
            }
            None => true,
        };
        on_circle && conj_closed
    }

    /// Equal up to `tol`, matching phases as multisets.
    pub fn approx_eq(&self, other: &TlInvariants, tol: f64) -> bool {
        self.blocks.len() == other.blocks.len()
            && self.blocks.iter().zip(&other.blocks).all(|(a, b)| {
                (a.beta - b.beta).abs() <= tol && multiset_close(&a.phases, &b.phases, tol)
            })
    }
}

/// Greedy nearest matching of two complex multisets.
pub fn multiset_close(a: &[C64], b: &[C64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    for x in a {
        let best = (0..b.len())
            .filter(|&k| !used[k])
            .min_by(|&i, &j| (b[i] - x).norm().total_cmp(&(b[j] - x).norm()));
        match best {
            Some(k) if (b[k] - x).norm() <= tol => used[k] = true,
            _ => return false,
        }
    }
    true
}

/// Eigen-decomposition of a normal matrix with orthonormal eigenvectors.
///
/// The imaginary part `(X - X*)/2i` is diagonalized first; on each of its
/// eigenspaces the real part `(X + X*)/2` is diagonalized.
pub(crate) fn normal_eigen(x: MatRef<'_, C64>) -> Result<(Vec<C64>, CMatrix), TlError> {
    let k = x.nrows();
    let im_part = CMatrix::from_fn(k, k, |i, j| (x[(i, j)] - x[(j, i)].conj()) * c(0.0, -0.5));
    let re_part = hermitian_part(x);
    let (im_vals, im_vecs) = hermitian_eigen(im_part.as_ref())?;
    let mut values = Vec::with_capacity(k);
    let mut vectors = CMatrix::zeros(k, k);
    let mut col = 0;
    for range in cluster_sorted(&im_vals, CLUSTER_GAP) {
        let idx: Vec<usize> = range.collect();
        let p = take_columns(im_vecs.as_ref(), &idx);
        let h = p.adjoint() * &re_part * &p;
        let (_, r) = hermitian_eigen(hermitian_part(h.as_ref()).as_ref())?;
        let v = &p * &r;
        for j in 0..v.ncols() {
            let vj = v.col(j);
            let xv = x * vj;
            let z: C64 = (0..k).map(|i| vj[i].conj() * xv[i]).sum();
            values.push(z);
            for i in 0..k {
                vectors[(i, col)] = vj[i];
            }
            col += 1;
        }
    }
    Ok((values, vectors))
}

/// Polar data of an operator whose square is unitary.
struct Polar {
    /// Matrix `W` of the anti-unitary `U` in `A = U|A|`: `U xi = W conj(xi)`.
    w: CMatrix,
    /// `(beta, orthonormal basis of H_beta)` for each eigenvalue cluster of `|A|` in `(0, 1]`.
    blocks: Vec<(f64, CMatrix)>,
    /// Scale applied to `M` so that `A^2` is unitary.
    scale: f64,
}

impl Polar {
    fn new(a: &AntiLinearOp) -> Result<Self, TlError> {
        let scalars = tl_check(a)?;
        let scale = scalars.alpha.powf(-0.25);
        let m_mat = matrix::scale(c(scale, 0.0), a.matrix.as_ref());
        let m = a.dim();
        let gram = m_mat.transpose() * m_mat.conjugate();
        let (mu, v) = hermitian_eigen(hermitian_part(gram.as_ref()).as_ref())?;
        let s: Vec<f64> = mu.iter().map(|x| x.max(0.0).sqrt()).collect();
        if s[0] <= 1e-8 {
            return Err(TlError::Classification("|A| is not invertible".into()));
        }
        // W = M conj(|A|^{-1}) = M conj(V) diag(1/s) V^T
        let inv = CMatrix::from_fn(m, m, |i, j| v[(j, i)] * (1.0 / s[i]));
        let w = &m_mat * v.conjugate() * inv;

        let mut blocks = Vec::new();
        let mut paired = 0;
        for range in cluster_sorted(&s, CLUSTER_GAP) {
            let idx: Vec<usize> = range.collect();
            let mean = idx.iter().map(|&k| s[k]).sum::<f64>() / idx.len() as f64;
            let beta = if (mean - 1.0).abs() <= CLUSTER_GAP { 1.0 } else { mean };
            if beta > 1.0 {
                continue;
            }
            paired += if beta < 1.0 { 2 * idx.len() } else { idx.len() };
            blocks.push((beta, take_columns(v.as_ref(), &idx)));
        }
        if paired != m {
            return Err(TlError::Classification(format!(
                "spectrum of |A| is not symmetric under beta -> 1/beta ({paired} of {m} accounted)"
            )));
        }
        Ok(Polar { w, blocks, scale })
    }

    fn apply_u(&self, v: &[C64]) -> Vec<C64> {
        let m = v.len();
        (0..m)
            .map(|i| (0..m).map(|j| self.w[(i, j)] * v[j].conj()).sum())
            .collect()
    }

    /// Eigen-decomposition of `U^2` restricted to the given subspace basis.
    fn u_squared_on(&self, basis: &CMatrix) -> Result<(Vec<C64>, CMatrix), TlError> {
        let u2 = &self.w * self.w.conjugate();
        let x = basis.adjoint() * &u2 * basis;
        let (z, q) = normal_eigen(x.as_ref())?;
        Ok((z, basis * q))
    }
}

/// The invariant `{(beta, Z_beta)}` of `A` (after rescaling so that `A^2` is unitary).
pub fn invariants_of(a: &AntiLinearOp) -> Result<TlInvariants, TlError> {
    let polar = Polar::new(a)?;
    let mut blocks = Vec::new();
    for (beta, basis) in &polar.blocks {
        let (mut phases, _) = polar.u_squared_on(basis)?;
        phases.sort_by(|x, y| x.arg().total_cmp(&y.arg()));
        blocks.push(InvariantBlock { beta: *beta, phases });
    }
    Ok(TlInvariants { blocks })
}

/// Canonical anti-diagonal form of an operator with unitary square.
#[derive(Clone, Debug)]
pub struct NormalForm {
    /// `a_1, ..., a_m`.
    pub coeffs: Vec<C64>,
    /// Unitary whose columns are the new basis vectors `xi_1, ..., xi_m`.
    pub basis: CMatrix,
    /// Factor `alpha^{-1/4}` applied to `A` before the reduction.
    pub scale: f64,
}

impl NormalForm {
    /// Matrix of the rescaled operator in the new basis, `B* (sM) conj(B)`.
    pub fn transformed(&self, a: &AntiLinearOp) -> CMatrix {
        matrix::scale(
            c(self.scale, 0.0),
            (self.basis.adjoint() * a.matrix() * self.basis.conjugate()).as_ref(),
        )
    }
}

struct Pair {
    first: f64,
    partner: C64,
    xi: Vec<C64>,
    zeta: Vec<C64>,
}

impl Pair {
    fn sort_key(&self) -> (f64, f64) {
        (self.first, partner_angle(self.first, self.partner))
    }
}

fn partner_angle(first: f64, partner: C64) -> f64 {
    let arg = partner.arg();
    // for a_i = 1 the partner lies in the closed upper half plane; fold the -pi edge
    if first == 1.0 && arg < 0.0 {
        arg.abs()
    } else {
        arg
    }
}

fn column_vec(x: &CMatrix, j: usize) -> Vec<C64> {
    (0..x.nrows()).map(|i| x[(i, j)]).collect()
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Repeatedly picks the candidate with the largest component orthogonal to the
/// chosen vectors. `extend` maps the new unit vector to the vectors to append.
fn greedy_orthonormal(
    candidates: &[Vec<C64>],
    target: usize,
    real_overlaps: bool,
    mut extend: impl FnMut(Vec<C64>) -> Vec<Vec<C64>>,
) -> Result<Vec<Vec<C64>>, TlError> {
    let mut chosen: Vec<Vec<C64>> = Vec::new();
    while chosen.len() < target {
        let best = candidates
            .iter()
            .map(|b| {
                let mut r = b.clone();
                for q in &chosen {
                    let mut o = inner(q, b);
                    if real_overlaps {
                        o = c(o.re, 0.0);
                    }
                    for (ri, qi) in r.iter_mut().zip(q) {
                        *ri -= o * qi;
                    }
                }
                r
            })
            .max_by(|x, y| norm(x).total_cmp(&norm(y)))
            .ok_or_else(|| TlError::Classification("empty eigenspace".into()))?;
        let nb = norm(&best);
        if nb < 1e-6 {
            return Err(TlError::Classification("eigenspace basis degenerated".into()));
        }
        let unit: Vec<C64> = best.iter().map(|z| z / nb).collect();
        chosen.extend(extend(unit));
    }
    Ok(chosen)
}

/// Finds an orthonormal basis in which `A` (rescaled so that `A^2` is unitary)
/// is anti-diagonal with coefficients `a_1..a_m` such that
/// `0 < a_i <= 1` for `i <= m/2`, `a_{l+1} = 1` for odd `m`, and
/// `0 <= arg a_{m-i+1} <= pi` whenever `a_i = 1`.
///
/// Pairs `(a_i, a_{m-i+1})` are sorted by `a_i`, then by the argument of the partner.
pub fn normal_form(a: &AntiLinearOp) -> Result<NormalForm, TlError> {
    let polar = Polar::new(a)?;
    let m = a.dim();
    let mut pairs: Vec<Pair> = Vec::new();
    let mut middle: Option<Vec<C64>> = None;

    for (beta, basis) in &polar.blocks {
        let (phases, vectors) = polar.u_squared_on(basis)?;
        if *beta < 1.0 {
            for (j, z) in phases.iter().enumerate() {
                let xi = column_vec(&vectors, j);
                let zeta = polar.apply_u(&xi);
                pairs.push(Pair {
                    first: *beta,
                    partner: z / *beta,
                    xi,
                    zeta,
                });
            }
            continue;
        }

        let one = c(1.0, 0.0);
        let mut fixed = Vec::new();
        let mut minus = Vec::new();
        let (mut upper, mut lower) = (0usize, 0usize);
        for (j, z) in phases.iter().enumerate() {
            let v = column_vec(&vectors, j);
            if (z - one).norm() <= CLUSTER_GAP {
                fixed.push(v);
            } else if (z + one).norm() <= CLUSTER_GAP {
                minus.push(v);
            } else if z.im > 0.0 {
                upper += 1;
                let zeta = polar.apply_u(&v);
                pairs.push(Pair {
                    first: 1.0,
                    partner: *z,
                    xi: v,
                    zeta,
                });
            } else {
                lower += 1;
            }
        }
        if upper != lower {
            return Err(TlError::Classification(
                "eigenvalues of U^2 on H_1 are not closed under conjugation".into(),
            ));
        }

        // U^2 = -1: U is quaternionic here, so (xi, U xi) pairs up orthogonally
        if minus.len() % 2 == 1 {
            return Err(TlError::Classification("odd-dimensional U^2 = -1 eigenspace".into()));
        }
        let quaternionic = greedy_orthonormal(&minus, minus.len(), false, |xi| {
            let zeta = polar.apply_u(&xi);
            vec![xi, zeta]
        })?;
        for chunk in quaternionic.chunks(2) {
            pairs.push(Pair {
                first: 1.0,
                partner: c(-1.0, 0.0),
                xi: chunk[0].clone(),
                zeta: chunk[1].clone(),
            });
        }

        // U^2 = 1: orthonormal basis of the real form {g : U g = g}
        let k = fixed.len();
        let candidates: Vec<Vec<C64>> = fixed
            .iter()
            .flat_map(|b| {
                let ub = polar.apply_u(b);
                let plus: Vec<C64> = b.iter().zip(&ub).map(|(x, y)| x + y).collect();
                let minus: Vec<C64> = b.iter().zip(&ub).map(|(x, y)| (x - y) * c(0.0, 1.0)).collect();
                [plus, minus]
            })
            .collect();
        let real_form = greedy_orthonormal(&candidates, k, true, |g| {
            let ug = polar.apply_u(&g);
            let sym: Vec<C64> = g.iter().zip(&ug).map(|(x, y)| (x + y) * 0.5).collect();
            let n = norm(&sym);
            vec![sym.into_iter().map(|z| z / n).collect()]
        })?;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for j in 0..k / 2 {
            let (g1, g2) = (&real_form[j], &real_form[k - 1 - j]);
            let xi = g1.iter().zip(g2).map(|(x, y)| (x + y * c(0.0, 1.0)) * h).collect();
            let zeta = g1.iter().zip(g2).map(|(x, y)| (x - y * c(0.0, 1.0)) * h).collect();
            pairs.push(Pair {
                first: 1.0,
                partner: one,
                xi,
                zeta,
            });
        }
        if k % 2 == 1 {
            middle = Some(real_form[k / 2].clone());
        }
    }

    if 2 * pairs.len() + middle.is_some() as usize != m || middle.is_some() != (m % 2 == 1) {
        return Err(TlError::Classification(format!(
            "{} pairs and {} middle vectors do not fill dimension {m}",
            pairs.len(),
            middle.is_some() as usize
        )));
    }

    pairs.sort_by(|x, y| {
        let (kx, ky) = (x.sort_key(), y.sort_key());
        kx.0.total_cmp(&ky.0).then(kx.1.total_cmp(&ky.1))
    });

    let mut coeffs = vec![c(1.0, 0.0); m];
    let mut basis = CMatrix::zeros(m, m);
    let mut put = |col: usize, v: &[C64]| {
        for (i, z) in v.iter().enumerate() {
            basis[(i, col)] = *z;
        }
    };
    for (i, p) in pairs.iter().enumerate() {
        coeffs[i] = c(p.first, 0.0);
        coeffs[m - 1 - i] = p.partner;
        put(i, &p.xi);
        put(m - 1 - i, &p.zeta);
    }
    if let Some(g) = &middle {
        put(m / 2, g);
    }
    Ok(NormalForm {
        coeffs,
        basis,
        scale: polar.scale,
    })
}

/// Checks the canonical constraints on normal-form coefficients, including the sort order.
pub fn satisfies_normal_form_constraints(coeffs: &[C64], tol: f64) -> bool {
    let m = coeffs.len();
    let l = m / 2;
    let pairs_ok = (0..m).all(|i| ((coeffs[i] * coeffs[m - 1 - i]).norm() - 1.0).abs() <= tol);
    let firsts_ok = coeffs[..l]
        .iter()
        .all(|a| a.im.abs() <= tol && a.re > 0.0 && a.re <= 1.0 + tol);
    let middle_ok = m % 2 == 0 || (coeffs[l] - c(1.0, 0.0)).norm() <= tol;
    let args_ok = (0..l).all(|i| {
        (coeffs[i].re - 1.0).abs() > tol || {
            let arg = coeffs[m - 1 - i].arg();
            arg >= -tol || arg <= -PI + tol
        }
    });
    let sorted = (1..l).all(|i| {
        let (a, b) = (coeffs[i - 1].re, coeffs[i].re);
        match a.partial_cmp(&b) {
            Some(Ordering::Less) => true,
            Some(Ordering::Equal) => {
                partner_angle(a, coeffs[m - i]) <= partner_angle(b, coeffs[m - 1 - i]) + tol
            }
            _ => (a - b).abs() <= tol,
        }
    });
    pairs_ok && firsts_ok && middle_ok && args_ok && sorted
}
