//! Jones-Wenzl projections via the Wenzl recursion
//!
//! ```text
//!     f_{n+1} = 1 (x) f_n - [2]_q phi(n) (1 (x) f_n)(e (x) 1)(1 (x) f_n).
//! ```
//!
//! The projections are never formed on `H^{(x)n}` during the recursion.
//! Each `f_n` is kept as an isometry `V_n` with `f_n = V_n V_n*`, and the
//! recursion step is carried out inside the range of `1 (x) f_n`, whose
//! dimension is `m dim H_n` rather than `m^{n+1}`.

use faer::Mat;
use thiserror::Error;

use crate::matrix::{self, c, hermitian_eigen, operator_norm, CMatrix, Isometry, MatrixError, C64};
use crate::tl::TlSystem;

/// Default cap on `m^{2N}`, the number of scalars in a full projection `f_N`.
pub const DEFAULT_MAX_SCALARS: u128 = 1 << 26;
/// Largest tolerated `|mu^2 - mu|` over the spectrum of a recursion step.
pub const DRIFT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum JwError {
    #[error("m^(2N) = {required} scalars exceeds the budget of {budget}")]
    MemoryBudgetExceeded { required: u128, budget: u128 },
    #[error("projection drift at level {level}: {detail}")]
    ProjectionDrift { level: usize, detail: String },
    #[error("level {level} outside 0..={max}")]
    LevelOutOfRange { level: usize, max: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// `[k]_q = q^{k-1} + q^{k-3} + ... + q^{1-k}`, which is `(q^k - q^-k)/(q - q^-1)`
/// for `q != 1` and `k` at `q = 1`.
pub fn q_integer(k: usize, q: f64) -> f64 {
    if (q - 1.0).abs() < 1e-12 {
        return k as f64;
    }
    (0..k).map(|j| q.powi(k as i32 - 1 - 2 * j as i32)).sum()
}

/// `phi(n) = [n]_q / [n+1]_q`.
pub fn phi(n: usize, q: f64) -> f64 {
    q_integer(n, q) / q_integer(n + 1, q)
}

/// `d_0 = 1, d_1 = m, d_{n+1} = m d_n - d_{n-1}` for `n <= levels`.
/// Returns `None` on overflow.
pub fn dims_by_recurrence(m: usize, levels: usize) -> Option<Vec<u128>> {
    let mut d: Vec<u128> = vec![1];
    if levels >= 1 {
        d.push(m as u128);
    }
    for n in 1..levels {
        let next = d[n].checked_mul(m as u128)?.checked_sub(d[n - 1])?;
        d.push(next);
    }
    Some(d)
}

/// Scalars in `f_levels`, `m^{2 levels}`, or `None` if it does not fit in `u128`.
pub fn full_projection_scalars(m: usize, levels: usize) -> Option<u128> {
    (m as u128).checked_pow(u32::try_from(2 * levels).ok()?)
}

/// The Jones-Wenzl tower `f_0, ..., f_N` stored as isometries onto `H_n`.
#[derive(Clone, Debug)]
pub struct JwTower {
    system: TlSystem,
    bases: Vec<Isometry>,
    drift: Vec<f64>,
}

pub fn build_tower(system: &TlSystem, levels: usize) -> Result<JwTower, JwError> {
    JwTower::build(system, levels, DEFAULT_MAX_SCALARS)
}

impl JwTower {
    pub fn build(system: &TlSystem, levels: usize, max_scalars: u128) -> Result<Self, JwError> {
        let m = system.m();
        let required = full_projection_scalars(m, levels).unwrap_or(u128::MAX);
        if required > max_scalars {
            return Err(JwError::MemoryBudgetExceeded {
                required,
                budget: max_scalars,
            });
        }
        let expected = dims_by_recurrence(m, levels).expect("dimensions bounded by the budget");
        let xi = system.xi();
        let xi_norm_sq: f64 = xi.iter().map(|z| z.norm_sqr()).sum();
        let two_q = system.quantum_two();
        let q = system.q();

        let mut bases = vec![Isometry::identity(1)];
        let mut drift = vec![0.0];
        if levels >= 1 {
            bases.push(Isometry::identity(m));
            drift.push(0.0);
        }
        for n in 1..levels {
            let v = bases[n].matrix();
            let d = v.ncols();
            let tail = m.pow(n as u32 - 1);
            // G = (1 (x) V_n)* (xi (x) 1), an (m d_n) x m^{n-1} matrix
            let g = CMatrix::from_fn(m * d, tail, |row, col| {
                let (i, r) = (row / d, row % d);
                (0..m)
                    .map(|j| xi[i * m + j] * v[(j * tail + col, r)].conj())
                    .sum::<C64>()
            });
            let coef = c(two_q * phi(n, q) / xi_norm_sq, 0.0);
            let mut step = matrix::scale(-coef, (&g * g.adjoint()).as_ref());
            for k in 0..m * d {
                step[(k, k)] += c(1.0, 0.0);
            }
            let step = matrix::hermitian_part(step.as_ref());
            let (mu, vecs) = hermitian_eigen(step.as_ref())?;
            let defect = mu.iter().map(|x| (x * x - x).abs()).fold(0.0, f64::max);
            if defect > DRIFT_TOL {
                return Err(JwError::ProjectionDrift {
                    level: n + 1,
                    detail: format!("idempotency defect {defect:.3e}"),
                });
            }
            let keep: Vec<usize> = (0..mu.len()).filter(|&k| mu[k] > 0.5).collect();
            if keep.len() as u128 != expected[n + 1] {
                return Err(JwError::ProjectionDrift {
                    level: n + 1,
                    detail: format!("rank {} but the recurrence gives {}", keep.len(), expected[n + 1]),
                });
            }
            let b = matrix::take_columns(vecs.as_ref(), &keep);
            // V_{n+1} = (1 (x) V_n) B, one block of rows per first tensor factor
            let rows = m * v.nrows();
            let mut next = Mat::<C64>::zeros(rows, keep.len());
            for i in 0..m {
                let block = v * b.subrows(i * d, d);
                next.subrows_mut(i * v.nrows(), v.nrows()).copy_from(&block);
            }
            bases.push(Isometry::new_unchecked(next));
            drift.push(defect);
        }
        Ok(JwTower {
            system: system.clone(),
            bases,
            drift,
        })
    }

    pub fn system(&self) -> &TlSystem {
        &self.system
    }

    /// Top level `N`.
    pub fn levels(&self) -> usize {
        self.bases.len() - 1
    }

    pub fn m(&self) -> usize {
        self.system.m()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.bases.iter().map(Isometry::rank).collect()
    }

    pub fn dim(&self, n: usize) -> usize {
        self.bases[n].rank()
    }

    /// Isometry `V_n : H_n -> H^{(x)n}` with `V_n V_n* = f_n`.
    pub fn subspace_basis(&self, n: usize) -> Result<&Isometry, JwError> {
        self.bases.get(n).ok_or(JwError::LevelOutOfRange {
            level: n,
            max: self.levels(),
        })
    }

    pub(crate) fn basis(&self, n: usize) -> &CMatrix {
        self.bases[n].matrix()
    }

    /// The projection `f_n` as an `m^n x m^n` matrix.
    pub fn projection(&self, n: usize) -> Result<CMatrix, JwError> {
        Ok(self.subspace_basis(n)?.projection())
    }

    /// Largest `|mu^2 - mu|` seen in the recursion step producing level `n`.
    pub fn idempotency_defect(&self, n: usize) -> f64 {
        self.drift[n]
    }

    /// `|| f_n (1^{(x)i} (x) e (x) 1^{(x)(n-i-2)}) ||`.
    pub fn kill_defect(&self, n: usize, i: usize) -> f64 {
        assert!(n >= 2 && i + 2 <= n, "position {i} out of range for level {n}");
        let m = self.m();
        let v = self.basis(n);
        let xi = self.system.xi();
        let norm = xi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let inner = m.pow((n - i - 2) as u32);
        let outer = m.pow(i as u32);
        // V_n* (1 (x) xi (x) 1)/|xi|; its norm equals the norm of f_n (1 (x) e (x) 1)
        let x = CMatrix::from_fn(v.ncols(), outer * inner, |r, col| {
            let (u, w) = (col / inner, col % inner);
            let base = u * m * m * inner + w;
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..m {
                for k in 0..m {
                    let z = xi[j * m + k];
                    if z != C64::new(0.0, 0.0) {
                        acc += v[(base + (j * m + k) * inner, r)].conj() * z;
                    }
                }
            }
            acc / norm
        });
        operator_norm(x.as_ref())
    }

    /// Maximum of [`Self::kill_defect`] over all positions at level `n`.
    pub fn max_kill_defect(&self, n: usize) -> f64 {
        if n < 2 {
            return 0.0;
        }
        (0..=n - 2).map(|i| self.kill_defect(n, i)).fold(0.0, f64::max)
    }

    /// `|| f_{n+1} - (1 (x) f_n)(f_n (x) 1) ||`.
    pub fn wenzl_defect(&self, n: usize) -> f64 {
        assert!(n < self.levels(), "wenzl_defect needs level {} to exist", n + 1);
        if n == 0 {
            return 0.0;
        }
        let m = self.m();
        let v = self.basis(n);
        let w = self.basis(n + 1);
        let d = v.ncols();
        let big = v.nrows();
        let tail = big / m;

        // With W1 = 1 (x) V_n and W2 = V_n (x) 1, f_{n+1} = W1 C1 C2* W2* where
        // C_k = W_k* V_{n+1}, and (1 (x) f_n)(f_n (x) 1) = W1 (W1* W2) W2*.
        let mut cross = CMatrix::zeros(m * d, d * m);
        let suffix: Vec<CMatrix> = (0..m)
            .map(|j| matrix::take_rows(v.as_ref(), (0..tail).map(|u| u * m + j)))
            .collect();
        for i in 0..m {
            let prefix = v.subrows(i * tail, tail);
            for (j, a) in suffix.iter().enumerate() {
                let block = a.adjoint() * prefix;
                for r in 0..d {
                    for s in 0..d {
                        cross[(i * d + r, s * m + j)] = block[(r, s)];
                    }
                }
            }
        }
        let mut c1 = CMatrix::zeros(m * d, w.ncols());
        for i in 0..m {
            let block = v.adjoint() * w.subrows(i * big, big);
            c1.subrows_mut(i * d, d).copy_from(&block);
        }
        let mut c2 = CMatrix::zeros(d * m, w.ncols());
        for j in 0..m {
            let rows = matrix::take_rows(w.as_ref(), (0..big).map(|z| z * m + j));
            let block = v.adjoint() * &rows;
            for s in 0..d {
                c2.row_mut(s * m + j).copy_from(block.row(s));
            }
        }
        operator_norm((&c1 * c2.adjoint() - &cross).as_ref())
    }
}
