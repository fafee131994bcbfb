//! Truncated Fock space `F = H_0 (+) H_1 (+) ... (+) H_N` of a Temperley-Lieb
//! subproduct system, with the left and right creation operators
//!
//! ```text
//!     S_i zeta = f_{n+1}(xi_i (x) zeta),    R_i zeta = f_{n+1}(zeta (x) xi_i).
//! ```
//!
//! Operators are stored level by level in the bases `V_n` of the tower.
//! Creation operators kill the top level `N`, so identities are only
//! meaningful on levels `0..N-1`; every residual below is measured there.

use std::sync::OnceLock;

use thiserror::Error;

use crate::jw::{phi, JwError, JwTower};
use crate::matrix::{self, c, operator_norm, CMatrix, C64};
use crate::tl::{TlError, TlSystem};

#[derive(Debug, Error)]
pub enum FockError {
    #[error("need at least 2 levels, got {0}")]
    TooFewLevels(usize),
    #[error(transparent)]
    Tl(#[from] TlError),
    #[error(transparent)]
    Jw(#[from] JwError),
}

/// Level layout of the truncated Fock space.
#[derive(Clone, Debug)]
pub struct FockSpace {
    tower: JwTower,
    offsets: Vec<usize>,
}

impl FockSpace {
    pub fn new(tower: JwTower) -> Self {
        let mut offsets = vec![0];
        for d in tower.dims() {
            offsets.push(offsets.last().unwrap() + d);
        }
        FockSpace { tower, offsets }
    }

    pub fn tower(&self) -> &JwTower {
        &self.tower
    }

    pub fn levels(&self) -> usize {
        self.tower.levels()
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Start index of the level-`n` block; `offset(N + 1)` is the total dimension.
    pub fn offset(&self, n: usize) -> usize {
        self.offsets[n]
    }

    pub fn level_dim(&self, n: usize) -> usize {
        self.offsets[n + 1] - self.offsets[n]
    }
}

/// An operator of fixed gauge degree `d`, given by its blocks `H_n -> H_{n+d}`.
#[derive(Clone, Debug)]
pub struct GradedOp {
    degree: isize,
    dims: Vec<usize>,
    /// `blocks[n]` has `dims[n + degree]` rows, or none when that level does not exist.
    blocks: Vec<CMatrix>,
}

impl GradedOp {
    pub fn zero(dims: &[usize], degree: isize) -> Self {
        let blocks = (0..dims.len())
            .map(|n| CMatrix::zeros(target_dim(dims, n, degree), dims[n]))
            .collect();
        GradedOp {
            degree,
            dims: dims.to_vec(),
            blocks,
        }
    }

    pub fn identity(dims: &[usize]) -> Self {
        Self::diagonal(dims, |_| c(1.0, 0.0))
    }

    /// Degree-zero operator acting as the scalar `f(n)` on level `n`.
    pub fn diagonal(dims: &[usize], f: impl Fn(usize) -> C64) -> Self {
        let blocks = dims
            .iter()
            .enumerate()
            .map(|(n, &d)| matrix::scale(f(n), matrix::identity(d).as_ref()))
            .collect();
        GradedOp {
            degree: 0,
            dims: dims.to_vec(),
            blocks,
        }
    }

    /// Degree-zero operator with the given block on level `n` and zero elsewhere.
    pub fn supported_on(dims: &[usize], n: usize, block: CMatrix) -> Self {
        assert_eq!((block.nrows(), block.ncols()), (dims[n], dims[n]));
        let mut op = Self::zero(dims, 0);
        op.blocks[n] = block;
        op
    }

    pub fn degree(&self) -> isize {
        self.degree
    }

    pub fn levels(&self) -> usize {
        self.dims.len() - 1
    }

    fn target(&self, n: usize) -> Option<usize> {
        target_level(self.dims.len(), n, self.degree)
    }

    /// Block `H_n -> H_{n+degree}`, if the target level exists.
    pub fn block(&self, n: usize) -> Option<&CMatrix> {
        self.target(n).map(|_| &self.blocks[n])
    }

    /// `self * rhs`.
    pub fn compose(&self, rhs: &GradedOp) -> GradedOp {
        assert_eq!(self.dims, rhs.dims);
        let degree = self.degree + rhs.degree;
        let mut out = GradedOp::zero(&self.dims, degree);
        for n in 0..self.dims.len() {
            if let (Some(mid), Some(_)) = (rhs.target(n), out.target(n)) {
                if self.target(mid).is_some() {
                    out.blocks[n] = &self.blocks[mid] * &rhs.blocks[n];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> GradedOp {
        let mut out = GradedOp::zero(&self.dims, -self.degree);
        for n in 0..self.dims.len() {
            if let Some(t) = self.target(n) {
                out.blocks[t] = self.blocks[n].adjoint().to_owned();
            }
        }
        out
    }

    fn zip(&self, rhs: &GradedOp, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> GradedOp {
        assert_eq!(self.degree, rhs.degree, "adding operators of different degree");
        GradedOp {
            degree: self.degree,
            dims: self.dims.clone(),
            blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, rhs: &GradedOp) -> GradedOp {
        self.zip(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &GradedOp) -> GradedOp {
        self.zip(rhs, |a, b| a - b)
    }

    pub fn scaled(&self, s: C64) -> GradedOp {
        GradedOp {
            degree: self.degree,
            dims: self.dims.clone(),
            blocks: self.blocks.iter().map(|b| matrix::scale(s, b.as_ref())).collect(),
        }
    }

    /// Norm of the compression to levels `0..=top`.
    pub fn norm_up_to(&self, top: usize) -> f64 {
        (0..=top.min(self.levels()))
            .filter(|&n| self.target(n).is_some_and(|t| t <= top))
            .map(|n| operator_norm(self.blocks[n].as_ref()))
            .fold(0.0, f64::max)
    }

    /// Norm of the restriction to `H_n`.
    pub fn norm_on_level(&self, n: usize) -> f64 {
        self.block(n).map_or(0.0, |b| operator_norm(b.as_ref()))
    }

    pub fn to_dense(&self, space: &FockSpace) -> CMatrix {
        let mut out = CMatrix::zeros(space.dim(), space.dim());
        for n in 0..self.dims.len() {
            if let Some(t) = self.target(n) {
                let (r0, c0) = (space.offset(t), space.offset(n));
                out.submatrix_mut(r0, c0, self.dims[t], self.dims[n])
                    .copy_from(&self.blocks[n]);
            }
        }
        out
    }
}

fn target_level(len: usize, n: usize, degree: isize) -> Option<usize> {
    let t = n as isize + degree;
    (0..len as isize).contains(&t).then_some(t as usize)
}

fn target_dim(dims: &[usize], n: usize, degree: isize) -> usize {
    target_level(dims.len(), n, degree).map_or(0, |t| dims[t])
}

/// A bounded function of the level, acting as a scalar on each `H_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeDiagonal {
    pub values: Vec<C64>,
}

impl GaugeDiagonal {
    pub fn indicator(levels: usize, k: usize) -> Self {
        GaugeDiagonal {
            values: (0..=levels).map(|n| c((n == k) as u8 as f64, 0.0)).collect(),
        }
    }

    /// `n -> phi(n)`.
    pub fn phi(levels: usize, q: f64) -> Self {
        GaugeDiagonal {
            values: (0..=levels).map(|n| c(phi(n, q), 0.0)).collect(),
        }
    }

    /// `gamma(f)(n) = f(n + 1)`, extended constantly past the top level.
    pub fn shift(&self) -> Self {
        let last = *self.values.last().unwrap();
        GaugeDiagonal {
            values: self.values[1..].iter().copied().chain([last]).collect(),
        }
    }

    pub fn to_op(&self, dims: &[usize]) -> GradedOp {
        GradedOp::diagonal(dims, |n| self.values[n])
    }
}

/// One letter of a word in the creation operators and their adjoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Letter {
    S(usize),
    SStar(usize),
}

/// `#S - #S*`; the operator of the word maps `H_n` into `H_{n + degree}`.
pub fn gauge_degree(word: &[Letter]) -> isize {
    word.iter()
        .map(|l| match l {
            Letter::S(_) => 1,
            Letter::SStar(_) => -1,
        })
        .sum()
}

/// Largest residuals of the defining relations, each measured on levels `0..N-1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelationReport {
    /// `f S_i = S_i gamma(f)` for the level indicators `f`.
    pub gauge: f64,
    /// `sum_i S_i S_i* = 1 - e_0`.
    pub cuntz: f64,
    /// `sum_i a_i S_i S_{m-i+1} = 0`.
    pub polynomial: f64,
    /// `S_i* S_j + a_i conj(a_j) phi S_{m-i+1} S_{m-j+1}* = delta_ij`.
    pub commutation: f64,
    /// `sum_i R_i R_i* = 1 - e_0`.
    pub right_cuntz: f64,
}

impl RelationReport {
    pub fn entries(&self) -> [(&'static str, f64); 5] {
        [
            ("gauge", self.gauge),
            ("cuntz", self.cuntz),
            ("polynomial", self.polynomial),
            ("commutation", self.commutation),
            ("right_cuntz", self.right_cuntz),
        ]
    }
}

/// Largest residuals of the tail projection identities on levels `0..N-1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailReport {
    /// `p_n^2 = p_n`.
    pub idempotency: f64,
    /// `p_n - p_{n+1} = e_n`.
    pub level_difference: f64,
    /// `p_{n+1} S_i = S_i p_n`.
    pub intertwining: f64,
}

/// The creation operators on a truncated Fock space.
#[derive(Debug)]
pub struct FockOperators {
    space: FockSpace,
    s: Vec<GradedOp>,
    s_star: Vec<GradedOp>,
    r: Vec<GradedOp>,
    r_star: Vec<GradedOp>,
    tails: Vec<OnceLock<GradedOp>>,
}

/// Builds the tower up to level `levels` and the operators on it.
pub fn build_fock(system: &TlSystem, levels: usize) -> Result<FockOperators, FockError> {
    build_fock_with_budget(system, levels, crate::jw::DEFAULT_MAX_SCALARS)
}

pub fn build_fock_with_budget(
    system: &TlSystem,
    levels: usize,
    max_scalars: u128,
) -> Result<FockOperators, FockError> {
    system.require_tau()?;
    if levels < 2 {
        return Err(FockError::TooFewLevels(levels));
    }
    let tower = JwTower::build(system, levels, max_scalars)?;
    Ok(FockOperators::new(FockSpace::new(tower)))
}

impl FockOperators {
    pub fn new(space: FockSpace) -> Self {
        let tower = space.tower();
        let m = tower.m();
        let dims = tower.dims();
        let levels = tower.levels();
        let mut s = Vec::with_capacity(m);
        let mut r = Vec::with_capacity(m);
        for i in 0..m {
            let mut si = GradedOp::zero(&dims, 1);
            let mut ri = GradedOp::zero(&dims, 1);
            for n in 0..levels {
                let v = tower.basis(n);
                let w = tower.basis(n + 1);
                let len = v.nrows();
                // first tensor factor is the most significant index
                let left = w.subrows(i * len, len);
                si.blocks[n] = left.adjoint() * v;
                let right = matrix::take_rows(w.as_ref(), (0..len).map(|x| x * m + i));
                ri.blocks[n] = right.adjoint() * v;
            }
            s.push(si);
            r.push(ri);
        }
        let s_star = s.iter().map(GradedOp::adjoint).collect();
        let r_star = r.iter().map(GradedOp::adjoint).collect();
        FockOperators {
            space,
            s,
            s_star,
            r,
            r_star,
            tails: (0..=levels).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn system(&self) -> &TlSystem {
        self.space.tower().system()
    }

    pub fn m(&self) -> usize {
        self.s.len()
    }

    pub fn levels(&self) -> usize {
        self.space.levels()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.space.tower().dims()
    }

    pub fn s(&self, i: usize) -> &GradedOp {
        &self.s[i]
    }

    pub fn s_star(&self, i: usize) -> &GradedOp {
        &self.s_star[i]
    }

    pub fn r(&self, i: usize) -> &GradedOp {
        &self.r[i]
    }

    pub fn r_star(&self, i: usize) -> &GradedOp {
        &self.r_star[i]
    }

    /// `S_i` as a `dim x dim` matrix on the whole truncated Fock space.
    pub fn s_dense(&self, i: usize) -> CMatrix {
        self.s[i].to_dense(&self.space)
    }

    pub fn r_dense(&self, i: usize) -> CMatrix {
        self.r[i].to_dense(&self.space)
    }

    pub fn identity(&self) -> GradedOp {
        GradedOp::identity(&self.dims())
    }

    /// Projection `e_n` onto `H_n`.
    pub fn level_projection(&self, n: usize) -> GradedOp {
        GradedOp::diagonal(&self.dims(), |k| c((k == n) as u8 as f64, 0.0))
    }

    /// The operator of a word, letters composed left to right as written.
    pub fn word(&self, word: &[Letter]) -> GradedOp {
        word.iter().fold(self.identity(), |acc, l| {
            let op = match *l {
                Letter::S(i) => &self.s[i],
                Letter::SStar(i) => &self.s_star[i],
            };
            acc.compose(op)
        })
    }

    /// `p_n = sum over words w of length n of S_w S_w*`, through `p_{n+1} = sum_i S_i p_n S_i*`.
    pub fn tail_projection(&self, n: usize) -> &GradedOp {
        self.tails[n].get_or_init(|| {
            if n == 0 {
                return self.identity();
            }
            let prev = self.tail_projection(n - 1);
            let dims = self.dims();
            (0..self.m()).fold(GradedOp::zero(&dims, 0), |acc, i| {
                acc.add(&self.s[i].compose(prev).compose(&self.s_star[i]))
            })
        })
    }

    pub fn tail_projections(&self) -> Vec<GradedOp> {
        (0..=self.levels()).map(|n| self.tail_projection(n).clone()).collect()
    }

    pub fn verify_relations(&self) -> RelationReport {
        let top = self.levels() - 1;
        let m = self.m();
        let dims = self.dims();
        let a = self.system().coeffs().to_vec();
        let one_minus_e0 = self.identity().sub(&self.level_projection(0));

        // checked on dense matrices so that the block placement is tested too
        let compress = |x: CMatrix| -> f64 {
            let k = self.space.offset(top + 1);
            operator_norm(x.submatrix(0, 0, k, k))
        };
        let mut gauge: f64 = 0.0;
        for k in 0..=self.levels() {
            let f = GaugeDiagonal::indicator(self.levels(), k);
            let fd = f.to_op(&dims).to_dense(&self.space);
            let gd = f.shift().to_op(&dims).to_dense(&self.space);
            for i in 0..m {
                let sd = self.s_dense(i);
                gauge = gauge.max(compress(&fd * &sd - &sd * &gd));
            }
        }

        let sum_ss = (0..m).fold(GradedOp::zero(&dims, 0), |acc, i| {
            acc.add(&self.s[i].compose(&self.s_star[i]))
        });
        let cuntz = sum_ss.sub(&one_minus_e0).norm_up_to(top);
        let sum_rr = (0..m).fold(GradedOp::zero(&dims, 0), |acc, i| {
            acc.add(&self.r[i].compose(&self.r_star[i]))
        });
        let right_cuntz = sum_rr.sub(&one_minus_e0).norm_up_to(top);

        let poly = (0..m).fold(GradedOp::zero(&dims, 2), |acc, i| {
            acc.add(&self.s[i].compose(&self.s[m - 1 - i]).scaled(a[i]))
        });
        let polynomial = poly.norm_up_to(top);

        let phi_op = GaugeDiagonal::phi(self.levels(), self.system().q()).to_op(&dims);
        let mut commutation: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let lhs = self.s_star[i].compose(&self.s[j]);
                let tail = phi_op
                    .compose(&self.s[m - 1 - i])
                    .compose(&self.s_star[m - 1 - j])
                    .scaled(a[i] * a[j].conj());
                let mut res = lhs.add(&tail);
                if i == j {
                    res = res.sub(&self.identity());
                }
                commutation = commutation.max(res.norm_up_to(top));
            }
        }
        RelationReport {
            gauge,
            cuntz,
            polynomial,
            commutation,
            right_cuntz,
        }
    }

    pub fn verify_tails(&self) -> TailReport {
        let top = self.levels() - 1;
        let mut report = TailReport {
            idempotency: 0.0,
            level_difference: 0.0,
            intertwining: 0.0,
        };
        for n in 0..=top {
            let p = self.tail_projection(n);
            let next = self.tail_projection(n + 1);
            report.idempotency = report.idempotency.max(p.compose(p).sub(p).norm_up_to(top));
            let diff = p.sub(next).sub(&self.level_projection(n));
            report.level_difference = report.level_difference.max(diff.norm_up_to(top));
            for si in &self.s {
                let res = next.compose(si).sub(&si.compose(p));
                report.intertwining = report.intertwining.max(res.norm_up_to(top));
            }
        }
        report
    }

    /// `(max ||[S_i, R_j]|_{H_n}||, max ||[S_i*, R_j]|_{H_n}||)`.
    pub fn commutator_norms(&self, n: usize) -> (f64, f64) {
        assert!(n < self.levels(), "level {n} is at or above the truncation");
        let mut c1: f64 = 0.0;
        let mut c2: f64 = 0.0;
        for i in 0..self.m() {
            for j in 0..self.m() {
                let a = self.s[i].compose(&self.r[j]).sub(&self.r[j].compose(&self.s[i]));
                let b = self.s_star[i].compose(&self.r[j]).sub(&self.r[j].compose(&self.s_star[i]));
                c1 = c1.max(a.norm_on_level(n));
                c2 = c2.max(b.norm_on_level(n));
            }
        }
        (c1, c2)
    }

    /// `Theta(x) = sum_i R_i x R_i*`.
    pub fn theta(&self, x: &GradedOp) -> GradedOp {
        let dims = self.dims();
        (0..self.m()).fold(GradedOp::zero(&dims, x.degree()), |acc, i| {
            acc.add(&self.r[i].compose(x).compose(&self.r_star[i]))
        })
    }

    /// `max ||x_{n+k} - psi_{n,n+k}(x_n)||` over `n0 <= n`, `n + k <= N - 1`.
    pub fn boundary_flatness(&self, x: &GradedOp, n0: usize) -> f64 {
        assert_eq!(x.degree(), 0, "boundary flatness needs a gauge-invariant operator");
        let top = self.levels() - 1;
        let tower = self.space.tower();
        let mut worst: f64 = 0.0;
        for n in n0..=top {
            for k in 1..=top - n {
                let psi = psi_map(tower, n, k, &x.blocks[n]);
                worst = worst.max(operator_norm((&x.blocks[n + k] - psi).as_ref()));
            }
        }
        worst
    }
}

/// `psi_{n,n+k}(x) = f_{n+k}(x (x) 1)f_{n+k}` read on `H_{n+k}`.
pub fn psi_map(tower: &JwTower, n: usize, k: usize, x: &CMatrix) -> CMatrix {
    let v = tower.basis(n);
    let w = tower.basis(n + k);
    let tail = tower.m().pow(k as u32);
    let mut out = CMatrix::zeros(w.ncols(), w.ncols());
    for b in 0..tail {
        let rows = matrix::take_rows(w.as_ref(), (0..v.nrows()).map(|a| a * tail + b));
        let y = v.adjoint() * &rows;
        out += y.adjoint() * x * &y;
    }
    out
}
