//! Fusion rules of the spin ladder `U_0, U_1, U_2, ...` and the integer
//! K-theory bookkeeping built on them. Everything here is exact.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KError {
    #[error("truncation {t} must exceed l + k = {}", .l + .k)]
    TruncationTooSmall { l: usize, k: usize, t: usize },
    #[error("truncation must be at least 1")]
    EmptyTruncation,
}

/// A finite direct sum `sum_n c_n [U_n]` with `c_n >= 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RepClass {
    multiplicities: BTreeMap<usize, u64>,
}

impl RepClass {
    pub fn irreducible(n: usize) -> Self {
        let mut r = RepClass::default();
        r.add(n, 1);
        r
    }

    fn add(&mut self, n: usize, count: u64) {
        if count > 0 {
            *self.multiplicities.entry(n).or_insert(0) += count;
        }
    }

    pub fn multiplicity(&self, n: usize) -> u64 {
        self.multiplicities.get(&n).copied().unwrap_or(0)
    }

    /// `(n, multiplicity)` with nonzero multiplicity, ascending in `n`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.multiplicities.iter().map(|(&n, &c)| (n, c))
    }

    /// Tensor product, extending [`fuse`] bilinearly.
    pub fn tensor(&self, other: &RepClass) -> RepClass {
        let mut out = RepClass::default();
        for (l, a) in self.iter() {
            for (k, b) in other.iter() {
                for (j, c) in fuse(l, k).iter() {
                    out.add(j, a * b * c);
                }
            }
        }
        out
    }

    /// `sum_n c_n dims[n]`, or `None` when a level is missing from `dims`.
    pub fn dimension(&self, dims: &[u128]) -> Option<u128> {
        self.iter()
            .map(|(n, c)| dims.get(n).map(|d| d * c as u128))
            .sum()
    }
}

/// `U_l (x) U_k = U_{|l-k|} (+) U_{|l-k|+2} (+) ... (+) U_{l+k}`.
pub fn fuse(l: usize, k: usize) -> RepClass {
    let mut r = RepClass::default();
    for j in (l.abs_diff(k)..=l + k).step_by(2) {
        r.add(j, 1);
    }
    r
}

/// Multiplicity of `U_l` in `(U_0 (+) ... (+) U_t) (x) U_k`, by summing fusion rules.
pub fn mult_in_fock_rep(l: usize, k: usize, t: usize) -> Result<u64, KError> {
    if t <= l + k {
        return Err(KError::TruncationTooSmall { l, k, t });
    }
    Ok((0..=t).map(|i| fuse(i, k).multiplicity(l)).sum())
}

/// `m_lk = (l + k - |l - k|)/2 + 1`.
pub fn mult_closed_form(l: usize, k: usize) -> u64 {
    ((l + k - l.abs_diff(k)) / 2 + 1) as u64
}

/// Integer matrix of `pi_*` with rows `[p_inf], [p_0], ..., [p_{T-1}]` and
/// columns `[U_0], ..., [U_{T-1}]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KPairingMatrix {
    pub trunc: usize,
    /// `entries[row][col]`, row 0 being `[p_inf]`.
    pub entries: Vec<Vec<i64>>,
}

impl KPairingMatrix {
    /// Square truncation: drops the row of `[p_{T-1}]`, which is identically zero.
    pub fn square(&self) -> Vec<Vec<i64>> {
        self.entries[..self.trunc].to_vec()
    }

    /// Nonzero entries of column `n` sit in rows `0..=n` of [`Self::square`],
    /// with diagonal `1, -1, -1, ...`.
    pub fn is_triangular_unipotent(&self) -> bool {
        let sq = self.square();
        (0..self.trunc).all(|col| {
            let diag = if col == 0 { 1 } else { -1 };
            sq[col][col] == diag && (col + 1..self.trunc).all(|row| sq[row][col] == 0)
        })
    }

    pub fn determinant(&self) -> i128 {
        determinant(&self.square())
    }
}

/// `pi_*([U_n]) = (n+1)[p_inf] + sum_{k<n} (k - n)[p_k]`.
pub fn pi_star_matrix(t: usize) -> Result<KPairingMatrix, KError> {
    if t == 0 {
        return Err(KError::EmptyTruncation);
    }
    let mut entries = vec![vec![0i64; t]; t + 1];
    for n in 0..t {
        entries[0][n] = n as i64 + 1;
        for k in 0..n {
            entries[k + 1][n] = k as i64 - n as i64;
        }
    }
    Ok(KPairingMatrix { trunc: t, entries })
}

/// The same matrix from fusion multiplicities: the `[p_inf]` entry is the
/// stable value of `m_nk` for large `k`, and `c_k = m_nk - (n+1) m_0k`.
pub fn pi_star_from_multiplicities(t: usize) -> Result<KPairingMatrix, KError> {
    if t == 0 {
        return Err(KError::EmptyTruncation);
    }
    let mult = |l: usize, k: usize| mult_in_fock_rep(l, k, l + k + 1).map(|v| v as i64);
    let mut entries = vec![vec![0i64; t]; t + 1];
    for n in 0..t {
        let stable = mult(n, t)?;
        entries[0][n] = stable;
        for k in 0..t {
            entries[k + 1][n] = mult(n, k)? - stable * mult(0, k)?;
        }
    }
    Ok(KPairingMatrix { trunc: t, entries })
}

/// Fraction-free (Bareiss) elimination.
pub fn determinant(a: &[Vec<i64>]) -> i128 {
    let n = a.len();
    if n == 0 {
        return 1;
    }
    let mut m: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&r| m[r][k] != 0) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// A finitely generated abelian group `Z^free_rank (+) Z/torsion`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AbelianGroup {
    pub free_rank: u32,
    pub torsion: u64,
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.free_rank, self.torsion) {
            (0, 1) => write!(f, "0"),
            (0, t) => write!(f, "Z/{t}"),
            (1, 1) => write!(f, "Z"),
            (r, 1) => write!(f, "Z^{r}"),
            (r, t) => write!(f, "Z^{r} + Z/{t}"),
        }
    }
}

/// `K_0` of the Cuntz-Pimsner algebra, as the cokernel of multiplication by
/// `2 - m` on `Z`, the Euler characteristic of `d_{n+1} = m d_n - d_{n-1}`.
///
/// This reproduces the known answer; it is a consistency check rather than a
/// derivation.
pub fn k0_order(m: usize) -> AbelianGroup {
    match m.abs_diff(2) {
        0 => AbelianGroup { free_rank: 1, torsion: 1 },
        t => AbelianGroup {
            free_rank: 0,
            torsion: t as u64,
        },
    }
}

/// `K_1`, the kernel of the same map.
pub fn k1_group(m: usize) -> AbelianGroup {
    AbelianGroup {
        free_rank: (m == 2) as u32,
        torsion: 1,
    }
}
