#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use tlsub_core::{c, CMatrix, C64};

pub fn reals(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| c(x, 0.0)).collect()
}

pub fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos()
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(gaussian(rng), gaussian(rng)))
}

/// Haar-ish unitary: Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    let g = random_matrix(rng, n, n);
    let mut q = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut v: Vec<C64> = (0..n).map(|i| g[(i, j)]).collect();
        for k in 0..j {
            let o: C64 = (0..n).map(|i| q[(i, k)].conj() * v[i]).sum();
            for i in 0..n {
                v[i] -= o * q[(i, k)];
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            q[(i, j)] = v[i] / norm;
        }
    }
    q
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMatrix {
    let g = random_matrix(rng, n, n);
    CMatrix::from_fn(n, n, |i, j| (g[(i, j)] + g[(j, i)].conj()) * 0.5)
}

pub fn random_phase(rng: &mut impl Rng) -> C64 {
    C64::from_polar(1.0, rng.gen_range(-PI..PI))
}

/// Coefficients with `|a_i a_{m-i+1}| = 1` and arbitrary phases.
pub fn random_admissible(rng: &mut impl Rng, m: usize) -> Vec<C64> {
    let mut a = vec![c(0.0, 0.0); m];
    for i in 0..m / 2 {
        let r: f64 = rng.gen_range(0.3..3.0);
        a[i] = random_phase(rng) * r;
        a[m - 1 - i] = random_phase(rng) / r;
    }
    if m % 2 == 1 {
        a[m / 2] = random_phase(rng);
    }
    a
}

/// Coefficients `a_i conj(a_{m-i+1}) = -tau`, so that the Fock relations apply.
pub fn random_signed(rng: &mut impl Rng, m: usize, tau: f64) -> Vec<C64> {
    let mut a = vec![c(0.0, 0.0); m];
    for i in 0..m / 2 {
        let r: f64 = rng.gen_range(0.5..2.0);
        let z = random_phase(rng);
        a[i] = z * r;
        a[m - 1 - i] = -tau * z / r;
    }
    if m % 2 == 1 {
        // a conj(a) = |a|^2 = -tau forces tau = -1
        a[m / 2] = random_phase(rng);
    }
    a
}

/// Pairs `(a_i, a_{m-i+1})` for `i <= m/2` (middle paired with itself).
pub fn coefficient_pairs(a: &[C64]) -> Vec<(C64, C64)> {
    let m = a.len();
    (0..(m + 1) / 2).map(|i| (a[i], a[m - 1 - i])).collect()
}

/// Equal as multisets of pairs within `tol`.
pub fn same_pairs(a: &[C64], b: &[C64], tol: f64) -> bool {
    let (pa, pb) = (coefficient_pairs(a), coefficient_pairs(b));
    if pa.len() != pb.len() {
        return false;
    }
    let mut used = vec![false; pb.len()];
    pa.iter().all(|x| {
        let hit = (0..pb.len()).find(|&k| {
            !used[k] && (pb[k].0 - x.0).norm() <= tol && (pb[k].1 - x.1).norm() <= tol
        });
        hit.map(|k| used[k] = true).is_some()
    })
}
