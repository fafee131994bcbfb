mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tlsub_core::jw::{build_tower, phi, JwTower};
use tlsub_core::matrix::{self, frobenius_norm, identity, kron, operator_norm, range_basis, CMatrix};
use tlsub_core::tl::TlSystem;
use tlsub_core::{c, C64};

use common::{random_admissible, reals};

fn tower(coeffs: &[C64], levels: usize) -> JwTower {
    build_tower(&TlSystem::from_coefficients(coeffs).unwrap(), levels).unwrap()
}

fn e_at(e: &CMatrix, m: usize, n: usize, i: usize) -> CMatrix {
    let left = identity(m.pow(i as u32));
    let right = identity(m.pow((n - i - 2) as u32));
    kron(kron(left.as_ref(), e.as_ref()).as_ref(), right.as_ref())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn projections_kill_e_everywhere(seed in any::<u64>(), m in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_admissible(&mut rng, m);
        let levels = if m == 2 { 6 } else { 4 };
        let t = tower(&a, levels);
        let sys = t.system().clone();
        for n in 2..=levels {
            prop_assert!(t.max_kill_defect(n) < 1e-8);
            // same through dense matrices at the top level
            if n == levels {
                let f = t.projection(n).unwrap();
                for i in 0..=n - 2 {
                    let k = operator_norm((&f * e_at(sys.projection(), m, n, i)).as_ref());
                    prop_assert!(k < 1e-8);
                }
            }
        }
    }

    #[test]
    fn projections_are_projections_of_recurrence_rank(seed in any::<u64>(), m in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_admissible(&mut rng, m);
        let levels = if m == 2 { 5 } else { 3 };
        let t = tower(&a, levels);
        let d = tlsub_core::jw::dims_by_recurrence(m, levels).unwrap();
        for n in 0..=levels {
            let f = t.projection(n).unwrap();
            prop_assert!(operator_norm((&f * &f - &f).as_ref()) < 1e-9);
            prop_assert!(operator_norm((&f - f.adjoint()).as_ref()) < 1e-9);
            prop_assert!((matrix::trace(f.as_ref()).re - d[n] as f64).abs() < 1e-6);
            prop_assert!(t.idempotency_defect(n) < 1e-9);
            // independent rank count from the dense projection
            prop_assert_eq!(range_basis(f.as_ref(), 1e-9).unwrap().rank() as u128, d[n]);
        }
    }
}

#[test]
fn monotone_under_both_embeddings() {
    for (coeffs, levels) in [(reals(&[1.0, -1.0]), 5), (reals(&[1.0, 1.0, 1.0]), 4)] {
        let t = tower(&coeffs, levels);
        let m = coeffs.len();
        for n in 1..levels {
            let next = t.projection(n + 1).unwrap();
            let f = t.projection(n).unwrap();
            let left = kron(identity(m).as_ref(), f.as_ref());
            let right = kron(f.as_ref(), identity(m).as_ref());
            // P <= Q for projections means Q P = P
            assert!(operator_norm((&left * &next - &next).as_ref()) < 1e-8);
            assert!(operator_norm((&right * &next - &next).as_ref()) < 1e-8);
        }
    }
}

#[test]
fn correction_term_has_rank_of_previous_level() {
    // [2]_q phi(n) (1 (x) f_n)(e (x) 1)(1 (x) f_n) is a projection equivalent to e (x) f_{n-1}
    let q: f64 = 0.5;
    for coeffs in [reals(&[q.powf(-0.5), -q.sqrt()]), reals(&[1.0, 1.0, 1.0])] {
        let t = tower(&coeffs, 4);
        let sys = t.system();
        let m = sys.m();
        for n in 1..4 {
            let one_f = kron(identity(m).as_ref(), t.projection(n).unwrap().as_ref());
            let e1 = kron(sys.projection().as_ref(), identity(m.pow(n as u32 - 1)).as_ref());
            let corr = matrix::scale(c(sys.quantum_two() * phi(n, sys.q()), 0.0), (&one_f * &e1 * &one_f).as_ref());
            let rank = range_basis(corr.as_ref(), 1e-9).unwrap().rank();
            assert_eq!(rank, t.dim(n - 1), "m={m} n={n}");
        }
    }
}

#[test]
fn basis_at_level_two_spans_symmetric_tensors() {
    let t = tower(&reals(&[1.0, -1.0]), 2);
    let v = t.subspace_basis(2).unwrap();
    assert_eq!((v.ambient_dim(), v.rank()), (4, 3));
    let sym = CMatrix::from_fn(4, 4, |i, j| {
        let flip = |x: usize| (x % 2) * 2 + x / 2;
        c(((i == j) as u8 as f64 + (flip(i) == j) as u8 as f64) / 2.0, 0.0)
    });
    assert!(frobenius_norm((v.projection() - sym).as_ref()) < 1e-12);
    assert_eq!(t.subspace_basis(0).unwrap().matrix(), &identity(1));
    assert!(matrix::isometry_defect(t.subspace_basis(1).unwrap().matrix().as_ref()) < 1e-15);
}

#[test]
fn wenzl_defect_decays_geometrically_for_all_ones() {
    let t = tower(&reals(&[1.0, 1.0, 1.0]), 6);
    let q = t.system().q();
    let ratios: Vec<f64> = (1..6).map(|n| t.wenzl_defect(n) / q.powi(n as i32)).collect();
    assert!(ratios.iter().all(|&r| r <= 3.0), "{ratios:?}");
}

#[test]
fn wenzl_defect_decays_like_inverse_root_at_q_one() {
    let t = tower(&reals(&[1.0, -1.0]), 10);
    let scaled: Vec<f64> = (1..10).map(|n| t.wenzl_defect(n) * (n as f64).sqrt()).collect();
    assert!(scaled.iter().all(|&s| s <= 2.0 * scaled[0]), "{scaled:?}");
    // and it does decay
    assert!(t.wenzl_defect(9) < t.wenzl_defect(1));
}

#[test]
fn complex_coefficients_build() {
    let a = vec![c(0.0, 0.5), c(0.6, 0.8), c(0.8, -0.6), c(0.0, 2.0)];
    let t = tower(&a, 4);
    assert_eq!(t.dims(), vec![1, 4, 15, 56, 209]);
    assert!(t.max_kill_defect(4) < 1e-8);
}
