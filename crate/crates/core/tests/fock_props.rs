mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tlsub_core::fock::{build_fock, gauge_degree, psi_map, FockOperators, GradedOp, Letter};
use tlsub_core::jw::phi;
use tlsub_core::matrix::{self, frobenius_norm, hermitian_eigenvalues, identity, operator_norm, CMatrix};
use tlsub_core::tl::TlSystem;
use tlsub_core::{c, C64};

use common::{random_hermitian, random_matrix, random_signed, reals};

fn fock(coeffs: &[C64], levels: usize) -> FockOperators {
    build_fock(&TlSystem::from_coefficients(coeffs).unwrap(), levels).unwrap()
}

fn symmetrizer(n: usize) -> CMatrix {
    // average of all permutations of n binary tensor factors
    let dim = 1usize << n;
    let mut perms: Vec<Vec<usize>> = vec![vec![]];
    for k in 0..n {
        perms = perms
            .into_iter()
            .flat_map(|p| (0..=k).map(move |pos| {
                let mut q = p.clone();
                q.insert(pos, k);
                q
            }))
            .collect();
    }
    let mut s = CMatrix::zeros(dim, dim);
    let w = 1.0 / perms.len() as f64;
    for p in &perms {
        for x in 0..dim {
            let bit = |j: usize| (x >> (n - 1 - j)) & 1;
            let y = (0..n).fold(0, |acc, j| (acc << 1) | bit(p[j]));
            s[(y, x)] += c(w, 0.0);
        }
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn relations_hold_for_signed_systems(seed in any::<u64>(), m in 2usize..5, plus in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tau = if plus && m % 2 == 0 { 1.0 } else { -1.0 };
        let a = random_signed(&mut rng, m, tau);
        let levels = if m == 2 { 6 } else { 4 };
        let ops = fock(&a, levels);
        for (name, v) in ops.verify_relations().entries() {
            prop_assert!(v < 1e-10, "{} = {}", name, v);
        }
        let tails = ops.verify_tails();
        prop_assert!(tails.level_difference < 1e-9 && tails.intertwining < 1e-9 && tails.idempotency < 1e-9);
    }

    #[test]
    fn theta_iterates_match_psi(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ops = fock(&reals(&[1.0, 1.0, 1.0]), 5);
        let dims = ops.dims();
        // a block-diagonal x on all levels at once
        let mut x = GradedOp::zero(&dims, 0);
        for n in 0..dims.len() {
            x = x.add(&GradedOp::supported_on(&dims, n, random_hermitian(&mut rng, dims[n])));
        }
        let mut iterate = x.clone();
        for k in 1..=4 {
            iterate = ops.theta(&iterate);
            for n in 0..=4 - k {
                let psi = psi_map(ops.space().tower(), n, k, x.block(n).unwrap());
                let got = iterate.block(n + k).unwrap();
                prop_assert!(operator_norm((got - &psi).as_ref()) < 1e-9);
            }
        }
    }

    #[test]
    fn theta_is_contractive_and_psi_positive(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ops = fock(&reals(&[1.0, -1.0]), 6);
        let dims = ops.dims();
        let mut x = GradedOp::zero(&dims, 0);
        for n in 0..dims.len() {
            x = x.add(&GradedOp::supported_on(&dims, n, random_hermitian(&mut rng, dims[n])));
        }
        prop_assert!(ops.theta(&x).norm_up_to(5) <= x.norm_up_to(6) + 1e-12);

        let g = random_matrix(&mut rng, 3, 3);
        let pos = &g * g.adjoint();
        let out = psi_map(ops.space().tower(), 2, 3, &pos);
        let low = hermitian_eigenvalues(matrix::hermitian_part(out.as_ref()).as_ref()).unwrap()[0];
        prop_assert!(low >= -1e-10);
    }
}

#[test]
fn contraction_form_of_adjoint() {
    // S_i* zeta = (<xi_i| (x) 1) zeta for zeta in H_{n+1}, without projecting back
    let ops = fock(&reals(&[1.0, 1.0, 1.0]), 4);
    let tower = ops.space().tower();
    for n in 0..4 {
        let v = tower.subspace_basis(n).unwrap().matrix();
        let w = tower.subspace_basis(n + 1).unwrap().matrix();
        let len = v.nrows();
        for i in 0..3 {
            let contracted = w.subrows(i * len, len).to_owned();
            let via_s = v * ops.s_star(i).block(n + 1).unwrap();
            assert!(frobenius_norm((contracted - via_s).as_ref()) < 1e-10);
        }
    }
}

#[test]
fn symmetric_fock_space_for_antisymmetric_tensor() {
    let ops = fock(&reals(&[1.0, -1.0]), 4);
    let tower = ops.space().tower();
    for n in 0..3 {
        let (sn, sn1) = (symmetrizer(n), symmetrizer(n + 1));
        assert!(frobenius_norm((tower.projection(n).unwrap() - &sn).as_ref()) < 1e-10);
        for i in 0..2 {
            let mut ei = CMatrix::zeros(2, 1);
            ei[(i, 0)] = c(1.0, 0.0);
            // classical creation operator zeta -> P_sym(e_i (x) zeta), compressed
            let classical = &sn1 * matrix::kron(ei.as_ref(), sn.as_ref());
            let v = tower.subspace_basis(n).unwrap().matrix();
            let w = tower.subspace_basis(n + 1).unwrap().matrix();
            let ours = w * ops.s(i).block(n).unwrap() * v.adjoint();
            assert!(frobenius_norm((ours - classical).as_ref()) < 1e-10, "n={n} i={i}");
        }
    }
}

#[test]
fn su2_relation_holds_up_to_phi() {
    // S_1* S_1 + phi S_2 S_2* = 1 exactly, so S_1* S_1 + S_2 S_2* - 1 = (1 - phi) S_2 S_2*
    let ops = fock(&reals(&[1.0, -1.0]), 6);
    let lhs = ops
        .s_star(0)
        .compose(ops.s(0))
        .add(&ops.s(1).compose(ops.s_star(1)))
        .sub(&ops.identity());
    let s2s2 = ops.s(1).compose(ops.s_star(1));
    for n in 0..=5 {
        let want = (1.0 - phi(n, 1.0)) * s2s2.norm_on_level(n);
        assert!((lhs.norm_on_level(n) - want).abs() < 1e-10, "level {n}");
    }
    assert!(lhs.norm_on_level(5) < lhs.norm_on_level(1));
}

#[test]
fn q_one_branch() {
    let ops = fock(&reals(&[1.0, -1.0]), 6);
    assert_eq!(ops.system().q(), 1.0);
    for (name, v) in ops.verify_relations().entries() {
        assert!(v < 1e-9, "{name} = {v}");
    }
}

#[test]
fn polynomial_relation_is_exact_at_every_level() {
    let ops = fock(&reals(&[1.0, 1.0, 1.0]), 5);
    let a = ops.system().coeffs().to_vec();
    let dims = ops.dims();
    let p = (0..3).fold(GradedOp::zero(&dims, 2), |acc, i| {
        acc.add(&ops.s(i).compose(ops.s(2 - i)).scaled(a[i]))
    });
    for n in 0..=3 {
        assert!(p.norm_on_level(n) < 1e-13, "level {n}");
    }
}

#[test]
fn commutators() {
    let ops = fock(&reals(&[1.0, 1.0, 1.0]), 6);
    let q = ops.system().q();
    for n in 0..6 {
        let (c1, _) = ops.commutator_norms(n);
        assert!(c1 < 1e-12, "level {n}: {c1}");
    }
    // on the vacuum S_i* R_j Omega = delta_ij Omega and S_i* Omega = 0
    let (_, c0) = ops.commutator_norms(0);
    assert!((c0 - 1.0).abs() < 1e-12);
    let ratios: Vec<f64> = (1..=4).map(|n| ops.commutator_norms(n).1 / q.powi(n as i32)).collect();
    assert!(ratios.iter().all(|&r| r <= 2.0 * ratios[0]), "{ratios:?}");
}

#[test]
fn right_cuntz_relation() {
    let ops = fock(&reals(&[0.5, 1.0, 2.0]), 4);
    assert!(ops.verify_relations().right_cuntz < 1e-10);
}

#[test]
fn theta_of_vacuum_projection() {
    let ops = fock(&reals(&[1.0, 1.0, 1.0]), 4);
    let t = ops.theta(&ops.level_projection(0));
    let block = t.block(1).unwrap();
    assert!(frobenius_norm((block - identity(3)).as_ref()) < 1e-12);
    let psi = psi_map(ops.space().tower(), 0, 1, &identity(1));
    assert!(frobenius_norm((psi - identity(3)).as_ref()) < 1e-12);
}

#[test]
fn boundary_flatness_examples() {
    let ops = fock(&reals(&[1.0, 1.0, 1.0]), 6);
    assert!(ops.boundary_flatness(&ops.identity(), 0) < 1e-12);
    let p1 = ops.tail_projection(1).clone();
    assert!(ops.boundary_flatness(&p1, 1) < 1e-10);
    let x = ops.word(&[Letter::S(0), Letter::SStar(0)]);
    let q = ops.system().q();
    let ratios: Vec<f64> = (0..=3).map(|n0| ops.boundary_flatness(&x, n0) / q.powi(n0 as i32)).collect();
    assert!(ratios.iter().all(|&r| r <= 4.0 * ratios[0] + 1e-12), "{ratios:?}");
    assert!(ops.boundary_flatness(&x, 3) < ops.boundary_flatness(&x, 0));
}

#[test]
fn words_and_degrees() {
    let ops = fock(&reals(&[1.0, -1.0]), 4);
    let w = [Letter::S(0), Letter::S(1)];
    assert_eq!(gauge_degree(&w), 2);
    let op = ops.word(&w);
    assert_eq!(op.degree(), 2);
    let b = op.block(1).unwrap();
    assert_eq!((b.nrows(), b.ncols()), (4, 2));
    // S_i* kills the vacuum
    let down = ops.word(&[Letter::SStar(1)]);
    assert!(down.block(0).is_none());
    assert_eq!(down.norm_on_level(0), 0.0);
}

#[test]
fn dense_and_graded_agree() {
    let ops = fock(&reals(&[1.0, 1.0, 1.0]), 4);
    let dims = ops.dims();
    let sum = (0..3).fold(GradedOp::zero(&dims, 0), |acc, i| acc.add(&ops.s(i).compose(ops.s_star(i))));
    let dense = (0..3).fold(CMatrix::zeros(ops.space().dim(), ops.space().dim()), |acc, i| {
        acc + ops.s_dense(i) * ops.s_dense(i).adjoint()
    });
    assert!(frobenius_norm((sum.to_dense(ops.space()) - dense).as_ref()) < 1e-12);
    let r = ops.r_dense(1);
    assert_eq!(r.nrows(), ops.space().dim());
}
