use proptest::prelude::*;
use tlsub_core::jw::dims_by_recurrence;
use tlsub_core::ktheory::{
    determinant, fuse, mult_closed_form, mult_in_fock_rep, pi_star_from_multiplicities, pi_star_matrix,
    RepClass,
};

#[test]
fn fusion_is_commutative_and_associative() {
    for l in 0..=8 {
        for k in 0..=8 {
            assert_eq!(fuse(l, k), fuse(k, l));
            for j in 0..=8 {
                let left = fuse(l, k).tensor(&RepClass::irreducible(j));
                let right = RepClass::irreducible(l).tensor(&fuse(k, j));
                assert_eq!(left, right, "({l} (x) {k}) (x) {j}");
            }
        }
    }
}

#[test]
fn pairing_matrix_two_routes_and_unimodularity() {
    for t in 1..=15 {
        let p = pi_star_matrix(t).unwrap();
        assert_eq!(p, pi_star_from_multiplicities(t).unwrap());
        assert!(p.is_triangular_unipotent());
        assert_eq!(p.determinant().abs(), 1);
        // zero row dropped by the square truncation
        assert!(p.entries[t].iter().all(|&x| x == 0));
    }
}

proptest! {
    #[test]
    fn multiplicity_matches_closed_form(l in 0usize..40, k in 0usize..40, extra in 1usize..10) {
        let brute = mult_in_fock_rep(l, k, l + k + extra).unwrap();
        prop_assert_eq!(brute, mult_closed_form(l, k));
        prop_assert!(mult_in_fock_rep(l, k, l + k).is_err());
    }

    #[test]
    fn dimension_is_conserved(m in 2usize..7, l in 0usize..8, k in 0usize..8) {
        let dims = dims_by_recurrence(m, 16).unwrap();
        prop_assert_eq!(fuse(l, k).dimension(&dims), Some(dims[l] * dims[k]));
    }

    #[test]
    fn determinant_of_permuted_identity(perm in Just((0..6).collect::<Vec<usize>>()).prop_shuffle()) {
        let a: Vec<Vec<i64>> = (0..6).map(|i| (0..6).map(|j| (perm[i] == j) as i64).collect()).collect();
        // sign of the permutation by counting inversions
        let inv = (0..6).flat_map(|i| (i + 1..6).map(move |j| (i, j))).filter(|&(i, j)| perm[i] > perm[j]).count();
        prop_assert_eq!(determinant(&a), if inv % 2 == 0 { 1 } else { -1 });
    }
}
