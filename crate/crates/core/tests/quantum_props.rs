use proptest::prelude::*;

use qnmlab_core::linalg::max_abs_diff;
use qnmlab_core::quantum::{self, DensityOperator, SystemLayout};
use qnmlab_core::random;

fn state(label: &str, d: usize, rank: usize, seed: u64) -> DensityOperator {
    let mut r = random::rng(seed);
    DensityOperator::new(random::density_matrix(d, rank.min(d), &mut r), SystemLayout::single(label, d)).unwrap()
}

fn bipartite(da: usize, db: usize, rank: usize, seed: u64) -> DensityOperator {
    let mut r = random::rng(seed);
    let layout = SystemLayout::new(&[("A", da), ("B", db)]).unwrap();
    DensityOperator::new(random::density_matrix(da * db, rank.clamp(1, da * db), &mut r), layout).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_recovers_product_factors(da in 1usize..5, db in 1usize..5, ra in 1usize..5, rb in 1usize..5, seed: u64) {
        let a = state("A", da, ra, seed);
        let b = state("B", db, rb, seed.wrapping_add(1));
        let ab = quantum::tensor_compose(&[&a, &b]).unwrap();
        prop_assert!(max_abs_diff(ab.marginal(&["A"]).unwrap().matrix(), a.matrix()) < 1e-12);
        prop_assert!(max_abs_diff(ab.partial_trace(&["A"]).unwrap().matrix(), b.matrix()) < 1e-12);
    }

    #[test]
    fn pure_states_have_zero_entropy_and_unitary_invariance(d in 2usize..7, rank in 1usize..7, seed: u64) {
        let mut r = random::rng(seed);
        let psi = random::pure_state(d, &mut r);
        let pure = DensityOperator::from_pure(&psi, SystemLayout::single("A", d)).unwrap();
        prop_assert!(pure.entropy().abs() < 1e-9);
        let rho = state("A", d, rank, seed);
        let u = random::unitary(d, &mut r);
        let rot = DensityOperator::new(&u * rho.matrix() * u.adjoint(), rho.layout().clone()).unwrap();
        prop_assert!((rho.entropy() - rot.entropy()).abs() < 1e-9);
    }

    #[test]
    fn information_quantities_are_nonnegative(da in 2usize..4, db in 2usize..4, rank in 1usize..10, seed: u64) {
        let rho = bipartite(da, db, rank, seed);
        prop_assert!(quantum::mutual_information(&rho, &["A"], &["B"]).unwrap() >= -1e-9);
        prop_assert!(quantum::pinsker_gap(&rho, &["A"], &["B"]).unwrap() >= -1e-9);
        let c = state("C", 2, 2, seed.wrapping_add(7));
        let abc = quantum::tensor_compose(&[&rho, &c]).unwrap();
        prop_assert!(quantum::conditional_mutual_information(&abc, &["A"], &["B"], &["C"]).unwrap() >= -1e-9);
    }

    #[test]
    fn swap_trick_holds(d in 2usize..7, seed: u64) {
        let mut r = random::rng(seed);
        let a = random::ginibre(d, d, &mut r);
        let b = random::ginibre(d, d, &mut r);
        let (l, rr) = quantum::swap_trick_check(&a, &b).unwrap();
        prop_assert!((l - rr).norm() < 1e-10 * (1.0 + l.norm()));
    }

    #[test]
    fn holder_inequality(d in 2usize..6, seed: u64) {
        let mut r = random::rng(seed);
        let x = random::ginibre(d, d, &mut r);
        let y = random::ginibre(d, d, &mut r);
        let (lhs, rhs) = quantum::holder_check(&x, &y);
        prop_assert!(lhs <= rhs + 1e-10);
    }

    #[test]
    fn trace_distance_is_a_metric_on_states(d in 2usize..5, seed: u64) {
        let a = state("A", d, d, seed);
        let b = state("A", d, 1, seed.wrapping_add(1));
        let c = state("A", d, 2, seed.wrapping_add(2));
        let ab = a.trace_distance(&b).unwrap();
        prop_assert!((0.0..=2.0 + 1e-12).contains(&ab));
        prop_assert!(ab <= a.trace_distance(&c).unwrap() + c.trace_distance(&b).unwrap() + 1e-12);
        prop_assert!(a.trace_distance(&a).unwrap() < 1e-12);
    }
}

#[test]
fn phi_plus_marginals_are_maximally_mixed() {
    for d in 2..5 {
        let phi = quantum::max_entangled_on("A", "B", d);
        assert!(max_abs_diff(phi.marginal(&["A"]).unwrap().matrix(), &quantum::maximally_mixed(d)) < 1e-12);
        assert!((quantum::mutual_information(&phi, &["A"], &["B"]).unwrap() - 2.0 * (d as f64).log2()).abs() < 1e-9);
    }
}
