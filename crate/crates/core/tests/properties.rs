mod common;

use common::*;
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toral::constructions::{
    disjoint_hyperplane_orbits, verify_family, Budget, DisjointFamilyCertificate,
};
use toral::dynamics::{
    act, acts_distally_on_subp, converges_to_full, dual_matrix, invariant_rational_subspaces,
    is_distal_linear, is_ergodic, orbit, OrbitStatus,
};
use toral::linalg::{matrix_order, IntMatrix, UnimodularMatrix};
use toral::torus::{
    contains, covector_to_hyperplane, hyperplane_to_covector, PrimitiveCovector, Subtorus,
};

fn word(n: usize, max_len: usize) -> impl Strategy<Value = UnimodularMatrix> {
    any::<u64>().prop_map(move |seed| {
        random_word(&mut ChaCha8Rng::seed_from_u64(seed), n, max_len)
    })
}

fn dim_and_word() -> impl Strategy<Value = (usize, UnimodularMatrix)> {
    (2usize..=3).prop_flat_map(|n| (Just(n), word(n, 8)))
}

fn generators(n: usize) -> impl Strategy<Value = Vec<Vec<BigInt>>> {
    prop::collection::vec(prop::collection::vec(-4i64..=4, n), 1..=n)
        .prop_map(|rows| rows.iter().map(|r| big(r)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn action_is_a_group_action(
        (n, t) in dim_and_word(),
        seed in any::<u64>(),
        gens in generators(3),
    ) {
        let u = random_word(&mut ChaCha8Rng::seed_from_u64(seed), n, 6);
        let gens: Vec<Vec<BigInt>> = gens.into_iter().map(|mut g| { g.truncate(n); g }).collect();
        let h = Subtorus::from_generators(n, &gens).unwrap();
        let tu = act(&t.compose(&u), &h).unwrap();
        prop_assert_eq!(&tu, &act(&t, &act(&u, &h).unwrap()).unwrap());
        prop_assert_eq!(act(&UnimodularMatrix::identity(n), &h).unwrap(), h.clone());
        prop_assert_eq!(act(&t.inverse(), &act(&t, &h).unwrap()).unwrap(), h.clone());
        prop_assert_eq!(tu.dim(), h.dim());
    }

    #[test]
    fn action_preserves_containment((n, t) in dim_and_word(), gens in generators(3)) {
        let gens: Vec<Vec<BigInt>> = gens.into_iter().map(|mut g| { g.truncate(n); g }).collect();
        let big_h = Subtorus::from_generators(n, &gens).unwrap();
        let small = Subtorus::from_generators(n, &gens[..1]).unwrap();
        prop_assert!(contains(&big_h, &small));
        prop_assert!(contains(&act(&t, &big_h).unwrap(), &act(&t, &small).unwrap()));
    }

    #[test]
    fn duality_square_commutes((n, t) in dim_and_word(), v in prop::collection::vec(-6i64..=6, 3)) {
        prop_assume!(v[..n].iter().any(|&x| x != 0));
        let g = PrimitiveCovector::canonical(big(&v[..n])).unwrap();
        let h = covector_to_hyperplane(&g);
        prop_assert_eq!(hyperplane_to_covector(&h).unwrap(), g.clone());
        let image = hyperplane_to_covector(&act(&t, &h).unwrap()).unwrap();
        let dual = PrimitiveCovector::canonical(dual_matrix(&t).mul_vec(g.coords())).unwrap();
        prop_assert_eq!(image, dual);
    }

    #[test]
    fn serde_round_trips((n, t) in dim_and_word(), gens in generators(3)) {
        let gens: Vec<Vec<BigInt>> = gens.into_iter().map(|mut g| { g.truncate(n); g }).collect();
        let h = Subtorus::from_generators(n, &gens).unwrap();
        let back: UnimodularMatrix = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        prop_assert_eq!(back, t.clone());
        let back: Subtorus = serde_json::from_str(&serde_json::to_string(&h).unwrap()).unwrap();
        prop_assert_eq!(back, h);
        let budget = Budget { max_norm: 12, max_window: 16, max_candidates: 2000, ..Budget::default() };
        let cert = disjoint_hyperplane_orbits(&t, 3, &budget).unwrap();
        let text = serde_json::to_string(&cert).unwrap();
        let back: DisjointFamilyCertificate = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &cert);
        if !cert.members.is_empty() {
            prop_assert!(verify_family(&back).is_ok());
        }
    }

    #[test]
    fn verdicts_are_conjugation_invariant((n, t) in dim_and_word(), seed in any::<u64>()) {
        let u = random_word(&mut ChaCha8Rng::seed_from_u64(seed), n, 6);
        let c = t.conjugate_by(&u);
        prop_assert_eq!(matrix_order(&t), matrix_order(&c));
        prop_assert_eq!(is_ergodic(&t), is_ergodic(&c));
        prop_assert_eq!(is_distal_linear(&t), is_distal_linear(&c));
        prop_assert_eq!(acts_distally_on_subp(&t).distal, acts_distally_on_subp(&c).distal);
        prop_assert_eq!(
            invariant_rational_subspaces(&t).exists,
            invariant_rational_subspaces(&c).exists
        );
    }

    #[test]
    fn linear_distality_means_a_unipotent_power((n, t) in dim_and_word()) {
        let unipotent_power = (1..=12).any(|k| {
            let a = t.pow(k).matrix().sub(&IntMatrix::identity(n));
            a.pow(n as u64).is_zero()
        });
        prop_assert_eq!(is_distal_linear(&t), unipotent_power);
    }

    /// In dimensions 2 and 3 the characteristic polynomial is reducible
    /// over Q exactly when it has a root 1 or -1.
    #[test]
    fn invariant_subspaces_match_rational_roots((n, t) in dim_and_word()) {
        let id = IntMatrix::identity(n);
        let a = t.matrix();
        let zero = BigInt::from(0);
        let reducible = a.sub(&id).det() == zero || a.add(&id).det() == zero;
        let found = invariant_rational_subspaces(&t);
        prop_assert_eq!(found.exists, reducible);
        for w in &found.witnesses {
            prop_assert!(w.dim() > 0 && w.dim() < n);
            prop_assert_eq!(&act(&t, w).unwrap(), w);
        }
    }

    #[test]
    fn convergence_matches_orbit_periodicity(
        (n, t) in dim_and_word(),
        v in prop::collection::vec(-8i64..=8, 3),
    ) {
        prop_assume!(v[..n].iter().any(|&x| x != 0));
        let g = PrimitiveCovector::canonical(big(&v[..n])).unwrap();
        let h = covector_to_hyperplane(&g);
        let periodic = periodic_by_scan(&dual_matrix(&t), g.coords());
        prop_assert_eq!(converges_to_full(&t, &h).unwrap(), !periodic);
        let status = orbit(&t, &h, 3).unwrap().status;
        prop_assert_eq!(matches!(status, OrbitStatus::Periodic { .. }), periodic);
    }
}
