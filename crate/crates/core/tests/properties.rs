use chancomp_core::channel::{random_channel, superop_difference, QuantumChannel};
use chancomp_core::dynamics::{make_semigroup, SemigroupKind};
use chancomp_core::engine::{
    cb_complexity_estimate, complexity_estimate, diamond_norm, entropy_transport_check, evaluate_witness,
    inf_to_inf_norm, relative_entropy, wasserstein_norm,
};
use chancomp_core::linalg::paulis;
use chancomp_core::random::{random_density, stream_rng};
use chancomp_core::{ComplexMatrix, LipschitzStructure, NormVariant, ResourceSet, SolveOptions, C64};
use proptest::prelude::*;

fn pauli_structure() -> LipschitzStructure {
    let [_, x, y, z] = paulis();
    LipschitzStructure::build(&ResourceSet::discrete(vec![x, y, z]).unwrap()).unwrap()
}

fn quick(seed: u64) -> SolveOptions {
    let mut o = SolveOptions::new(seed);
    o.restarts = 2;
    o.max_iter = 20;
    o
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn witness_reproduces_lower_bound(seed in 0u64..10_000, kraus in 1usize..4) {
        let l = pauli_structure();
        let ch = random_channel(2, kraus, &mut stream_rng(seed, 1));
        let e = complexity_estimate(&ch, &l, &quick(seed)).unwrap();
        prop_assert!(0.0 <= e.lower && e.lower <= e.upper);
        prop_assert!(l.lipschitz_norm(&e.witness, NormVariant::Inf).unwrap() <= 1.0 + 1e-7);
        let fixed_part = &e.witness - &l.mean_zero_project(&e.witness).unwrap();
        prop_assert!(fixed_part.max_abs() <= 1e-8);
        let again = evaluate_witness(&ch, &l, &e.witness, NormVariant::Inf).unwrap();
        prop_assert!(again >= e.lower - 1e-9);
        for c in &e.certificates {
            prop_assert!(c.value >= e.lower - 1e-9, "{} = {} below {}", c.name, c.value, e.lower);
        }
    }

    #[test]
    fn cb_lower_is_monotone_in_levels(seed in 0u64..10_000) {
        let l = pauli_structure();
        let ch = random_channel(2, 2, &mut stream_rng(seed, 2));
        let mut one = quick(seed);
        one.levels = vec![1];
        let mut two = quick(seed);
        two.levels = vec![1, 2];
        let a = cb_complexity_estimate(&ch, &l, &one).unwrap();
        let b = cb_complexity_estimate(&ch, &l, &two).unwrap();
        prop_assert!(b.lower >= a.lower - 1e-12);
    }

    #[test]
    fn diamond_dominates_inf_to_inf(seed in 0u64..10_000) {
        let mut rng = stream_rng(seed, 3);
        let a = random_channel(2, 2, &mut rng);
        let b = random_channel(2, 3, &mut rng);
        let s = superop_difference(&a, &b).unwrap();
        let r = diamond_norm(&s).unwrap();
        prop_assert!(r.gap <= 1e-6);
        prop_assert!((-1e-6..=2.0 + 1e-6).contains(&r.value));
        // the dual map sends observables; its inf→inf norm is below the diamond norm of the map
        let dual = &a.dual_superop() - &b.dual_superop();
        let n = inf_to_inf_norm(&dual, &quick(seed)).unwrap();
        prop_assert!(r.value >= n.lower - 1e-6);
    }

    #[test]
    fn relative_entropy_to_maximally_mixed_is_at_most_log_d(seed in 0u64..10_000, d in 2usize..5) {
        let rho = random_density(d, &mut stream_rng(seed, 4));
        let sigma = ComplexMatrix::identity(d).scale_re(1.0 / d as f64);
        let v = relative_entropy(&rho, &sigma).unwrap();
        prop_assert!(v >= -1e-12 && v <= (d as f64).ln() + 1e-12);
    }
}

#[test]
fn same_seed_same_bits() {
    let l = pauli_structure();
    let ch = random_channel(2, 2, &mut stream_rng(9, 0));
    let a = cb_complexity_estimate(&ch, &l, &quick(9)).unwrap();
    let b = cb_complexity_estimate(&ch, &l, &quick(9)).unwrap();
    assert_eq!(a.lower.to_bits(), b.lower.to_bits());
    assert_eq!(a.upper.to_bits(), b.upper.to_bits());
    assert_eq!(serde_json::to_string(&a.witness).unwrap(), serde_json::to_string(&b.witness).unwrap());
}

/// Grid over traceless Hermitian `X = aσX + bσY + cσZ`: with the Pauli
/// resources `|||X||| = 2 max(√(b²+c²), √(a²+c²), √(a²+b²))` and
/// `τ(σZ/2 · X) = c/2`.
#[test]
fn wasserstein_of_half_sigma_z_matches_grid() {
    let l = pauli_structure();
    let rho = paulis()[3].scale_re(0.5);
    let r = wasserstein_norm(&rho, &l, NormVariant::Inf, &SolveOptions::new(5)).unwrap();
    let steps = 60;
    let mut grid_best: f64 = 0.0;
    for i in 0..=steps {
        for j in 0..=steps {
            for k in 0..=steps {
                let [a, b, c] = [i, j, k].map(|t| -1.0 + 2.0 * t as f64 / steps as f64);
                let lip = 2.0 * [(b * b + c * c), (a * a + c * c), (a * a + b * b)].iter().fold(0.0f64, |m, v| m.max(v.sqrt()));
                if lip > 0.0 {
                    grid_best = grid_best.max((c / 2.0).abs() / lip);
                }
            }
        }
    }
    assert!((grid_best - 0.25).abs() < 1e-12);
    assert!((r.lower - grid_best).abs() < 1e-6, "{} vs {grid_best}", r.lower);
    assert!(r.upper >= r.lower);
}

#[test]
fn depolarizing_lindblad_entropy_check_runs_with_empirical_lambda() {
    let [_, x, y, z] = paulis();
    let res = ResourceSet::continuous(vec![x, y, z]).unwrap();
    let family = make_semigroup(SemigroupKind::Lindblad, &res, None).unwrap();
    let mut rho = ComplexMatrix::zeros(2, 2);
    rho[(0, 0)] = C64::new(1.0, 0.0);
    let report = entropy_transport_check(&rho, family.structure(), None, &SolveOptions::new(6)).unwrap();
    assert!((report.relative_entropy - 2f64.ln()).abs() < 1e-12);
    assert!(!report.certified && report.lambda > 0.0);
    assert!(report.wasserstein_lower <= report.wasserstein_upper + 1e-12);
}

#[test]
fn identity_channel_has_zero_complexity_at_every_level() {
    let l = pauli_structure();
    let e = cb_complexity_estimate(&QuantumChannel::identity(2), &l, &SolveOptions::new(1)).unwrap();
    assert_eq!(e.lower, 0.0);
    assert!(e.upper <= 1e-9);
}
