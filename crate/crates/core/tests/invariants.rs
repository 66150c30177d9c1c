use proptest::prelude::*;

use rrg_spectra::estimator::{initial_estimates_on, iterate_to_convergence};
use rrg_spectra::graph::{DegreeSpec, EdgeKey};
use rrg_spectra::oracle::Oracle;
use rrg_spectra::spectral::{
    eigenvalues, sample_regular, shifted_trace_direct, shifted_trace_power, SamplerMethod,
};
use rrg_spectra::walks::{
    classify, classify_with, closed_walk_total, decode, encode, enumerate_closed_walks,
    ReturnRule, Walk,
};

/// A closed non-lazy walk on `K_n` built from step offsets, or `None` when
/// the last step would be lazy.
fn walk_from_offsets(n: usize, start: usize, offsets: &[usize]) -> Option<Walk> {
    let mut vs = vec![start % n];
    for &o in offsets {
        vs.push((vs[vs.len() - 1] + 1 + o % (n - 1)) % n);
    }
    if *vs.last().unwrap() == vs[0] {
        return None;
    }
    vs.push(vs[0]);
    Walk::new(vs).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn codeword_round_trip(
        n in 3usize..12,
        start in 0usize..12,
        offsets in prop::collection::vec(0usize..11, 1..12),
    ) {
        let w = walk_from_offsets(n, start, &offsets);
        prop_assume!(w.is_some());
        let w = w.unwrap();
        let code = encode(&w);
        prop_assert_eq!(decode(&code, &w.discovery_order()).unwrap(), w);
    }

    #[test]
    fn class_parameters_are_consistent(
        n in 3usize..12,
        start in 0usize..12,
        offsets in prop::collection::vec(0usize..11, 1..12),
    ) {
        let w = walk_from_offsets(n, start, &offsets);
        prop_assume!(w.is_some());
        let w = w.unwrap();
        for rule in [ReturnRule::ArrivalVertex, ReturnRule::SharedEndpoint] {
            let p = classify_with(&w, rule);
            prop_assert_eq!(p.k, w.len());
            prop_assert!(p.r <= p.m);
            prop_assert_eq!(p.b, w.discovery_order().len());
        }
        // The shared-endpoint reading can overcount returns past this.
        let p = classify(&w);
        prop_assert!(p.b + p.m <= p.t + p.t2 + 1);
    }

    #[test]
    fn trace_from_spectrum_matches_matrix_power(
        half_n in 5usize..16,
        d in 2usize..6,
        half_k in 1usize..4,
        seed in 0u64..1000,
    ) {
        let n = 2 * half_n;
        let k = 2 * half_k;
        let g = sample_regular(n, d, seed, SamplerMethod::Auto).unwrap();
        prop_assert!(g.is_regular(d));
        let via_spectrum = shifted_trace_power(&g, k).unwrap();
        let direct = shifted_trace_direct(&g, k).unwrap();
        prop_assert!((via_spectrum - direct).abs() <= 1e-8 * direct.abs().max(1.0));
        let spectrum = eigenvalues(&g).unwrap();
        prop_assert!((spectrum.eigenvalues[0] - d as f64).abs() < 1e-9);
        prop_assert!(spectrum.lambda <= d as f64 + 1e-9);
    }
}

#[test]
fn every_closed_walk_is_enumerated_once() {
    for n in 3..=5 {
        for k in 2..=6 {
            let walks = enumerate_closed_walks(n, k).unwrap();
            assert_eq!(walks.len() as u128, closed_walk_total(n, k));
            for w in &walks {
                assert_eq!(classify(w).k, k);
            }
        }
    }
}

#[test]
fn estimator_converges_near_exact_with_a_missing_edge() {
    let oracle = Oracle::shared();
    let missing = [EdgeKey::new(0, 1).unwrap()];
    let root = DegreeSpec::regular_without(8, 3, &missing).unwrap();
    let init = initial_estimates_on(&root, 3, 6).unwrap();
    let (est, rounds) = iterate_to_convergence(&init, 1e-9).unwrap();
    assert!(rounds >= 1);
    for (a, b) in [(0, 2), (2, 3), (1, 5)] {
        let exact = oracle.edge_probability(&root, a, b).unwrap().to_f64();
        let got = est.p(root.degrees(), a, b).unwrap();
        assert!(
            (got - exact).abs() / exact < 0.05,
            "P({a}{b}): estimate {got} vs exact {exact}"
        );
    }
}
