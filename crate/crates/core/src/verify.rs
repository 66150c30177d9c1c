//! The acceptance battery: one function per criterion, each returning a
//! pass/fail line with the measured numbers.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::estimator::{contraction_measure, initial_estimates, initial_estimates_on, Family};
use crate::fourier::{
    evaluate, lemma_sum_1, lemma_sum_1_threshold, lemma_sum_2, product_coeffs, reciprocal_coeffs,
    transform, BooleanTable, DEFAULT_MAX_TERMS, DEFAULT_TOL,
};
use crate::graph::{all_pairs, DegreeSpec, EdgeKey};
use crate::oracle::identities::{recursive_b_rhs, recursive_p_rhs, recursive_y_rhs};
use crate::oracle::listing::census;
use crate::oracle::{Oracle, MAX_VERTICES};
use crate::spectral::{
    complement_duality_check, sample_regular, sample_spectra, sampler_chi_square,
    shifted_trace_from_spectrum, SamplerMethod,
};
use crate::walks::{
    aggregate_trace_bound, contribution_ratios, count_by_params, decode, encode,
    enumeration_bound, for_each_closed_walk, centered_moment, chi_expansion_sum, Walk,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub summary: String,
    pub seconds: f64,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] criterion {}: {} ({:.1}s) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.summary
        )
    }
}

pub const CRITERIA: [(u8, &str); 9] = [
    (1, "oracle fixed point"),
    (2, "first estimate at full symmetry"),
    (3, "chi expansion identity"),
    (4, "fourier identities"),
    (5, "fourier sum lemmas"),
    (6, "walk machinery"),
    (7, "contribution bounds"),
    (8, "spectral window"),
    (9, "contraction"),
];

pub fn run(id: u8) -> CriterionResult {
    let name = CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .map_or("unknown criterion", |(_, n)| n);
    let start = Instant::now();
    let outcome = match id {
        1 => oracle_fixed_point(),
        2 => first_estimate_symmetry(),
        3 => chi_expansion_identity(),
        4 => fourier_identities(1000, 2024),
        5 => fourier_sum_lemmas(),
        6 => walk_machinery(),
        7 => contribution_bounds(200),
        8 => spectral_window(20),
        9 => contraction(100),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let (passed, summary) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionResult {
        id,
        name,
        passed,
        summary,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_all() -> Vec<CriterionResult> {
    CRITERIA.iter().map(|&(id, _)| run(id)).collect()
}

type Outcome = Result<(bool, String)>;

fn relative_error(lhs: &BigRational, rhs: &BigRational) -> f64 {
    if lhs == rhs {
        return 0.0;
    }
    let diff = (lhs - rhs).abs();
    let scale = if rhs.is_zero() { lhs.abs() } else { rhs.abs() };
    (diff / scale).to_f64().unwrap_or(f64::INFINITY)
}

/// Degree specs with `n ≤ max_n`, `1 ≤ d ≤ max_d`, missing none, one, or two
/// (incident or disjoint) edges. Other choices of missing edges are
/// relabelings of these.
pub fn small_spec_family(max_n: usize, max_d: usize) -> Vec<DegreeSpec> {
    let mut out = Vec::new();
    for n in 2..=max_n.min(MAX_VERTICES) {
        for d in 1..=max_d.min(n - 1) {
            if (n * d) % 2 == 1 {
                continue;
            }
            let mut missing: Vec<Vec<EdgeKey>> = vec![vec![], vec![EdgeKey::of(0, 1)]];
            if n >= 3 {
                missing.push(vec![EdgeKey::of(0, 1), EdgeKey::of(0, 2)]);
            }
            if n >= 4 {
                missing.push(vec![EdgeKey::of(0, 1), EdgeKey::of(2, 3)]);
            }
            for m in missing {
                if let Ok(spec) = DegreeSpec::regular_without(n, d, &m) {
                    out.push(spec);
                }
            }
        }
    }
    out
}

fn oracle_fixed_point() -> Outcome {
    let oracle = Oracle::shared();
    let (mut checked, mut skipped, mut specs) = (0usize, 0usize, 0usize);
    let mut worst = 0.0f64;
    for spec in small_spec_family(8, 3) {
        if oracle.count(&spec)? == 0 {
            continue;
        }
        specs += 1;
        let direct = census(&spec)?;
        for a in 0..spec.n() {
            for b in spec.allowed_neighbors(a) {
                let lhs = direct.blocked_expectation(a, b)?.into_ratio();
                worst = worst.max(relative_error(&recursive_b_rhs(oracle, &spec, a, b)?, &lhs));
                checked += 1;
                let p = oracle.edge_probability(&spec, a, b)?;
                if p.is_zero() {
                    continue;
                }
                match recursive_p_rhs(oracle, &spec, a, b)? {
                    Some(rhs) => {
                        worst = worst.max(relative_error(&rhs, p.ratio()));
                        checked += 1;
                    }
                    None => skipped += 1,
                }
                for c in spec.allowed_neighbors(b).into_iter().filter(|&c| c != a) {
                    let y = oracle.cherry_probability(&spec, a, b, c)?;
                    match recursive_y_rhs(oracle, &spec, a, b, c)? {
                        Some(rhs) => {
                            worst = worst.max(relative_error(&rhs, y.ratio()));
                            checked += 1;
                        }
                        None => skipped += 1,
                    }
                }
            }
        }
    }
    Ok((
        worst <= 1e-10 && checked > 0,
        format!(
            "{specs} specs, {checked} identities, max relative error {worst:.2e}, {skipped} skipped as 0/0"
        ),
    ))
}

fn first_estimate_symmetry() -> Outcome {
    let oracle = Oracle::shared();
    let mut cases = 0;
    let mut failures = Vec::new();
    for n in 2..=8usize {
        for d in 0..n {
            if (n * d) % 2 == 1 {
                continue;
            }
            let spec = DegreeSpec::regular(n, d)?;
            let closed_form = BigRational::new(BigInt::from(d), BigInt::from(n - 1));
            // the closed form needs a positive reference degree
            let est = (d > 0).then(|| initial_estimates(n, d, 0)).transpose()?;
            let float_form = d as f64 / (n - 1) as f64;
            for e in all_pairs(n) {
                cases += 1;
                let exact = oracle.edge_probability(&spec, e.u(), e.v())?;
                let estimate = match &est {
                    Some(est) => est.p(spec.degrees(), e.u(), e.v())?,
                    None => 0.0,
                };
                if *exact.ratio() != closed_form || estimate != float_form {
                    failures.push(format!("n={n} d={d} {e}: oracle {exact}, estimate {estimate}"));
                }
            }
        }
    }
    let summary = if failures.is_empty() {
        format!("{cases} pairs, all equal to d/(n-1) exactly")
    } else {
        format!("{} of {cases} pairs differ, first: {}", failures.len(), failures[0])
    };
    Ok((failures.is_empty(), summary))
}

fn ordered_sequences(n: usize, max_t: usize) -> Vec<Vec<EdgeKey>> {
    let pairs: Vec<EdgeKey> = all_pairs(n).collect();
    let mut out: Vec<Vec<EdgeKey>> = vec![vec![]];
    let mut frontier = out.clone();
    for _ in 0..max_t {
        let mut next = Vec::new();
        for seq in &frontier {
            for &e in &pairs {
                if !seq.contains(&e) {
                    let mut s = seq.clone();
                    s.push(e);
                    next.push(s);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out.retain(|s| !s.is_empty());
    out
}

fn chi_expansion_identity() -> Outcome {
    let oracle = Oracle::shared();
    let (mut checked, mut worst) = (0usize, 0.0f64);
    for n in 2..=6usize {
        for d in 1..=2usize.min(n - 1) {
            if (n * d) % 2 == 1 {
                continue;
            }
            let spec = DegreeSpec::regular(n, d)?;
            let p = d as f64 / (n - 1) as f64;
            for seq in ordered_sequences(n, 3) {
                let ms: Vec<(EdgeKey, usize)> = seq.iter().map(|&e| (e, 1)).collect();
                let direct = centered_moment(oracle, &spec, &ms, p)?;
                let expanded = chi_expansion_sum(oracle, &seq, &spec, p)?;
                worst = worst.max((direct - expanded).abs());
                checked += 1;
            }
        }
    }
    Ok((
        worst <= 1e-10,
        format!("{checked} ordered sequences (t ≤ 3), max |difference| {worst:.2e}"),
    ))
}

/// Round trip, product and reciprocal identities on random tables with
/// dimensions cycling through `0..=8`.
pub fn fourier_identities(functions: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut round, mut prod, mut recip) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..functions {
        let t = i % 9;
        let f = BooleanTable::from_fn(t, |_| rng.gen_range(-1.0..1.0))?;
        let g = BooleanTable::from_fn(t, |_| rng.gen_range(-1.0..1.0))?;
        let fc = transform(&f);
        for x in 0..1usize << t {
            round = round.max((evaluate(&fc, x) - f.get(x)).abs());
        }
        let product = product_coeffs(&fc, &transform(&g))?;
        let direct = transform(&f.zip_with(&g, |a, b| a * b)?);
        for s in 0..1usize << t {
            prod = prod.max((product.get(s) - direct.get(s)).abs());
        }
        // positive and within a factor 1.4 of its value at the origin
        let h = BooleanTable::from_fn(t, |_| rng.gen_range(1.0..1.4))?;
        let inv = reciprocal_coeffs(&transform(&h), DEFAULT_MAX_TERMS, DEFAULT_TOL)?;
        let direct = transform(&h.map(|v| 1.0 / v));
        for s in 0..1usize << t {
            recip = recip.max((inv.get(s) - direct.get(s)).abs());
        }
    }
    let worst = round.max(prod).max(recip);
    Ok((
        worst <= 1e-10,
        format!(
            "{functions} functions, max errors: round trip {round:.1e}, product {prod:.1e}, reciprocal {recip:.1e}"
        ),
    ))
}

fn fourier_sum_lemmas() -> Outcome {
    let mut worst_first = 0.0f64;
    for n in 1..=12 {
        let a = lemma_sum_1_threshold(n);
        for m in 0..=n {
            worst_first = worst_first.max(lemma_sum_1(n, m, a)?.ratio());
        }
    }
    let mut ratios = Vec::new();
    for n in 1..=12 {
        ratios.push(lemma_sum_2(n)?.ratio);
    }
    let worst_second = ratios.iter().copied().fold(0.0, f64::max);
    let argmax = ratios.iter().position(|&r| r == worst_second).unwrap() + 1;
    // a single constant bounds the second sum: its ratio must not grow with n
    let tail_bounded = ratios.windows(2).skip(1).all(|w| w[1] <= w[0] + 1e-12);
    Ok((
        worst_first <= 2.0 && worst_second <= 2.0 && tail_bounded,
        format!(
            "first sum / leading term max {worst_first:.6} (limit 2); composition sum / (4n)! max {worst_second:.4} at n={argmax}, n=12 {:.6}",
            ratios[11]
        ),
    ))
}

fn walk_machinery() -> Outcome {
    let (mut walks, mut failures) = (0usize, 0usize);
    let mut worst_ratio = f64::NEG_INFINITY;
    let mut worst_at = String::new();
    let mut over = 0usize;
    for n in 2..=5usize {
        for k in 2..=6usize {
            for_each_closed_walk(n, k, |vs| {
                walks += 1;
                let w = Walk::new(vs.to_vec()).expect("enumerated walks are valid");
                let code = encode(&w);
                if decode(&code, &w.discovery_order()).as_ref() != Ok(&w) {
                    failures += 1;
                }
            })?;
            for (params, count) in count_by_params(n, k)? {
                let log_ratio = (count as f64).ln() - enumeration_bound(n, &params);
                if log_ratio > 1e-9 {
                    over += 1;
                }
                if log_ratio > worst_ratio {
                    worst_ratio = log_ratio;
                    worst_at = format!("n={n} {params:?}");
                }
            }
        }
    }
    Ok((
        failures == 0 && over == 0,
        format!(
            "round trip {}/{walks}; {over} classes above the enumeration bound; worst count/bound {:.3e} at {worst_at}",
            walks - failures,
            worst_ratio.exp()
        ),
    ))
}

/// `(n, d)` pairs and powers of the trace-bound grid.
pub const TRACE_GRID_N: [usize; 3] = [50, 100, 200];
pub const TRACE_GRID_D: [usize; 3] = [6, 10, 20];
pub const TRACE_GRID_K: [usize; 3] = [4, 6, 8];

pub fn contribution_bounds(samples: usize) -> Outcome {
    let oracle = Oracle::shared();
    let mut worst = 0.0f64;
    let mut worst_at = None;
    let mut over = 0usize;
    for k in 2..=6 {
        for (params, ratio) in contribution_ratios(oracle, 6, 2, k)? {
            if ratio > 10.0 {
                over += 1;
            }
            if ratio > worst {
                worst = ratio;
                worst_at = Some(params);
            }
        }
    }
    let mut trace_over = Vec::new();
    let mut worst_trace = f64::NEG_INFINITY;
    for n in TRACE_GRID_N {
        for d in TRACE_GRID_D {
            let p = d as f64 / (n - 1) as f64;
            let spectra = sample_spectra(n, d, samples, 1000 + n as u64 * 100 + d as u64, SamplerMethod::Auto)?;
            for k in TRACE_GRID_K {
                let mean = spectra
                    .iter()
                    .map(|s| shifted_trace_from_spectrum(s, p, k))
                    .sum::<f64>()
                    / samples as f64;
                let log_gap = mean.ln() - aggregate_trace_bound(n, d, k);
                worst_trace = worst_trace.max(log_gap);
                if log_gap > 0.0 {
                    trace_over.push(format!("({n},{d},{k})"));
                }
            }
        }
    }
    Ok((
        over == 0 && trace_over.is_empty(),
        format!(
            "walks k ≤ 6 on n=6 d=2: {over} above 10×bound, worst |M|/bound {worst:.3} at {worst_at:?}; trace grid: {} of 27 points above bound, worst ln(mean/bound) {worst_trace:.2}",
            trace_over.len()
        ),
    ))
}

pub const SPECTRAL_WINDOW: [(usize, usize); 3] = [(1000, 100), (1000, 300), (2000, 100)];

pub fn spectral_window(samples: usize) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (n, d) in SPECTRAL_WINDOW {
        let spectra = sample_spectra(n, d, samples, 7 + n as u64 + d as u64, SamplerMethod::Auto)?;
        let mean = spectra.iter().map(|s| s.ratio).sum::<f64>() / samples as f64;
        ok &= (0.9..=1.1).contains(&mean);
        parts.push(format!("({n},{d}) mean ratio {mean:.4}"));
    }
    let mut duality = 0.0f64;
    for (n, d, seed) in [(50, 7, 1), (200, 20, 2), (1000, 100, 3)] {
        let g = sample_regular(n, d, seed, SamplerMethod::Auto)?;
        duality = duality.max(complement_duality_check(&g)?.max_deviation);
    }
    ok &= duality <= 1e-6;
    parts.push(format!("duality max deviation {duality:.1e}"));
    let mut min_p = 1.0f64;
    for (n, d) in [(4, 1), (4, 2), (5, 2), (6, 1), (6, 2), (6, 3)] {
        let classes = crate::oracle::Oracle::shared().count(&DegreeSpec::regular(n, d)?)? as usize;
        let draws = (100 * classes).max(2000);
        let r = sampler_chi_square(n, d, draws, 99 + n as u64 * 10 + d as u64, SamplerMethod::PairingRejection)?;
        min_p = min_p.min(r.p_value);
    }
    ok &= min_p > 0.001;
    parts.push(format!("sampler chi-square min p-value {min_p:.4}"));
    Ok((ok, parts.join("; ")))
}

pub fn contraction(trials: usize) -> Outcome {
    let n = 8;
    let d = 3;
    let p = d as f64 / (n - 1) as f64;
    let roots = [
        DegreeSpec::regular(n, d)?,
        DegreeSpec::regular_without(n, d, &[EdgeKey::of(0, 1)])?,
    ];
    let bases = roots
        .iter()
        .map(|r| initial_estimates_on(r, d, 4))
        .collect::<Result<Vec<_>>>()?;
    let mut ratios = Vec::with_capacity(trials);
    for trial in 0..trials {
        let base = &bases[trial % bases.len()];
        let other = base.perturbed(0.01, 0.01, trial as u64);
        ratios.push(contraction_measure(base, &other, Family::AllStates, p)?.raw_ratio);
    }
    ratios.sort_by(f64::total_cmp);
    let median = ratios[ratios.len() / 2];
    let max = ratios[ratios.len() - 1];
    let q = |f: f64| ratios[((ratios.len() - 1) as f64 * f).round() as usize];
    Ok((
        max <= 1.0 && median <= 2.0 * p,
        format!(
            "{trials} trials: min {:.4} q25 {:.4} median {median:.4} q75 {:.4} max {max:.4} (2p = {:.4})",
            ratios[0],
            q(0.25),
            q(0.75),
            2.0 * p
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_family_shapes() {
        let fam = small_spec_family(4, 2);
        assert!(fam.iter().all(|s| s.n() <= 4));
        assert!(fam.iter().any(|s| s.allowed().len() == 4));
    }

    #[test]
    fn sequences_are_ordered_and_distinct() {
        let s = ordered_sequences(4, 2);
        assert_eq!(s.len(), 6 + 6 * 5);
    }

    #[test]
    fn small_fourier_battery() {
        let (ok, _) = fourier_identities(50, 1).unwrap();
        assert!(ok);
    }
}
