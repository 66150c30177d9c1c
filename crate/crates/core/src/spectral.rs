//! Sampling random d-regular graphs, adjacency spectra, the shifted trace
//! `Tr (A - pJ + pI)^k`, and comparisons against the limiting densities.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::graph::circulant_regular;
use crate::graph::{DegreeSpec, EdgeKey, SimpleGraph};
use crate::oracle::listing::enumerate_graphs;

/// Largest graph the dense eigensolver accepts.
pub const MAX_SPECTRUM_VERTICES: usize = 5000;
/// Pairings tried before the rejection sampler gives up.
pub const PAIRING_ATTEMPTS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SamplerMethod {
    /// Uniform random pairing of `nd` half-edges, redrawn until simple.
    /// Exactly uniform; practical only while `(d^2 - 1)/4` is small.
    PairingRejection,
    /// Random edge switches started from a circulant graph.
    SwitchChain { burn_in_per_edge: usize },
    /// Pairing for `d <= 4`, switch chain otherwise.
    #[default]
    Auto,
}

impl SamplerMethod {
    pub const DEFAULT_BURN_IN: usize = 100;

    pub fn switch_chain() -> Self {
        SamplerMethod::SwitchChain {
            burn_in_per_edge: Self::DEFAULT_BURN_IN,
        }
    }

    fn resolve(self, d: usize) -> Self {
        match self {
            SamplerMethod::Auto if d <= 4 => SamplerMethod::PairingRejection,
            SamplerMethod::Auto => SamplerMethod::switch_chain(),
            other => other,
        }
    }
}

/// Seeded generator for sample `index` of a run with base `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn check_feasible(n: usize, d: usize) -> Result<()> {
    if (n * d) % 2 == 1 {
        return Err(Error::Precondition(format!("n·d = {} is odd", n * d)));
    }
    if d > 0 && d >= n {
        return Err(Error::Precondition(format!("degree {d} needs more than {n} vertices")));
    }
    Ok(())
}

pub fn sample_regular(n: usize, d: usize, seed: u64, method: SamplerMethod) -> Result<SimpleGraph> {
    sample_regular_with(n, d, &mut sample_rng(seed, 0), method)
}

pub fn sample_regular_with(
    n: usize,
    d: usize,
    rng: &mut impl Rng,
    method: SamplerMethod,
) -> Result<SimpleGraph> {
    check_feasible(n, d)?;
    if d == 0 {
        return Ok(SimpleGraph::empty(n));
    }
    match method.resolve(d) {
        SamplerMethod::PairingRejection => sample_pairing(n, d, rng),
        SamplerMethod::SwitchChain { burn_in_per_edge } => {
            let mut chain = SwitchChain::from_graph(&circulant_regular(n, d)?);
            chain.run(rng, burn_in_per_edge * n * d);
            chain.graph()
        }
        SamplerMethod::Auto => unreachable!("resolved above"),
    }
}

fn sample_pairing(n: usize, d: usize, rng: &mut impl Rng) -> Result<SimpleGraph> {
    let mut points: Vec<usize> = (0..n * d).collect();
    let words = n.div_ceil(64);
    let mut adj = vec![0u64; n * words];
    'attempt: for _ in 0..PAIRING_ATTEMPTS {
        points.shuffle(rng);
        adj.iter_mut().for_each(|w| *w = 0);
        let mut edges = Vec::with_capacity(n * d / 2);
        for pair in points.chunks_exact(2) {
            let (a, b) = (pair[0] / d, pair[1] / d);
            if a == b || adj[a * words + b / 64] >> (b % 64) & 1 == 1 {
                continue 'attempt;
            }
            adj[a * words + b / 64] |= 1 << (b % 64);
            adj[b * words + a / 64] |= 1 << (a % 64);
            edges.push(EdgeKey::of(a, b));
        }
        return SimpleGraph::from_edges(n, edges);
    }
    Err(Error::Sampler(format!(
        "no simple pairing for n={n}, d={d} in {PAIRING_ATTEMPTS} attempts"
    )))
}

/// Edge-switch Markov chain on simple graphs with a fixed degree sequence.
/// Each step picks two edges `ab`, `cd` and an orientation and replaces
/// them with `ac`, `bd` when that keeps the graph simple.
#[derive(Clone, Debug)]
pub struct SwitchChain {
    n: usize,
    words: usize,
    adj: Vec<u64>,
    edges: Vec<(usize, usize)>,
}

impl SwitchChain {
    pub fn from_graph(g: &SimpleGraph) -> Self {
        let n = g.n();
        let words = n.div_ceil(64).max(1);
        let mut chain = SwitchChain {
            n,
            words,
            adj: vec![0; n * words],
            edges: Vec::with_capacity(g.edge_count()),
        };
        for e in g.edges() {
            chain.set(e.u(), e.v(), true);
            chain.edges.push((e.u(), e.v()));
        }
        chain
    }

    fn has(&self, a: usize, b: usize) -> bool {
        self.adj[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }

    fn set(&mut self, a: usize, b: usize, on: bool) {
        for (x, y) in [(a, b), (b, a)] {
            let w = &mut self.adj[x * self.words + y / 64];
            if on {
                *w |= 1 << (y % 64);
            } else {
                *w &= !(1 << (y % 64));
            }
        }
    }

    /// One attempted switch; returns whether it was applied.
    pub fn step(&mut self, rng: &mut impl Rng) -> bool {
        let m = self.edges.len();
        if m < 2 {
            return false;
        }
        let i = rng.gen_range(0..m);
        let j = rng.gen_range(0..m);
        if i == j {
            return false;
        }
        let (a, b) = self.edges[i];
        let (mut c, mut d) = self.edges[j];
        if rng.gen::<bool>() {
            std::mem::swap(&mut c, &mut d);
        }
        if a == c || b == d || self.has(a, c) || self.has(b, d) {
            return false;
        }
        self.set(a, b, false);
        self.set(c, d, false);
        self.set(a, c, true);
        self.set(b, d, true);
        self.edges[i] = (a, c);
        self.edges[j] = (b, d);
        true
    }

    pub fn run(&mut self, rng: &mut impl Rng, steps: usize) {
        for _ in 0..steps {
            self.step(rng);
        }
    }

    pub fn graph(&self) -> Result<SimpleGraph> {
        SimpleGraph::from_edges(self.n, self.edges.iter().map(|&(a, b)| EdgeKey::of(a, b)))
    }
}

pub fn adjacency_matrix(g: &SimpleGraph) -> DMatrix<f64> {
    let n = g.n();
    let mut a = DMatrix::zeros(n, n);
    for e in g.edges() {
        a[(e.u(), e.v())] = 1.0;
        a[(e.v(), e.u())] = 1.0;
    }
    a
}

/// `A - pJ + pI`.
pub fn shifted_matrix(g: &SimpleGraph, p: f64) -> DMatrix<f64> {
    let n = g.n();
    let mut m = adjacency_matrix(g);
    m.add_scalar_mut(-p);
    for i in 0..n {
        m[(i, i)] += p;
    }
    m
}

/// `2 sqrt(d (n - d) / n)`.
pub fn theorem_scale(n: usize, d: f64) -> f64 {
    2.0 * (d * (n as f64 - d) / n as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumResult {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// `max(|λ_2|, |λ_n|)`.
    pub lambda: f64,
    /// `lambda / (2 sqrt(d (n - d) / n))` with `d` the average degree; NaN
    /// when the normalizer vanishes.
    pub ratio: f64,
}

impl SpectrumResult {
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>, avg_degree: f64) -> Self {
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let n = eigenvalues.len();
        let lambda = if n < 2 {
            0.0
        } else {
            eigenvalues[1].abs().max(eigenvalues[n - 1].abs())
        };
        let scale = theorem_scale(n, avg_degree);
        let ratio = if scale > 0.0 { lambda / scale } else { f64::NAN };
        SpectrumResult {
            eigenvalues,
            lambda,
            ratio,
        }
    }

    /// All eigenvalues but one copy of the largest.
    pub fn nontrivial(&self) -> &[f64] {
        self.eigenvalues.get(1..).unwrap_or(&[])
    }
}

fn average_degree(g: &SimpleGraph) -> f64 {
    if g.n() == 0 {
        0.0
    } else {
        2.0 * g.edge_count() as f64 / g.n() as f64
    }
}

pub fn eigenvalues(g: &SimpleGraph) -> Result<SpectrumResult> {
    if g.n() > MAX_SPECTRUM_VERTICES {
        return Err(Error::TooLarge(format!(
            "{} vertices exceeds the dense limit {MAX_SPECTRUM_VERTICES}",
            g.n()
        )));
    }
    let values = adjacency_matrix(g).symmetric_eigenvalues();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Assertion("eigensolver returned non-finite values".into()));
    }
    Ok(SpectrumResult::from_eigenvalues(values.iter().copied().collect(), average_degree(g)))
}

/// Largest `‖Av - λv‖ / ‖v‖` over a full eigendecomposition.
pub fn eigen_residual(g: &SimpleGraph) -> f64 {
    let a = adjacency_matrix(g);
    let eig = a.clone().symmetric_eigen();
    let mut worst: f64 = 0.0;
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        let r = (&a * v - v * lam).norm() / v.norm();
        worst = worst.max(r);
    }
    worst
}

/// `Σ_{i≥2} (λ_i + p)^k` for a spectrum sorted descending.
pub fn shifted_trace_from_spectrum(spectrum: &SpectrumResult, p: f64, k: usize) -> f64 {
    spectrum
        .nontrivial()
        .iter()
        .map(|&l| (l + p).powi(k as i32))
        .sum()
}

fn regular_p(g: &SimpleGraph) -> Result<(usize, f64)> {
    let d = g
        .regular_degree()
        .ok_or_else(|| Error::Precondition("graph is not regular".into()))?;
    if g.n() < 2 {
        return Err(Error::Precondition("need at least two vertices".into()));
    }
    Ok((d, d as f64 / (g.n() - 1) as f64))
}

/// `Tr (A - pJ + pI)^k` with `p = d/(n-1)`, from the spectrum.
pub fn shifted_trace_power(g: &SimpleGraph, k: usize) -> Result<f64> {
    if k % 2 == 1 {
        return Err(Error::Precondition(format!("k = {k} must be even")));
    }
    let (_, p) = regular_p(g)?;
    Ok(shifted_trace_from_spectrum(&eigenvalues(g)?, p, k))
}

/// Same quantity by repeated matrix multiplication.
pub fn shifted_trace_direct(g: &SimpleGraph, k: usize) -> Result<f64> {
    let (_, p) = regular_p(g)?;
    let m = shifted_matrix(g, p);
    let mut power = DMatrix::identity(g.n(), g.n());
    for _ in 0..k {
        power = &power * &m;
    }
    Ok(power.trace())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceEstimate {
    pub k: usize,
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl TraceEstimate {
    pub fn from_values(k: usize, values: &[f64]) -> Self {
        let s = values.len();
        let mean = values.iter().sum::<f64>() / s.max(1) as f64;
        let stderr = if s < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (s - 1) as f64;
            (var / s as f64).sqrt()
        };
        TraceEstimate {
            k,
            mean,
            stderr,
            samples: s,
        }
    }
}

/// Spectra of `samples` independent draws; sample `i` uses stream `i` of
/// `seed`.
pub fn sample_spectra(
    n: usize,
    d: usize,
    samples: usize,
    seed: u64,
    method: SamplerMethod,
) -> Result<Vec<SpectrumResult>> {
    check_feasible(n, d)?;
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let g = sample_regular_with(n, d, &mut sample_rng(seed, i), method)?;
            eigenvalues(&g)
        })
        .collect()
}

/// Monte-Carlo `E Tr (A - pJ + pI)^k`, one estimate per requested `k`.
pub fn mc_traces(
    n: usize,
    d: usize,
    ks: &[usize],
    samples: usize,
    seed: u64,
    method: SamplerMethod,
) -> Result<Vec<TraceEstimate>> {
    if let Some(k) = ks.iter().find(|&&k| k % 2 == 1) {
        return Err(Error::Precondition(format!("k = {k} must be even")));
    }
    let p = d as f64 / (n - 1) as f64;
    let spectra = sample_spectra(n, d, samples, seed, method)?;
    Ok(ks
        .iter()
        .map(|&k| {
            let values: Vec<f64> = spectra
                .iter()
                .map(|s| shifted_trace_from_spectrum(s, p, k))
                .collect();
            TraceEstimate::from_values(k, &values)
        })
        .collect())
}

pub fn mc_trace(n: usize, d: usize, k: usize, samples: usize, seed: u64) -> Result<TraceEstimate> {
    Ok(mc_traces(n, d, &[k], samples, seed, SamplerMethod::Auto)?[0])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioStats {
    pub ratios: Vec<f64>,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl RatioStats {
    pub fn from_ratios(ratios: Vec<f64>) -> Self {
        let mean = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        RatioStats {
            ratios,
            mean,
            min,
            max,
        }
    }
}

/// Distribution of `λ / (2 sqrt(d (n - d) / n))` over independent samples.
pub fn theorem_ratio(
    n: usize,
    d: usize,
    samples: usize,
    seed: u64,
    method: SamplerMethod,
) -> Result<RatioStats> {
    let spectra = sample_spectra(n, d, samples, seed, method)?;
    Ok(RatioStats::from_ratios(spectra.iter().map(|s| s.ratio).collect()))
}

/// `(2/π) sqrt(1 - x^2)` on `|x| < 1`.
pub fn semicircle_density(x: f64) -> f64 {
    if x.abs() < 1.0 {
        2.0 / PI * (1.0 - x * x).sqrt()
    } else {
        0.0
    }
}

/// Limiting eigenvalue density of random `d`-regular graphs for fixed `d`.
pub fn mckay_density(d: usize, x: f64) -> f64 {
    let d = d as f64;
    let edge = 4.0 * (d - 1.0);
    if d < 2.0 || x * x >= edge {
        return 0.0;
    }
    d * (edge - x * x).sqrt() / (2.0 * PI * (d * d - x * x))
}

/// Simpson's rule with `steps` (even) panels.
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
    let h = (b - a) / steps as f64;
    let mut s = f(a) + f(b);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub n: usize,
    pub d: usize,
    /// Bin edges on the scaled axis.
    pub edges: Vec<f64>,
    /// Fraction of scaled nontrivial eigenvalues per bin.
    pub empirical: Vec<f64>,
    pub semicircle: Vec<f64>,
    pub mckay: Vec<f64>,
    pub tv_semicircle: f64,
    pub tv_mckay: f64,
}

/// Histogram of nontrivial eigenvalues scaled by `(2 sqrt(d(n-d)/n))^{-1}`
/// against the semicircle and the (equally scaled) McKay density. Total
/// variation counts mass outside the binned range as disagreement.
pub fn density_compare(
    n: usize,
    d: usize,
    samples: usize,
    seed: u64,
    bins: usize,
    method: SamplerMethod,
) -> Result<DensityReport> {
    if bins == 0 {
        return Err(Error::Precondition("need at least one bin".into()));
    }
    let scale = theorem_scale(n, d as f64);
    if scale == 0.0 {
        return Err(Error::Precondition(format!("no spread to scale for d = {d}")));
    }
    let spectra = sample_spectra(n, d, samples, seed, method)?;
    let range = 1.5;
    let width = 2.0 * range / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| -range + i as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    let mut total = 0usize;
    for s in &spectra {
        for &l in s.nontrivial() {
            total += 1;
            let x = l / scale;
            let idx = ((x + range) / width).floor();
            if idx >= 0.0 && (idx as usize) < bins {
                counts[idx as usize] += 1;
            }
        }
    }
    let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / total.max(1) as f64).collect();
    let bin_mass = |f: &dyn Fn(f64) -> f64| -> Vec<f64> {
        edges
            .windows(2)
            .map(|w| integrate(f, w[0], w[1], 64))
            .collect()
    };
    let semicircle = bin_mass(&semicircle_density);
    let mckay = bin_mass(&|x| scale * mckay_density(d, x * scale));
    let tv = |reference: &[f64]| {
        let inside: f64 = empirical
            .iter()
            .zip(reference)
            .map(|(e, r)| (e - r).abs())
            .sum();
        let outside = (1.0 - empirical.iter().sum::<f64>()) + (1.0 - reference.iter().sum::<f64>());
        0.5 * (inside + outside.max(0.0))
    };
    let tv_semicircle = tv(&semicircle);
    let tv_mckay = tv(&mckay);
    Ok(DensityReport {
        n,
        d,
        edges,
        empirical,
        semicircle,
        mckay,
        tv_semicircle,
        tv_mckay,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualityReport {
    /// `-1 - λ_i` over the nontrivial spectrum of the graph, descending.
    pub mapped: Vec<f64>,
    /// Nontrivial spectrum of the complement, descending.
    pub complement: Vec<f64>,
    pub max_deviation: f64,
}

impl DualityReport {
    pub fn ensure(&self, tol: f64) -> Result<()> {
        if self.max_deviation <= tol {
            Ok(())
        } else {
            Err(Error::Assertion(format!(
                "complement spectra differ by {:.3e} > {tol:.1e}",
                self.max_deviation
            )))
        }
    }
}

/// Compares the nontrivial spectrum of a regular graph, mapped by
/// `λ ↦ -1 - λ`, with the nontrivial spectrum of its complement.
pub fn complement_duality_check(g: &SimpleGraph) -> Result<DualityReport> {
    regular_p(g)?;
    let own = eigenvalues(g)?;
    let other = eigenvalues(&g.complement())?;
    let mut mapped: Vec<f64> = own.nontrivial().iter().map(|l| -1.0 - l).collect();
    mapped.sort_by(|a, b| b.total_cmp(a));
    let complement = other.nontrivial().to_vec();
    let max_deviation = mapped
        .iter()
        .zip(&complement)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(DualityReport {
        mapped,
        complement,
        max_deviation,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiSquareReport {
    pub n: usize,
    pub d: usize,
    pub classes: usize,
    pub draws: usize,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson test of sampler output against the uniform distribution on all
/// labeled `d`-regular graphs, which are listed exhaustively.
pub fn sampler_chi_square(
    n: usize,
    d: usize,
    draws: usize,
    seed: u64,
    method: SamplerMethod,
) -> Result<ChiSquareReport> {
    let graphs = enumerate_graphs(&DegreeSpec::regular(n, d)?)?;
    let index: HashMap<Vec<EdgeKey>, usize> = graphs
        .iter()
        .enumerate()
        .map(|(i, g)| (g.edges().collect(), i))
        .collect();
    let hits: Vec<usize> = (0..draws as u64)
        .into_par_iter()
        .map(|i| {
            let g = sample_regular_with(n, d, &mut sample_rng(seed, i), method)?;
            let key: Vec<EdgeKey> = g.edges().collect();
            index
                .get(&key)
                .copied()
                .ok_or_else(|| Error::Sampler("sampled graph is not in the class".into()))
        })
        .collect::<Result<_>>()?;
    let classes = graphs.len();
    let mut counts = vec![0usize; classes];
    for h in hits {
        counts[h] += 1;
    }
    let expected = draws as f64 / classes as f64;
    let statistic = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dof = classes.saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Assertion(e.to_string()))?;
        1.0 - dist.cdf(statistic)
    };
    Ok(ChiSquareReport {
        n,
        d,
        classes,
        draws,
        statistic,
        dof,
        p_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> SimpleGraph {
        SimpleGraph::from_edges(n, (0..n).map(|i| EdgeKey::of(i, (i + 1) % n))).unwrap()
    }

    fn complete(n: usize) -> SimpleGraph {
        SimpleGraph::empty(n).complement()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn hand_spectra() {
        let c4 = eigenvalues(&cycle(4)).unwrap();
        assert!(close(&c4.eigenvalues, &[2.0, 0.0, 0.0, -2.0], 1e-10));
        assert!((c4.lambda - 2.0).abs() < 1e-10);
        let k4 = eigenvalues(&complete(4)).unwrap();
        assert!(close(&k4.eigenvalues, &[3.0, -1.0, -1.0, -1.0], 1e-10));
        assert!((k4.lambda - 1.0).abs() < 1e-10);
        let empty = eigenvalues(&SimpleGraph::empty(5)).unwrap();
        assert!(close(&empty.eigenvalues, &[0.0; 5], 1e-12));
        assert!(empty.ratio.is_nan());
    }

    #[test]
    fn shifted_trace_examples() {
        let c4 = cycle(4);
        assert!((shifted_trace_power(&c4, 2).unwrap() - 8.0 / 3.0).abs() < 1e-10);
        assert!(shifted_trace_power(&complete(4), 2).unwrap().abs() < 1e-10);
        let matching = SimpleGraph::from_edges(4, [EdgeKey::of(0, 1), EdgeKey::of(2, 3)]).unwrap();
        assert!((shifted_trace_power(&matching, 2).unwrap() - 8.0 / 3.0).abs() < 1e-10);
        assert!(shifted_trace_power(&c4, 3).is_err());
    }

    #[test]
    fn trace_matches_matrix_power_and_frobenius() {
        for (n, d, seed) in [(10, 3, 1), (20, 4, 2), (30, 6, 3), (50, 7, 4)] {
            let g = sample_regular(n, d, seed, SamplerMethod::Auto).unwrap();
            let p = d as f64 / (n - 1) as f64;
            let fro = shifted_matrix(&g, p).norm_squared();
            let two = shifted_trace_power(&g, 2).unwrap();
            assert!((two - fro).abs() < 1e-8 * fro.max(1.0));
            for k in [2, 4, 6] {
                let a = shifted_trace_power(&g, k).unwrap();
                let b = shifted_trace_direct(&g, k).unwrap();
                assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "n={n} k={k}: {a} vs {b}");
                assert!(a >= 0.0);
            }
            // the all-ones vector is killed by A - pJ + pI
            let ones = nalgebra::DVector::from_element(n, 1.0);
            assert!((shifted_matrix(&g, p) * ones).norm() <= 1e-8 * n as f64);
        }
    }

    #[test]
    fn spectrum_invariants_and_residual() {
        assert!(sample_regular(41, 5, 9, SamplerMethod::Auto).is_err(), "n·d odd");
        let g = sample_regular(40, 6, 9, SamplerMethod::switch_chain()).unwrap();
        assert!(g.is_regular(6));
        let s = eigenvalues(&g).unwrap();
        assert!((s.eigenvalues[0] - 6.0).abs() < 1e-8);
        assert!(s.eigenvalues.iter().sum::<f64>().abs() < 1e-6 * 40.0);
        assert!(eigen_residual(&g) < 1e-6);
    }

    #[test]
    fn samplers_are_deterministic_and_regular() {
        for method in [SamplerMethod::PairingRejection, SamplerMethod::switch_chain()] {
            let a = sample_regular(12, 3, 42, method).unwrap();
            let b = sample_regular(12, 3, 42, method).unwrap();
            assert_eq!(a, b);
            assert!(a.is_regular(3));
        }
        assert_eq!(sample_regular(7, 0, 1, SamplerMethod::Auto).unwrap().edge_count(), 0);
        assert!(sample_regular(5, 5, 1, SamplerMethod::Auto).is_err());
    }

    #[test]
    fn mc_trace_single_class() {
        let est = mc_trace(4, 2, 2, 25, 7).unwrap();
        assert!((est.mean - 8.0 / 3.0).abs() < 1e-10);
        assert!(est.stderr < 1e-10);
        let est = mc_trace(4, 1, 2, 25, 7).unwrap();
        assert!((est.mean - 8.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn duality_examples() {
        let r = complement_duality_check(&cycle(4)).unwrap();
        assert!(close(&r.mapped, &[1.0, -1.0, -1.0], 1e-10));
        r.ensure(1e-9).unwrap();
        complement_duality_check(&complete(4)).unwrap().ensure(1e-9).unwrap();
        let g = sample_regular(50, 7, 3, SamplerMethod::Auto).unwrap();
        complement_duality_check(&g).unwrap().ensure(1e-6).unwrap();
    }

    #[test]
    fn densities_integrate_to_one() {
        let semi = integrate(semicircle_density, -1.0, 1.0, 20_000);
        assert!((semi - 1.0).abs() < 1e-4);
        for d in [3, 5, 10] {
            let edge = 2.0 * ((d - 1) as f64).sqrt();
            let mass = integrate(|x| mckay_density(d, x), -edge, edge, 20_000);
            assert!((mass - 1.0).abs() < 1e-4, "d={d}: {mass}");
        }
    }

    #[test]
    fn pairing_sampler_is_uniform_on_small_classes() {
        for (n, d) in [(4, 1), (4, 2), (5, 2), (6, 2)] {
            let r = sampler_chi_square(n, d, 3000, 11, SamplerMethod::PairingRejection).unwrap();
            assert!(r.p_value > 0.001, "{r:?}");
        }
    }
}
