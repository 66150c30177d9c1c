//! Real functions on the cube `{0,1}^t` in the monomial basis.
//!
//! Every `f` has a unique expansion `f(x) = Σ_T c_T · Π_{i∈T} x_i`, and the
//! coefficients `c_T` are what this module calls Fourier coefficients. This
//! is the `{0,1}` monomial basis, not the `±1` character basis used by most
//! references on Boolean analysis: products of coefficients combine over
//! pairs `(S₁, S₂)` with `S₁ ∪ S₂ = S` rather than symmetric differences, and
//! `c_∅ = f(0,…,0)` rather than the mean of `f`.
//!
//! Points and subsets are both bitmasks over `t` bits.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

pub const MAX_DIMENSION: usize = 20;
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_TERMS: usize = 64;

/// `f: {0,1}^t → ℝ` as its value table; point `x` is a bitmask.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BooleanTable {
    pub t: usize,
    pub values: Vec<f64>,
}

impl BooleanTable {
    pub fn new(t: usize, values: Vec<f64>) -> Result<Self> {
        check_dimension(t)?;
        if values.len() != 1 << t {
            return Err(Error::DimensionMismatch(values.len(), 1 << t));
        }
        Ok(Self { t, values })
    }

    pub fn from_fn(t: usize, f: impl FnMut(usize) -> f64) -> Result<Self> {
        check_dimension(t)?;
        Self::new(t, (0..1usize << t).map(f).collect())
    }

    pub fn get(&self, x: usize) -> f64 {
        self.values[x]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            t: self.t,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.t != other.t {
            return Err(Error::DimensionMismatch(self.t, other.t));
        }
        Ok(Self {
            t: self.t,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

/// Coefficient `coeff[T]` of the monomial `x_T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierCoeffs {
    pub t: usize,
    pub coeff: Vec<f64>,
}

impl FourierCoeffs {
    pub fn new(t: usize, coeff: Vec<f64>) -> Result<Self> {
        check_dimension(t)?;
        if coeff.len() != 1 << t {
            return Err(Error::DimensionMismatch(coeff.len(), 1 << t));
        }
        Ok(Self { t, coeff })
    }

    /// The constant function `value`.
    pub fn constant(t: usize, value: f64) -> Self {
        let mut coeff = vec![0.0; 1 << t];
        coeff[0] = value;
        Self { t, coeff }
    }

    pub fn get(&self, set: usize) -> f64 {
        self.coeff[set]
    }

    /// Largest absolute coefficient over nonempty sets.
    pub fn max_nonconstant(&self) -> f64 {
        self.coeff[1..].iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeff.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Value table, the inverse of [`transform`].
    pub fn to_table(&self) -> BooleanTable {
        let mut values = self.coeff.clone();
        for bit in 0..self.t {
            let step = 1 << bit;
            for x in 0..values.len() {
                if x & step != 0 {
                    values[x] += values[x ^ step];
                }
            }
        }
        BooleanTable { t: self.t, values }
    }

    fn sub_from_constant(&self, value: f64) -> Self {
        let mut out = Self {
            t: self.t,
            coeff: self.coeff.iter().map(|c| -c).collect(),
        };
        out.coeff[0] += value;
        out
    }
}

fn check_dimension(t: usize) -> Result<()> {
    if t > MAX_DIMENSION {
        return Err(Error::TooLarge(format!(
            "cube dimension {t} exceeds {MAX_DIMENSION}"
        )));
    }
    Ok(())
}

/// `χ_T(f) = Σ_{S⊆T} (−1)^{|T|+|S|} f(S)` by in-place Möbius inversion,
/// `O(t·2^t)`.
pub fn transform(f: &BooleanTable) -> FourierCoeffs {
    let mut coeff = f.values.clone();
    for bit in 0..f.t {
        let step = 1 << bit;
        for set in 0..coeff.len() {
            if set & step != 0 {
                coeff[set] -= coeff[set ^ step];
            }
        }
    }
    FourierCoeffs { t: f.t, coeff }
}

/// `Σ_{T ⊆ x} c_T`: the monomials that are 1 at `x`.
pub fn evaluate(c: &FourierCoeffs, x: usize) -> f64 {
    let mut sum = c.coeff[0];
    let mut sub = x;
    while sub != 0 {
        sum += c.coeff[sub];
        sub = (sub - 1) & x;
    }
    sum
}

/// Coefficients of the pointwise product: `χ_S(fg) = Σ_{S₁∪S₂=S} χ_{S₁}(f) χ_{S₂}(g)`.
///
/// For each `S₁ ⊆ S`, `S₂` is `S \ S₁` plus any subset of `S₁`; `3^|S|`
/// pairs per `S`.
pub fn product_coeffs(f: &FourierCoeffs, g: &FourierCoeffs) -> Result<FourierCoeffs> {
    if f.t != g.t {
        return Err(Error::DimensionMismatch(f.t, g.t));
    }
    let size = 1usize << f.t;
    let coeff: Vec<f64> = (0..size)
        .map(|s| {
            let mut total = 0.0;
            let mut s1 = s;
            loop {
                let fc = f.coeff[s1];
                if fc != 0.0 {
                    let base = s & !s1;
                    let mut extra = s1;
                    loop {
                        total += fc * g.coeff[base | extra];
                        if extra == 0 {
                            break;
                        }
                        extra = (extra - 1) & s1;
                    }
                }
                if s1 == 0 {
                    break;
                }
                s1 = (s1 - 1) & s;
            }
            total
        })
        .collect();
    Ok(FourierCoeffs { t: f.t, coeff })
}

/// Coefficients of `1/f` by the Neumann series `Σ_i (1 − f/f₀)^i / f₀`,
/// composed through [`product_coeffs`].
///
/// Stops when the newest term's largest coefficient drops below `tol` or
/// after `max_terms` terms. Fails up front when `sup|1 − f/f₀| ≥ 1`, where
/// the series cannot converge.
pub fn reciprocal_coeffs(f: &FourierCoeffs, max_terms: usize, tol: f64) -> Result<FourierCoeffs> {
    let f0 = f.coeff[0];
    if f0.abs() < f64::MIN_POSITIVE {
        return Err(Error::Divergence("f(0,…,0) is zero".into()));
    }
    let normalized = FourierCoeffs {
        t: f.t,
        coeff: f.coeff.iter().map(|c| c / f0).collect(),
    };
    let gap = normalized.sub_from_constant(1.0);
    let sup = gap.to_table().values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if sup >= 1.0 {
        return Err(Error::Divergence(format!(
            "sup |1 - f/f(0)| = {sup} is not below 1"
        )));
    }
    let mut sum = FourierCoeffs::constant(f.t, 1.0);
    let mut term = FourierCoeffs::constant(f.t, 1.0);
    let mut norms = Vec::new();
    for _ in 1..max_terms {
        term = product_coeffs(&term, &gap)?;
        for (s, c) in sum.coeff.iter_mut().zip(&term.coeff) {
            *s += c;
        }
        let norm = term.max_abs();
        if norm < tol {
            break;
        }
        norms.push(norm);
    }
    if norms.len() >= 8 && norms.windows(2).rev().take(8).all(|w| w[1] >= w[0]) {
        return Err(Error::Divergence("series terms stopped shrinking".into()));
    }
    for c in &mut sum.coeff {
        *c /= f0;
    }
    Ok(sum)
}

fn ln_factorial(k: usize) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// The largest `a` the first combinatorial sum bound is stated for at `n`.
pub fn lemma_sum_1_threshold(n: usize) -> f64 {
    0.5 / 4096.0 * (n.max(1) as f64).powi(-5)
}

/// Log-space values of the sum `Σ_k C(n,k) (4(m+k))! a^{m+k}` and its
/// leading term `(4m)! a^m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LemmaSum1 {
    pub ln_sum: f64,
    pub ln_leading: f64,
}

impl LemmaSum1 {
    pub fn ratio(&self) -> f64 {
        (self.ln_sum - self.ln_leading).exp()
    }
}

pub fn lemma_sum_1(n: usize, m: usize, a: f64) -> Result<LemmaSum1> {
    if m > n {
        return Err(Error::Precondition(format!("m = {m} exceeds n = {n}")));
    }
    if !(a > 0.0) || a > lemma_sum_1_threshold(n) * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "a = {a:e} outside (0, {:e}]",
            lemma_sum_1_threshold(n)
        )));
    }
    let ln_a = a.ln();
    let terms: Vec<f64> = (0..=n)
        .map(|k| ln_binomial(n, k) + ln_factorial(4 * (m + k)) + (m + k) as f64 * ln_a)
        .collect();
    Ok(LemmaSum1 {
        ln_sum: log_sum_exp(&terms),
        ln_leading: ln_factorial(4 * m) + m as f64 * ln_a,
    })
}

pub const LEMMA_SUM_2_MAX_N: usize = 12;

/// Exact `Σ_k Σ_{s₁+…+s_k=n, sᵢ>0} multinomial(n; s) Π (4sᵢ)!` by walking
/// all `2^{n−1}` compositions, with its ratio to `(4n)!`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaSum2 {
    pub n: usize,
    #[serde(serialize_with = "serialize_biguint")]
    pub sum: BigUint,
    pub ratio: f64,
}

fn serialize_biguint<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn factorial(k: usize) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

pub fn lemma_sum_2(n: usize) -> Result<LemmaSum2> {
    if n == 0 || n > LEMMA_SUM_2_MAX_N {
        return Err(Error::TooLarge(format!(
            "composition sum needs 1 ≤ n ≤ {LEMMA_SUM_2_MAX_N}, got {n}"
        )));
    }
    let fact: Vec<BigUint> = (0..=4 * n).map(factorial).collect();
    let mut sum = BigUint::zero();
    // Bit i of `cuts` set: a part ends after position i + 1.
    for cuts in 0u32..1 << (n - 1) {
        let mut parts = Vec::new();
        let mut len = 1;
        for i in 0..n - 1 {
            if cuts >> i & 1 == 1 {
                parts.push(len);
                len = 1;
            } else {
                len += 1;
            }
        }
        parts.push(len);
        let mut term = fact[n].clone();
        for &s in &parts {
            term = term * &fact[4 * s] / &fact[s];
        }
        sum += term;
    }
    let ratio = ratio_of(&sum, &fact[4 * n]);
    Ok(LemmaSum2 { n, sum, ratio })
}

fn ratio_of(num: &BigUint, den: &BigUint) -> f64 {
    let scale = BigUint::from(10u64).pow(15);
    (num * &scale / den).to_f64().unwrap_or(f64::INFINITY) / 1e15
}

/// Largest observed `|χ_S(out)| / ((4|S|)! a^{|S|} b)` over nonempty `S`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PropagationReport {
    pub trials: usize,
    pub t: usize,
    pub a: f64,
    pub b: f64,
    pub max_product_ratio: f64,
    pub max_reciprocal_ratio: f64,
}

fn coefficient_budget(set: usize, a: f64, b: f64) -> f64 {
    let s = set.count_ones() as usize;
    (ln_factorial(4 * s) + s as f64 * a.ln()).exp() * b
}

/// Random coefficients with `χ_∅ = 1` and `|χ_S| ≤ (4|S|)! a^{|S|} b`.
pub fn random_bounded_coeffs(rng: &mut impl Rng, t: usize, a: f64, b: f64) -> FourierCoeffs {
    let mut coeff = vec![1.0; 1 << t];
    for (set, c) in coeff.iter_mut().enumerate().skip(1) {
        *c = rng.gen_range(-1.0..=1.0) * coefficient_budget(set, a, b);
    }
    FourierCoeffs { t, coeff }
}

fn worst_ratio(c: &FourierCoeffs, a: f64, b: f64) -> f64 {
    (1..c.coeff.len())
        .map(|set| c.coeff[set].abs() / coefficient_budget(set, a, b))
        .fold(0.0, f64::max)
}

/// Push random bounded coefficient sets through products and reciprocals
/// and report how far the outputs exceed the same budget.
pub fn check_bound_propagation(
    trials: usize,
    t: usize,
    a: f64,
    b: f64,
    seed: u64,
) -> Result<PropagationReport> {
    if t > 8 {
        return Err(Error::TooLarge(format!("propagation check needs t ≤ 8, got {t}")));
    }
    if !(a > 0.0) || !(b > 0.0 && b <= 1.0) {
        return Err(Error::Precondition(format!("need a > 0 and 0 < b ≤ 1, got a={a}, b={b}")));
    }
    let ratios: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<(f64, f64)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let f = random_bounded_coeffs(&mut rng, t, a, b);
            let g = random_bounded_coeffs(&mut rng, t, a, b);
            let prod = product_coeffs(&f, &g)?;
            let inv = reciprocal_coeffs(&f, DEFAULT_MAX_TERMS, DEFAULT_TOL)?;
            Ok((worst_ratio(&prod, a, b), worst_ratio(&inv, a, b)))
        })
        .collect::<Result<_>>()?;
    Ok(PropagationReport {
        trials,
        t,
        a,
        b,
        max_product_ratio: ratios.iter().map(|r| r.0).fold(0.0, f64::max),
        max_reciprocal_ratio: ratios.iter().map(|r| r.1).fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, Strategy};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn transform_examples() {
        let one = BooleanTable::from_fn(3, |_| 1.0).unwrap();
        assert_eq!(transform(&one).coeff, {
            let mut v = vec![0.0; 8];
            v[0] = 1.0;
            v
        });
        let x1 = BooleanTable::new(1, vec![0.0, 1.0]).unwrap();
        assert_eq!(transform(&x1).coeff, vec![0.0, 1.0]);
        let f = BooleanTable::from_fn(2, |x| if x == 3 { 3.0 } else { 2.0 }).unwrap();
        assert_eq!(transform(&f).coeff, vec![2.0, 0.0, 0.0, 1.0]);
        assert_eq!(evaluate(&transform(&f), 3), 3.0);
    }

    #[test]
    fn product_examples() {
        let one = FourierCoeffs::constant(2, 1.0);
        assert_eq!(product_coeffs(&one, &one).unwrap(), one);
        let f = FourierCoeffs::new(2, vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        let g = FourierCoeffs::new(2, vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(product_coeffs(&f, &g).unwrap().coeff, vec![1.0; 4]);
        // x₁·x₁ = x₁ on the cube.
        let x1 = FourierCoeffs::new(1, vec![0.0, 1.0]).unwrap();
        assert_eq!(product_coeffs(&x1, &x1).unwrap(), x1);
    }

    #[test]
    fn reciprocal_examples() {
        let one = FourierCoeffs::constant(3, 1.0);
        assert_eq!(reciprocal_coeffs(&one, 64, 1e-12).unwrap(), one);
        let eps = 0.1;
        let f = FourierCoeffs::new(1, vec![1.0, eps]).unwrap();
        let inv = reciprocal_coeffs(&f, 64, 1e-12).unwrap();
        assert!(close(inv.coeff[0], 1.0, 1e-12));
        assert!(close(inv.coeff[1], -eps / (1.0 + eps), 1e-11));
        let far = FourierCoeffs::new(1, vec![1.0, -1.5]).unwrap();
        assert!(matches!(reciprocal_coeffs(&far, 64, 1e-12), Err(Error::Divergence(_))));
    }

    #[test]
    fn reciprocal_normalizes_constant_term() {
        let f = BooleanTable::from_fn(3, |x| 2.0 + 0.1 * x as f64).unwrap();
        let inv = reciprocal_coeffs(&transform(&f), 64, 1e-14).unwrap();
        let expected = transform(&f.map(|v| 1.0 / v));
        for (a, b) in inv.coeff.iter().zip(&expected.coeff) {
            assert!(close(*a, *b, 1e-12));
        }
    }

    #[test]
    fn lemma_sum_1_examples() {
        let tiny = lemma_sum_1(1, 0, 1e-30).unwrap();
        assert!(close(tiny.ratio(), 1.0, 1e-12));
        let a = lemma_sum_1_threshold(5);
        let r = lemma_sum_1(5, 2, a).unwrap();
        assert!(r.ratio() <= 2.0, "ratio {}", r.ratio());
        assert!(lemma_sum_1(5, 2, 2.0 * a).is_err());
    }

    #[test]
    fn lemma_sum_2_examples() {
        let one = lemma_sum_2(1).unwrap();
        assert_eq!(one.sum, BigUint::from(24u32));
        assert_eq!(one.ratio, 1.0);
        let two = lemma_sum_2(2).unwrap();
        assert_eq!(two.sum, BigUint::from(41472u32));
        assert!(close(two.ratio, 41472.0 / 40320.0, 1e-12));
    }

    #[test]
    fn lemma_sum_2_matches_block_recursion() {
        // Ordered set partitions: choose the first block of size s, recurse.
        let mut f = vec![BigUint::one()];
        for n in 1..=LEMMA_SUM_2_MAX_N {
            let mut total = BigUint::zero();
            for s in 1..=n {
                let choose = factorial(n) / (factorial(s) * factorial(n - s));
                total += choose * factorial(4 * s) * &f[n - s];
            }
            f.push(total);
            assert_eq!(lemma_sum_2(n).unwrap().sum, f[n], "n={n}");
        }
    }

    #[test]
    fn propagation_degenerate_cases() {
        let one = FourierCoeffs::constant(4, 1.0);
        assert_eq!(worst_ratio(&product_coeffs(&one, &one).unwrap(), 1e-3, 0.5), 0.0);
        assert_eq!(worst_ratio(&reciprocal_coeffs(&one, 64, 1e-12).unwrap(), 1e-3, 0.5), 0.0);
        let t = 6;
        let report = check_bound_propagation(200, t, (t as f64).powi(-5) / 100.0, 0.5, 7).unwrap();
        assert!(report.max_product_ratio.is_finite() && report.max_product_ratio > 0.0);
        assert!(report.max_reciprocal_ratio.is_finite());
    }

    fn table(t: usize) -> impl Strategy<Value = BooleanTable> {
        proptest::collection::vec(-2.0f64..2.0, 1 << t)
            .prop_map(move |values| BooleanTable::new(t, values).unwrap())
    }

    proptest! {
        #[test]
        fn round_trip(t in 0usize..9, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = BooleanTable::from_fn(t, |_| rng.gen_range(-5.0..5.0)).unwrap();
            let c = transform(&f);
            for x in 0..1usize << t {
                prop_assert!(close(evaluate(&c, x), f.get(x), 1e-12));
            }
            prop_assert_eq!(c.coeff[0], f.get(0));
            let back = c.to_table();
            for x in 0..1usize << t {
                prop_assert!(close(back.get(x), f.get(x), 1e-12));
            }
        }

        #[test]
        fn product_matches_pointwise((f, g) in (0usize..7).prop_flat_map(|t| (table(t), table(t)))) {
            let direct = transform(&f.zip_with(&g, |a, b| a * b).unwrap());
            let via = product_coeffs(&transform(&f), &transform(&g)).unwrap();
            for (a, b) in via.coeff.iter().zip(&direct.coeff) {
                prop_assert!(close(*a, *b, 1e-10));
            }
        }

        #[test]
        fn reciprocal_matches_pointwise(t in 0usize..7, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = BooleanTable::from_fn(t, |x| if x == 0 { 1.0 } else { 1.0 + rng.gen_range(-0.5..0.5) }).unwrap();
            let inv = reciprocal_coeffs(&transform(&f), 64, 1e-12).unwrap();
            let direct = transform(&f.map(|v| 1.0 / v));
            for (a, b) in inv.coeff.iter().zip(&direct.coeff) {
                prop_assert!((a - b).abs() <= 1e-8);
            }
        }

        #[test]
        fn linearity((f, g) in (0usize..7).prop_flat_map(|t| (table(t), table(t))), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
            let mixed = transform(&f.zip_with(&g, |x, y| alpha * x + beta * y).unwrap());
            let (cf, cg) = (transform(&f), transform(&g));
            for i in 0..mixed.coeff.len() {
                prop_assert!(close(mixed.coeff[i], alpha * cf.coeff[i] + beta * cg.coeff[i], 1e-12));
            }
        }
    }
}
