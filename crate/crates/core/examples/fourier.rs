//! Monomial-basis coefficients on the Boolean cube: transform and evaluate a
//! table, multiply two tables, invert one through its series, then check the
//! two combinatorial sums and how coefficient budgets survive products and
//! reciprocals.
//!
//!     cargo run --example fourier -- [t] [trials]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rrg_spectra::fourier::{
    check_bound_propagation, evaluate, lemma_sum_1, lemma_sum_1_threshold, lemma_sum_2,
    product_coeffs, reciprocal_coeffs, transform, BooleanTable, DEFAULT_MAX_TERMS, DEFAULT_TOL,
};

fn main() -> rrg_spectra::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let t = args.first().copied().unwrap_or(4);
    let trials = args.get(1).copied().unwrap_or(200);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f = BooleanTable::from_fn(t, |_| 1.0 + rng.gen_range(-0.05..0.05))?;
    let g = BooleanTable::from_fn(t, |x| 0.5 + 0.01 * x.count_ones() as f64)?;
    let cf = transform(&f);
    let cg = transform(&g);
    let round_trip = (0..1usize << t)
        .map(|x| (evaluate(&cf, x) - f.get(x)).abs())
        .fold(0.0, f64::max);
    println!("t={t}: transform round trip error {round_trip:.2e}");

    let fg = product_coeffs(&cf, &cg)?;
    let pointwise = transform(&f.zip_with(&g, |a, b| a * b)?);
    let product_err = (0..1usize << t)
        .map(|s| (fg.get(s) - pointwise.get(s)).abs())
        .fold(0.0, f64::max);
    println!("product coefficients vs pointwise product: {product_err:.2e}");

    let inv = reciprocal_coeffs(&cf, DEFAULT_MAX_TERMS, DEFAULT_TOL)?;
    let inv_err = (0..1usize << t)
        .map(|x| (evaluate(&inv, x) * f.get(x) - 1.0).abs())
        .fold(0.0, f64::max);
    println!("reciprocal series: max |f · (1/f) - 1| = {inv_err:.2e}");
    println!("largest non-constant coefficient of f: {:.4e}", cf.max_nonconstant());

    for n in [4, 8, 16] {
        let a = lemma_sum_1_threshold(n);
        let worst = (0..=n)
            .map(|m| lemma_sum_1(n, m, a).map(|s| s.ratio()))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .fold(0.0, f64::max);
        println!("first sum at n={n}, a at threshold: worst sum/leading = {worst:.6}");
    }
    for n in 1..=8 {
        let s = lemma_sum_2(n)?;
        println!("composition sum n={n}: {} (ratio to (4n)! = {:.6})", s.sum, s.ratio);
    }

    let t = t.min(6);
    let a = lemma_sum_1_threshold(t);
    let report = check_bound_propagation(trials, t, a, 0.5, 11)?;
    println!(
        "budget propagation over {trials} trials at a={a:.2e}: product {:.3e}, reciprocal {:.3e}",
        report.max_product_ratio, report.max_reciprocal_ratio
    );
    Ok(())
}
