//! Empirical spectral histogram of random regular graphs against the
//! semicircle and McKay densities, with total variation distances.
//!
//!     cargo run --release --example density -- [n] [d] [samples] [bins]

use rrg_spectra::spectral::{density_compare, SamplerMethod};

fn main() -> rrg_spectra::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n = args.first().copied().unwrap_or(400);
    let d = args.get(1).copied().unwrap_or(3);
    let samples = args.get(2).copied().unwrap_or(4);
    let bins = args.get(3).copied().unwrap_or(30);

    let report = density_compare(n, d, samples, 1, bins, SamplerMethod::Auto)?;
    let peak = report
        .empirical
        .iter()
        .chain(&report.semicircle)
        .chain(&report.mckay)
        .copied()
        .fold(0.0, f64::max);
    println!("n={n} d={d} samples={samples}   # empirical   s semicircle   m McKay");
    let col = |v: f64| ((v / peak * 50.0).round() as usize).min(51);
    for i in 0..bins {
        let mut line = vec![' '; 52];
        line[..col(report.empirical[i])].fill('#');
        for (v, mark) in [(report.semicircle[i], 's'), (report.mckay[i], 'm')] {
            if v > 0.0 {
                line[col(v)] = mark;
            }
        }
        let text: String = line.into_iter().collect();
        println!("{:+.2} {}", report.edges[i], text.trim_end());
    }
    println!("TV to semicircle: {:.4}", report.tv_semicircle);
    println!("TV to McKay:      {:.4}", report.tv_mckay);
    Ok(())
}
