//! Second-eigenvalue ratio λ / (2√(d(n−d)/n)) over sampled d-regular graphs,
//! plus the complement check on the first sample.
//!
//!     cargo run --release --example spectrum -- [n] [d] [samples] [seed]

use rrg_spectra::spectral::{
    complement_duality_check, sample_regular, theorem_ratio, SamplerMethod,
};

fn main() -> rrg_spectra::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n = args.first().copied().unwrap_or(500) as usize;
    let d = args.get(1).copied().unwrap_or(50) as usize;
    let samples = args.get(2).copied().unwrap_or(10) as usize;
    let seed = args.get(3).copied().unwrap_or(1);

    let stats = theorem_ratio(n, d, samples, seed, SamplerMethod::Auto)?;
    println!("n={n} d={d} samples={samples} seed={seed}");
    for (i, r) in stats.ratios.iter().enumerate() {
        println!("  sample {i:>3}: ratio {r:.4}");
    }
    println!(
        "ratio mean {:.4}  min {:.4}  max {:.4}",
        stats.mean, stats.min, stats.max
    );

    let g = sample_regular(n, d, seed, SamplerMethod::Auto)?;
    let dual = complement_duality_check(&g)?;
    println!("complement spectra max deviation {:.3e}", dual.max_deviation);
    Ok(())
}
