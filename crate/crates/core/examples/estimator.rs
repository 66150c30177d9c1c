//! Refine the closed-form first estimates and watch them approach the exact
//! probabilities; then measure how two nearby estimate pairs contract.
//!
//!     cargo run --example estimator -- [n] [d] [trials]

use rrg_spectra::estimator::{
    contraction_measure, initial_estimates, iterate, max_relative_deviation, oracle_estimates,
    Family,
};
use rrg_spectra::graph::DegreeSpec;
use rrg_spectra::oracle::Oracle;

fn main() -> rrg_spectra::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n = args.first().copied().unwrap_or(8);
    let d = args.get(1).copied().unwrap_or(3);
    let trials = args.get(2).copied().unwrap_or(20);

    let oracle = Oracle::shared();
    let root = DegreeSpec::regular(n, d)?;
    let depth = 6;
    let exact = oracle_estimates(oracle, &root, depth)?;
    let init = initial_estimates(n, d, depth)?;
    println!("n={n} d={d}: {} states within depth {depth}", init.state_count());
    for rounds in 0..=depth / 2 {
        let est = iterate(&init, rounds)?;
        let err = max_relative_deviation(&est, &exact, Family::AllStates);
        let root_p = est.p(root.degrees(), 0, 1)?;
        println!("  rounds={rounds}  max rel error={err:.3e}  P(01)={root_p:.12}");
    }
    let exact_p = oracle.edge_probability(&root, 0, 1)?;
    println!("  exact P(01) = {exact_p} = {:.12}", exact_p.to_f64());

    let p = d as f64 / (n - 1) as f64;
    let base = initial_estimates(n, d, 4)?;
    let mut ratios = Vec::new();
    for seed in 0..trials as u64 {
        let other = base.perturbed(0.01, 0.01, seed);
        ratios.push(contraction_measure(&base, &other, Family::AllStates, p)?.raw_ratio);
    }
    ratios.sort_by(f64::total_cmp);
    println!(
        "contraction over {trials} ±1% perturbations: min {:.4} median {:.4} max {:.4} (2p = {:.4})",
        ratios[0],
        ratios[ratios.len() / 2],
        ratios[ratios.len() - 1],
        2.0 * p
    );
    Ok(())
}
