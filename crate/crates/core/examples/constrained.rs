//! Build a regular graph that contains some edges and avoids others, save it
//! as an edge list, read it back and check its spectrum against its
//! complement.
//!
//!     cargo run --example constrained -- [n] [d]

use rrg_spectra::graph::io::{read_edge_list, write_edge_list};
use rrg_spectra::graph::{build_constrained_regular, ConstraintSet, EdgeKey};
use rrg_spectra::spectral::{complement_duality_check, eigenvalues};

fn main() -> rrg_spectra::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n = args.first().copied().unwrap_or(12);
    let d = args.get(1).copied().unwrap_or(4);

    let required = [EdgeKey::new(0, 1)?, EdgeKey::new(1, 2)?];
    let forbidden = [EdgeKey::new(0, 2)?, EdgeKey::new(3, 4)?];
    let cs = ConstraintSet::new(required, forbidden)?;
    let g = build_constrained_regular(n, d, &cs)?;
    for e in &required {
        assert!(g.contains(e));
    }
    for e in &forbidden {
        assert!(!g.contains(e));
    }
    println!("{d}-regular on {n} vertices with {} edges", g.edge_count());

    let text = write_edge_list(&g)?;
    print!("{text}");
    let back = read_edge_list(&text)?;
    println!("edge list round trip: {}", back == g);

    let spec = eigenvalues(&g)?;
    println!("top eigenvalue {:.6}, λ = {:.6}", spec.eigenvalues[0], spec.lambda);
    let dual = complement_duality_check(&g)?;
    println!("complement spectrum deviation: {:.2e}", dual.max_deviation);
    Ok(())
}
