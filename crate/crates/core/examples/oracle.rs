//! Exact counts and probabilities on small degree specs: the regular class
//! of K_n, the same class with an edge removed, a joint query, and a full
//! conditional table over a few edges.
//!
//!     cargo run --example oracle -- [n] [d]

use rrg_spectra::graph::{ConstraintSet, DegreeSpec, EdgeKey};
use rrg_spectra::oracle::listing::enumerate_graphs;
use rrg_spectra::oracle::Oracle;

fn main() -> rrg_spectra::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n = args.first().copied().unwrap_or(6);
    let d = args.get(1).copied().unwrap_or(2);
    let oracle = Oracle::new();

    let full = DegreeSpec::regular(n, d)?;
    let count = oracle.count(&full)?;
    println!("{d}-regular graphs on {n} labelled vertices: {count}");
    if count <= 10_000 {
        println!("  listing agrees: {}", enumerate_graphs(&full)?.len() as u128 == count);
    }
    println!("  P(01) = {}", oracle.edge_probability(&full, 0, 1)?);
    println!("  Y(0,1,2) = {}", oracle.cherry_probability(&full, 0, 1, 2)?);

    let cut = DegreeSpec::regular_without(n, d, &[EdgeKey::new(0, 1)?])?;
    println!("without edge 01: {} graphs", oracle.count(&cut)?);
    println!("  P(02) = {}", oracle.edge_probability(&cut, 0, 2)?);
    println!("  P(23) = {}", oracle.edge_probability(&cut, 2, 3)?);
    println!("  blocked expectation at (0,2) = {}", oracle.blocked_expectation(&cut, 0, 2)?);

    let cs = ConstraintSet::new([EdgeKey::new(0, 2)?], [EdgeKey::new(1, 2)?])?;
    println!("  P(02 in, 12 out) = {}", oracle.joint_probability(&cut, &cs)?);

    let cond: Vec<EdgeKey> = [(0, 2), (1, 2), (2, 3)]
        .into_iter()
        .map(|(a, b)| EdgeKey::new(a, b))
        .collect::<Result<_, _>>()?;
    let table = oracle.conditional_table(&cut, &cond, EdgeKey::new(0, 3)?)?;
    println!("P(03 | 02, 12, 23 present per bit, left to right):");
    for (x, v) in table.values.iter().enumerate() {
        let bits: String = (0..table.dimension()).map(|j| if x >> j & 1 == 1 { '1' } else { '0' }).collect();
        match v {
            Some(p) => println!("  {bits}  {p}"),
            None => println!("  {bits}  undefined"),
        }
    }
    println!("memoized states: {}", oracle.memo_len());
    Ok(())
}
