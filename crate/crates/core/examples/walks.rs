//! Walk classes on small complete graphs: exhaustive counts against the
//! enumeration bound, codeword round trips, and exact walk contributions
//! against the contribution bound.
//!
//!     cargo run --example walks -- [n] [d] [max_k]

use rrg_spectra::oracle::Oracle;
use rrg_spectra::walks::{class_table, decode, encode, enumerate_closed_walks};

fn main() -> rrg_spectra::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n = args.first().copied().unwrap_or(6);
    let d = args.get(1).copied().unwrap_or(2);
    let max_k = args.get(2).copied().unwrap_or(6);
    let oracle = Oracle::shared();

    println!("k,t,t2,m,b,r,count,bound_log,count/bound,worst_ratio");
    for k in 2..=max_k {
        for row in class_table(oracle, n, k, Some(d))? {
            let p = row.params;
            println!(
                "{},{},{},{},{},{},{},{:.3},{:.3e},{:.4}",
                p.k,
                p.t,
                p.t2,
                p.m,
                p.b,
                p.r,
                row.count,
                row.bound_log,
                row.count as f64 / row.bound_log.exp(),
                row.worst_ratio.unwrap_or(f64::NAN)
            );
        }
    }

    let walks = enumerate_closed_walks(n.min(5), max_k.min(6))?;
    let ok = walks
        .iter()
        .filter(|w| decode(&encode(w), &w.discovery_order()).as_ref() == Ok(*w))
        .count();
    println!("codeword round trip: {ok}/{} walks", walks.len());
    Ok(())
}
