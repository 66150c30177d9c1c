//! Acceptance criteria 1-9, each printed as one PASS/FAIL line.
//!
//! Criterion 7 bounds |M| for every closed walk of length at most 6 on
//! n = 6, d = 2 by ten times its asymptotic contribution bound. The
//! Hamiltonian 6-cycle exceeds that (ratio about 17), confirmed against a
//! direct listing of all 70 graphs, so 7 is expected to report FAIL. The
//! test still fails if any other criterion fails, or if 7 fails for a
//! different reason.

use std::io::Write;

use rrg_spectra::verify::{run, CRITERIA};

const KNOWN_UNATTAINABLE: &[u8] = &[7];

#[test]
fn acceptance_criteria() {
    let mut unexpected = Vec::new();
    for (id, _) in CRITERIA {
        let result = run(id);
        // Straight to stderr so the table shows without --nocapture.
        let _ = writeln!(std::io::stderr(), "{result}");
        if !result.passed {
            let documented = KNOWN_UNATTAINABLE.contains(&id)
                && result.summary.contains("trace grid: 0 of 27");
            if !documented {
                unexpected.push(result.to_string());
            }
        }
    }
    assert!(unexpected.is_empty(), "unexpected failures:\n{}", unexpected.join("\n"));
}
