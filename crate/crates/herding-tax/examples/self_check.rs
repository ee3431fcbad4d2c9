//! Run the built-in verification suites.
//!
//! The library ships its own cross-checks: the two log measures are compared
//! on fresh samples, the coupling inequalities are exercised on random and
//! exhaustive sign populations, threshold sweeps are tested for monotone
//! decrease, the silenced-drift price level is matched against its closed
//! form, and small worked cases are recomputed from scratch. The quick level
//! finishes in well under a second; `VerifyLevel::Full` enumerates harder.
//!
//! Run with: `cargo run --example self_check`

use herding_tax::{run_verification, VerifyLevel};

fn main() {
    let report = run_verification(VerifyLevel::Quick);
    print!("{report}");
    assert!(report.passed);
}
