//! The randomized property suites, run from library code.
//!
//! cargo run --release --example verify_suites

use nash_nns::verify::{run, Suite, VerifyConfig};

fn main() -> nash_nns::Result<()> {
    let cfg = VerifyConfig { suite: Suite::All, trials: Some(100), seed: 2024, ..Default::default() };
    let reports = run(&cfg)?;
    for r in &reports {
        println!("{r}");
    }
    std::process::exit(if reports.iter().all(|r| r.passed()) { 0 } else { 1 });
}
