//! Runs every property suite over the shipped corpus.

use cpcurv::verify::verify_suite;
use cpcurv::Tolerance;
use std::path::Path;

fn main() -> cpcurv::Result<()> {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let report = verify_suite(Some(&corpus), &Tolerance::default(), 0)?;
    for suite in &report.suites {
        println!("{suite}");
        for f in &suite.failures {
            println!("  {}: {}", f.instance, f.detail);
        }
    }
    println!("all passed: {}", report.all_passed());
    Ok(())
}
