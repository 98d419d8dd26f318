//! Minimal end-to-end use of the library: configure, run, read the result.

use pbil_core::{run_umda, PbilConfig, Problem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // 64 bits, 50 offspring per generation, keep the best 12, seed 42.
    let config = PbilConfig::new(64, 50, 12, 1.0, 42)?;
    let result = run_umda(config, Problem::LeadingOnes)?;
    println!(
        "success: {} after {} evaluations",
        result.success, result.evaluations
    );
    Ok(())
}
