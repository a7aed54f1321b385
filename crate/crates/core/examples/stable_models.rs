//! Enumerates the stable models of the four-rule choice program with the
//! branch-and-bound search, and shows why plain refinement gets stuck.
//!
//! ```text
//! cargo run --example stable_models
//! ```

use fixbound::asp::{GroundProgram, CHOICE_PROGRAM};
use fixbound::bnb::BnbConfig;

fn main() -> fixbound::Result<()> {
    let p = GroundProgram::from_text(CHOICE_PROGRAM)?;
    let lat = p.lattice();
    println!("{CHOICE_PROGRAM}");
    println!(
        "refinement alone: {}",
        lat.format_interval(&p.well_founded_bound())
    );

    let report = p.stable_models(&BnbConfig::default(), 1 << 16)?;
    for m in &report.models {
        println!("stable model: {}", lat.format_set(m));
    }
    println!(
        "{} outer iterations, {} refinement runs",
        report.search.outer_iterations, report.search.ir_calls
    );
    Ok(())
}
