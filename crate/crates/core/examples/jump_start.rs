//! Resuming refinement from a tighter bound supplied from outside, such as a
//! guess confirmed by another solver.

use fixbound::asp::{GroundProgram, CHOICE_PROGRAM};
use fixbound::lattice::full_interval;
use fixbound::refine::{iterate_refine, jump_start, RefineConfig};

fn main() -> fixbound::Result<()> {
    let p = GroundProgram::from_text(CHOICE_PROGRAM)?;
    let lat = p.lattice();
    let op = p.gl_operator();
    let cfg = RefineConfig::default();

    let stuck = iterate_refine(&lat, &op, &full_interval(&lat), &cfg)?;
    println!("from the root: {}", lat.format_interval(&stuck.result));

    let mut hint = stuck.result.clone();
    hint.lo = lat.set(["p"])?;
    let resumed = jump_start(&lat, &op, &stuck, &hint, &cfg)?;
    println!(
        "after assuming p: {} in {} steps",
        lat.format_interval(&resumed.result),
        resumed.steps_used
    );
    Ok(())
}
