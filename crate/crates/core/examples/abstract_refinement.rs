//! Refinement in a coarser lattice: atoms are grouped into blocks, and the
//! abstract step is compared with the abstraction of the concrete step.

use std::sync::Arc;

use fixbound::abstraction::{soundness_check, GaloisPair, Partition, PartitionAbstraction};
use fixbound::asp::GroundProgram;
use fixbound::lattice::{Interval, Lattice};
use fixbound::refine::RefineConfig;

const PROGRAM: &str = "a :- not b.\nb :- not a.\nc :- a.\nd :- c, not e.\ne :- b.\n";

fn main() -> fixbound::Result<()> {
    let p = GroundProgram::from_text(PROGRAM)?;
    let lat = p.lattice();
    let blocks = vec![lat.set(["a", "c"])?, lat.set(["b", "e"])?, lat.set(["d"])?];
    let g = Arc::new(PartitionAbstraction::new(
        lat.clone(),
        Partition::new(lat.width(), blocks)?,
    )?);
    let abs = g.abstract_lattice();

    // Having guessed `a`, but nothing else yet.
    let bound = Interval::new(lat.set(["a"])?, lat.top());
    let report = soundness_check(&g, &p.gl_operator(), &bound, &RefineConfig::default())?;
    println!("concrete step   {}", lat.format_interval(&report.concrete));
    println!(
        "abstracted      [{}, {}]",
        abs.render(&report.abstracted.lo),
        abs.render(&report.abstracted.hi)
    );
    println!(
        "abstract step   [{}, {}]",
        abs.render(&report.abstract_step.lo),
        abs.render(&report.abstract_step.hi)
    );
    println!("exact: {}", report.exact);
    Ok(())
}
