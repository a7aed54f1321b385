//! Partial evaluation of the grounded three-coloring program under a bound,
//! plus the assumption literals a solver could be started with.

use fixbound::asp::{emit_assumptions, GroundProgram, THREE_COLORING};
use fixbound::lattice::Interval;

fn main() -> fixbound::Result<()> {
    let p = GroundProgram::from_text(THREE_COLORING)?;
    let lat = p.lattice();
    let lo = lat.set(["red(1)", "green(4)"])?;
    let hi = lat.set(["blue(2)"])?.complement();
    let bound = Interval::new(lo, hi);

    let pe = p.partial_eval(&bound)?;
    println!(
        "% {} ground rules, {} after partial evaluation",
        p.rules().len(),
        pe.rules().len()
    );
    print!("{}", pe.to_text());
    println!("% assumptions");
    print!("{}", emit_assumptions(&bound, lat.universe())?);

    let before = p.oracle_stable_models(1 << 20)?;
    let after = pe.oracle_stable_models(1 << 20)?;
    println!(
        "% {} colorings in total, {} inside the bound",
        before.len(),
        after.len()
    );
    Ok(())
}
