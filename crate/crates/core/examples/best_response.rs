//! Interval refinement on the unit square with exact rationals. The map is
//! neither monotone nor antimonotone, yet the bounds close in on the unique
//! equilibrium, and a region without one is refuted in a single step.

use fixbound::demo::{fixed_point_f64, run_demo};

fn main() -> fixbound::Result<()> {
    let trace = run_demo(5)?;
    print!("{}", trace.render_text());
    let (x1, x2) = fixed_point_f64();
    println!("equilibrium ≈ ({x1:.6}, {x2:.6})");
    Ok(())
}
