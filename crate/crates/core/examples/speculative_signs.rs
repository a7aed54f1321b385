//! Sign analysis of a small program where each assumption is kept only if
//! the analysis run under the chosen assumptions supports it.

use std::sync::Arc;

use fixbound::bnb::BnbConfig;
use fixbound::specanalysis::{assumption_lattice, parse_mini, stable_assumption_sets, Mode};

const PROGRAM: &str = "\
loc entry:
  x := 1
  y := y
  goto head
loc head:
  if y > 0 goto body else exit
loc body:
  x := x * y
  y := y - 1
  goto head
loc exit:
assume body y pos
assume exit x pos
assume exit y neg
";

fn main() -> fixbound::Result<()> {
    let p = Arc::new(parse_mini(PROGRAM)?);
    let lat = assumption_lattice(&p);
    for mode in [Mode::May, Mode::Proved] {
        let r = stable_assumption_sets(&p, mode, &BnbConfig::default(), 1 << 16)?;
        println!("{mode:?} mode: {} stable assumption sets", r.sets.len());
        for (sigma, analysis) in &r.sets {
            println!("  {}", lat.format_set(sigma));
            for line in analysis.render(&p).lines() {
                println!("    {line}");
            }
        }
    }
    Ok(())
}
