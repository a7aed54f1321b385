//! The same search under a cap on active intervals. Every stable model stays
//! covered after each iteration, whatever the budget.

use fixbound::asp::GroundProgram;
use fixbound::bnb::{BnbConfig, BnbSearch};
use fixbound::lattice::full_interval;

const PROGRAM: &str = "\
a :- not b.  b :- not a.
c :- not d.  d :- not c.
e :- not f.  f :- not e.
g :- a, c.   :- g, e.
";

fn main() -> fixbound::Result<()> {
    let p = GroundProgram::from_text(PROGRAM)?;
    let lat = p.lattice();
    let op = p.gl_operator();
    for budget in [None, Some(2)] {
        let cfg = BnbConfig {
            budget,
            ..BnbConfig::default()
        };
        let mut search = BnbSearch::new(&lat, &op, &full_interval(&lat), cfg)?;
        println!("budget {budget:?}");
        while search.step()? {
            let st = search.state();
            println!(
                "  iteration {}: {} active, {} final",
                st.outer_iterations,
                st.bounds.len(),
                st.final_bounds.len()
            );
        }
        let st = search.state();
        println!("  done after {} refinement runs", st.ir_calls);
        for b in &st.final_bounds {
            println!("  {}", lat.format_interval(b));
        }
    }
    Ok(())
}
