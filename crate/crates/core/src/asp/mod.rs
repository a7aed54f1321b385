//! Ground answer-set programs: parsing, grounding, the stable-model operator
//! `S_P`, oracles, partial evaluation and assumption emission.

mod ground;
mod partial_eval;
mod program;
mod syntax;

pub use ground::{ground, GroundAtom, GroundCaps, Value};
pub use partial_eval::emit_assumptions;
pub use program::{GroundProgram, GroundRule, StableModelReport};
pub use syntax::{parse_program, Atom, CmpOp, Literal, NonGroundProgram, Statement, Term};

/// Two stable models, `{p, r}` and `{q, s}`, and a stuck well-founded bound.
pub const CHOICE_PROGRAM: &str = "p :- not q.\nq :- not p.\nr :- p.\ns :- q.\n";

/// 3-coloring of a six-node graph.
pub const THREE_COLORING: &str = "\
node(1..6).
edge(1,2). edge(1,3). edge(2,3).
edge(3,4). edge(4,5). edge(5,6). edge(3,6).

red(N)  :- node(N), not blue(N), not green(N).
blue(N) :- node(N), not red(N), not green(N).
green(N) :- node(N), not red(N), not blue(N).

:- edge(N,M), red(N), red(M), N < M.
:- edge(N,M), blue(N), blue(M), N < M.
:- edge(N,M), green(N), green(M), N < M.
";
