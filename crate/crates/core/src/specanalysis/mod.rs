//! Sign analysis of a small imperative IR under speculative assumptions.

mod analysis;
mod ir;
mod sign;

pub use analysis::{
    analyze, assumption_lattice, brute_force_stable_sets, phi_operator, project, safe,
    stable_assumption_sets, transfer, verdict, Mode, SignState, StableSets, Verdict,
};
pub use ir::{
    parse_mini, Assign, Assumption, BinOp, Block, Edge, Expr, Guard, MiniProgram, Operand,
    Terminator,
};
pub use sign::Sign;
