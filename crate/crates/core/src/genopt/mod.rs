//! The GENOPT integer program: model, LP export, exact search and the
//! iterative horizon procedure.

mod model;
mod procedure;
mod solver;

pub use model::{build_model, decode, export_lp, Assignment, Constraint, Decoded, GenoptModel, Sense, Variable};
pub use procedure::{best_greedy_rnd, genopt, GenoptOptions, GenoptRun, PhaseReport};
pub use solver::{lower_bound, solve_exact, SolveOptions, SolveOutcome, Status};
