//! cohesim: a finite-horizon workbench for effective constructions on
//! computable copies of ω — movable-marker sets, colored linear orders,
//! greedy cohesive subsets, and stage-bounded cohesive-power probes.
//!
//! Everything is deterministic: a construction run is a pure fold over
//! stages, and every limit statement is judged through an explicit
//! stability window rather than guessed.

pub mod approx;
pub mod cli;
pub mod cohesive;
pub mod colored;
pub mod markers;
pub mod orders;
pub mod pcf;
pub mod power;
pub mod progs;
pub mod trace;
