//! A minimal register-machine universe: the instruction set, a total
//! program numbering, step-bounded evaluation, and the bijective tupling
//! functions used by every other module.
//!
//! The machine has four opcodes (`INC`, `DECJZ`, `JMP`, `HALT`) over
//! unboundedly many registers of naturals. Input is loaded into `r0`,
//! all other registers start at zero, and the output is the value of
//! `r0` when the machine halts. Jumping (or falling) outside the program
//! halts the machine.

mod asm;
mod exec;
mod machine;
mod pairing;

pub use asm::{assemble, AsmError};
pub use exec::{run_resolved, Enumeration, Evaluator, Resolved};
pub use machine::{decode_program, encode_program, eval_steps, we_member, EvalOutcome, Instruction, Program};
pub use pairing::{pair, pair2, project, tuple_decode, unpair2};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PcfError {
    #[error("pair() requires a non-empty sequence")]
    EmptyTuple,
    #[error("arithmetic overflow in pairing computation")]
    Overflow,
}
