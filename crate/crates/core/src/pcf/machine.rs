//! Instructions, the total program numbering, and the plain step-bounded
//! interpreter defining `φ_{e,s}`.

use super::pairing::{pair2, unpair2};
use std::collections::HashMap;

/// One register-machine instruction. Register ids and jump targets are
/// arbitrary naturals; a jump outside the program halts the machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instruction {
    /// Increment register `r`.
    Inc(u64),
    /// If register `r` is zero jump to `target`, else decrement `r`.
    DecJz(u64, u64),
    /// Unconditional jump.
    Jmp(u64),
    Halt,
}

impl Instruction {
    /// Numeric code: opcode in the low two bits, argument above.
    /// `HALT=0`, `INC=1`, `DECJZ=2` (argument `pair2(r, target)`), `JMP=3`.
    pub fn encode(&self) -> u64 {
        match *self {
            Instruction::Halt => 0,
            Instruction::Inc(r) => 1 + 4 * r,
            Instruction::DecJz(r, t) => 2 + 4 * pair2(r, t),
            Instruction::Jmp(t) => 3 + 4 * t,
        }
    }

    /// Total decoding; every natural is some instruction.
    pub fn decode(code: u64) -> Instruction {
        let arg = code / 4;
        match code % 4 {
            0 => Instruction::Halt,
            1 => Instruction::Inc(arg),
            2 => {
                let (r, t) = unpair2(arg);
                Instruction::DecJz(r, t)
            }
            _ => Instruction::Jmp(arg),
        }
    }
}

/// A finite instruction sequence. Every natural decodes to exactly one
/// program, so every `e` is an index of the enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub instructions: Vec<Instruction>,
}

impl Program {
    pub fn new(instructions: Vec<Instruction>) -> Self {
        Program { instructions }
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }
}

/// Program code: `0` is the empty program, otherwise
/// `e = 1 + pair2(head, rest)` peels one instruction.
pub fn decode_program(mut e: u64) -> Program {
    let mut instructions = Vec::new();
    while e > 0 {
        let (head, rest) = unpair2(e - 1);
        instructions.push(Instruction::decode(head));
        e = rest;
    }
    Program { instructions }
}

/// Inverse of [`decode_program`] on canonical instruction codes.
/// `decode_program(encode_program(p)) == p` always; the converse need not
/// hold because instruction decoding is not injective.
pub fn encode_program(p: &Program) -> u64 {
    let mut e = 0u64;
    for instr in p.instructions.iter().rev() {
        e = 1 + pair2(instr.encode(), e);
    }
    e
}

/// Result of a step-bounded evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalOutcome {
    /// Halted with output `value` after exactly `steps_used` executed
    /// instructions (`steps_used <= budget`).
    Halted { value: u64, steps_used: u64 },
    StillRunning,
}

impl EvalOutcome {
    pub fn halted_value(&self) -> Option<u64> {
        match self {
            EvalOutcome::Halted { value, .. } => Some(*value),
            EvalOutcome::StillRunning => None,
        }
    }
}

pub(crate) struct MachineState {
    pub pc: u64,
    pub regs: HashMap<u64, u64>,
    pub steps: u64,
}

impl MachineState {
    pub fn start(input: u64) -> Self {
        let mut regs = HashMap::new();
        if input > 0 {
            regs.insert(0, input);
        }
        MachineState { pc: 0, regs, steps: 0 }
    }

    pub fn reg(&self, r: u64) -> u64 {
        self.regs.get(&r).copied().unwrap_or(0)
    }

    pub fn set_reg(&mut self, r: u64, v: u64) {
        if v == 0 {
            self.regs.remove(&r);
        } else {
            self.regs.insert(r, v);
        }
    }

    /// Executes one instruction. Returns `true` if the machine halted
    /// (explicit `HALT`, or the fetch failed before any step was taken).
    pub fn step(&mut self, prog: &Program) -> bool {
        let Some(instr) = prog.instructions.get(self.pc as usize) else {
            return true;
        };
        self.steps += 1;
        match *instr {
            Instruction::Halt => return true,
            Instruction::Inc(r) => {
                let v = self.reg(r) + 1;
                self.set_reg(r, v);
                self.pc += 1;
            }
            Instruction::DecJz(r, t) => {
                let v = self.reg(r);
                if v == 0 {
                    self.pc = t;
                } else {
                    self.set_reg(r, v - 1);
                    self.pc += 1;
                }
            }
            Instruction::Jmp(t) => self.pc = t,
        }
        false
    }
}

/// `φ_{e,s}(input)`: run program `e` on `input` for at most `budget`
/// executed instructions. Deterministic; one instruction is one step.
pub fn eval_steps(e: u64, input: u64, budget: u64) -> EvalOutcome {
    eval_program(&decode_program(e), input, budget)
}

pub(crate) fn eval_program(prog: &Program, input: u64, budget: u64) -> EvalOutcome {
    let mut st = MachineState::start(input);
    loop {
        if prog.instructions.get(st.pc as usize).is_none() {
            return EvalOutcome::Halted { value: st.reg(0), steps_used: st.steps };
        }
        if st.steps == budget {
            return EvalOutcome::StillRunning;
        }
        if st.step(prog) {
            return EvalOutcome::Halted { value: st.reg(0), steps_used: st.steps };
        }
    }
}

/// Stage-`s` approximation of `n ∈ W_e = dom(φ_e)`.
pub fn we_member(e: u64, n: u64, s: u64) -> bool {
    matches!(eval_steps(e, n, s), EvalOutcome::Halted { .. })
}
