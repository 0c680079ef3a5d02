//! A tiny assembler so tests and fixtures can inject hand-written
//! programs into the enumeration.
//!
//! Grammar (one item per line, `#` starts a comment):
//!
//! ```text
//! line  := label | instr | (blank)
//! label := NAME ":"
//! instr := "INC" reg | "DECJZ" reg target | "JMP" target | "HALT"
//! reg   := "r" NUM | NUM
//! target:= NAME | NUM
//! ```
//!
//! Labels name the address of the next instruction. Targets may be
//! numeric addresses or label names.

use super::machine::{Instruction, Program};
use std::collections::HashMap;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AsmError {
    #[error("line {0}: unknown mnemonic `{1}`")]
    UnknownMnemonic(usize, String),
    #[error("line {0}: bad operand `{1}`")]
    BadOperand(usize, String),
    #[error("line {0}: wrong number of operands")]
    Arity(usize),
    #[error("undefined label `{0}`")]
    UndefinedLabel(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
}

fn parse_reg(line: usize, tok: &str) -> Result<u64, AsmError> {
    let body = tok.strip_prefix('r').unwrap_or(tok);
    body.parse().map_err(|_| AsmError::BadOperand(line, tok.to_string()))
}

enum Target {
    Addr(u64),
    Label(String),
}

fn parse_target(tok: &str) -> Target {
    match tok.parse() {
        Ok(addr) => Target::Addr(addr),
        Err(_) => Target::Label(tok.to_string()),
    }
}

/// Assemble source text into a [`Program`].
pub fn assemble(src: &str) -> Result<Program, AsmError> {
    enum Pending {
        Done(Instruction),
        DecJz(u64, Target),
        Jmp(Target),
    }
    let mut labels: HashMap<String, u64> = HashMap::new();
    let mut pending: Vec<(usize, Pending)> = Vec::new();

    for (idx, raw) in src.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_suffix(':') {
            let name = name.trim().to_string();
            if labels.insert(name.clone(), pending.len() as u64).is_some() {
                return Err(AsmError::DuplicateLabel(name));
            }
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let item = match toks[0].to_ascii_uppercase().as_str() {
            "HALT" => {
                if toks.len() != 1 {
                    return Err(AsmError::Arity(lineno));
                }
                Pending::Done(Instruction::Halt)
            }
            "INC" => {
                if toks.len() != 2 {
                    return Err(AsmError::Arity(lineno));
                }
                Pending::Done(Instruction::Inc(parse_reg(lineno, toks[1])?))
            }
            "DECJZ" => {
                if toks.len() != 3 {
                    return Err(AsmError::Arity(lineno));
                }
                Pending::DecJz(parse_reg(lineno, toks[1])?, parse_target(toks[2]))
            }
            "JMP" => {
                if toks.len() != 2 {
                    return Err(AsmError::Arity(lineno));
                }
                Pending::Jmp(parse_target(toks[1]))
            }
            other => return Err(AsmError::UnknownMnemonic(lineno, other.to_string())),
        };
        pending.push((lineno, item));
    }

    let resolve = |t: Target| -> Result<u64, AsmError> {
        match t {
            Target::Addr(a) => Ok(a),
            Target::Label(name) => labels.get(&name).copied().ok_or(AsmError::UndefinedLabel(name)),
        }
    };
    let mut instructions = Vec::with_capacity(pending.len());
    for (_, item) in pending {
        instructions.push(match item {
            Pending::Done(i) => i,
            Pending::DecJz(r, t) => Instruction::DecJz(r, resolve(t)?),
            Pending::Jmp(t) => Instruction::Jmp(resolve(t)?),
        });
    }
    Ok(Program::new(instructions))
}
