//! A memoizing evaluator that resolves `φ_e(x)` exactly up to a global
//! step cap, with two exact analyses on top of plain stepping:
//!
//! * cycle detection — a repeated machine state proves divergence;
//! * loop acceleration — when control returns to a loop head with a
//!   verified per-iteration register delta and branch pattern, whole
//!   blocks of iterations are skipped with exact step accounting. A loop
//!   whose branch pattern can never break proves divergence.
//!
//! Construction modules consult millions of `φ_{e,s}` values; plain
//! stepping would make desk-scale horizons unreachable. Agreement with
//! the plain interpreter is property-tested.

use super::machine::{decode_program, eval_program, EvalOutcome, Instruction, Program};
use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

/// Exact evaluation verdict relative to a step cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolved {
    /// Halts with `value` after exactly `steps` instructions.
    Halts { steps: u64, value: u64 },
    /// Provably never halts (unreachable halt, repeated state, or an
    /// unbreakable loop).
    Diverges,
    /// Did not halt within the cap; behavior beyond the cap unknown.
    Beyond,
}

impl Resolved {
    /// Halting data if the run halts within `budget` steps.
    pub fn within(self, budget: u64) -> Option<(u64, u64)> {
        match self {
            Resolved::Halts { steps, value } if steps <= budget => Some((steps, value)),
            _ => None,
        }
    }
}

pub(crate) struct ProgramInfo {
    pub prog: Program,
    /// Whether any halting point is reachable in the control-flow graph.
    /// If not, the program diverges on every input.
    pub halt_reachable: bool,
}

fn halt_reachable(prog: &Program) -> bool {
    let n = prog.instructions.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0u64];
    while let Some(pc) = stack.pop() {
        let Some(instr) = prog.instructions.get(pc as usize) else {
            return true; // out-of-range pc halts
        };
        if seen[pc as usize] {
            continue;
        }
        seen[pc as usize] = true;
        match *instr {
            Instruction::Halt => return true,
            Instruction::Inc(_) => stack.push(pc + 1),
            Instruction::Jmp(t) => stack.push(t),
            Instruction::DecJz(_, t) => {
                stack.push(pc + 1);
                stack.push(t);
            }
        }
    }
    false
}

/// A fixed effective enumeration of programs. The default maps every
/// index through the total decoding. A *library* relocates finitely many
/// designated slots to hand-assembled programs — an index permutation of
/// the plain enumeration, so uniform families built over it have the
/// same universality properties.
#[derive(Debug, Clone, Default)]
pub struct Enumeration {
    library: BTreeMap<u64, Program>,
}

impl Enumeration {
    pub fn plain() -> Self {
        Enumeration::default()
    }

    pub fn with_library(library: BTreeMap<u64, Program>) -> Self {
        Enumeration { library }
    }

    pub fn program(&self, e: u64) -> Program {
        self.library.get(&e).cloned().unwrap_or_else(|| decode_program(e))
    }

    pub fn is_library_slot(&self, e: u64) -> bool {
        self.library.contains_key(&e)
    }
}

/// Memoizing exact evaluator over one enumeration, with a global step cap.
pub struct Evaluator {
    enumeration: Enumeration,
    cap: u64,
    programs: RefCell<HashMap<u64, Rc<ProgramInfo>>>,
    memo: RefCell<HashMap<(u64, u64), Resolved>>,
}

impl Evaluator {
    pub fn new(cap: u64) -> Self {
        Evaluator::over(Enumeration::plain(), cap)
    }

    pub fn over(enumeration: Enumeration, cap: u64) -> Self {
        Evaluator {
            enumeration,
            cap,
            programs: RefCell::new(HashMap::new()),
            memo: RefCell::new(HashMap::new()),
        }
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub(crate) fn info(&self, e: u64) -> Rc<ProgramInfo> {
        let mut programs = self.programs.borrow_mut();
        programs
            .entry(e)
            .or_insert_with(|| {
                let prog = self.enumeration.program(e);
                let halt_reachable = halt_reachable(&prog);
                Rc::new(ProgramInfo { prog, halt_reachable })
            })
            .clone()
    }

    /// Index `e` provably has empty domain: its slice of any uniform
    /// family is constantly zero and can be skipped wholesale.
    pub fn index_dead(&self, e: u64) -> bool {
        !self.info(e).halt_reachable
    }

    /// Resolve `φ_e(input)` relative to the evaluator's cap, memoized.
    pub fn resolved(&self, e: u64, input: u64) -> Resolved {
        if let Some(r) = self.memo.borrow().get(&(e, input)) {
            return *r;
        }
        let info = self.info(e);
        let r = if !info.halt_reachable {
            Resolved::Diverges
        } else {
            run_resolved(&info.prog, input, self.cap)
        };
        self.memo.borrow_mut().insert((e, input), r);
        r
    }

    /// `φ_{e,s}`: halting data if `φ_e(input)` halts within `s` steps.
    /// Exact for every `s <= cap`.
    pub fn halts_within(&self, e: u64, input: u64, s: u64) -> Option<(u64, u64)> {
        debug_assert!(s <= self.cap, "query budget exceeds evaluator cap");
        self.resolved(e, input).within(s)
    }
}

type Regs = BTreeMap<u64, u64>;

fn reg(regs: &Regs, r: u64) -> u64 {
    regs.get(&r).copied().unwrap_or(0)
}

fn set_reg(regs: &mut Regs, r: u64, v: u64) {
    if v == 0 {
        regs.remove(&r);
    } else {
        regs.insert(r, v);
    }
}

struct Recording {
    head: u64,
    start_steps: u64,
    start_regs: Regs,
    /// (register, value observed at the test, branch-was-zero)
    tests: Vec<(u64, u64, bool)>,
}

/// Exact analyzed run. Agrees with [`eval_program`] wherever the plain
/// interpreter decides within the cap.
pub fn run_resolved(prog: &Program, input: u64, cap: u64) -> Resolved {
    let mut regs: Regs = BTreeMap::new();
    set_reg(&mut regs, 0, input);
    let mut pc: u64 = 0;
    let mut steps: u64 = 0;
    let mut last_seen: HashMap<u64, (u64, Regs)> = HashMap::new();
    let mut recording: Option<Recording> = None;

    loop {
        let Some(instr) = prog.instructions.get(pc as usize) else {
            return Resolved::Halts { steps, value: reg(&regs, 0) };
        };
        if steps == cap {
            return Resolved::Beyond;
        }
        steps += 1;
        let mut backward_to: Option<u64> = None;
        match *instr {
            Instruction::Halt => {
                return Resolved::Halts { steps, value: reg(&regs, 0) };
            }
            Instruction::Inc(r) => {
                let v = reg(&regs, r) + 1;
                set_reg(&mut regs, r, v);
                pc += 1;
            }
            Instruction::DecJz(r, t) => {
                let v = reg(&regs, r);
                if let Some(rec) = recording.as_mut() {
                    rec.tests.push((r, v, v == 0));
                }
                if v == 0 {
                    if t <= pc {
                        backward_to = Some(t);
                    }
                    pc = t;
                } else {
                    set_reg(&mut regs, r, v - 1);
                    pc += 1;
                }
            }
            Instruction::Jmp(t) => {
                if t <= pc {
                    backward_to = Some(t);
                }
                pc = t;
            }
        }

        let Some(head) = backward_to else { continue };

        match recording.take() {
            Some(rec) if rec.head == head => {
                // One full verified iteration head -> head.
                let iter_len = steps - rec.start_steps;
                match extrapolate(&rec, &regs, iter_len) {
                    Extrapolation::Diverges => return Resolved::Diverges,
                    Extrapolation::Skip(0) => {}
                    Extrapolation::Skip(n_max) => {
                        let room = (cap - steps) / iter_len;
                        let n = n_max.min(room);
                        if n > 0 {
                            apply_delta(&mut regs, &rec.start_regs, n);
                            steps += n * iter_len;
                        }
                    }
                }
                last_seen.insert(head, (steps, regs.clone()));
                recording = Some(Recording {
                    head,
                    start_steps: steps,
                    start_regs: regs.clone(),
                    tests: Vec::new(),
                });
            }
            _ => {
                // New loop head (or inner loop preempting an outer one).
                if let Some((_, prev_regs)) = last_seen.get(&head) {
                    if *prev_regs == regs {
                        return Resolved::Diverges; // state repeat
                    }
                }
                last_seen.insert(head, (steps, regs.clone()));
                recording = Some(Recording {
                    head,
                    start_steps: steps,
                    start_regs: regs.clone(),
                    tests: Vec::new(),
                });
            }
        }
    }
}

enum Extrapolation {
    Diverges,
    Skip(u64),
}

/// How many further iterations provably repeat the recorded branch
/// pattern. `None`-like unbounded repetition is divergence.
fn extrapolate(rec: &Recording, end_regs: &Regs, _iter_len: u64) -> Extrapolation {
    let mut keys: Vec<u64> = rec.start_regs.keys().copied().collect();
    for k in end_regs.keys() {
        if !rec.start_regs.contains_key(k) {
            keys.push(*k);
        }
    }
    let delta: BTreeMap<u64, i128> = keys
        .into_iter()
        .map(|k| (k, reg(end_regs, k) as i128 - reg(&rec.start_regs, k) as i128))
        .collect();

    let mut bound: Option<u64> = None;
    for &(r, v, was_zero) in &rec.tests {
        let d = delta.get(&r).copied().unwrap_or(0);
        if was_zero {
            if d != 0 {
                return Extrapolation::Skip(0);
            }
        } else if d < 0 {
            // v + (k+1)·d >= 1 must hold for iterations k = 0..n-1.
            let n_r = ((v as i128 - 1) / -d).max(0) as u64;
            bound = Some(bound.map_or(n_r, |b| b.min(n_r)));
        }
    }
    match bound {
        None => Extrapolation::Diverges,
        Some(n) => Extrapolation::Skip(n),
    }
}

fn apply_delta(regs: &mut Regs, start_regs: &Regs, n: u64) {
    let mut keys: Vec<u64> = regs.keys().copied().collect();
    for k in start_regs.keys() {
        if !regs.contains_key(k) {
            keys.push(*k);
        }
    }
    for k in keys {
        let d = reg(regs, k) as i128 - reg(start_regs, k) as i128;
        let v = reg(regs, k) as i128 + d * n as i128;
        debug_assert!(v >= 0);
        set_reg(regs, k, v as u64);
    }
}

/// Analyzed counterpart of [`super::machine::eval_steps`].
pub fn resolved_outcome(prog: &Program, input: u64, budget: u64, cap: u64) -> EvalOutcome {
    debug_assert!(budget <= cap);
    match run_resolved(prog, input, cap).within(budget) {
        Some((steps, value)) => EvalOutcome::Halted { value, steps_used: steps },
        None => EvalOutcome::StillRunning,
    }
}
