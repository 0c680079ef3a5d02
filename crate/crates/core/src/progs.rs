//! Hand-assembled register-machine programs used as fixtures: slice
//! programs for the approximation family, membership tests, and the
//! divergence gadgets the greedy builders exercise.
//!
//! The pair-decoding prologue implements `⟨m,t⟩ ↦ (m,t)` by the diagonal
//! subtraction loop: with `rem` starting at the code, subtract `k+1` for
//! `k = 0, 1, 2, ...` until the subtraction underflows; then `t` is the
//! amount consumed in the failed round and `m = k − t`.
//!
//! Register layout of the prologue: input code in `r0`; on arrival at
//! `have_t`, `r0 = 0`, `r1 = k`, `r5 = t`, `r4 = 0`; `r2` holds
//! leftovers from the aborted round.

use crate::pcf::{assemble, Program};
use std::fmt::Write;

fn unpair_prologue(suffix: &str) -> String {
    format!(
        "
round{suffix}:
copyk{suffix}:
  DECJZ r1 ck_done{suffix}
  INC r2
  INC r4
  JMP copyk{suffix}
ck_done{suffix}:
restk{suffix}:
  DECJZ r4 dosub{suffix}
  INC r1
  JMP restk{suffix}
dosub{suffix}:
  DECJZ r0 have_t{suffix}
  INC r5
subloop{suffix}:
  DECJZ r2 roundok{suffix}
  DECJZ r0 have_t{suffix}
  INC r5
  JMP subloop{suffix}
roundok{suffix}:
  INC r1
clr5{suffix}:
  DECJZ r5 round{suffix}
  JMP clr5{suffix}
have_t{suffix}:
"
    )
}

/// After the prologue: `m = r1 - r5`, moved into `r0`.
const MOVE_M_TO_R0: &str = "
sub_mt:
  DECJZ r5 mv
  DECJZ r1 mv
  JMP sub_mt
mv:
  DECJZ r1 modloop
  INC r0
  JMP mv
modloop:
";

fn assemble_or_panic(src: &str) -> Program {
    assemble(src).unwrap_or_else(|e| panic!("fixture program failed to assemble: {e}\n{src}"))
}

/// `φ(⟨m,t⟩) = t mod 2`. Its uniform-family slice flips forever.
pub fn parity_of_t() -> Program {
    let src = format!(
        "{}
par:
  DECJZ r5 even
  DECJZ r5 odd
  JMP par
even:
  HALT
odd:
  INC r0
  HALT
",
        unpair_prologue("")
    );
    assemble_or_panic(&src)
}

/// `φ(⟨m,t⟩) = 1` iff `m mod modulus ∈ residues`, else 0. A stage-exact
/// Δ₂-approximation (constant in `t`) of the residue set.
pub fn residue_set_slice(modulus: u64, residues: &[u64]) -> Program {
    assert!(modulus >= 1);
    let mut src = unpair_prologue("");
    src.push_str(MOVE_M_TO_R0);
    for rem in 0..modulus {
        let tag = if residues.contains(&rem) { "yes" } else { "no" };
        writeln!(src, "  DECJZ r0 {tag}").unwrap();
    }
    src.push_str(
        "  JMP modloop
no:
  HALT
yes:
  INC r0
  HALT
",
    );
    assemble_or_panic(&src)
}

/// Like [`residue_set_slice`] but the guess is flipped while `t < m`:
/// an approximation with a per-argument settling phase.
pub fn residue_set_slice_settling(modulus: u64, residues: &[u64]) -> Program {
    assert!(modulus >= 1);
    // Duplicate the input so (m, t) can be re-derived after the
    // settledness comparison consumes the first decoding.
    let mut src = String::from(
        "
dup:
  DECJZ r0 dup_done
  INC r6
  INC r7
  JMP dup
dup_done:
rest0:
  DECJZ r7 start1
  INC r0
  JMP rest0
start1:
",
    );
    src.push_str(&unpair_prologue("_a"));
    // settled (r3 = 1) iff 2t >= k, i.e. t >= m. r2 holds leftovers from
    // the aborted subtraction round and must be cleared first.
    src.push_str(
        "
clr2a:
  DECJZ r2 dbl
  JMP clr2a
dbl:
  DECJZ r5 cmp2
  INC r2
  INC r2
  JMP dbl
cmp2:
cmploop:
  DECJZ r1 settled
  DECJZ r2 early
  JMP cmploop
settled:
  INC r3
early:
clr1:
  DECJZ r1 clr2b
  JMP clr1
clr2b:
  DECJZ r2 reload
  JMP clr2b
reload:
  DECJZ r6 start2
  INC r0
  JMP reload
start2:
",
    );
    src.push_str(&unpair_prologue("_b"));
    src.push_str(MOVE_M_TO_R0);
    for rem in 0..modulus {
        let tag = if residues.contains(&rem) { "true_yes" } else { "true_no" };
        writeln!(src, "  DECJZ r0 {tag}").unwrap();
    }
    src.push_str(
        "  JMP modloop
true_yes:
  DECJZ r3 say_no
  JMP say_yes
true_no:
  DECJZ r3 say_yes
  JMP say_no
say_no:
  HALT
say_yes:
  INC r0
  HALT
",
    );
    assemble_or_panic(&src)
}

/// `φ(x) = 1` for every x (drain, then one increment).
pub fn constant_one() -> Program {
    assemble_or_panic("top:\nDECJZ r0 out\nJMP top\nout:\nINC r0\nHALT\n")
}

/// `φ(x) = c` for every x.
pub fn constant(c: u64) -> Program {
    let mut src = String::from("top:\nDECJZ r0 out\nJMP top\nout:\n");
    for _ in 0..c {
        src.push_str("INC r0\n");
    }
    src.push_str("HALT\n");
    assemble_or_panic(&src)
}

/// `φ(x) = x mod 2`, total.
pub fn parity_of_input() -> Program {
    assemble_or_panic("DECJZ r0 5\nDECJZ r0 3\nJMP 0\nINC r0\nHALT\n")
}

/// Halts exactly on odd inputs (diverges on evens), value 0.
pub fn diverge_on_evens() -> Program {
    assemble_or_panic("loop:\nDECJZ r0 spin\nDECJZ r0 out\nJMP loop\nspin:\nJMP spin\nout:\nHALT\n")
}

/// Never halts.
pub fn looper() -> Program {
    assemble_or_panic("JMP 0\n")
}
