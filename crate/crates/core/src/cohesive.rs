//! Cohesive-set oracles for testing and the two greedy subset builders:
//! the r-cohesive enumeration driven by an inclination approximation and
//! the Jockusch-style enumeration driven by an index approximation.

use crate::approx::{r_set_member, staggered_intersection, ThreeValued};
use crate::pcf::{unpair2, Evaluator};
use std::rc::Rc;

/// A decidable stand-in for the cohesive set `C`: an explicit membership
/// test plus provenance. At desk scale an oracle is either a scripted
/// test set or the output prefix of a greedy builder.
#[derive(Clone)]
pub struct CohesiveOracle {
    membership: Rc<dyn Fn(u64) -> bool>,
    description: String,
}

impl CohesiveOracle {
    pub fn new(description: impl Into<String>, membership: impl Fn(u64) -> bool + 'static) -> Self {
        CohesiveOracle { membership: Rc::new(membership), description: description.into() }
    }

    pub fn from_members(description: impl Into<String>, members: Vec<u64>) -> Self {
        let set: std::collections::BTreeSet<u64> = members.into_iter().collect();
        CohesiveOracle::new(description, move |n| set.contains(&n))
    }

    pub fn contains(&self, n: u64) -> bool {
        (self.membership)(n)
    }

    /// Exactly the members ≤ bound, increasing.
    pub fn enumerate_up_to(&self, bound: u64) -> Vec<u64> {
        (0..=bound).filter(|&n| self.contains(n)).collect()
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn everything() -> Self {
        CohesiveOracle::new("naturals", |_| true)
    }

    pub fn evens() -> Self {
        CohesiveOracle::new("evens", |n| n % 2 == 0)
    }
}

impl std::fmt::Debug for CohesiveOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CohesiveOracle({})", self.description)
    }
}

/// Budget policy for a greedy search: each pass scans pair codes up to
/// `pair_cap` at the current evaluation budget; `unknown` verdicts count
/// as failure, and exhausted passes retry with the budget doubled.
#[derive(Debug, Clone, Copy)]
pub struct BudgetSchedule {
    pub initial_budget: u64,
    pub doublings: u32,
    pub pair_cap: u64,
}

impl BudgetSchedule {
    pub fn budgets(&self) -> impl Iterator<Item = u64> + '_ {
        (0..=self.doublings).map(|k| self.initial_budget << k)
    }
}

impl Default for BudgetSchedule {
    fn default() -> Self {
        BudgetSchedule { initial_budget: 256, doublings: 6, pair_cap: 1 << 16 }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CohesiveError {
    #[error("horizon exhausted at step {step}: no candidate pair below {pair_cap} at any scheduled budget (largest {max_budget})")]
    HorizonExhausted { step: usize, pair_cap: u64, max_budget: u64 },
}

/// One committed choice of the greedy builders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyStep {
    /// The element index being chosen (this step picked `c_{index}`).
    pub index: usize,
    /// Code of the least admissible pair ⟨s, c⟩.
    pub pair_code: u64,
    pub s: u64,
    pub c: u64,
    /// Budget at which the pass succeeded.
    pub budget: u64,
    /// Membership verdicts consulted during the successful pass.
    pub probes: u64,
}

/// Output of a greedy run: the chosen elements plus per-step search
/// records.
#[derive(Debug, Clone, Default)]
pub struct GreedyTrace {
    pub chosen: Vec<u64>,
    pub steps: Vec<GreedyStep>,
}

/// Membership source for the `R^{e,i}` family, injectable so tests can
/// relocate hand-assembled total programs into low constraint slots.
pub trait RSetSource {
    fn member(&self, e: u64, side: u8, n: u64, budget: u64) -> ThreeValued;
    fn describe(&self) -> String;
}

/// The production family over a program evaluator.
pub struct PcfRSets {
    pub ev: Rc<Evaluator>,
}

impl RSetSource for PcfRSets {
    fn member(&self, e: u64, side: u8, n: u64, budget: u64) -> ThreeValued {
        r_set_member(&self.ev, e, side, n, budget)
    }

    fn describe(&self) -> String {
        "pcf".into()
    }
}

/// Membership source for the `W_e` family.
pub trait WSource {
    fn member(&self, index: u64, n: u64, budget: u64) -> bool;
    fn describe(&self) -> String;
}

pub struct PcfWSets {
    pub ev: Rc<Evaluator>,
}

impl WSource for PcfWSets {
    fn member(&self, index: u64, n: u64, budget: u64) -> bool {
        self.ev.halts_within(index, n, budget).is_some()
    }

    fn describe(&self) -> String {
        "pcf".into()
    }
}

fn least_element(b: &CohesiveOracle, cap: u64) -> Option<u64> {
    (0..cap).find(|&m| b.contains(m))
}

/// Greedy r-cohesive enumeration: `c_0` is the least element of `B`;
/// `c_{n+1}` comes from the least pair ⟨s, c⟩ (least code) with `s > n`,
/// `c > c_n`, and `c ∈ B ∩ ∩_{e<n} R^{e, g(e,s)}`.
pub fn greedy_rcohesive(
    b: &CohesiveOracle,
    g: impl Fn(u64, u64) -> u8,
    rsets: &dyn RSetSource,
    count: usize,
    schedule: &BudgetSchedule,
) -> Result<GreedyTrace, CohesiveError> {
    greedy_core(b, count, schedule, |n, s, c, budget, probes| {
        for e in 0..n {
            *probes += 1;
            if rsets.member(e, g(e, s), c, budget) != ThreeValued::Yes {
                return false;
            }
        }
        true
    })
}

/// Jockusch-style greedy cohesive enumeration: `c_{n+1}` comes from the
/// least pair ⟨s, c⟩ with `s > n`, `c > c_n`, and
/// `c ∈ B ∩ ∩_{i≤n} W_{g(i,s)}`.
pub fn greedy_cohesive_jockusch(
    b: &CohesiveOracle,
    g: impl Fn(u64, u64) -> u64,
    wsets: &dyn WSource,
    count: usize,
    schedule: &BudgetSchedule,
) -> Result<GreedyTrace, CohesiveError> {
    greedy_core(b, count, schedule, |n, s, c, budget, probes| {
        for i in 0..=n {
            *probes += 1;
            if !wsets.member(g(i, s), c, budget) {
                return false;
            }
        }
        true
    })
}

fn greedy_core(
    b: &CohesiveOracle,
    count: usize,
    schedule: &BudgetSchedule,
    admissible: impl Fn(u64, u64, u64, u64, &mut u64) -> bool,
) -> Result<GreedyTrace, CohesiveError> {
    let mut trace = GreedyTrace::default();
    if count == 0 {
        return Ok(trace);
    }
    let max_budget = schedule.budgets().last().unwrap_or(schedule.initial_budget);
    let c0 = least_element(b, schedule.pair_cap).ok_or(CohesiveError::HorizonExhausted {
        step: 0,
        pair_cap: schedule.pair_cap,
        max_budget,
    })?;
    trace.chosen.push(c0);
    while trace.chosen.len() < count {
        let n = (trace.chosen.len() - 1) as u64;
        let prev = *trace.chosen.last().expect("nonempty");
        let mut found = None;
        'schedule: for budget in schedule.budgets() {
            let mut probes = 0u64;
            for code in 0..schedule.pair_cap {
                let (s, c) = unpair2(code);
                if s <= n || c <= prev || !b.contains(c) {
                    continue;
                }
                if admissible(n, s, c, budget, &mut probes) {
                    found = Some(GreedyStep {
                        index: trace.chosen.len(),
                        pair_code: code,
                        s,
                        c,
                        budget,
                        probes,
                    });
                    break 'schedule;
                }
            }
        }
        match found {
            Some(step) => {
                trace.chosen.push(step.c);
                trace.steps.push(step);
            }
            None => {
                return Err(CohesiveError::HorizonExhausted {
                    step: trace.chosen.len(),
                    pair_cap: schedule.pair_cap,
                    max_budget,
                })
            }
        }
    }
    Ok(trace)
}

/// Explicit cohesive prefix for the first `k` staggered partitions: the
/// `length` least members of `∩_{i<k} A^{i,σ(i)}`, together with the side
/// vector used. Exactly cohesive (full inclusion) for partitions `0..k`.
pub fn finite_family_cohesive(k: usize, length: u64, sigma: Option<Vec<u8>>) -> (Vec<u64>, Vec<u8>) {
    let sigma = sigma.unwrap_or_else(|| vec![1u8; k]);
    assert_eq!(sigma.len(), k, "side vector length must equal k");
    (staggered_intersection(&sigma, length), sigma)
}
