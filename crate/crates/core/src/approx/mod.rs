//! Limit-computable machinery: the uniform sequence containing all
//! Δ₂-approximations, staggered partitions, the `R^{e,i}` computable-set
//! family, and finite-horizon verdicts for limit statements.

mod uniform;

pub use uniform::{uniform_g, g_timeline, UniformApprox};

use crate::pcf::{pair2, Evaluator};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Three-valued stability judgment for a {0,1}-valued predicate probed
/// over a horizon. `StableTrue { since }` means the predicate held at
/// every probed index from `since` through the end of the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    StableTrue { since: u64 },
    StableFalse { since: u64 },
    Unstable,
}

impl Verdict {
    pub fn is_stable_true(&self) -> bool {
        matches!(self, Verdict::StableTrue { .. })
    }

    pub fn is_stable_false(&self) -> bool {
        matches!(self, Verdict::StableFalse { .. })
    }

    pub fn is_stable(&self) -> bool {
        !matches!(self, Verdict::Unstable)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::StableTrue { since } => write!(f, "stable-true-since-{since}"),
            Verdict::StableFalse { since } => write!(f, "stable-false-since-{since}"),
            Verdict::Unstable => write!(f, "unstable"),
        }
    }
}

/// Report of `limit_at_horizon` for an arbitrary-valued sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LimitReport<V> {
    Settled { value: V, since: u64 },
    Unstable,
}

/// Judge the value a stage-indexed sample holds on a maximal suffix of
/// the window `[t, s]`. Unstable when the last two probes differ.
pub fn limit_at_horizon<V: Eq + Clone>(
    sample: impl Fn(u64) -> V,
    window: (u64, u64),
) -> Result<LimitReport<V>, ApproxError> {
    let (t, s) = window;
    if t > s {
        return Err(ApproxError::EmptyWindow { t, s });
    }
    let last = sample(s);
    if s > t && sample(s - 1) != last {
        return Ok(LimitReport::Unstable);
    }
    let mut since = s;
    while since > t && sample(since - 1) == last {
        since -= 1;
    }
    Ok(LimitReport::Settled { value: last, since })
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ApproxError {
    #[error("empty probe window [{t}, {s}]")]
    EmptyWindow { t: u64, s: u64 },
}

/// A family of partitions `(A^{i,0}, A^{i,1})` of ℕ with all finite side
/// intersections infinite.
pub trait PartitionFamily {
    /// Does `m` lie on side `side` of partition `i`?
    fn member(&self, i: u64, side: u8, m: u64) -> bool;
    fn name(&self) -> &str;
}

/// The bit-position family: `A^{i,j}` is the set of numbers whose binary
/// digit `i` equals `j`. Intersections of `n` chosen sides form an
/// arithmetic progression of step `2^n`, so the staggering is exact and
/// element selection has closed form.
#[derive(Debug, Clone, Copy, Default)]
pub struct BitPartitions;

impl PartitionFamily for BitPartitions {
    fn member(&self, i: u64, side: u8, m: u64) -> bool {
        staggered_member(i, side, m)
    }

    fn name(&self) -> &str {
        "bits"
    }
}

/// `m ∈ A^{i,j}` for the bit-position family.
pub fn staggered_member(i: u64, j: u8, m: u64) -> bool {
    let bit = if i < 64 { (m >> i) & 1 } else { 0 };
    bit == j as u64
}

/// The `count` least members of `∩_{i<n} A^{i,σ(i)}`: exactly
/// `σ_value + k·2^n`.
pub fn staggered_intersection(sigma: &[u8], count: u64) -> Vec<u64> {
    let n = sigma.len();
    assert!(n < 63, "side vector too long for u64 arithmetic");
    let base: u64 = sigma
        .iter()
        .enumerate()
        .map(|(i, &b)| (b as u64) << i)
        .sum();
    let step = 1u64 << n;
    (0..count).map(|k| base + k * step).collect()
}

/// Budget-bounded verdict for membership questions that are only
/// semi-decidable at desk scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThreeValued {
    Yes,
    No,
    Unknown,
}

/// Stage-`budget` verdict for `n ∈ R^{e,i}`, where
/// `R^{e,1} = {n : (∀m ≤ n φ_e(m)↓) ∧ φ_e(n) = 1}` and `R^{e,0}` is its
/// complement.
///
/// `Yes`/`No` are halt-certificates and never revert at larger budgets;
/// membership in `R^{e,0}` is co-c.e., so a divergent `φ_e` leaves both
/// sides `Unknown` forever.
pub fn r_set_member(ev: &Evaluator, e: u64, i: u8, n: u64, budget: u64) -> ThreeValued {
    assert!(i <= 1, "side must be 0 or 1");
    let mut all_halt = true;
    let mut value_at_n = None;
    for m in 0..=n {
        match ev.halts_within(e, m, budget) {
            Some((_, v)) => {
                if m == n {
                    value_at_n = Some(v);
                }
            }
            None => all_halt = false,
        }
    }
    let in_r1 = if all_halt {
        Some(value_at_n.expect("value present when all halt") == 1)
    } else if value_at_n.is_some_and(|v| v != 1) {
        // φ_e(n) halted with a value other than 1: n ∉ R^{e,1} regardless
        // of the still-running smaller arguments.
        Some(false)
    } else {
        None
    };
    match in_r1 {
        Some(b) if b == (i == 1) => ThreeValued::Yes,
        Some(_) => ThreeValued::No,
        None => ThreeValued::Unknown,
    }
}

/// A source of approximation bits `g_e(n, s)`, injectable into every
/// construction. Production runs use [`UniformApprox`]; tests inject
/// scripted slices.
pub trait ApproxSource {
    fn bit(&self, e: u64, n: u64, s: u64) -> bool;

    /// Ascending 1-positions of `g_e(·, s)` below `bound`.
    fn ones(&self, e: u64, s: u64, bound: u64) -> Vec<u64> {
        (0..bound).filter(|&n| self.bit(e, n, s)).collect()
    }

    /// False only when the slice is provably constant zero.
    fn slice_maybe_live(&self, _e: u64) -> bool {
        true
    }

    fn describe(&self) -> String;
}

/// Scripted approximation slices for tests and fixtures: a finite map
/// `e ↦ g_e`, zero elsewhere. A slice may carry an explicit support (the
/// only arguments where it can ever be 1), which makes the per-stage
/// 1-position queries of the constructions cheap.
#[derive(Clone)]
pub struct InjectedApprox {
    slices: BTreeMap<u64, InjectedSlice>,
    label: String,
}

#[derive(Clone)]
struct InjectedSlice {
    g: Arc<dyn Fn(u64, u64) -> bool>,
    support: Option<Arc<Vec<u64>>>,
}

impl InjectedApprox {
    pub fn new(label: impl Into<String>) -> Self {
        InjectedApprox { slices: BTreeMap::new(), label: label.into() }
    }

    pub fn with_slice(mut self, e: u64, g: impl Fn(u64, u64) -> bool + 'static) -> Self {
        self.slices.insert(e, InjectedSlice { g: Arc::new(g), support: None });
        self
    }

    /// Slice with a declared support: `g_e(n, s)` is 0 for every `n`
    /// outside `support` (sorted ascending).
    pub fn with_supported_slice(
        mut self,
        e: u64,
        support: Vec<u64>,
        g: impl Fn(u64, u64) -> bool + 'static,
    ) -> Self {
        debug_assert!(support.windows(2).all(|w| w[0] < w[1]));
        self.slices.insert(
            e,
            InjectedSlice { g: Arc::new(g), support: Some(Arc::new(support)) },
        );
        self
    }

    /// The everywhere-zero family.
    pub fn zero() -> Self {
        InjectedApprox::new("zero")
    }
}

impl ApproxSource for InjectedApprox {
    fn bit(&self, e: u64, n: u64, s: u64) -> bool {
        let Some(slice) = self.slices.get(&e) else { return false };
        if let Some(support) = &slice.support {
            if support.binary_search(&n).is_err() {
                return false;
            }
        }
        (slice.g)(n, s)
    }

    fn ones(&self, e: u64, s: u64, bound: u64) -> Vec<u64> {
        let Some(slice) = self.slices.get(&e) else { return Vec::new() };
        match &slice.support {
            Some(support) => support
                .iter()
                .copied()
                .take_while(|&n| n < bound)
                .filter(|&n| (slice.g)(n, s))
                .collect(),
            None => (0..bound).filter(|&n| (slice.g)(n, s)).collect(),
        }
    }

    fn slice_maybe_live(&self, e: u64) -> bool {
        self.slices.contains_key(&e)
    }

    fn describe(&self) -> String {
        format!("injected:{}", self.label)
    }
}

/// Pair code ⟨e, N⟩ used by the marker construction.
pub fn pair_code(e: u64, n: u64) -> u64 {
    pair2(e, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcf::{assemble, encode_program, Evaluator};

    #[test]
    fn staggered_member_examples() {
        assert!(staggered_member(0, 1, 5));
        assert!(staggered_member(1, 0, 5));
        assert!(!staggered_member(2, 0, 5));
    }

    #[test]
    fn staggered_complementarity_box() {
        for i in 0..16u64 {
            for m in 0..4096u64 {
                assert!(staggered_member(i, 0, m) ^ staggered_member(i, 1, m));
            }
        }
    }

    #[test]
    fn staggered_intersection_matches_brute_force() {
        // Brute-force oracle: scan naturals checking digit conditions.
        let brute = |sigma: &[u8], count: usize| -> Vec<u64> {
            (0u64..)
                .filter(|&m| {
                    sigma
                        .iter()
                        .enumerate()
                        .all(|(i, &j)| staggered_member(i as u64, j, m))
                })
                .take(count)
                .collect()
        };
        assert_eq!(staggered_intersection(&[], 3), vec![0, 1, 2]);
        assert_eq!(staggered_intersection(&[1, 0], 3), vec![1, 5, 9]);
        assert_eq!(staggered_intersection(&[1, 0], 3), brute(&[1, 0], 3));
        assert_eq!(staggered_intersection(&[0, 0, 0], 2), vec![0, 8]);
        assert_eq!(staggered_intersection(&[0, 0, 0], 2), brute(&[0, 0, 0], 2));
        for sigma in [vec![1u8], vec![0, 1], vec![1, 1, 0], vec![0, 1, 0, 1]] {
            assert_eq!(
                staggered_intersection(&sigma, 20),
                brute(&sigma, 20),
                "sigma={sigma:?}"
            );
        }
    }

    /// Exact density: |∩_{i<n} A^{i,σ(i)} ∩ [0, K·2^n)| = K.
    #[test]
    fn staggered_exact_density() {
        for n in 0..=8usize {
            let mut sigma = vec![0u8; n];
            loop {
                for k in [1u64, 7, 32] {
                    let bound = k << n;
                    let members = staggered_intersection(&sigma, k);
                    assert!(members.iter().all(|&m| m < bound));
                    let count = (0..bound)
                        .filter(|&m| {
                            sigma
                                .iter()
                                .enumerate()
                                .all(|(i, &j)| staggered_member(i as u64, j, m))
                        })
                        .count() as u64;
                    assert_eq!(count, k);
                }
                let mut i = 0;
                loop {
                    if i == n {
                        break;
                    }
                    sigma[i] ^= 1;
                    if sigma[i] == 1 {
                        break;
                    }
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
        }
    }

    #[test]
    fn limit_report_cases() {
        assert_eq!(
            limit_at_horizon(|_| 1u64, (0, 100)).unwrap(),
            LimitReport::Settled { value: 1, since: 0 }
        );
        assert_eq!(
            limit_at_horizon(|s| if s < 50 { 0u64 } else { 1 }, (0, 100)).unwrap(),
            LimitReport::Settled { value: 1, since: 50 }
        );
        assert_eq!(
            limit_at_horizon(|s| s % 2, (0, 100)).unwrap(),
            LimitReport::Unstable
        );
        assert!(limit_at_horizon(|s| s, (5, 4)).is_err());
    }

    #[test]
    fn r_set_constant_one_program() {
        let ev = Evaluator::new(100_000);
        let prog = assemble("top:\nDECJZ r0 out\nJMP top\nout:\nINC r0\nHALT\n").unwrap();
        let e = encode_program(&prog);
        for n in 0..20u64 {
            assert_eq!(r_set_member(&ev, e, 1, n, 10_000), ThreeValued::Yes);
            assert_eq!(r_set_member(&ev, e, 0, n, 10_000), ThreeValued::No);
        }
    }

    #[test]
    fn r_set_looping_program_stays_unknown() {
        let ev = Evaluator::new(100_000);
        let e = encode_program(&assemble("JMP 0\n").unwrap());
        for n in [0u64, 3, 9] {
            assert_eq!(r_set_member(&ev, e, 1, n, 50_000), ThreeValued::Unknown);
            assert_eq!(r_set_member(&ev, e, 0, n, 50_000), ThreeValued::Unknown);
        }
    }

    #[test]
    fn r_set_parity_program() {
        // φ(n) = n mod 2, total.
        let ev = Evaluator::new(100_000);
        let prog = assemble("DECJZ r0 5\nDECJZ r0 3\nJMP 0\nINC r0\nHALT\n").unwrap();
        let e = encode_program(&prog);
        for n in 0..10u64 {
            assert_eq!(ev.resolved(e, n).within(10_000).unwrap().1, n % 2, "phi({n})");
        }
        assert_eq!(r_set_member(&ev, e, 1, 3, 10_000), ThreeValued::Yes);
        assert_eq!(r_set_member(&ev, e, 1, 4, 10_000), ThreeValued::No);
    }

    /// A yes/no verdict never reverts to unknown at a larger budget.
    #[test]
    fn r_set_monotone_in_budget() {
        let ev = Evaluator::new(100_000);
        let prog = assemble("top:\nDECJZ r0 out\nJMP top\nout:\nINC r0\nHALT\n").unwrap();
        let e = encode_program(&prog);
        for n in 0..8u64 {
            for side in [0u8, 1] {
                let mut decided = None;
                for budget in [1u64, 2, 4, 8, 16, 32, 64, 128, 256, 1024] {
                    let v = r_set_member(&ev, e, side, n, budget);
                    if let Some(prev) = decided {
                        assert!(v == prev, "verdict reverted at budget {budget}");
                    } else if v != ThreeValued::Unknown {
                        decided = Some(v);
                    }
                }
            }
        }
    }
}
