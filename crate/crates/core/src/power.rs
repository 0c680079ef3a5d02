//! Finite-horizon semantics for cohesive powers: elements are partial
//! computable functions probed on a cohesive-set prefix, and every limit
//! statement (equality, order, successor, gaps, standardness) is judged
//! through a stability window instead of guessed.
//!
//! The window convention: a verdict is Stable only if the probed value
//! is constant on the final ⌈fraction·probes⌉ C-elements (default 1/2).
//! liminf/limsup statements use the pinned growing threshold schedule
//! `threshold_j = j` on the j-th window-sized segment.

use crate::approx::Verdict;
use crate::cohesive::CohesiveOracle;
use crate::colored::ColoredSnapshot;
use crate::orders::OrderView;
use crate::pcf::Evaluator;
use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::rc::Rc;

#[derive(Debug, thiserror::Error)]
pub enum PowerError {
    #[error("precondition failed: {what} was {verdict}")]
    Precondition { what: String, verdict: Verdict },
    #[error("empty probe set: the oracle has no members below the prefix bound")]
    EmptyProbeSet,
}

/// Horizon parameters: how much of the C-prefix to probe, the evaluation
/// budget per point, and the tail fraction that must be constant.
#[derive(Debug, Clone, Copy)]
pub struct HorizonConfig {
    pub prefix_bound: u64,
    pub budget: u64,
    pub window_num: u64,
    pub window_den: u64,
}

impl HorizonConfig {
    pub fn new(prefix_bound: u64, budget: u64) -> Self {
        HorizonConfig { prefix_bound, budget, window_num: 1, window_den: 2 }
    }

    /// Window length for a probe sequence of the given length.
    pub fn window(&self, probes: usize) -> usize {
        let w = (probes as u64 * self.window_num).div_ceil(self.window_den);
        (w.max(1) as usize).min(probes.max(1))
    }
}

/// A power-element representative: a partial function given by a program
/// index, a scripted closure, or a finite table. Evaluations are
/// memoized with the budget they were made at.
#[derive(Clone)]
pub struct PowerElement {
    pub label: String,
    backing: Backing,
    memo: Rc<RefCell<BTreeMap<u64, (u64, Option<u64>)>>>,
}

#[derive(Clone)]
enum Backing {
    Pcf { e: u64, ev: Rc<Evaluator> },
    Scripted(Rc<dyn Fn(u64) -> Option<u64>>),
    Constant(u64),
}

impl std::fmt::Debug for PowerElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PowerElement({})", self.label)
    }
}

impl PowerElement {
    pub fn from_index(e: u64, ev: Rc<Evaluator>) -> Self {
        PowerElement {
            label: format!("phi_{e}"),
            backing: Backing::Pcf { e, ev },
            memo: Rc::new(RefCell::new(BTreeMap::new())),
        }
    }

    pub fn scripted(label: impl Into<String>, f: impl Fn(u64) -> Option<u64> + 'static) -> Self {
        PowerElement {
            label: label.into(),
            backing: Backing::Scripted(Rc::new(f)),
            memo: Rc::new(RefCell::new(BTreeMap::new())),
        }
    }

    pub fn eval(&self, n: u64, budget: u64) -> Option<u64> {
        let out = match &self.backing {
            Backing::Pcf { e, ev } => ev.halts_within(*e, n, budget.min(ev.cap())).map(|(_, v)| v),
            Backing::Scripted(f) => f(n),
            Backing::Constant(a) => Some(*a),
        };
        self.memo.borrow_mut().insert(n, (budget, out));
        out
    }

    /// Recorded (n, budget, outcome) observations, for consistency audits.
    pub fn observations(&self) -> Vec<(u64, u64, Option<u64>)> {
        self.memo.borrow().iter().map(|(&n, &(b, v))| (n, b, v)).collect()
    }
}

/// Image of the canonical embedding: the constant function at `a`.
pub fn canonical_embed(a: u64) -> PowerElement {
    PowerElement {
        label: format!("const_{a}"),
        backing: Backing::Constant(a),
        memo: Rc::new(RefCell::new(BTreeMap::new())),
    }
}

/// Verdict plus an optional diagnostic (set when a probed comparison was
/// undefined in the order presentation).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpReport {
    pub verdict: Verdict,
    pub diagnostic: Option<String>,
}

impl OpReport {
    fn plain(verdict: Verdict) -> Self {
        OpReport { verdict, diagnostic: None }
    }

    fn undefined(diagnostic: String) -> Self {
        OpReport { verdict: Verdict::Unstable, diagnostic: Some(diagnostic) }
    }
}

fn probes(c: &CohesiveOracle, h: &HorizonConfig) -> Vec<u64> {
    c.enumerate_up_to(h.prefix_bound)
}

/// Stability-window judgment of a boolean probe sequence.
fn stability(samples: &[(u64, bool)], window: usize) -> Verdict {
    let Some(&(_, last)) = samples.last() else { return Verdict::Unstable };
    let mut since_idx = samples.len() - 1;
    while since_idx > 0 && samples[since_idx - 1].1 == last {
        since_idx -= 1;
    }
    let suffix_len = samples.len() - since_idx;
    if suffix_len < window {
        return Verdict::Unstable;
    }
    let since = samples[since_idx].0;
    if last {
        Verdict::StableTrue { since }
    } else {
        Verdict::StableFalse { since }
    }
}

/// `C ⊆* dom(φ)` at horizon, where the domain condition also requires
/// values to land inside the structure (per the cohesive-product domain
/// `∀n (φ(n)↓ → φ(n) ∈ |A_n|)`).
pub fn in_domain(
    phi: &PowerElement,
    structure: &dyn OrderView,
    c: &CohesiveOracle,
    h: &HorizonConfig,
) -> Verdict {
    let pts = probes(c, h);
    let samples: Vec<(u64, bool)> = pts
        .iter()
        .map(|&n| (n, phi.eval(n, h.budget).is_some_and(|v| structure.contains(v))))
        .collect();
    stability(&samples, h.window(samples.len()))
}

/// `φ =_C ψ` at horizon: pointwise halting equality on the C-prefix.
pub fn eq_c(
    phi: &PowerElement,
    psi: &PowerElement,
    c: &CohesiveOracle,
    h: &HorizonConfig,
) -> Verdict {
    let pts = probes(c, h);
    let samples: Vec<(u64, bool)> = pts
        .iter()
        .map(|&n| {
            let a = phi.eval(n, h.budget);
            let b = psi.eval(n, h.budget);
            (n, a.is_some() && a == b)
        })
        .collect();
    stability(&samples, h.window(samples.len()))
}

/// `[φ] ≺ [ψ]` at horizon through the supplied order presentation.
pub fn less_c(
    phi: &PowerElement,
    psi: &PowerElement,
    order: &dyn OrderView,
    c: &CohesiveOracle,
    h: &HorizonConfig,
) -> OpReport {
    let pts = probes(c, h);
    let mut samples = Vec::with_capacity(pts.len());
    for n in pts {
        let probe = match (phi.eval(n, h.budget), psi.eval(n, h.budget)) {
            (Some(a), Some(b)) => match order.cmp_elems(a, b) {
                Some(ord) => ord == Ordering::Less,
                None => {
                    return OpReport::undefined(format!(
                        "comparator undefined at n={n}: {a} vs {b} not both in {}",
                        order.name()
                    ))
                }
            },
            _ => false,
        };
        samples.push((n, probe));
    }
    OpReport::plain(stability(&samples, h.window(samples.len())))
}

/// Segment maxima/minima against the pinned schedule `threshold_j = j`.
fn segments(values: &[u64], window: usize) -> Vec<&[u64]> {
    if values.is_empty() {
        return Vec::new();
    }
    values.chunks(window.max(1)).collect()
}

/// Non-standardness judgment: `liminf φ(n) over the C-prefix = ∞` at
/// horizon. StableTrue means non-standard (every window segment's
/// minimum clears the growing schedule), StableFalse means standard
/// (the tail sticks to one recurring value).
pub fn is_standard(
    phi: &PowerElement,
    c: &CohesiveOracle,
    h: &HorizonConfig,
) -> OpReport {
    let pts = probes(c, h);
    let mut values = Vec::with_capacity(pts.len());
    for &n in &pts {
        match phi.eval(n, h.budget) {
            Some(v) => values.push(v),
            None => {
                return OpReport::undefined(format!("φ diverged at probe n={n} within budget"))
            }
        }
    }
    if values.is_empty() {
        return OpReport::plain(Verdict::Unstable);
    }
    let window = h.window(values.len());
    // standard: constant on the window
    let last = *values.last().expect("nonempty");
    let mut since_idx = values.len() - 1;
    while since_idx > 0 && values[since_idx - 1] == last {
        since_idx -= 1;
    }
    if values.len() - since_idx >= window {
        return OpReport::plain(Verdict::StableFalse { since: pts[since_idx] });
    }
    // non-standard: segment minima clear the schedule
    let grows = segments(&values, window)
        .iter()
        .enumerate()
        .all(|(j, seg)| seg.iter().copied().min().unwrap_or(0) >= j as u64);
    if grows {
        OpReport::plain(Verdict::StableTrue { since: pts[0] })
    } else {
        OpReport::plain(Verdict::Unstable)
    }
}

/// `[φ]` is the immediate successor of `[ψ]` at horizon: on every
/// window probe, `φ(n)` directly follows `ψ(n)` with no element found
/// strictly between within the budget.
pub fn is_immediate_successor(
    psi: &PowerElement,
    phi: &PowerElement,
    order: &dyn OrderView,
    c: &CohesiveOracle,
    h: &HorizonConfig,
) -> OpReport {
    let pts = probes(c, h);
    let mut samples = Vec::with_capacity(pts.len());
    for n in pts {
        let probe = match (psi.eval(n, h.budget), phi.eval(n, h.budget)) {
            (Some(a), Some(b)) => {
                if !order.contains(a) || !order.contains(b) {
                    return OpReport::undefined(format!(
                        "values at n={n} missing from {}",
                        order.name()
                    ));
                }
                order.cmp_elems(a, b) == Some(Ordering::Less)
                    && order.exists_between(a, b, h.budget) == Some(false)
            }
            _ => false,
        };
        samples.push((n, probe));
    }
    OpReport::plain(stability(&samples, h.window(samples.len())))
}

/// `limsup |(ψ(n), φ(n))| over the C-prefix = ∞` at horizon: StableTrue
/// when segment maxima clear the schedule, StableFalse when the window
/// never exceeds the first segment's bound.
pub fn infinite_gap(
    psi: &PowerElement,
    phi: &PowerElement,
    order: &dyn OrderView,
    c: &CohesiveOracle,
    h: &HorizonConfig,
) -> OpReport {
    let pts = probes(c, h);
    let mut sizes = Vec::with_capacity(pts.len());
    for &n in &pts {
        match (psi.eval(n, h.budget), phi.eval(n, h.budget)) {
            (Some(a), Some(b)) => match order.interval_size(a, b) {
                Some(len) => sizes.push(len),
                None => {
                    return OpReport::undefined(format!(
                        "interval undefined at n={n} in {}",
                        order.name()
                    ))
                }
            },
            _ => return OpReport::undefined(format!("endpoint diverged at probe n={n}")),
        }
    }
    if sizes.is_empty() {
        return OpReport::plain(Verdict::Unstable);
    }
    let window = h.window(sizes.len());
    let window_start = sizes.len() - window;
    let first_seg_max = sizes[..window.min(sizes.len())].iter().copied().max().unwrap_or(0);
    let window_max = sizes[window_start..].iter().copied().max().unwrap_or(0);
    if window_max <= first_seg_max && sizes.len() > window {
        return OpReport::plain(Verdict::StableFalse { since: pts[window_start] });
    }
    let grows = segments(&sizes, window)
        .iter()
        .enumerate()
        .all(|(j, seg)| seg.iter().copied().max().unwrap_or(0) >= j as u64);
    if grows {
        OpReport::plain(Verdict::StableTrue { since: pts[0] })
    } else {
        OpReport::plain(Verdict::Unstable)
    }
}

/// Enumerated Σ₁ witness sets `U_{k,s}`: finite lists of
/// (witness tuple, n) pairs, monotone in `s`. Anti-monotonicity in `k`
/// is the caller's arrangement unless `enforce_antimonotone` is set on
/// the runner.
pub trait UFamily {
    fn enumerate(&self, k: u64, s: u64) -> Vec<(Vec<u64>, u64)>;
    fn describe(&self) -> String;
}

/// Scripted family from a closure.
pub struct FnUFamily<F: Fn(u64, u64) -> Vec<(Vec<u64>, u64)>> {
    pub f: F,
    pub label: String,
}

impl<F: Fn(u64, u64) -> Vec<(Vec<u64>, u64)>> UFamily for FnUFamily<F> {
    fn enumerate(&self, k: u64, s: u64) -> Vec<(Vec<u64>, u64)> {
        (self.f)(k, s)
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringStage {
    pub stage: u64,
    pub k0: u64,
    pub k1: Option<u64>,
    pub extended: Option<(u64, Vec<u64>, u64)>,
}

#[derive(Debug, Clone, Default)]
pub struct CoveringTrace {
    pub stages: Vec<CoveringStage>,
}

/// The Σ₁-type realization construction: builds a partial map θ one
/// extension per stage, driven by the covering counters k⁰ and k¹.
pub fn realize_sigma1_type(
    u: &dyn UFamily,
    f: impl Fn(u64, u64) -> bool,
    stages: u64,
    enforce_antimonotone: bool,
) -> (BTreeMap<u64, Vec<u64>>, CoveringTrace) {
    let mut theta: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    let mut trace = CoveringTrace::default();

    let members = |k: u64, s: u64| -> Vec<(Vec<u64>, u64)> {
        if !enforce_antimonotone {
            return u.enumerate(k, s);
        }
        // U'_{k,s} = ∩_{j<=k} U_{j,s}
        let mut base = u.enumerate(k, s);
        for j in 0..k {
            let filter: std::collections::HashSet<(Vec<u64>, u64)> =
                u.enumerate(j, s).into_iter().collect();
            base.retain(|p| filter.contains(p));
        }
        base
    };

    // n covers k at stage s (relative to the given θ).
    let covers = |theta: &BTreeMap<u64, Vec<u64>>, n: u64, k: u64, s: u64| -> bool {
        if n <= k || !f(n, s) {
            return false;
        }
        let Some(tuple) = theta.get(&n) else { return false };
        members(k, s).iter().any(|(a, m)| *m == n && a == tuple)
    };
    let covered = |theta: &BTreeMap<u64, Vec<u64>>, k: u64, s: u64| -> bool {
        theta.keys().any(|&n| covers(theta, n, k, s))
    };

    let mut prev_theta = theta.clone();
    for s in 0..stages {
        let mut k0 = 0u64;
        while covered(&theta, k0, s) {
            k0 += 1;
        }
        let mut k1: Option<u64> = None;
        if s > 0 {
            // least k where some n with f(n,s)=0 covered k at stage s-1
            // and no n̂ <= n covers k now
            let candidates: Vec<u64> = {
                let mut ks: Vec<u64> = Vec::new();
                for &n in prev_theta.keys() {
                    if f(n, s) {
                        continue;
                    }
                    // coverage requires k < n, which bounds the scan
                    for k in 0..n {
                        if covers(&prev_theta, n, k, s - 1)
                            && !theta.keys().any(|&nh| nh <= n && covers(&theta, nh, k, s))
                        {
                            ks.push(k);
                        }
                    }
                }
                ks
            };
            k1 = candidates.into_iter().min();
        }
        let ks = match k1 {
            Some(k1v) => k0.min(k1v),
            None => k0,
        };

        prev_theta = theta.clone();
        let mut extended = None;
        'search: for n in 0..s {
            if n <= ks || !f(n, s) || theta.contains_key(&n) {
                continue;
            }
            for (a, m) in members(ks, s) {
                if m == n {
                    theta.insert(n, a.clone());
                    extended = Some((n, a, ks));
                    break 'search;
                }
            }
        }
        trace.stages.push(CoveringStage { stage: s, k0, k1, extended });
    }
    (theta, trace)
}

/// Re-derive whether `k` is covered by some member of `c` at the end of
/// a covering run.
pub fn covered_by_oracle_member(
    theta: &BTreeMap<u64, Vec<u64>>,
    u: &dyn UFamily,
    f: impl Fn(u64, u64) -> bool,
    c: &CohesiveOracle,
    k: u64,
    s: u64,
) -> bool {
    theta.iter().any(|(&n, tuple)| {
        n > k && c.contains(n) && f(n, s) && u.enumerate(k, s).iter().any(|(a, m)| *m == n && a == tuple)
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorOutcome {
    pub color: u64,
    /// Least probe from which every later probe has a witness.
    pub threshold: Option<u64>,
    /// First in-window probe without a witness, if any.
    pub first_window_failure: Option<u64>,
    /// Probes with a strict ψ(n) ≺ φ(n) comparison.
    pub checked: usize,
}

#[derive(Debug, Clone)]
pub struct ColorfulReport {
    pub outcomes: Vec<ColorOutcome>,
}

impl ColorfulReport {
    pub fn all_succeed(&self) -> bool {
        self.outcomes.iter().all(|o| o.first_window_failure.is_none())
    }
}

/// The headline probe: between two non-standard elements, every solid
/// color (up to the cap) appears. For each color, runs the midpoint
/// search on every C-window probe and reports the success threshold.
pub fn check_colorful(
    snapshot: &ColoredSnapshot,
    c: &CohesiveOracle,
    psi: &PowerElement,
    phi: &PowerElement,
    h: &HorizonConfig,
    color_cap: u64,
) -> Result<ColorfulReport, PowerError> {
    let order = less_c(psi, phi, snapshot, c, h);
    if !order.verdict.is_stable_true() {
        return Err(PowerError::Precondition {
            what: format!("less_c({}, {})", psi.label, phi.label),
            verdict: order.verdict,
        });
    }
    for (name, el) in [("psi", psi), ("phi", phi)] {
        let std_report = is_standard(el, c, h);
        if !std_report.verdict.is_stable_true() {
            return Err(PowerError::Precondition {
                what: format!("is_standard({name}) expected non-standard"),
                verdict: std_report.verdict,
            });
        }
    }

    let pts = probes(c, h);
    if pts.is_empty() {
        return Err(PowerError::EmptyProbeSet);
    }
    let window = h.window(pts.len());
    let window_start = pts.len() - window;
    let mut outcomes = Vec::new();
    for color in 0..=color_cap {
        let mut successes: Vec<(u64, bool)> = Vec::new();
        for &n in &pts {
            let (Some(a), Some(b)) = (psi.eval(n, h.budget), phi.eval(n, h.budget)) else {
                continue;
            };
            if snapshot.precedes(a, b) != Some(true) {
                continue;
            }
            // first k in natural order with a ≺ k ≺ b and F(k) = color
            let (ra, rb) = (snapshot.rank(a).unwrap(), snapshot.rank(b).unwrap());
            let found = snapshot.elements_in_order()[ra + 1..rb]
                .iter()
                .filter(|&&k| snapshot.color(k) == Some(color))
                .min()
                .is_some();
            successes.push((n, found));
        }
        // start of the maximal all-success suffix
        let threshold = successes.iter().rev().take_while(|&&(_, ok)| ok).last().map(|&(n, _)| n);
        let first_window_failure = successes
            .iter()
            .enumerate()
            .filter(|&(i, &(_, ok))| i >= window_start.min(successes.len()) && !ok)
            .map(|(_, &(n, _))| n)
            .next();
        outcomes.push(ColorOutcome {
            color,
            threshold,
            first_window_failure,
            checked: successes.len(),
        });
    }
    Ok(ColorfulReport { outcomes })
}
