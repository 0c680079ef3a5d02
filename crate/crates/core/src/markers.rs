//! Stage simulator for the movable-markers construction of an infinite
//! Π₁ set with no Δ₂ cohesive subset for a staggered partition family.
//!
//! Marker positions are stored as an explicit prefix (`low`) plus a
//! closed-form tail: `m_i = tail_start + (i - low.len())` for
//! `i >= low.len()`. Only finitely many markers are ever displaced, so
//! the tail stays exact while moves splice the prefix.

use crate::approx::{ApproxSource, PartitionFamily};
use crate::pcf::{pair2, unpair2};
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MarkersError {
    #[error("stage {stage}: no marker target below scan cap {cap} for R={r_set:?} (the intersection is infinite; raise the cap or shrink the run)")]
    ScanCap { stage: u64, cap: u64, r_set: Vec<u64> },
    #[error("marker position arithmetic overflowed u64 at stage {stage}")]
    Overflow { stage: u64 },
}

/// Construction inputs: the approximation family, the partitions, and a
/// cap on how far the target scan may look.
pub struct MarkerEnv<'a> {
    pub g: &'a dyn ApproxSource,
    pub partitions: &'a dyn PartitionFamily,
    pub scan_cap: u64,
}

impl<'a> MarkerEnv<'a> {
    pub fn new(g: &'a dyn ApproxSource, partitions: &'a dyn PartitionFamily) -> Self {
        MarkerEnv { g, partitions, scan_cap: 1 << 32 }
    }
}

/// Best activity achievement of one pair: the greatest witness yet, the
/// most recent stage it was achieved, and the side shown there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WitnessRecord {
    pub witness: u64,
    pub stage: u64,
    pub side: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MarkerEvent {
    CounterBump { q: u64, ct: u64 },
    MarkerMove {
        i: u64,
        from: u64,
        to: u64,
        moved_by: u64,
        side: u8,
        witness: u64,
        r_set: Vec<u64>,
        sides: Vec<(u64, u8)>,
    },
    NoOp,
}

/// Full construction state after some stage.
#[derive(Debug, Clone)]
pub struct MarkerState {
    pub stage: u64,
    low: Vec<u64>,
    tail_start: u64,
    counters: BTreeMap<u64, u64>,
    last_active: BTreeMap<u64, (u8, u64)>,
    records: BTreeMap<u64, WitnessRecord>,
    unmarked_count: u64,
}

impl MarkerState {
    /// Stage-0 state: `m_{i,0} = i`, all counters zero.
    pub fn initial() -> Self {
        MarkerState {
            stage: 0,
            low: Vec::new(),
            tail_start: 0,
            counters: BTreeMap::new(),
            last_active: BTreeMap::new(),
            records: BTreeMap::new(),
            unmarked_count: 0,
        }
    }

    /// Position of marker `i` at the current stage.
    pub fn position(&self, i: u64) -> u64 {
        match self.low.get(i as usize) {
            Some(&p) => p,
            None => self.tail_start + (i - self.low.len() as u64),
        }
    }

    pub fn counter(&self, q: u64) -> u64 {
        self.counters.get(&q).copied().unwrap_or(0)
    }

    pub fn record(&self, q: u64) -> Option<WitnessRecord> {
        self.records.get(&q).copied()
    }

    /// All numbers below the closed-form frontier are marked except the
    /// finitely many dropped by moves.
    pub fn frontier(&self) -> u64 {
        self.tail_start
    }

    pub fn unmarked_count(&self) -> u64 {
        self.unmarked_count
    }

    pub fn is_marked(&self, x: u64) -> bool {
        if x >= self.tail_start {
            return true;
        }
        self.low.binary_search(&x).is_ok()
    }

    /// The stage approximation `B_s` of the Π₁ set restricted to
    /// `[0, bound]`.
    pub fn marked_up_to(&self, bound: u64) -> Vec<u64> {
        let mut out: Vec<u64> = self.low.iter().copied().take_while(|&p| p <= bound).collect();
        let mut x = self.tail_start;
        while x <= bound {
            out.push(x);
            x += 1;
        }
        out
    }

    fn materialize_to(&mut self, i: u64) {
        while (self.low.len() as u64) < i {
            self.low.push(self.tail_start);
            self.tail_start += 1;
        }
    }

    /// `m_{k} <- m_{k + (j-i)}` for all `k >= i`.
    fn shift(&mut self, i: u64, j: u64) {
        self.materialize_to(i);
        let l = self.low.len() as u64;
        if j < l {
            self.low.drain(i as usize..j as usize);
        } else {
            self.low.truncate(i as usize);
            self.tail_start += j - l;
        }
        self.unmarked_count += j - i;
    }
}

/// Constant-label runs over the 1-positions of a slice, answering every
/// window query of one stage in O(log): the activity of `⟨e,N⟩` is the
/// maximal same-label prefix of the 1-positions at or above `N`.
pub(crate) struct Runs<S> {
    pub ones: Vec<u64>,
    labels: Vec<Option<S>>,
    run_end: Vec<usize>,
}

impl<S: Copy + PartialEq> Runs<S> {
    pub fn build(ones: Vec<u64>, label_of: impl Fn(u64) -> Option<S>) -> Self {
        let labels: Vec<Option<S>> = ones.iter().map(|&m| label_of(m)).collect();
        let mut run_end = vec![0usize; ones.len()];
        for idx in (0..ones.len()).rev() {
            run_end[idx] = idx;
            if labels[idx].is_some() && idx + 1 < ones.len() && labels[idx + 1] == labels[idx] {
                run_end[idx] = run_end[idx + 1];
            }
        }
        Runs { ones, labels, run_end }
    }

    /// `(label, largest witness)` for the window starting at `n_floor`.
    pub fn activity(&self, n_floor: u64) -> Option<(S, u64)> {
        let idx = self.ones.partition_point(|&m| m < n_floor);
        if idx == self.ones.len() {
            return None;
        }
        let label = self.labels[idx]?;
        let witness = self.ones[self.run_end[idx]];
        (witness > n_floor).then_some((label, witness))
    }
}

/// Activity of pair `q = ⟨e,N⟩` at stage `s`: the unique side whose
/// members the in-window 1-positions of `g_e(·,s)` all share, with the
/// largest admissible witness.
pub(crate) fn activity_from_ones(
    ones: &[u64],
    side_of: impl Fn(u64) -> u8,
    n_floor: u64,
) -> Option<(u8, u64)> {
    Runs::build(ones.to_vec(), |m| Some(side_of(m))).activity(n_floor)
}

/// Activity of pair `q` at stage `s` against the injected family.
pub fn pair_activity(q: u64, s: u64, env: &MarkerEnv) -> Option<(u8, u64)> {
    let (e, n_floor) = unpair2(q);
    if !env.g.slice_maybe_live(e) {
        return None;
    }
    let ones = env.g.ones(e, s, s);
    activity_from_ones(&ones, |m| side_of(env.partitions, e, m), n_floor)
}

fn side_of(partitions: &dyn PartitionFamily, i: u64, m: u64) -> u8 {
    if partitions.member(i, 1, m) {
        1
    } else {
        0
    }
}

/// Least member of `∩ A^{i, side}` that is `>= from` and `< cap`, for
/// the bit family computed in closed form.
pub fn next_in_intersection(
    partitions: &dyn PartitionFamily,
    constraints: &[(u64, u8)],
    from: u64,
    cap: u64,
) -> Option<u64> {
    if partitions.name() == "bits" {
        return next_with_fixed_bits(constraints, from).filter(|&x| x < cap);
    }
    (from..cap).find(|&x| constraints.iter().all(|&(i, side)| partitions.member(i, side, x)))
}

/// Ascending members of the fixed-bit class cut out by `constraints`,
/// starting from the least member ≥ `from`. Empty when a bit at
/// position ≥ 64 is required.
pub struct BitClassIter {
    free: Vec<u64>,
    val: u64,
    next_k: Option<u64>,
}

impl BitClassIter {
    pub fn new(constraints: &[(u64, u8)], from: u64) -> Option<Self> {
        let mut mask: u64 = 0;
        let mut val: u64 = 0;
        for &(i, side) in constraints {
            if i >= 64 {
                if side == 1 {
                    return None; // no u64 has a set bit at position >= 64
                }
                continue;
            }
            mask |= 1 << i;
            if side == 1 {
                val |= 1 << i;
            }
        }
        let free: Vec<u64> = (0..64).filter(|b| mask & (1 << b) == 0).collect();
        let member = |k: u64| -> u64 {
            let mut x = val;
            for (pos, &b) in free.iter().enumerate() {
                if k & (1 << pos) != 0 {
                    x |= 1 << b;
                }
            }
            x
        };
        // members are strictly increasing in the free-bit counter k;
        // binary search the least k whose member reaches `from`.
        let max_k = if free.len() >= 64 { u64::MAX } else { (1u64 << free.len()) - 1 };
        if member(max_k) < from {
            return Some(BitClassIter { free, val, next_k: None });
        }
        let mut lo = 0u64;
        let mut hi = max_k;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if member(mid) >= from {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(BitClassIter { free, val, next_k: Some(lo) })
    }
}

impl Iterator for BitClassIter {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let k = self.next_k?;
        let mut x = self.val;
        for (pos, &b) in self.free.iter().enumerate() {
            if k & (1 << pos) != 0 {
                x |= 1 << b;
            }
        }
        let max_k = if self.free.len() >= 64 { u64::MAX } else { (1u64 << self.free.len()) - 1 };
        self.next_k = (k < max_k).then_some(k + 1);
        Some(x)
    }
}

fn next_with_fixed_bits(constraints: &[(u64, u8)], from: u64) -> Option<u64> {
    BitClassIter::new(constraints, from)?.next()
}

struct ActivePair {
    q: u64,
    e: u64,
    side: u8,
    witness: u64,
}

/// One construction stage: counter updates for every pair `q < s`, then
/// the least-marker move if some pair meets all four movement
/// conditions. Requires `state.stage == s - 1`.
pub fn marker_step(
    state: &mut MarkerState,
    s: u64,
    env: &MarkerEnv,
) -> Result<Vec<MarkerEvent>, MarkersError> {
    assert!(s >= 1 && state.stage == s - 1, "stages must advance by one");
    let mut events = Vec::new();

    // Activity of all pairs q < s, grouped per slice.
    let mut actives: Vec<ActivePair> = Vec::new();
    let mut e = 0u64;
    while pair2(e, 0) < s {
        if env.g.slice_maybe_live(e) {
            let ones = env.g.ones(e, s, s);
            if !ones.is_empty() {
                let runs = Runs::build(ones, |m| Some(side_of(env.partitions, e, m)));
                let mut n_floor = 0u64;
                while pair2(e, n_floor) < s {
                    if let Some((side, witness)) = runs.activity(n_floor) {
                        actives.push(ActivePair { q: pair2(e, n_floor), e, side, witness });
                    }
                    n_floor += 1;
                }
            }
        }
        e += 1;
    }
    actives.sort_by_key(|a| a.q);

    // Counters first, in pair order.
    for a in &actives {
        let bump = match state.last_active.get(&a.q) {
            None => true,
            Some(&(side, _)) => side != a.side,
        };
        if bump {
            let ct = state.counters.entry(a.q).or_insert(0);
            *ct += 1;
            events.push(MarkerEvent::CounterBump { q: a.q, ct: *ct });
        }
        state.last_active.insert(a.q, (a.side, s));
        let rec = state.records.entry(a.q).or_insert(WitnessRecord {
            witness: a.witness,
            stage: s,
            side: a.side,
        });
        if a.witness >= rec.witness {
            *rec = WitnessRecord { witness: a.witness, stage: s, side: a.side };
        }
    }

    // Movement scan: least i < s admitting a witnessing pair, then the
    // least such pair.
    let mut best: Option<(u64, &ActivePair)> = None;
    for a in &actives {
        let ct = state.counter(a.q);
        let i0 = a.q.max(ct) + 1;
        if let Some(i) = least_marker_on_side(state, env, a, i0, s) {
            let better = match best {
                None => true,
                Some((bi, bp)) => i < bi || (i == bi && a.q < bp.q),
            };
            if better {
                best = Some((i, a));
            }
        }
    }

    if let Some((i, winner)) = best {
        let from = state.position(i);
        // R and the recorded sides for the displacement target.
        let mut r_set: Vec<u64> = Vec::new();
        for p in 0..=winner.q {
            if state.counter(p) < i {
                let y = unpair2(p).0;
                if !r_set.contains(&y) {
                    r_set.push(y);
                }
            }
        }
        r_set.sort_unstable();
        let mut sides: Vec<(u64, u8)> = Vec::new();
        for &y in &r_set {
            sides.push((y, recorded_side(state, y, winner.q)));
        }
        let constraints: Vec<(u64, u8)> = sides.iter().map(|&(y, a)| (y, 1 - a)).collect();
        let j = find_target(state, env, &constraints, i, s)?;
        let to = state.position(j);
        state.shift(i, j);
        events.push(MarkerEvent::MarkerMove {
            i,
            from,
            to,
            moved_by: winner.q,
            side: winner.side,
            witness: winner.witness,
            r_set,
            sides,
        });
    }

    if events.is_empty() {
        events.push(MarkerEvent::NoOp);
    }
    state.stage = s;
    Ok(events)
}

/// Side `a_y` for triple `y`: taken from the pair `⟨y,M⟩ ≤ q` achieving
/// the greatest witness, most recent stage, least `M`; 0 if none was
/// ever active.
fn recorded_side(state: &MarkerState, y: u64, q: u64) -> u8 {
    let mut best: Option<(WitnessRecord, u64)> = None;
    let mut m = 0u64;
    loop {
        let p = pair2(y, m);
        if p > q {
            break;
        }
        if let Some(rec) = state.records.get(&p) {
            let better = match &best {
                None => true,
                Some((b, _)) => {
                    rec.witness > b.witness || (rec.witness == b.witness && rec.stage > b.stage)
                }
            };
            if better {
                best = Some((*rec, m));
            }
        }
        m += 1;
    }
    best.map(|(rec, _)| rec.side).unwrap_or(0)
}

/// Least `i >= i0`, `i < s`, with `m_i < witness` and `m_i ∈ A^{e,a}`.
fn least_marker_on_side(
    state: &MarkerState,
    env: &MarkerEnv,
    a: &ActivePair,
    i0: u64,
    s: u64,
) -> Option<u64> {
    let l = state.low.len() as u64;
    let mut i = i0;
    while i < l && i < s {
        let p = state.low[i as usize];
        if p >= a.witness {
            return None; // positions increase: nothing later fits either
        }
        if env.partitions.member(a.e, a.side, p) {
            return Some(i);
        }
        i += 1;
    }
    // tail: positions tail_start + (i - l)
    let i_t = i0.max(l);
    if i_t >= s {
        return None;
    }
    let from = state.position(i_t);
    let x = next_in_intersection(env.partitions, &[(a.e, a.side)], from, a.witness)?;
    let i = l + (x - state.tail_start);
    (i < s).then_some(i)
}

/// Least `j > i` with `m_j` in the recorded intersection.
fn find_target(
    state: &MarkerState,
    env: &MarkerEnv,
    constraints: &[(u64, u8)],
    i: u64,
    s: u64,
) -> Result<u64, MarkersError> {
    let l = state.low.len() as u64;
    let mut j = i + 1;
    while j < l {
        let p = state.low[j as usize];
        if constraints.iter().all(|&(y, side)| env.partitions.member(y, side, p)) {
            return Ok(j);
        }
        j += 1;
    }
    let from = state.tail_start.max(state.position(i).saturating_add(1));
    match next_in_intersection(env.partitions, constraints, from, env.scan_cap) {
        Some(x) => Ok(l + (x - state.tail_start)),
        None => Err(MarkersError::ScanCap {
            stage: s,
            cap: env.scan_cap,
            r_set: constraints.iter().map(|&(y, _)| y).collect(),
        }),
    }
}

/// Fold [`marker_step`] from the initial state through stage `s_max`.
/// Returns the final state and the event log (quiet stages omitted).
pub fn run_markers(
    s_max: u64,
    env: &MarkerEnv,
) -> Result<(MarkerState, Vec<(u64, MarkerEvent)>), MarkersError> {
    let mut state = MarkerState::initial();
    let mut log = Vec::new();
    for s in 1..=s_max {
        for ev in marker_step(&mut state, s, env)? {
            if !matches!(ev, MarkerEvent::NoOp) {
                log.push((s, ev));
            }
        }
    }
    Ok((state, log))
}
