//! Stage simulator for the colored copy of ω whose cohesive powers are
//! colorful: quadruples ⟨ℓ,r,e,N⟩ watch pairs of partial functions
//! through the approximation family and, when an interval misses a
//! color, fill it with fresh elements chosen from the staggered
//! partitions' opposite sides.
//!
//! Also the replace-by-color operator and the successor-pair set.

use crate::approx::{ApproxSource, PartitionFamily};
use crate::markers::{next_in_intersection, BitClassIter, Runs};
use crate::orders::{FiniteOrder, OrderView};
use crate::pcf::{pair2, unpair2, Evaluator};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::rc::Rc;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ColoredError {
    #[error("stage {stage}: fresh-element scan exceeded cap for R={r_set:?} (the intersection is infinite; the horizon asked for elements beyond u64)")]
    ScanCap { stage: u64, r_set: Vec<u64> },
    #[error("replace_by_color: block size for color {color} is {reason}")]
    BadBlockSize { color: u64, reason: String },
}

/// Step-bounded access to the functions `φ_ℓ`, injectable so scripted
/// scenarios can place total tables at small indices.
pub trait PhiSource {
    /// Value of `φ_{index,budget}(input)` if it halts within the budget.
    fn eval(&self, index: u64, input: u64, budget: u64) -> Option<u64>;
    fn describe(&self) -> String;
}

/// The production source: the program enumeration itself.
pub struct PcfPhi {
    pub ev: Rc<Evaluator>,
}

impl PhiSource for PcfPhi {
    fn eval(&self, index: u64, input: u64, budget: u64) -> Option<u64> {
        self.ev.halts_within(index, input, budget).map(|(_, v)| v)
    }

    fn describe(&self) -> String {
        "pcf".into()
    }
}

/// Scripted tables: index ↦ (input ↦ (value, steps-needed)); everything
/// else diverges.
#[derive(Clone, Default)]
pub struct InjectedPhi {
    tables: BTreeMap<u64, Rc<dyn Fn(u64) -> Option<(u64, u64)>>>,
    label: String,
}

impl InjectedPhi {
    pub fn new(label: impl Into<String>) -> Self {
        InjectedPhi { tables: BTreeMap::new(), label: label.into() }
    }

    pub fn with_table(mut self, index: u64, f: impl Fn(u64) -> Option<(u64, u64)> + 'static) -> Self {
        self.tables.insert(index, Rc::new(f));
        self
    }
}

impl PhiSource for InjectedPhi {
    fn eval(&self, index: u64, input: u64, budget: u64) -> Option<u64> {
        let f = self.tables.get(&index)?;
        let (value, steps) = f(input)?;
        (steps <= budget).then_some(value)
    }

    fn describe(&self) -> String {
        format!("injected:{}", self.label)
    }
}

pub struct ColoredEnv<'a> {
    pub g: &'a dyn ApproxSource,
    pub partitions: &'a dyn PartitionFamily,
    pub phi: &'a dyn PhiSource,
    pub scan_cap: u64,
}

impl<'a> ColoredEnv<'a> {
    pub fn new(
        g: &'a dyn ApproxSource,
        partitions: &'a dyn PartitionFamily,
        phi: &'a dyn PhiSource,
    ) -> Self {
        ColoredEnv { g, partitions, phi, scan_cap: u64::MAX }
    }
}

/// The finite colored linear order after a stage: domain, order ranks,
/// and the coloring. Ranks are exact; `{0..stage} ⊆ domain` always.
#[derive(Debug, Clone)]
pub struct ColoredSnapshot {
    pub stage: u64,
    order: Vec<u64>,
    pos: HashMap<u64, usize>,
    colors: HashMap<u64, u64>,
    /// prefix_max[z] = greatest rank among the elements 0..=z.
    prefix_max: Vec<usize>,
}

impl ColoredSnapshot {
    fn initial() -> Self {
        ColoredSnapshot {
            stage: 0,
            order: vec![0],
            pos: HashMap::from([(0, 0)]),
            colors: HashMap::from([(0, 0)]),
            prefix_max: vec![0],
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: u64) -> bool {
        self.pos.contains_key(&x)
    }

    /// Elements in ≺-order.
    pub fn elements_in_order(&self) -> &[u64] {
        &self.order
    }

    pub fn rank(&self, x: u64) -> Option<usize> {
        self.pos.get(&x).copied()
    }

    pub fn color(&self, x: u64) -> Option<u64> {
        self.colors.get(&x).copied()
    }

    pub fn precedes(&self, x: u64, y: u64) -> Option<bool> {
        Some(self.rank(x)? < self.rank(y)?)
    }

    /// Ranks at or after `from` shifted; earlier ranks are unchanged.
    fn reindex_from(&mut self, from: usize) {
        for i in from..self.order.len() {
            self.pos.insert(self.order[i], i);
        }
        let mut best = 0usize;
        self.prefix_max.clear();
        for z in 0..=self.stage {
            best = best.max(self.pos[&z]);
            self.prefix_max.push(best);
        }
    }

    fn append_max(&mut self, x: u64) {
        self.pos.insert(x, self.order.len());
        self.order.push(x);
        self.colors.entry(x).or_insert(0);
    }
}

/// Per-quadruple bookkeeping plus the evolving snapshot.
#[derive(Debug, Clone)]
pub struct ColoredState {
    pub snapshot: ColoredSnapshot,
    counters: BTreeMap<u64, u64>,
    last_active: BTreeMap<u64, ((u8, u8), u64)>,
    records: BTreeMap<u64, QuadRecord>,
    used_inputs: BTreeMap<u64, BTreeSet<u64>>,
    filled: HashSet<(u64, u64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadRecord {
    pub witness: u64,
    pub stage: u64,
    pub sides: (u8, u8),
}

impl ColoredState {
    pub fn initial() -> Self {
        ColoredState {
            snapshot: ColoredSnapshot::initial(),
            counters: BTreeMap::new(),
            last_active: BTreeMap::new(),
            records: BTreeMap::new(),
            used_inputs: BTreeMap::new(),
            filled: HashSet::new(),
        }
    }

    pub fn counter(&self, q: u64) -> u64 {
        self.counters.get(&q).copied().unwrap_or(0)
    }

    pub fn used(&self, q: u64) -> Option<&BTreeSet<u64>> {
        self.used_inputs.get(&q)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionEvent {
    pub stage: u64,
    pub q: u64,
    pub input: u64,
    pub left: u64,
    pub right: u64,
    pub c: u64,
    pub inserted: Vec<u64>,
    pub r_set: Vec<u64>,
    pub sides: Vec<(u64, (u8, u8))>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColoredEvent {
    CounterBump { q: u64, ct: u64 },
    Action(ActionEvent),
}

/// Quadruple decomposition: `q = ⟨x, N⟩` with `x = ⟨ℓ, r, e⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quadruple {
    pub q: u64,
    pub x: u64,
    pub ell: u64,
    pub r: u64,
    pub e: u64,
    pub n_floor: u64,
}

impl Quadruple {
    pub fn decode(q: u64) -> Self {
        let (x, n_floor) = unpair2(q);
        let (ell, rest) = unpair2(x);
        let (r, e) = unpair2(rest);
        Quadruple { q, x, ell, r, e, n_floor }
    }
}

fn side_of(partitions: &dyn PartitionFamily, i: u64, m: u64) -> u8 {
    if partitions.member(i, 1, m) {
        1
    } else {
        0
    }
}

/// Per-position status for a triple x at a stage: both functions halted
/// and landed on these partition sides.
fn position_status(env: &ColoredEnv, quad: &Quadruple, m: u64, s: u64) -> Option<(u8, u8)> {
    let lv = env.phi.eval(quad.ell, m, s)?;
    let rv = env.phi.eval(quad.r, m, s)?;
    Some((
        side_of(env.partitions, 2 * quad.x, lv),
        side_of(env.partitions, 2 * quad.x + 1, rv),
    ))
}

/// Activity of quadruple `q` at stage `s`: the unique side pair shown by
/// every in-window 1-position once both functions halt, with the largest
/// admissible witness.
pub fn quadruple_activity(q: u64, s: u64, env: &ColoredEnv) -> Option<((u8, u8), u64)> {
    let quad = Quadruple::decode(q);
    if !env.g.slice_maybe_live(quad.e) {
        return None;
    }
    let ones = env.g.ones(quad.e, s, s);
    activity_scan(env, &quad, &ones, s)
}

fn activity_scan(
    env: &ColoredEnv,
    quad: &Quadruple,
    ones: &[u64],
    s: u64,
) -> Option<((u8, u8), u64)> {
    let runs = Runs::build(ones.to_vec(), |m| position_status(env, quad, m, s));
    runs.activity(quad.n_floor)
}

struct ActiveQuad {
    quad: Quadruple,
    sides: (u8, u8),
    witness: u64,
}

/// One construction stage. Requires `state.snapshot.stage == s - 1`.
pub fn colored_step(
    state: &mut ColoredState,
    s: u64,
    env: &ColoredEnv,
) -> Result<Vec<ColoredEvent>, ColoredError> {
    assert!(s >= 1 && state.snapshot.stage == s - 1, "stages must advance by one");
    let mut events = Vec::new();
    state.snapshot.stage = s;
    if !state.snapshot.contains(s) {
        state.snapshot.append_max(s);
    }
    let rank_s = state.snapshot.pos[&s];
    let prev = *state.snapshot.prefix_max.last().expect("nonempty");
    state.snapshot.prefix_max.push(prev.max(rank_s));

    // Activity of every quadruple q < s, sharing slice and φ lookups per
    // initial triple.
    let mut actives: Vec<ActiveQuad> = Vec::new();
    let mut x = 0u64;
    while pair2(x, 0) < s {
        let quad0 = Quadruple::decode(pair2(x, 0));
        if env.g.slice_maybe_live(quad0.e) {
            let ones = env.g.ones(quad0.e, s, s);
            if !ones.is_empty() {
                let runs = Runs::build(ones, |m| position_status(env, &quad0, m, s));
                let mut n_floor = 0u64;
                while pair2(x, n_floor) < s {
                    let quad = Quadruple { q: pair2(x, n_floor), n_floor, ..quad0 };
                    if let Some((sides, witness)) = runs.activity(n_floor) {
                        actives.push(ActiveQuad { quad, sides, witness });
                    }
                    n_floor += 1;
                }
            }
        }
        x += 1;
    }
    actives.sort_by_key(|a| a.quad.q);

    for a in &actives {
        let q = a.quad.q;
        let bump = match state.last_active.get(&q) {
            None => true,
            Some(&(sides, _)) => sides != a.sides,
        };
        if bump {
            let ct = state.counters.entry(q).or_insert(0);
            *ct += 1;
            events.push(ColoredEvent::CounterBump { q, ct: *ct });
        }
        state.last_active.insert(q, (a.sides, s));
        let rec = state.records.entry(q).or_insert(QuadRecord {
            witness: a.witness,
            stage: s,
            sides: a.sides,
        });
        if a.witness >= rec.witness {
            *rec = QuadRecord { witness: a.witness, stage: s, sides: a.sides };
        }
    }

    // Demand-and-act pass, in quadruple order, against the growing L_s.
    // Quadruples sharing an initial triple see the same inputs, so the
    // condition-(1)-(2) candidates are computed once per triple and
    // recomputed after any action changes the order.
    let mut candidates: HashMap<u64, Rc<Vec<Candidate>>> = HashMap::new();
    for a in &actives {
        let cands = match candidates.get(&a.quad.x) {
            Some(c) => c.clone(),
            None => {
                let c = Rc::new(demand_candidates(state, env, &a.quad, s));
                candidates.insert(a.quad.x, c.clone());
                c
            }
        };
        if let Some(event) = try_action(state, env, a, s, &cands)? {
            events.push(ColoredEvent::Action(event));
            candidates.clear();
        }
    }
    Ok(events)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    n: u64,
    left: u64,
    right: u64,
    c: u64,
}

/// Inputs passing demand conditions (1)-(2) for a triple at this stage.
fn demand_candidates(
    state: &ColoredState,
    env: &ColoredEnv,
    quad: &Quadruple,
    s: u64,
) -> Vec<Candidate> {
    let ones = env.g.ones(quad.e, s, s);
    let mut out = Vec::new();
    for &n in &ones {
        let Some(lv) = env.phi.eval(quad.ell, n, s) else { continue };
        let Some(rv) = env.phi.eval(quad.r, n, s) else { continue };
        if !state.snapshot.contains(lv) || !state.snapshot.contains(rv) {
            continue;
        }
        if state.snapshot.pos[&lv] >= state.snapshot.pos[&rv] {
            continue;
        }
        let c = lv.max(rv);
        if missing_color(state, lv, rv, c) {
            out.push(Candidate { n, left: lv, right: rv, c });
        }
    }
    out
}

/// An element is `⪯`-above all of `0..=p` iff its rank reaches the
/// prefix maximum.
fn clears_protected_prefix(snapshot: &ColoredSnapshot, elem: u64, p: u64) -> bool {
    let rank = snapshot.pos[&elem];
    rank >= snapshot.prefix_max[p as usize]
}

fn try_action(
    state: &mut ColoredState,
    env: &ColoredEnv,
    a: &ActiveQuad,
    s: u64,
    candidates: &[Candidate],
) -> Result<Option<ActionEvent>, ColoredError> {
    let quad = &a.quad;
    let used = state.used_inputs.get(&quad.q);
    let mut chosen: Option<&Candidate> = None;
    for cand in candidates {
        if cand.n < quad.n_floor || cand.n > a.witness {
            continue;
        }
        if used.is_some_and(|u| u.contains(&cand.n)) {
            continue;
        }
        let protect = quad.q.max(state.counter(quad.q));
        if !clears_protected_prefix(&state.snapshot, cand.left, protect) {
            continue;
        }
        chosen = Some(cand);
        break;
    }
    let Some(&Candidate { n, left, right, c }) = chosen else {
        return Ok(None);
    };

    // Higher-or-equal priority quadruples currently permitted to add
    // elements immediately above `left`, and their initial triples.
    let mut r_set: Vec<u64> = Vec::new();
    let mut s_members: Vec<u64> = Vec::new();
    for p in 0..=quad.q {
        let protect = p.max(state.counter(p));
        if clears_protected_prefix(&state.snapshot, left, protect) {
            s_members.push(p);
            let y = unpair2(p).0;
            if !r_set.contains(&y) {
                r_set.push(y);
            }
        }
    }
    r_set.sort_unstable();

    let mut sides: Vec<(u64, (u8, u8))> = Vec::new();
    for &y in &r_set {
        sides.push((y, recorded_sides(state, y, &s_members)));
    }
    let mut constraints: Vec<(u64, u8)> = Vec::new();
    for &(y, (ay, by)) in &sides {
        constraints.push((2 * y, 1 - ay));
        constraints.push((2 * y + 1, 1 - by));
    }

    let mut inserted = Vec::with_capacity(c as usize + 1);
    if env.partitions.name() == "bits" {
        if let Some(iter) = BitClassIter::new(&constraints, 0) {
            for k in iter.take_while(|&k| k < env.scan_cap) {
                if !state.snapshot.contains(k) {
                    inserted.push(k);
                    if inserted.len() == c as usize + 1 {
                        break;
                    }
                }
            }
        }
    } else {
        let mut from = 0u64;
        while inserted.len() < c as usize + 1 {
            let Some(k) = next_in_intersection(env.partitions, &constraints, from, env.scan_cap)
            else {
                break;
            };
            if !state.snapshot.contains(k) {
                inserted.push(k);
            }
            let Some(next) = k.checked_add(1) else { break };
            from = next;
        }
    }
    if inserted.len() < c as usize + 1 {
        return Err(ColoredError::ScanCap { stage: s, r_set });
    }

    // Place immediately below the right endpoint: after the current
    // ≺-greatest element of the open interval (or after `left`).
    let insert_at = state.snapshot.pos[&right];
    let splice: Vec<u64> = inserted.clone();
    state.snapshot.order.splice(insert_at..insert_at, splice);
    for (i, &k) in inserted.iter().enumerate() {
        let clash = state.snapshot.colors.insert(k, i as u64);
        debug_assert!(clash.is_none(), "colors are assigned exactly once");
    }
    state.snapshot.reindex_from(insert_at);
    state.used_inputs.entry(quad.q).or_default().insert(n);
    state.filled.insert((left, right));

    Ok(Some(ActionEvent {
        stage: s,
        q: quad.q,
        input: n,
        left,
        right,
        c,
        inserted,
        r_set,
        sides,
    }))
}

/// Does the open interval (left, right) miss some color `d <= c`?
fn missing_color(state: &ColoredState, left: u64, right: u64, c: u64) -> bool {
    if state.filled.contains(&(left, right)) {
        return false;
    }
    let lo = state.snapshot.pos[&left] + 1;
    let hi = state.snapshot.pos[&right];
    let len = hi - lo;
    if (len as u64) < c + 1 {
        return true;
    }
    let mut seen: HashSet<u64> = HashSet::new();
    for &k in &state.snapshot.order[lo..hi] {
        let d = state.snapshot.colors[&k];
        if d <= c {
            seen.insert(d);
        }
    }
    (seen.len() as u64) < c + 1
}

/// Sides `(a_y, b_y)` for triple `y` from the quadruples `⟨y,M⟩` in the
/// permitted set: greatest witness, most recent stage, least `M`;
/// `(0,0)` if none was ever active.
fn recorded_sides(state: &ColoredState, y: u64, s_members: &[u64]) -> (u8, u8) {
    let mut best: Option<QuadRecord> = None;
    let mut m = 0u64;
    loop {
        let p = pair2(y, m);
        if p > *s_members.last().expect("s_members nonempty") {
            break;
        }
        if s_members.binary_search(&p).is_ok() {
            if let Some(rec) = state.records.get(&p) {
                let better = match &best {
                    None => true,
                    Some(b) => {
                        rec.witness > b.witness
                            || (rec.witness == b.witness && rec.stage > b.stage)
                    }
                };
                if better {
                    best = Some(*rec);
                }
            }
        }
        m += 1;
    }
    best.map(|r| r.sides).unwrap_or((0, 0))
}

/// Fold [`colored_step`] from stage 0 through `s_max`.
pub fn run_colored(
    s_max: u64,
    env: &ColoredEnv,
) -> Result<(ColoredState, Vec<ColoredEvent>), ColoredError> {
    let mut state = ColoredState::initial();
    let mut log = Vec::new();
    for s in 1..=s_max {
        log.extend(colored_step(&mut state, s, env)?);
    }
    Ok((state, log))
}

/// Replace every element by a block of fresh points sized by its color.
/// Returns the new order together with a provenance map (source
/// element, index within its block) per rank.
pub fn replace_by_color(
    snapshot: &ColoredSnapshot,
    beta: impl Fn(u64) -> Option<u64>,
) -> Result<(FiniteOrder, Vec<(u64, u64)>), ColoredError> {
    let mut labels = Vec::new();
    let mut provenance = Vec::new();
    for &x in snapshot.elements_in_order() {
        let color = snapshot.color(x).expect("colors are total on the domain");
        let size = beta(color).ok_or_else(|| ColoredError::BadBlockSize {
            color,
            reason: "undefined".into(),
        })?;
        if size == 0 {
            return Err(ColoredError::BadBlockSize { color, reason: "zero".into() });
        }
        for i in 0..size {
            provenance.push((x, i));
            labels.push(labels.len() as u64);
        }
    }
    Ok((FiniteOrder::from_labels(labels), provenance))
}

/// All pair codes `⟨m,n⟩ <= bound` where `n` is the immediate successor
/// of `m` as far as a middle-element search up to `budget` can tell: the
/// stage-`budget` approximation of a Π₁ set (pairs leave as middles
/// appear, never enter).
pub fn successor_pairs_set(view: &dyn OrderView, bound: u64, budget: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for code in 0..=bound {
        let (m, n) = unpair2(code);
        if !view.contains(m) || !view.contains(n) {
            continue;
        }
        if view.cmp_elems(m, n) != Some(Ordering::Less) {
            continue;
        }
        if view.exists_between(m, n, budget) == Some(false) {
            out.push(code);
        }
    }
    out
}

impl OrderView for ColoredSnapshot {
    fn contains(&self, x: u64) -> bool {
        ColoredSnapshot::contains(self, x)
    }

    fn cmp_elems(&self, x: u64, y: u64) -> Option<Ordering> {
        Some(self.rank(x)?.cmp(&self.rank(y)?))
    }

    fn interval_size(&self, x: u64, y: u64) -> Option<u64> {
        let px = self.rank(x)?;
        let py = self.rank(y)?;
        Some(if py > px { (py - px - 1) as u64 } else { 0 })
    }

    fn exists_between(&self, x: u64, y: u64, budget: u64) -> Option<bool> {
        let px = self.rank(x)?;
        let py = self.rank(y)?;
        if py <= px + 1 {
            return Some(false);
        }
        Some(self.order[px + 1..py].iter().any(|&k| k <= budget))
    }

    fn name(&self) -> String {
        format!("snapshot-stage-{}", self.stage)
    }
}

/// Snapshot structural invariants checked after runs and by the trace
/// verifier: ranks form a permutation, `{0..s}` is inside the domain,
/// and colors are total.
pub fn check_snapshot_invariants(snapshot: &ColoredSnapshot) -> Result<(), String> {
    let n = snapshot.order.len();
    let mut seen = HashSet::with_capacity(n);
    for &x in &snapshot.order {
        if !seen.insert(x) {
            return Err(format!("element {x} appears twice in the order"));
        }
        if snapshot.color(x).is_none() {
            return Err(format!("element {x} has no color"));
        }
        match snapshot.rank(x) {
            Some(rank) if snapshot.order[rank] == x => {}
            _ => return Err(format!("rank index inconsistent at {x}")),
        }
    }
    for z in 0..=snapshot.stage {
        if !snapshot.contains(z) {
            return Err(format!("stage element {z} missing from the domain"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::{BitPartitions, InjectedApprox};
    use crate::orders::StandardOmega;

    fn quiet_env<'a>(
        g: &'a InjectedApprox,
        parts: &'a BitPartitions,
        phi: &'a InjectedPhi,
    ) -> ColoredEnv<'a> {
        ColoredEnv::new(g, parts, phi)
    }

    #[test]
    fn stage_zero_is_single_zero() {
        let st = ColoredState::initial();
        assert_eq!(st.snapshot.elements_in_order(), &[0]);
        assert_eq!(st.snapshot.color(0), Some(0));
    }

    #[test]
    fn quiet_run_is_a_plain_chain() {
        let g = InjectedApprox::zero();
        let parts = BitPartitions;
        let phi = InjectedPhi::new("empty");
        let env = quiet_env(&g, &parts, &phi);
        let (st, log) = run_colored(5, &env).unwrap();
        assert!(log.is_empty());
        assert_eq!(st.snapshot.elements_in_order(), &[0, 1, 2, 3, 4, 5]);
        assert!(st.snapshot.elements_in_order().iter().all(|&x| st.snapshot.color(x) == Some(0)));
        check_snapshot_invariants(&st.snapshot).unwrap();
    }

    #[test]
    fn quadruple_activity_cases() {
        let parts = BitPartitions;
        // x = 2 codes (ℓ, r, e) = (0, 1, 0)
        let x = pair2(0, pair2(1, 0));
        assert_eq!(x, 2);
        let q = pair2(x, 0);
        let g = InjectedApprox::new("one-at-2").with_slice(0, |n, _| n == 2);
        let phi = InjectedPhi::new("tables")
            .with_table(0, |n| (n == 2).then_some((5, 1)))
            .with_table(1, |n| (n == 2).then_some((7, 1)));
        let env = quiet_env(&g, &parts, &phi);
        // no room for a witness
        assert_eq!(quadruple_activity(q, 1, &env), None);
        // zero slice elsewhere
        assert_eq!(quadruple_activity(pair2(pair2(0, pair2(1, 3)), 0), 50, &env), None);
        // single qualifying position: sides from bits 4,5 of values 5,7
        assert_eq!(quadruple_activity(q, 4, &env), Some(((0, 0), 2)));
    }

    /// Golden hand simulation: one action at stage 7 filling (5, 7) with
    /// colors 0..=7 drawn from the pattern forced by R = {0, 1, 2}.
    #[test]
    fn golden_single_action_run() {
        let g = InjectedApprox::new("one-at-2").with_slice(0, |n, _| n == 2);
        let parts = BitPartitions;
        let phi = InjectedPhi::new("tables")
            .with_table(0, |n| (n == 2).then_some((5, 1)))
            .with_table(1, |n| (n == 2).then_some((7, 1)));
        let env = quiet_env(&g, &parts, &phi);
        let (st, log) = run_colored(10, &env).unwrap();

        let bumps: Vec<(u64, u64)> = log
            .iter()
            .filter_map(|ev| match ev {
                ColoredEvent::CounterBump { q, ct } => Some((*q, *ct)),
                _ => None,
            })
            .collect();
        // q = 0,1,2 wake at stage 3; ⟨x,N⟩ = ⟨2,0⟩ at 4, ⟨1,1⟩ at 5, and
        // ⟨2,1⟩ at 8 once the pair scan reaches it. Sides never change.
        assert_eq!(bumps, vec![(0, 1), (1, 1), (2, 1), (3, 1), (4, 1), (7, 1)]);

        let actions: Vec<&ActionEvent> = log
            .iter()
            .filter_map(|ev| match ev {
                ColoredEvent::Action(a) => Some(a),
                _ => None,
            })
            .collect();
        assert_eq!(actions.len(), 1);
        let a = actions[0];
        assert_eq!(
            (a.stage, a.q, a.input, a.left, a.right, a.c),
            (7, 3, 2, 5, 7, 7)
        );
        assert_eq!(a.r_set, vec![0, 1, 2]);
        assert_eq!(a.sides, vec![(0, (1, 0)), (1, (1, 0)), (2, (0, 0))]);
        let expect_inserted: Vec<u64> = (0..8).map(|i| 58 + 64 * i).collect();
        assert_eq!(a.inserted, expect_inserted);

        let mut expect_order: Vec<u64> = vec![0, 1, 2, 3, 4, 5, 6];
        expect_order.extend(&expect_inserted);
        expect_order.extend([7, 8, 9, 10]);
        assert_eq!(st.snapshot.elements_in_order(), expect_order.as_slice());
        for (i, &k) in expect_inserted.iter().enumerate() {
            assert_eq!(st.snapshot.color(k), Some(i as u64));
        }
        check_snapshot_invariants(&st.snapshot).unwrap();
    }

    #[test]
    fn replace_by_color_cases() {
        let g = InjectedApprox::zero();
        let parts = BitPartitions;
        let phi = InjectedPhi::new("empty");
        let env = quiet_env(&g, &parts, &phi);
        let (st, _) = run_colored(1, &env).unwrap();
        // identity replacement
        let (ord, _) = replace_by_color(&st.snapshot, |_| Some(1)).unwrap();
        assert_eq!(ord.len(), 2);
        // 0 ≺ 1 with colors 0, 0 and β(0) = 2 gives 4 points
        let (ord2, prov2) = replace_by_color(&st.snapshot, |_| Some(2)).unwrap();
        assert_eq!(ord2.len(), 4);
        assert_eq!(prov2[0], (0, 0));
        assert_eq!(prov2[1], (0, 1));
        assert_eq!(prov2[2], (1, 0));
        // zero block size is an error
        assert!(replace_by_color(&st.snapshot, |_| Some(0)).is_err());
    }

    #[test]
    fn successor_pairs_on_standard_omega() {
        let view = StandardOmega;
        let bound = pair2(9, 10);
        let pairs = successor_pairs_set(&view, bound, 1 << 20);
        for m in 0..9u64 {
            assert!(pairs.contains(&pair2(m, m + 1)), "⟨{m},{}⟩ missing", m + 1);
        }
        for &code in &pairs {
            let (m, n) = unpair2(code);
            assert_eq!(n, m + 1);
        }
    }

    #[test]
    fn successor_pairs_budget_antimonotone() {
        let view = StandardOmega;
        let bound = pair2(20, 22);
        let mut prev: Option<Vec<u64>> = None;
        for budget in [0u64, 1, 2, 5, 50, 1000] {
            let pairs = successor_pairs_set(&view, bound, budget);
            if let Some(p) = prev {
                for &code in &pairs {
                    assert!(p.contains(&code), "budget growth added pair {code}");
                }
            }
            prev = Some(pairs);
        }
    }

    #[test]
    fn successor_pairs_on_snapshot_matches_adjacency_scan() {
        let g = InjectedApprox::new("one-at-2").with_slice(0, |n, _| n == 2);
        let parts = BitPartitions;
        let phi = InjectedPhi::new("tables")
            .with_table(0, |n| (n == 2).then_some((5, 1)))
            .with_table(1, |n| (n == 2).then_some((7, 1)));
        let env = quiet_env(&g, &parts, &phi);
        let (st, _) = run_colored(10, &env).unwrap();
        let bound = 4000;
        let pairs = successor_pairs_set(&st.snapshot, bound, u64::MAX);
        // brute-force adjacency oracle over the snapshot order
        let order = st.snapshot.elements_in_order();
        let mut expect = Vec::new();
        for w in order.windows(2) {
            let code = pair2(w[0], w[1]);
            if code <= bound {
                expect.push(code);
            }
        }
        expect.sort_unstable();
        assert_eq!(pairs, expect);
    }
}
