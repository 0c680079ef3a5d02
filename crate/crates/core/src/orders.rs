//! Finite and symbolic linear-order algebra: sum, product, reverse,
//! generalized sum, shuffles through a dense rational coloring, and
//! finite condensation. Also the `OrderView` abstraction the power
//! module compares elements through.

use std::cmp::Ordering;
use std::collections::HashMap;

/// A finite linear order: `labels[rank]` is the element at that rank.
/// Labels are decoration; ranks carry the order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteOrder {
    pub labels: Vec<u64>,
}

impl FiniteOrder {
    pub fn chain(n: u64) -> Self {
        FiniteOrder { labels: (0..n).collect() }
    }

    pub fn from_labels(labels: Vec<u64>) -> Self {
        FiniteOrder { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Order-isomorphism at desk scale: equal size (ranks are identical
    /// by construction).
    pub fn iso(&self, other: &FiniteOrder) -> bool {
        self.len() == other.len()
    }
}

/// A finite order whose points remember where they came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenanced {
    pub order: FiniteOrder,
    /// Per rank: (index element label, summand element label).
    pub provenance: Vec<(u64, u64)>,
}

/// Order sum: all of `a`, then all of `b`.
pub fn sum(a: &FiniteOrder, b: &FiniteOrder) -> FiniteOrder {
    let mut labels = a.labels.clone();
    labels.extend_from_slice(&b.labels);
    FiniteOrder { labels }
}

/// Order product `a·b` under the convention that the right factor
/// indexes: `b` copies of `a`, ordered by (b-element, a-element).
pub fn product(a: &FiniteOrder, b: &FiniteOrder) -> FiniteOrder {
    generalized_sum(b, |_| a.clone()).order
}

pub fn reverse(a: &FiniteOrder) -> FiniteOrder {
    let mut labels = a.labels.clone();
    labels.reverse();
    FiniteOrder { labels }
}

/// Generalized sum of `family(ℓ)` over the index order: domain is the
/// pairs (ℓ, m), ordered by index first, then within the summand.
pub fn generalized_sum(index: &FiniteOrder, family: impl Fn(u64) -> FiniteOrder) -> Provenanced {
    let mut labels = Vec::new();
    let mut provenance = Vec::new();
    for &l in &index.labels {
        let summand = family(l);
        for &m in &summand.labels {
            provenance.push((l, m));
            labels.push(labels.len() as u64);
        }
    }
    Provenanced { order: FiniteOrder { labels }, provenance }
}

/// Reduced rational with positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    num: i64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let sign = if den < 0 { -1 } else { 1 };
        let num = num * sign;
        let den = den.unsigned_abs();
        let g = gcd(num.unsigned_abs(), den).max(1);
        Rational { num: num / g as i64, den: den / g }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
    }
}

impl std::fmt::Display for Rational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Color of a rational among `m` colors: numerator mod m, normalized
/// into 0..m. Every color class is dense in ℚ.
pub fn dense_coloring(m: u64, q: Rational) -> u64 {
    assert!(m >= 1, "need at least one color");
    q.num.rem_euclid(m as i64) as u64
}

/// The first `depth` positive rationals in Stern–Brocot level order:
/// 1/1; 1/2, 2/1; 1/3, 2/3, 3/2, 3/1; ... Pinned as the canonical
/// enumeration for reproducibility.
pub fn stern_brocot(depth: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(depth);
    // (left, mid, right) fraction triples by breadth-first descent
    let mut level: Vec<((u64, u64), (u64, u64))> = vec![((0, 1), (1, 0))];
    while out.len() < depth {
        let mut next = Vec::with_capacity(level.len() * 2);
        for (l, r) in level {
            let mid = (l.0 + r.0, l.1 + r.1);
            out.push(Rational::new(mid.0 as i64, mid.1 as i64));
            if out.len() == depth {
                return out;
            }
            next.push((l, mid));
            next.push((mid, r));
        }
        level = next;
    }
    out
}

/// A finite window of the shuffle σ(sizes): the first `depth` canonical
/// rationals in ℚ-order, each replaced by a chain whose length is chosen
/// by the dense coloring.
#[derive(Debug, Clone)]
pub struct ShuffleSample {
    pub order: FiniteOrder,
    /// Per block in ℚ-order: the rational and the block size.
    pub blocks: Vec<(Rational, u64)>,
}

pub fn shuffle_sample(sizes: &[u64], depth: usize) -> ShuffleSample {
    assert!(!sizes.is_empty(), "shuffle needs a non-empty size list");
    assert!(sizes.iter().all(|&s| s > 0), "order types in a shuffle are non-empty");
    let mut rats = stern_brocot(depth);
    rats.sort();
    let mut labels = Vec::new();
    let mut blocks = Vec::new();
    for q in rats {
        let size = sizes[dense_coloring(sizes.len() as u64, q) as usize];
        blocks.push((q, size));
        for _ in 0..size {
            labels.push(labels.len() as u64);
        }
    }
    ShuffleSample { order: FiniteOrder { labels }, blocks }
}

/// Block rule for condensation.
pub enum Condensation<'a> {
    /// The literal finiteness criterion: on a finite order every
    /// interval is finite, so everything collapses to one block.
    Literal,
    /// Blocks are the classes of the transitive closure of an adjacency
    /// predicate on consecutive elements.
    Adjacent(&'a dyn Fn(u64, u64) -> bool),
}

/// Condense a finite order into blocks (returned as rank ranges, which
/// are always intervals).
pub fn finite_condensation(a: &FiniteOrder, rule: Condensation) -> Vec<std::ops::Range<usize>> {
    if a.is_empty() {
        return Vec::new();
    }
    match rule {
        Condensation::Literal => vec![0..a.len()],
        Condensation::Adjacent(adj) => {
            let mut blocks = Vec::new();
            let mut start = 0usize;
            for i in 1..a.len() {
                if !adj(a.labels[i - 1], a.labels[i]) {
                    blocks.push(start..i);
                    start = i;
                }
            }
            blocks.push(start..a.len());
            blocks
        }
    }
}

/// A decidable order presentation the power module can compare through.
pub trait OrderView {
    fn contains(&self, x: u64) -> bool;
    fn cmp_elems(&self, x: u64, y: u64) -> Option<Ordering>;
    /// Exact size of the open interval (x, y), when both ends exist.
    fn interval_size(&self, x: u64, y: u64) -> Option<u64>;
    /// Is there a `k <= budget` with `x ≺ k ≺ y`?
    fn exists_between(&self, x: u64, y: u64, budget: u64) -> Option<bool>;
    fn name(&self) -> String;
}

/// The usual presentation of ω.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardOmega;

impl OrderView for StandardOmega {
    fn contains(&self, _x: u64) -> bool {
        true
    }

    fn cmp_elems(&self, x: u64, y: u64) -> Option<Ordering> {
        Some(x.cmp(&y))
    }

    fn interval_size(&self, x: u64, y: u64) -> Option<u64> {
        Some(if y > x { y - x - 1 } else { 0 })
    }

    fn exists_between(&self, x: u64, y: u64, budget: u64) -> Option<bool> {
        Some(y > x && y - x > 1 && x + 1 <= budget)
    }

    fn name(&self) -> String {
        "standard-omega".into()
    }
}

/// A finite order viewed through its labels (labels must be unique).
pub struct FiniteView {
    order: FiniteOrder,
    pos: HashMap<u64, usize>,
}

impl FiniteView {
    pub fn new(order: FiniteOrder) -> Self {
        let mut pos = HashMap::new();
        for (i, &l) in order.labels.iter().enumerate() {
            let clash = pos.insert(l, i);
            assert!(clash.is_none(), "labels must be unique for a FiniteView");
        }
        FiniteView { order, pos }
    }

    pub fn order(&self) -> &FiniteOrder {
        &self.order
    }
}

impl OrderView for FiniteView {
    fn contains(&self, x: u64) -> bool {
        self.pos.contains_key(&x)
    }

    fn cmp_elems(&self, x: u64, y: u64) -> Option<Ordering> {
        Some(self.pos.get(&x)?.cmp(self.pos.get(&y)?))
    }

    fn interval_size(&self, x: u64, y: u64) -> Option<u64> {
        let px = *self.pos.get(&x)?;
        let py = *self.pos.get(&y)?;
        Some(if py > px { (py - px - 1) as u64 } else { 0 })
    }

    fn exists_between(&self, x: u64, y: u64, budget: u64) -> Option<bool> {
        let px = *self.pos.get(&x)?;
        let py = *self.pos.get(&y)?;
        if py <= px + 1 {
            return Some(false);
        }
        Some(self.order.labels[px + 1..py].iter().any(|&k| k <= budget))
    }

    fn name(&self) -> String {
        format!("finite-{}", self.order.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Quadratic brute-force comparator: materialize the full order
    /// matrix from first principles and compare.
    fn order_matrix(order: &FiniteOrder) -> Vec<Vec<bool>> {
        let n = order.len();
        (0..n).map(|i| (0..n).map(|j| i < j).collect()).collect()
    }

    #[test]
    fn sum_and_reverse_basics() {
        let two = FiniteOrder::chain(2);
        let three = FiniteOrder::chain(3);
        assert_eq!(sum(&two, &three).len(), 5);
        let a = FiniteOrder::from_labels(vec![4, 7, 2]);
        assert_eq!(reverse(&reverse(&a)), a);
    }

    #[test]
    fn reverse_sum_duality_elementwise() {
        let a = FiniteOrder::from_labels(vec![10, 11]);
        let b = FiniteOrder::from_labels(vec![20, 21, 22]);
        assert_eq!(reverse(&sum(&a, &b)), sum(&reverse(&b), &reverse(&a)));
    }

    #[test]
    fn product_block_structure() {
        // product(2, 3): three blocks of two, verified against the
        // brute-force lexicographic enumeration of (b, a) pairs.
        let p = generalized_sum(&FiniteOrder::chain(3), |_| FiniteOrder::chain(2));
        assert_eq!(p.order.len(), 6);
        let brute: Vec<(u64, u64)> = (0..3).flat_map(|b| (0..2).map(move |a| (b, a))).collect();
        assert_eq!(p.provenance, brute);
        assert_eq!(product(&FiniteOrder::chain(2), &FiniteOrder::chain(3)).len(), 6);
    }

    #[test]
    fn generalized_sum_examples() {
        let ones = generalized_sum(&FiniteOrder::chain(4), |_| FiniteOrder::chain(1));
        assert_eq!(ones.order.len(), 4);
        let mixed = generalized_sum(&FiniteOrder::chain(2), |l| {
            FiniteOrder::chain(if l == 0 { 3 } else { 2 })
        });
        assert_eq!(mixed.order.len(), 5);
        assert_eq!(mixed.provenance[2], (0, 2));
        assert_eq!(mixed.provenance[3], (1, 0));
    }

    /// Random instances against the quadratic pair comparator.
    #[test]
    fn generalized_sum_matches_brute_force() {
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for _ in 0..100 {
            let idx_n = next() % 6 + 1;
            let index = FiniteOrder::chain(idx_n);
            let sizes: Vec<u64> = (0..idx_n).map(|_| next() % 5 + 1).collect();
            let g = generalized_sum(&index, |l| FiniteOrder::chain(sizes[l as usize]));
            // brute force: compare pairs (l, m) lexicographically
            for (i, &(l0, m0)) in g.provenance.iter().enumerate() {
                for (j, &(l1, m1)) in g.provenance.iter().enumerate() {
                    let lex = (l0, m0) < (l1, m1);
                    assert_eq!(i < j, lex);
                }
            }
            let mat = order_matrix(&g.order);
            assert_eq!(mat.len(), g.order.len());
        }
    }

    #[test]
    fn rational_reduction_and_order() {
        let half = Rational::new(2, 4);
        assert_eq!((half.num(), half.den()), (1, 2));
        assert!(Rational::new(1, 3) < Rational::new(1, 2));
        assert!(Rational::new(-1, 2) < Rational::new(1, 3));
        assert_eq!(Rational::new(3, -6), Rational::new(-1, 2));
    }

    #[test]
    fn dense_coloring_examples() {
        assert_eq!(dense_coloring(1, Rational::new(7, 3)), 0);
        assert_eq!(dense_coloring(2, Rational::new(1, 3)), 1);
        assert_eq!(dense_coloring(2, Rational::new(2, 3)), 0);
    }

    /// For every color c < 4 and sampled intervals (p, q), some rational
    /// of color c lies inside: found by denominator sweep.
    #[test]
    fn dense_coloring_classes_are_dense() {
        let rats = stern_brocot(60);
        let mut sorted = rats.clone();
        sorted.sort();
        let mut intervals = Vec::new();
        for w in sorted.windows(2) {
            if w[0] < w[1] {
                intervals.push((w[0], w[1]));
            }
            if intervals.len() == 50 {
                break;
            }
        }
        assert!(intervals.len() >= 30);
        for color in 0..4u64 {
            for &(p, q) in &intervals {
                let mut found = false;
                'sweep: for den in 1..=512i64 {
                    // numerators congruent to color mod 4 inside (p, q)
                    let lo = (p.num() as i128 * den as i128).div_euclid(p.den() as i128) as i64;
                    for num in lo..=lo + 2 * den + 8 {
                        if num.rem_euclid(4) != color as i64 {
                            continue;
                        }
                        let r = Rational::new(num, den);
                        if p < r && r < q {
                            found = true;
                            break 'sweep;
                        }
                    }
                }
                assert!(found, "color {color} missing in ({p}, {q})");
            }
        }
    }

    #[test]
    fn stern_brocot_prefix_is_canonical() {
        let rats = stern_brocot(7);
        let expect: Vec<Rational> = [
            (1, 1),
            (1, 2),
            (2, 1),
            (1, 3),
            (2, 3),
            (3, 2),
            (3, 1),
        ]
        .iter()
        .map(|&(n, d)| Rational::new(n, d))
        .collect();
        assert_eq!(rats, expect);
    }

    #[test]
    fn shuffle_sample_trivial_cases() {
        let plain = shuffle_sample(&[1], 10);
        assert_eq!(plain.order.len(), 10);
        let pairs = shuffle_sample(&[2], 3);
        assert_eq!(pairs.order.len(), 6);
        assert!(pairs.blocks.iter().all(|&(_, s)| s == 2));
    }

    /// Block sizes recomputed through an independent second coloring
    /// pass over the same rationals.
    #[test]
    fn shuffle_sample_block_sizes_recount() {
        let sizes = [1u64, 2];
        let sample = shuffle_sample(&sizes, 100);
        let mut rats = stern_brocot(100);
        rats.sort();
        let mut recount = Vec::new();
        for q in rats {
            // independent coloring: numerator parity via rem_euclid
            let c = (q.num().rem_euclid(2)) as usize;
            recount.push(sizes[c]);
        }
        let got: Vec<u64> = sample.blocks.iter().map(|&(_, s)| s).collect();
        assert_eq!(got, recount);
        assert_eq!(sample.order.len() as u64, recount.iter().sum::<u64>());
    }

    #[test]
    fn condensation_cases() {
        let five = FiniteOrder::chain(5);
        assert_eq!(finite_condensation(&five, Condensation::Literal), vec![0..5]);
        let singletons = finite_condensation(&five, Condensation::Adjacent(&|_, _| false));
        assert_eq!(singletons.len(), 5);
        // shuffle of pairs with within-pair adjacency: 10 blocks of 2
        let sample = shuffle_sample(&[2], 10);
        let within = |a: u64, b: u64| b == a + 1 && a % 2 == 0;
        let blocks = finite_condensation(&sample.order, Condensation::Adjacent(&within));
        assert_eq!(blocks.len(), 10);
        assert!(blocks.iter().all(|b| b.len() == 2));
    }

    #[test]
    fn condensation_blocks_are_intervals() {
        let order = FiniteOrder::chain(30);
        let blocks =
            finite_condensation(&order, Condensation::Adjacent(&|a, _| a % 3 != 2));
        let mut expect_start = 0;
        for b in blocks {
            assert_eq!(b.start, expect_start);
            expect_start = b.end;
        }
        assert_eq!(expect_start, 30);
    }

    /// Associativity up to isomorphism on random instances.
    #[test]
    fn sum_product_associativity() {
        let mut seed = 42u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            seed >> 33
        };
        for _ in 0..50 {
            let (x, y, z) = (next() % 5 + 1, next() % 5 + 1, next() % 5 + 1);
            let (a, b, c) =
                (FiniteOrder::chain(x), FiniteOrder::chain(y), FiniteOrder::chain(z));
            assert!(sum(&sum(&a, &b), &c).iso(&sum(&a, &sum(&b, &c))));
            assert!(product(&product(&a, &b), &c).iso(&product(&a, &product(&b, &c))));
        }
    }

    /// generalized_sum with a constant family is the product under the
    /// right-factor-indexes convention.
    #[test]
    fn constant_family_is_product() {
        for m in 1..5u64 {
            for n in 1..5u64 {
                let g = generalized_sum(&FiniteOrder::chain(n), |_| FiniteOrder::chain(m));
                assert!(g.order.iso(&product(&FiniteOrder::chain(m), &FiniteOrder::chain(n))));
            }
        }
    }

    #[test]
    fn standard_omega_view() {
        let v = StandardOmega;
        assert_eq!(v.interval_size(3, 7), Some(3));
        assert_eq!(v.exists_between(3, 5, 100), Some(true));
        assert_eq!(v.exists_between(3, 4, 100), Some(false));
        assert_eq!(v.exists_between(3, 5, 2), Some(false), "middle above budget stays unseen");
    }
}
