//! Finite metric spaces and metric entropy.
//!
//! Distances are stored as integers scaled by a common power of two, so all
//! comparisons are exact. Covering and packing counts come back as brackets
//! `[lo, hi]` with witnesses; a branch-and-bound refinement closes the gap
//! whenever its node budget allows, and structured instances (grids, Cantor
//! truncations, products of either) collapse to a single branch per level.

use crate::dyadic::Dyadic;
use crate::rep::RepError;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::str::FromStr;

/// Default node budget for the exact covering/packing searches.
pub const DEFAULT_NODE_BUDGET: u64 = 200_000;

/// Hard cap on materialised product sizes.
pub const PRODUCT_SIZE_CAP: usize = 1 << 22;

/// A finite metric space with exactly representable dyadic distances.
/// `dist[i * n + j]` holds `d(i, j) · 2^scale`.
#[derive(Debug, Clone)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    scale: u32,
    dist: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct SpaceJson {
    labels: Vec<String>,
    dist: Vec<Vec<String>>,
}

impl FiniteMetricSpace {
    /// Build from scaled integer distances. Checks symmetry and zero
    /// diagonal; the triangle inequality is the caller's problem (it is
    /// checked on JSON input, where the data is untrusted).
    pub fn from_scaled(labels: Vec<String>, scale: u32, dist: Vec<u64>) -> Result<Self, RepError> {
        let n = labels.len();
        if dist.len() != n * n {
            return Err(RepError::Invalid(format!(
                "distance table has {} entries for {} points",
                dist.len(),
                n
            )));
        }
        for i in 0..n {
            if dist[i * n + i] != 0 {
                return Err(RepError::Invalid(format!("d({i},{i}) != 0")));
            }
            for j in 0..i {
                if dist[i * n + j] != dist[j * n + i] {
                    return Err(RepError::Invalid(format!("d({i},{j}) asymmetric")));
                }
                if dist[i * n + j] == 0 {
                    return Err(RepError::Invalid(format!("d({i},{j}) = 0 for distinct points")));
                }
            }
        }
        Ok(FiniteMetricSpace { labels, scale, dist })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn dist_scaled(&self, i: usize, j: usize) -> u64 {
        self.dist[i * self.len() + j]
    }

    pub fn dist(&self, i: usize, j: usize) -> Dyadic {
        Dyadic::new(BigInt::from(self.dist_scaled(i, j)), self.scale)
    }

    pub fn diameter_scaled(&self) -> u64 {
        self.dist.iter().copied().max().unwrap_or(0)
    }

    pub fn diameter(&self) -> Dyadic {
        Dyadic::new(BigInt::from(self.diameter_scaled()), self.scale)
    }

    /// Scaled integer threshold for "distance ≤ r"; `None` when `r` is so
    /// large that every pair qualifies, clamp handles `r < 0` as 0 matches.
    fn threshold(&self, r: &Dyadic) -> u64 {
        if r.is_negative() {
            return 0;
        }
        // floor(r · 2^scale), exact comparison: d/2^scale ≤ r ⟺ d ≤ floor.
        let s = r.shl(self.scale);
        let floored: BigInt = s.numerator() >> s.exponent();
        floored.to_u64().unwrap_or(u64::MAX)
    }

    pub fn within(&self, i: usize, j: usize, r: &Dyadic) -> bool {
        self.dist_scaled(i, j) <= self.threshold(r)
    }

    /// The grid `{ i / 2^k : 0 ≤ i ≤ 2^k }` with the line metric.
    pub fn grid_pow2(k: u32) -> Self {
        let n = (1usize << k) + 1;
        let mut dist = vec![0u64; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = (i as i64 - j as i64).unsigned_abs();
            }
        }
        let labels = (0..n).map(|i| format!("{i}/2^{k}")).collect();
        FiniteMetricSpace { labels, scale: k, dist }
    }

    /// All binary words of length `depth` with distance `2^-(first
    /// difference)` — the canonical ultrametric truncation.
    pub fn cantor_truncation(depth: u32) -> Self {
        let n = 1usize << depth;
        let mut dist = vec![0u64; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    // First differing bit, reading from the most significant
                    // of `depth` bits.
                    let diff = (i ^ j) as u64;
                    let first = depth - 1 - (63 - diff.leading_zeros()).min(depth - 1);
                    dist[i * n + j] = 1u64 << (depth - first);
                }
            }
        }
        let labels = (0..n).map(|i| format!("{:0width$b}", i, width = depth as usize)).collect();
        FiniteMetricSpace { labels, scale: depth, dist }
    }

    /// Multiply all distances by `2^-k`.
    pub fn scaled_down(&self, k: u32) -> Self {
        FiniteMetricSpace {
            labels: self.labels.clone(),
            scale: self.scale + k,
            dist: self.dist.clone(),
        }
    }

    /// A pseudo-random subset of the unit interval (distinct points on the
    /// `2^-resolution` grid), deterministic in the seed.
    pub fn random_line_subset(seed: u64, points: usize, resolution: u32) -> Self {
        assert!(points <= (1usize << resolution) + 1, "too many points for the resolution");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut chosen = std::collections::BTreeSet::new();
        while chosen.len() < points {
            chosen.insert(rng.gen_range(0..=(1u64 << resolution)));
        }
        let pts: Vec<u64> = chosen.into_iter().collect();
        let n = pts.len();
        let mut dist = vec![0u64; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = pts[i].abs_diff(pts[j]);
            }
        }
        let labels = pts.iter().map(|p| format!("{p}/2^{resolution}")).collect();
        FiniteMetricSpace { labels, scale: resolution, dist }
    }

    /// Parse from JSON `{"labels": [...], "dist": [["a/2^k", ...], ...]}`.
    /// Untrusted input: symmetry, zero diagonal, positivity off the
    /// diagonal, and the triangle inequality are all verified.
    pub fn from_json(text: &str) -> Result<Self, RepError> {
        let raw: SpaceJson =
            serde_json::from_str(text).map_err(|e| RepError::Invalid(format!("json: {e}")))?;
        let n = raw.labels.len();
        if raw.dist.len() != n || raw.dist.iter().any(|row| row.len() != n) {
            return Err(RepError::Invalid("distance matrix is not square".into()));
        }
        let mut entries = Vec::with_capacity(n * n);
        let mut scale = 0u32;
        for row in &raw.dist {
            for cell in row {
                let d = Dyadic::from_str(cell)
                    .map_err(|e| RepError::Invalid(format!("distance {cell:?}: {e}")))?;
                if d.is_negative() {
                    return Err(RepError::Invalid(format!("negative distance {cell}")));
                }
                scale = scale.max(d.exponent());
                entries.push(d);
            }
        }
        let dist: Vec<u64> = entries
            .iter()
            .map(|d| {
                d.scaled_num(scale)
                    .to_u64()
                    .ok_or_else(|| RepError::Invalid(format!("distance {d} too large")))
            })
            .collect::<Result<_, _>>()?;
        let space = FiniteMetricSpace::from_scaled(raw.labels, scale, dist)?;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (ij, ik, kj) = (
                        space.dist_scaled(i, j),
                        space.dist_scaled(i, k),
                        space.dist_scaled(k, j),
                    );
                    if ij > ik + kj {
                        return Err(RepError::Invalid(format!(
                            "triangle inequality fails at ({i},{k},{j})"
                        )));
                    }
                }
            }
        }
        Ok(space)
    }

    pub fn to_json(&self) -> String {
        let n = self.len();
        let raw = SpaceJson {
            labels: self.labels.clone(),
            dist: (0..n)
                .map(|i| (0..n).map(|j| self.dist(i, j).to_string()).collect())
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("plain strings serialise")
    }

    /// Snap distances to the scale `2^-n` where `n` is maximal with
    /// `d ≤ 2^(1 - 2^n)` — the power-of-two quantisation of `1/log₂(2/d)`.
    /// Zero stays zero. The result deliberately skips triangle validation:
    /// the quantised values are a comparison gadget, not a metric embedding.
    pub fn rescale_log(&self) -> Self {
        // d ≤ 2^{1-2^n} scaled: d·2^-scale ≤ 2^{1-2^n} ⟺ d ≤ 2^{scale+1-2^n}.
        let n_cap = {
            let mut n = 0u32;
            while (1u64 << n.min(63)) < self.scale as u64 + 1 {
                n += 1;
            }
            n + 1
        };
        let quantise = |d: u64| -> u64 {
            if d == 0 {
                return 0;
            }
            let mut best = 0u32;
            for n in 0..=n_cap {
                let e = 1i64 << n;
                if self.scale as i64 + 1 - e >= 0 && d <= (1u64 << (self.scale as i64 + 1 - e)) {
                    best = n;
                } else if self.scale as i64 + 1 - e < 0 {
                    break;
                }
            }
            // New distance 2^-best at scale n_cap.
            1u64 << (n_cap - best.min(n_cap))
        };
        FiniteMetricSpace {
            labels: self.labels.clone(),
            scale: n_cap,
            dist: self.dist.iter().map(|&d| quantise(d)).collect(),
        }
    }

    /// Scaled Hausdorff distance between two point sets.
    pub fn hausdorff_scaled(&self, a: &[usize], b: &[usize]) -> u64 {
        let one_sided = |from: &[usize], to: &[usize]| -> u64 {
            from.iter()
                .map(|&i| to.iter().map(|&j| self.dist_scaled(i, j)).min().unwrap_or(u64::MAX))
                .max()
                .unwrap_or(0)
        };
        one_sided(a, b).max(one_sided(b, a))
    }

    pub fn hausdorff(&self, a: &[usize], b: &[usize]) -> Dyadic {
        Dyadic::new(BigInt::from(self.hausdorff_scaled(a, b)), self.scale)
    }

    /// Is the graph with edges `d ≤ r` connected?
    pub fn chain_connected(&self, r: &Dyadic) -> bool {
        let n = self.len();
        if n == 0 {
            return true;
        }
        let t = self.threshold(r);
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for (j, s) in seen.iter_mut().enumerate() {
                if !*s && self.dist_scaled(i, j) <= t {
                    *s = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

// ===== bitset scaffolding for the covering searches =====

#[derive(Clone, PartialEq, Eq, Hash)]
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn empty(n: usize) -> Self {
        BitSet { words: vec![0; n.div_ceil(64)] }
    }

    fn full(n: usize) -> Self {
        let mut s = BitSet { words: vec![u64::MAX; n.div_ceil(64)] };
        let spare = s.words.len() * 64 - n;
        if spare > 0 {
            let last = s.words.len() - 1;
            s.words[last] >>= spare;
        }
        s
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn and(&self, other: &BitSet) -> BitSet {
        BitSet {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    fn subtract(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    fn is_subset_of(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * 64 + b)
                }
            })
        })
    }
}

/// A covering or packing count with witnesses. `exact` means `lo == hi`.
#[derive(Debug, Clone, Serialize)]
pub struct CountBracket {
    pub lo: u64,
    pub hi: u64,
    pub exact: bool,
    /// Witness for `hi` (covering centers) or `lo` (packing points).
    pub witness: Vec<usize>,
    /// True when the branch-and-bound refinement ran out of nodes.
    pub budget_exhausted: bool,
}

fn balls_at(space: &FiniteMetricSpace, threshold: u64) -> Vec<BitSet> {
    let n = space.len();
    (0..n)
        .map(|i| {
            let mut b = BitSet::empty(n);
            for j in 0..n {
                if space.dist_scaled(i, j) <= threshold {
                    b.set(j);
                }
            }
            b
        })
        .collect()
}

fn greedy_cover(balls: &[BitSet], n: usize) -> Vec<usize> {
    let mut uncovered = BitSet::full(n);
    let mut centers = Vec::new();
    while !uncovered.is_empty() {
        let (best, _) = balls
            .iter()
            .enumerate()
            .map(|(i, b)| (i, b.and(&uncovered).count()))
            .max_by_key(|&(i, c)| (c, std::cmp::Reverse(i)))
            .expect("nonempty space");
        uncovered.subtract(&balls[best]);
        centers.push(best);
    }
    centers
}

/// Maximal set of points with pairwise distance `> r`, greedily in index
/// order. Maximality makes it a covering net at radius `r` as well.
pub fn greedy_net(space: &FiniteMetricSpace, r: &Dyadic) -> Vec<usize> {
    greedy_packing(space, space.threshold(r))
}

/// Greedy packing: sweep indices, keep a point if it is farther than
/// `threshold` from everything kept so far.
fn greedy_packing(space: &FiniteMetricSpace, threshold: u64) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for i in 0..space.len() {
        if kept.iter().all(|&j| space.dist_scaled(i, j) > threshold) {
            kept.push(i);
        }
    }
    kept
}

struct CoverSearch<'a> {
    balls: &'a [BitSet],
    max_ball: usize,
    best: Vec<usize>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl CoverSearch<'_> {
    fn run(&mut self, uncovered: &BitSet, chosen: &mut Vec<usize>) {
        if uncovered.is_empty() {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        let remaining = uncovered.count();
        if chosen.len() + remaining.div_ceil(self.max_ball) >= self.best.len() {
            return;
        }
        // Branch on the uncovered point with the fewest distinct usable
        // coverages; dedupe identical coverages and drop dominated ones.
        let mut pivot = usize::MAX;
        let mut pivot_cands: Vec<(usize, BitSet)> = Vec::new();
        for p in uncovered.iter() {
            let mut seen: HashMap<BitSet, usize> = HashMap::new();
            for (i, b) in self.balls.iter().enumerate() {
                if b.get(p) {
                    let cov = b.and(uncovered);
                    seen.entry(cov).or_insert(i);
                }
            }
            let all: Vec<(usize, BitSet)> = seen.into_iter().map(|(c, i)| (i, c)).collect();
            let cands: Vec<(usize, BitSet)> = all
                .iter()
                .filter(|(_, c)| {
                    !all.iter()
                        .any(|(_, other)| c != other && c.is_subset_of(other))
                })
                .cloned()
                .collect();
            if cands.len() < pivot_cands.len() || pivot == usize::MAX {
                pivot = p;
                pivot_cands = cands;
                if pivot_cands.len() == 1 {
                    break;
                }
            }
        }
        let _ = pivot;
        pivot_cands.sort_by_key(|(_, c)| std::cmp::Reverse(c.count()));
        for (i, cov) in pivot_cands {
            let mut rest = uncovered.clone();
            rest.subtract(&cov);
            chosen.push(i);
            self.run(&rest, chosen);
            chosen.pop();
            if self.exhausted {
                return;
            }
        }
    }
}

/// Bracket the minimum number of closed balls of radius `r` needed to
/// cover the space. Exact whenever the packing bound meets the search
/// result within the node budget.
pub fn covering_number(space: &FiniteMetricSpace, r: &Dyadic, budget: u64) -> CountBracket {
    let n = space.len();
    if n == 0 {
        return CountBracket { lo: 0, hi: 0, exact: true, witness: vec![], budget_exhausted: false };
    }
    let t = space.threshold(r);
    let balls = balls_at(space, t);
    let greedy = greedy_cover(&balls, n);
    // Packing at > 2r: each radius-r ball holds at most one packed point.
    let two_r = r.clone() + r.clone();
    let packing = greedy_packing(space, space.threshold(&two_r));
    let lo = packing.len() as u64;
    if lo == greedy.len() as u64 {
        return CountBracket {
            lo,
            hi: lo,
            exact: true,
            witness: greedy,
            budget_exhausted: false,
        };
    }
    let max_ball = balls.iter().map(|b| b.count()).max().unwrap_or(1).max(1);
    let mut search = CoverSearch {
        balls: &balls,
        max_ball,
        best: greedy,
        nodes: 0,
        budget,
        exhausted: false,
    };
    let full = BitSet::full(n);
    let mut chosen = Vec::new();
    search.run(&full, &mut chosen);
    let hi = search.best.len() as u64;
    let exhausted = search.exhausted;
    CountBracket {
        lo: if exhausted { lo } else { hi },
        hi,
        exact: !exhausted || lo == hi,
        witness: search.best,
        budget_exhausted: exhausted,
    }
}

struct PackSearch<'a> {
    space: &'a FiniteMetricSpace,
    threshold: u64,
    best: Vec<usize>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl PackSearch<'_> {
    fn run(&mut self, candidates: &[usize], chosen: &mut Vec<usize>) {
        if chosen.len() + candidates.len() <= self.best.len() {
            return;
        }
        if candidates.is_empty() {
            if chosen.len() > self.best.len() {
                self.best = chosen.clone();
            }
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        let v = candidates[0];
        // Include v.
        let rest: Vec<usize> = candidates[1..]
            .iter()
            .copied()
            .filter(|&u| self.space.dist_scaled(u, v) > self.threshold)
            .collect();
        chosen.push(v);
        self.run(&rest, chosen);
        chosen.pop();
        if self.exhausted {
            return;
        }
        // Exclude v.
        self.run(&candidates[1..], chosen);
    }
}

/// Bracket the maximum number of points with pairwise distance `> r`.
pub fn packing_number(space: &FiniteMetricSpace, r: &Dyadic, budget: u64) -> CountBracket {
    let n = space.len();
    if n == 0 {
        return CountBracket { lo: 0, hi: 0, exact: true, witness: vec![], budget_exhausted: false };
    }
    let t = space.threshold(r);
    let greedy = greedy_packing(space, t);
    let mut search = PackSearch {
        space,
        threshold: t,
        best: greedy,
        nodes: 0,
        budget,
        exhausted: false,
    };
    let all: Vec<usize> = (0..n).collect();
    let mut chosen = Vec::new();
    search.run(&all, &mut chosen);
    let lo = search.best.len() as u64;
    let hi = if search.exhausted {
        // Points pairwise > r are separated by closed balls of radius r/2.
        let half = r.shr(1);
        covering_number(space, &half, budget).hi
    } else {
        lo
    };
    CountBracket {
        lo,
        hi,
        exact: lo == hi,
        witness: search.best,
        budget_exhausted: search.exhausted,
    }
}

/// Entropy at one scale: bracket of the covering count at radius `2^-n` and
/// the resulting bracket on `η(n) = ⌈log₂ N(2^-n)⌉`.
#[derive(Debug, Clone, Serialize)]
pub struct LevelEntropy {
    pub n: u64,
    pub covering: CountBracket,
    pub eta_lo: u64,
    pub eta_hi: u64,
}

pub fn ceil_log2(x: u64) -> u64 {
    assert!(x > 0);
    64 - (x - 1).leading_zeros() as u64
}

pub fn entropy_profile(space: &FiniteMetricSpace, n_max: u64, budget: u64) -> Vec<LevelEntropy> {
    (1..=n_max)
        .map(|n| {
            let r = Dyadic::pow2_neg(n.min(u32::MAX as u64) as u32);
            let covering = covering_number(space, &r, budget);
            LevelEntropy {
                n,
                eta_lo: ceil_log2(covering.lo.max(1)),
                eta_hi: ceil_log2(covering.hi.max(1)),
                covering,
            }
        })
        .collect()
}

/// Check the volume-style lower bound `2^{η(n)} ≥ diam · 2^{n-2}` at every
/// level where the space is still chain-connected at scale `2^-n`.
#[derive(Debug, Clone, Serialize)]
pub struct ConnectivityBoundReport {
    pub n: u64,
    pub connected: bool,
    pub covering_lo: u64,
    pub required: Dyadic,
    pub holds: bool,
}

pub fn connected_lower_bound_check(
    space: &FiniteMetricSpace,
    n_max: u64,
    budget: u64,
) -> Vec<ConnectivityBoundReport> {
    let diam = space.diameter();
    (1..=n_max)
        .map(|n| {
            let r = Dyadic::pow2_neg(n as u32);
            let connected = space.chain_connected(&r);
            let covering = covering_number(space, &r, budget);
            let required = if n >= 2 { diam.shl(n as u32 - 2) } else { diam.shr(2 - n as u32) };
            let count = Dyadic::from_int(covering.lo as i64);
            ConnectivityBoundReport {
                n,
                connected,
                covering_lo: covering.lo,
                required: required.clone(),
                holds: !connected || count >= required,
            }
        })
        .collect()
}

// ===== products =====

/// Materialised max-metric product of two spaces. Fails rather than
/// allocate a distance table beyond the size cap.
pub fn product_max(
    a: &FiniteMetricSpace,
    b: &FiniteMetricSpace,
) -> Result<FiniteMetricSpace, RepError> {
    let n = a.len().checked_mul(b.len()).filter(|&n| n <= PRODUCT_SIZE_CAP && n * n <= PRODUCT_SIZE_CAP)
        .ok_or(RepError::SizeCapExceeded { size: a.len() * b.len(), cap: PRODUCT_SIZE_CAP })?;
    let scale = a.scale.max(b.scale);
    let lift = |d: u64, s: u32| d << (scale - s);
    let mut dist = vec![0u64; n * n];
    let mut labels = Vec::with_capacity(n);
    for ia in 0..a.len() {
        for ib in 0..b.len() {
            labels.push(format!("({},{})", a.label(ia), b.label(ib)));
        }
    }
    for ia in 0..a.len() {
        for ib in 0..b.len() {
            let i = ia * b.len() + ib;
            for ja in 0..a.len() {
                for jb in 0..b.len() {
                    let j = ja * b.len() + jb;
                    dist[i * n + j] =
                        lift(a.dist_scaled(ia, ja), a.scale).max(lift(b.dist_scaled(ib, jb), b.scale));
                }
            }
        }
    }
    Ok(FiniteMetricSpace { labels, scale, dist })
}

/// A lazy max-metric product of factors, each additionally scaled down by a
/// power of two. Nothing quadratic in the product size is ever allocated.
#[derive(Clone)]
pub struct ProductSpace {
    pub factors: Vec<FiniteMetricSpace>,
    /// Factor `j`'s metric is multiplied by `2^-shifts[j]`.
    pub shifts: Vec<u32>,
}

impl ProductSpace {
    pub fn new(factors: Vec<FiniteMetricSpace>, shifts: Vec<u32>) -> Self {
        assert_eq!(factors.len(), shifts.len());
        ProductSpace { factors, shifts }
    }

    /// The finite stand-in for the Hilbert cube used throughout: grids of
    /// `2^m + 1` points with `m = 6, 4, 2, 1`, scaled by `2^-j`.
    pub fn hilbert_standin() -> Self {
        let ms = [6u32, 4, 2, 1];
        let factors: Vec<FiniteMetricSpace> =
            ms.iter().map(|&m| FiniteMetricSpace::grid_pow2(m)).collect();
        let shifts = (0..ms.len() as u32).collect();
        ProductSpace::new(factors, shifts)
    }

    pub fn len(&self) -> usize {
        self.factors.iter().map(|f| f.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.iter().any(|f| f.is_empty())
    }

    /// Mixed-radix decode of a flat index into per-factor indices.
    pub fn coords(&self, mut i: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (k, f) in self.factors.iter().enumerate().rev() {
            out[k] = i % f.len();
            i /= f.len();
        }
        out
    }

    pub fn dist(&self, i: usize, j: usize) -> Dyadic {
        let (ci, cj) = (self.coords(i), self.coords(j));
        let mut best = Dyadic::zero();
        for (k, f) in self.factors.iter().enumerate() {
            let d = f.dist(ci[k], cj[k]).shr(self.shifts[k]);
            best = best.max(d);
        }
        best
    }

    pub fn diameter(&self) -> Dyadic {
        let mut best = Dyadic::zero();
        for (k, f) in self.factors.iter().enumerate() {
            best = best.max(f.diameter().shr(self.shifts[k]));
        }
        best
    }

    /// Covering bracket at radius `r` by the product rule: a product of
    /// factor coverings covers (upper bound), a product of factor packings
    /// at `2r` packs (lower bound). Exact when every factor is exact.
    pub fn covering_bracket(&self, r: &Dyadic, budget: u64) -> CountBracket {
        let mut lo = 1u64;
        let mut hi = 1u64;
        let mut exact = true;
        let mut exhausted = false;
        for (k, f) in self.factors.iter().enumerate() {
            // Radius seen by the factor: r · 2^{shift}.
            let rk = r.shl(self.shifts[k]);
            let b = covering_number(f, &rk, budget);
            lo = lo.saturating_mul(b.lo);
            hi = hi.saturating_mul(b.hi);
            exact &= b.exact;
            exhausted |= b.budget_exhausted;
        }
        CountBracket { lo, hi, exact: exact && lo == hi, witness: vec![], budget_exhausted: exhausted }
    }

    pub fn entropy_profile(&self, n_max: u64, budget: u64) -> Vec<LevelEntropy> {
        (1..=n_max)
            .map(|n| {
                let r = Dyadic::pow2_neg(n as u32);
                let covering = self.covering_bracket(&r, budget);
                LevelEntropy {
                    n,
                    eta_lo: ceil_log2(covering.lo.max(1)),
                    eta_hi: ceil_log2(covering.hi.max(1)),
                    covering,
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_covering_counts_match_interval_arithmetic() {
        // Grid of 2^k + 1 points, radius 2^-n: a ball covers 2^{k-n+1} + 1
        // consecutive points, so the count is ceil((2^k+1)/(2^{k-n+1}+1)).
        let space = FiniteMetricSpace::grid_pow2(6);
        for n in 1..=6u32 {
            let r = Dyadic::pow2_neg(n);
            let b = covering_number(&space, &r, DEFAULT_NODE_BUDGET);
            let width = (1u64 << (7 - n)) + 1;
            let expect = 65u64.div_ceil(width);
            assert!(b.exact, "n={n} inexact: {b:?}");
            assert_eq!(b.hi, expect, "n={n}");
        }
    }

    #[test]
    fn covering_witness_actually_covers() {
        let space = FiniteMetricSpace::random_line_subset(7, 40, 10);
        let r = Dyadic::pow2_neg(4);
        let b = covering_number(&space, &r, DEFAULT_NODE_BUDGET);
        for i in 0..space.len() {
            assert!(b.witness.iter().any(|&c| space.within(c, i, &r)), "point {i} uncovered");
        }
        assert!(b.lo <= b.hi);
    }

    #[test]
    fn cantor_truncation_entropy_is_linear() {
        // 2^-n balls in the depth-d truncation are cylinders on n bits for
        // n < d ... covering count 2^n exactly (ultrametric, so packing
        // meets covering).
        let space = FiniteMetricSpace::cantor_truncation(5);
        for n in 1..=4u64 {
            let r = Dyadic::pow2_neg(n as u32);
            let b = covering_number(&space, &r, DEFAULT_NODE_BUDGET);
            assert!(b.exact);
            assert_eq!(b.hi, 1 << n, "n={n}");
        }
    }

    #[test]
    fn packing_matches_covering_on_ultrametric() {
        let space = FiniteMetricSpace::cantor_truncation(4);
        let r = Dyadic::pow2_neg(2);
        let pack = packing_number(&space, &r, DEFAULT_NODE_BUDGET);
        assert!(pack.exact);
        assert_eq!(pack.lo, 4); // pairwise > 1/4 means distinct first 2 bits
    }

    #[test]
    fn product_max_agrees_with_lazy_view() {
        let a = FiniteMetricSpace::grid_pow2(2);
        let b = FiniteMetricSpace::grid_pow2(1).scaled_down(1);
        let prod = product_max(&a, &b).unwrap();
        let lazy = ProductSpace::new(
            vec![FiniteMetricSpace::grid_pow2(2), FiniteMetricSpace::grid_pow2(1)],
            vec![0, 1],
        );
        assert_eq!(prod.len(), lazy.len());
        for i in 0..prod.len() {
            for j in 0..prod.len() {
                assert_eq!(prod.dist(i, j), lazy.dist(i, j), "({i},{j})");
            }
        }
    }

    #[test]
    fn product_bracket_is_exact_on_grids() {
        let p = ProductSpace::new(
            vec![FiniteMetricSpace::grid_pow2(3), FiniteMetricSpace::grid_pow2(2)],
            vec![0, 1],
        );
        let flat = product_max(
            &FiniteMetricSpace::grid_pow2(3),
            &FiniteMetricSpace::grid_pow2(2).scaled_down(1),
        )
        .unwrap();
        for n in 1..=3u32 {
            let r = Dyadic::pow2_neg(n);
            let lazy = p.covering_bracket(&r, DEFAULT_NODE_BUDGET);
            let exact = covering_number(&flat, &r, DEFAULT_NODE_BUDGET);
            assert!(lazy.exact, "n={n}");
            assert!(exact.exact, "n={n}");
            assert_eq!(lazy.hi, exact.hi, "n={n}");
        }
    }

    #[test]
    fn hilbert_standin_size() {
        let h = ProductSpace::hilbert_standin();
        assert_eq!(h.len(), 65 * 17 * 5 * 3);
        assert_eq!(h.diameter(), Dyadic::one());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let space = FiniteMetricSpace::grid_pow2(2);
        let text = space.to_json();
        let back = FiniteMetricSpace::from_json(&text).unwrap();
        assert_eq!(back.len(), 5);
        assert_eq!(back.dist(0, 4), Dyadic::one());

        let bad = r#"{"labels":["a","b","c"],
            "dist":[["0","1","1"],["1","0","1"],["1","1","0"]]}"#;
        assert!(FiniteMetricSpace::from_json(bad).is_ok());
        let asym = r#"{"labels":["a","b"],"dist":[["0","1"],["1/2^1","0"]]}"#;
        assert!(FiniteMetricSpace::from_json(asym).is_err());
        let tri = r#"{"labels":["a","b","c"],
            "dist":[["0","1","1/2^3"],["1","0","1/2^3"],["1/2^3","1/2^3","0"]]}"#;
        assert!(FiniteMetricSpace::from_json(tri).is_err());
    }

    #[test]
    fn rescale_log_threshold_equivalence() {
        let space = FiniteMetricSpace::random_line_subset(3, 25, 12);
        let snapped = space.rescale_log();
        for n in 0..=3u32 {
            // D' ≤ 2^-n ⟺ d ≤ 2^{1-2^n}
            let lhs_r = Dyadic::pow2_neg(n);
            let e = 1i64 << n;
            for i in 0..space.len() {
                for j in 0..space.len() {
                    let lhs = snapped.dist(i, j) <= lhs_r;
                    let rhs = if e - 1 <= 0 {
                        // Threshold 2^{1-2^n} ≥ 1 and the space lives in [0,1].
                        true
                    } else {
                        space.dist(i, j) <= Dyadic::pow2_neg((e - 1) as u32)
                    };
                    assert_eq!(lhs, rhs, "n={n} i={i} j={j} d={}", space.dist(i, j));
                }
            }
        }
    }

    #[test]
    fn hausdorff_on_grid() {
        let space = FiniteMetricSpace::grid_pow2(3); // points i/8
        let a = vec![0usize, 8];
        let b = vec![4usize];
        assert_eq!(space.hausdorff(&a, &b), Dyadic::ratio(4, 3));
        assert_eq!(space.hausdorff(&a, &a), Dyadic::zero());
    }

    #[test]
    fn chain_connectivity() {
        let space = FiniteMetricSpace::grid_pow2(3);
        assert!(space.chain_connected(&Dyadic::pow2_neg(3)));
        // Two far clusters: not connected at a small scale.
        let two = FiniteMetricSpace::from_scaled(
            vec!["a".into(), "b".into()],
            1,
            vec![0, 2, 2, 0],
        )
        .unwrap();
        assert!(!two.chain_connected(&Dyadic::pow2_neg(1)));
        assert!(two.chain_connected(&Dyadic::one()));
    }

    #[test]
    fn entropy_profile_of_unit_grid() {
        // 1025-point grid: η(n) = n - 1 for 1 ≤ n ≤ 8 even where the raw
        // covering count exceeds 2^{n-1} (n = 7, 8 on this grid).
        let space = FiniteMetricSpace::grid_pow2(10);
        let profile = entropy_profile(&space, 8, DEFAULT_NODE_BUDGET);
        for le in &profile {
            assert!(le.covering.exact, "n={} inexact", le.n);
            assert_eq!(le.eta_lo, le.n - 1, "n={}", le.n);
        }
        assert_eq!(profile[6].covering.hi, 61);
        assert_eq!(profile[7].covering.hi, 114);
    }
}
