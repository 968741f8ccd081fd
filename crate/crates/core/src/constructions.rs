//! Categorical constructions on represented spaces: binary and countable
//! products, the hyperspace of compact subsets, and Lipschitz function
//! spaces with McShane–Whitney extension and an application realizer.

use crate::cantor::{word_to_nat, Word};
use crate::dyadic::Dyadic;
use crate::entropy::greedy_net;
use crate::entropy::FiniteMetricSpace;
use crate::moduli::{lower_semi_inverse_at, GrowthFn, DEFAULT_SEARCH_CEILING};
use crate::rep::{Realizer, Rep, RepError};
use crate::standard_rep::{standard_decode, CoveringFamily};
use crate::unit_interval::{approx_to_signed, PointApprox, SignedDigit};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use std::collections::HashMap;

// ===== binary product =====

/// Interleave two names: even positions from `x`, odd from `y`.
pub fn interleave(x: &Word, y: &Word) -> Word {
    let mut out = Word::empty();
    for i in 0..x.len().max(y.len()) {
        if i < x.len() {
            out.push(x.bit(i));
        } else {
            break;
        }
        if i < y.len() {
            out.push(y.bit(i));
        }
    }
    out
}

pub fn deinterleave(w: &Word) -> (Word, Word) {
    let mut x = Word::empty();
    let mut y = Word::empty();
    for i in 0..w.len() {
        if i % 2 == 0 {
            x.push(w.bit(i));
        } else {
            y.push(w.bit(i));
        }
    }
    (x, y)
}

/// Product representation on the max metric: a name of `(x, y)` interleaves
/// a name of `x` with a name of `y`; precision `n` needs
/// `max(2·κ₁(n), 2·κ₂(n) + 1)` interleaved bits.
pub fn binary_product<P: 'static, Q: 'static>(a: &Rep<P>, b: &Rep<Q>) -> Rep<(P, Q)> {
    let modulus = GrowthFn::from_fn(
        format!("product({},{})", a.modulus().name(), b.modulus().name()),
        false,
        {
            let (ka, kb) = (a.modulus().clone(), b.modulus().clone());
            move |n| Ok((2 * ka.eval(n)?).max(2 * kb.eval(n)? + 1))
        },
    );
    let (da, db) = (a.clone(), b.clone());
    let (ga, gb) = (a.clone(), b.clone());
    Rep::new(
        format!("product({},{})", a.name(), b.name()),
        modulus,
        move |w, n| {
            let (wx, wy) = deinterleave(w);
            Ok((da.decode(&wx, n)?, db.decode(&wy, n)?))
        },
        move |w| {
            let (wx, wy) = deinterleave(w);
            ga.in_domain(&wx) && gb.in_domain(&wy)
        },
    )
}

/// Realizer of the first projection: keep the even positions. Modulus `2n`.
pub fn projection_first() -> Realizer {
    Realizer::new("pi1", GrowthFn::linear(0, 2), |w| Ok(deinterleave(w).0))
}

/// Realizer of the second projection: keep the odd positions. Modulus `2n+1`.
pub fn projection_second() -> Realizer {
    Realizer::new("pi2", GrowthFn::linear(1, 2), |w| Ok(deinterleave(w).1))
}

/// Realizer of `x ↦ (x, y)` for a fixed name of `y`. To emit `m` product
/// bits it reads `⌈m/2⌉` input bits.
pub fn embedding_second(y_name: Word) -> Realizer {
    Realizer::new(
        "embed-y",
        GrowthFn::from_fn("ceil(n/2)", false, |n| Ok(n.div_ceil(2))),
        move |w| Ok(interleave(w, &y_name)),
    )
}

// ===== countable product =====

/// Position schedule of a countable product: stage `n = 1, 2, …` appends,
/// for each component `j < min(n, J)`, its name bits from `κ_j(n-j-1)`
/// (0 when `n = j+1`) up to `κ_j(n-j)`. The global prefix of length
/// `κ(n) = Σ_{j<n} κ_j(n-j)` thus contains the `κ_j(n-j)`-bit prefix of
/// every component.
#[derive(Clone)]
pub struct ProductSchedule {
    pub moduli: Vec<GrowthFn>,
    /// Global position → (component, local position).
    pub positions: Vec<(usize, u64)>,
    /// `stage_ends[n-1]` = total bits after stage `n`.
    pub stage_ends: Vec<u64>,
    /// (component, local position) → global position.
    index: HashMap<(usize, u64), u64>,
}

pub fn build_product_schedule(moduli: &[GrowthFn], depth: u64) -> Result<ProductSchedule, RepError> {
    let j_count = moduli.len();
    let mut positions: Vec<(usize, u64)> = Vec::new();
    let mut stage_ends = Vec::with_capacity(depth as usize);
    let mut have: Vec<u64> = vec![0; j_count]; // bits of component j placed so far
    let mut index = HashMap::new();
    for n in 1..=depth {
        for (j, have_j) in have.iter_mut().enumerate().take(j_count.min(n as usize)) {
            let until = moduli[j]
                .eval(n - j as u64)
                .map_err(|e| RepError::Invalid(format!("modulus {j} at {}: {e}", n - j as u64)))?;
            while *have_j < until {
                index.insert((j, *have_j), positions.len() as u64);
                positions.push((j, *have_j));
                *have_j += 1;
            }
        }
        stage_ends.push(positions.len() as u64);
    }
    Ok(ProductSchedule { moduli: moduli.to_vec(), positions, stage_ends, index })
}

impl ProductSchedule {
    pub fn components(&self) -> usize {
        self.moduli.len()
    }

    pub fn global_of(&self, j: usize, i: u64) -> Option<u64> {
        self.index.get(&(j, i)).copied()
    }

    pub fn local_of(&self, pos: u64) -> Option<(usize, u64)> {
        self.positions.get(pos as usize).copied()
    }

    /// The product modulus `κ(n)` as the table of stage ends.
    pub fn kappa(&self) -> GrowthFn {
        let mut table = vec![0u64];
        table.extend_from_slice(&self.stage_ends);
        GrowthFn::table(table).expect("stage ends are monotone")
    }

    /// Verify the position table is a bijection: every slot `(j, i)` with
    /// `i < κ_j(depth - j)` appears exactly once, consecutively per `j`.
    pub fn verify_bijection(&self) -> Result<(), RepError> {
        let depth = self.stage_ends.len() as u64;
        let mut seen: Vec<Vec<bool>> = Vec::new();
        for (j, kappa_j) in self.moduli.iter().enumerate() {
            let total = if (j as u64) < depth { kappa_j.eval(depth - j as u64) } else { Ok(0) }
                .map_err(|e| RepError::Invalid(format!("modulus {j}: {e}")))?;
            seen.push(vec![false; total as usize]);
        }
        for &(j, i) in &self.positions {
            let slot = seen
                .get_mut(j)
                .and_then(|v| v.get_mut(i as usize))
                .ok_or_else(|| RepError::Invalid(format!("stray slot ({j},{i})")))?;
            if *slot {
                return Err(RepError::Invalid(format!("slot ({j},{i}) scheduled twice")));
            }
            *slot = true;
        }
        for (j, v) in seen.iter().enumerate() {
            if let Some(i) = v.iter().position(|&s| !s) {
                return Err(RepError::Invalid(format!("slot ({j},{i}) never scheduled")));
            }
        }
        // Consecutive per component: local indices must appear in order.
        let mut last: Vec<Option<u64>> = vec![None; self.components()];
        for &(j, i) in &self.positions {
            if let Some(prev) = last[j] {
                if i != prev + 1 {
                    return Err(RepError::Invalid(format!("component {j} jumps {prev} -> {i}")));
                }
            } else if i != 0 {
                return Err(RepError::Invalid(format!("component {j} starts at {i}")));
            }
            last[j] = Some(i);
        }
        Ok(())
    }

    /// Merge component names into a global name of `bits` positions.
    pub fn interleave(&self, names: &[Word], bits: u64) -> Result<Word, RepError> {
        if names.len() != self.components() {
            return Err(RepError::Invalid(format!(
                "{} names for {} components",
                names.len(),
                self.components()
            )));
        }
        let mut out = Word::empty();
        for pos in 0..bits.min(self.positions.len() as u64) {
            let (j, i) = self.positions[pos as usize];
            if i as usize >= names[j].len() {
                return Err(RepError::PrefixTooShort {
                    needed: i as usize + 1,
                    got: names[j].len(),
                    n: pos,
                });
            }
            out.push(names[j].bit(i as usize));
        }
        Ok(out)
    }

    /// Extract the scheduled bits of component `j` from a global prefix.
    pub fn extract(&self, w: &Word, j: usize) -> Word {
        let mut out = Word::empty();
        for pos in 0..w.len().min(self.positions.len()) {
            let (jj, i) = self.positions[pos];
            if jj == j {
                debug_assert_eq!(i as usize, out.len());
                out.push(w.bit(pos));
            }
        }
        out
    }

    /// Realizer of the `j`-th projection, with the exact modulus
    /// `m ↦ κ(loinv(κ_j)(m) + j)`: the first `m` bits of component `j` are
    /// all scheduled by the end of stage `loinv(κ_j)(m) + j`.
    pub fn projection(&self, j: usize) -> Realizer {
        let sched = self.clone();
        let kappa = self.kappa();
        let kappa_j = self.moduli[j].clone();
        let modulus = GrowthFn::from_fn(format!("proj-{j}"), false, move |m| {
            let stage = lower_semi_inverse_at(&kappa_j, m, DEFAULT_SEARCH_CEILING)?;
            kappa.eval(stage + j as u64)
        });
        Realizer::new(format!("pi-{j}"), modulus, move |w| Ok(sched.extract(w, j)))
    }

    /// Realizer of the embedding that replaces component `j` of a fixed
    /// tuple: reads `m ↦ κ_j(max(loinv(κ)(m) - j, 0))` bits of the new
    /// component name.
    pub fn embedding(&self, j: usize, fixed: Vec<Word>) -> Realizer {
        let sched = self.clone();
        let kappa = self.kappa();
        let kappa_j = self.moduli[j].clone();
        let modulus = GrowthFn::from_fn(format!("embed-{j}"), false, move |m| {
            let stage = lower_semi_inverse_at(&kappa, m, DEFAULT_SEARCH_CEILING)?;
            kappa_j.eval(stage.saturating_sub(j as u64))
        });
        Realizer::new(format!("iota-{j}"), modulus, move |w| {
            let mut names = fixed.clone();
            names[j] = w.clone();
            let bits = sched.positions.len() as u64;
            // Tolerate short prefixes: emit as much as determined.
            let mut out = Word::empty();
            for pos in 0..bits {
                let (jj, i) = sched.positions[pos as usize];
                if i as usize >= names[jj].len() {
                    break;
                }
                out.push(names[jj].bit(i as usize));
            }
            Ok(out)
        })
    }
}

/// Product of point representations along a schedule: precision `n` decodes
/// component `j < min(n, J)` at precision `n - j` (the scaled max metric).
pub fn countable_product(reps: &[Rep<Dyadic>], sched: &ProductSchedule) -> Rep<Vec<Dyadic>> {
    assert_eq!(reps.len(), sched.components());
    let reps_d: Vec<Rep<Dyadic>> = reps.to_vec();
    let reps_g: Vec<Rep<Dyadic>> = reps.to_vec();
    let sched_d = sched.clone();
    let sched_g = sched.clone();
    Rep::new(
        "countable-product",
        sched.kappa(),
        move |w, n| {
            let mut out = Vec::with_capacity(reps_d.len());
            for (j, rep) in reps_d.iter().enumerate() {
                let local = sched_d.extract(w, j);
                let prec = n.saturating_sub(j as u64);
                out.push(rep.decode(&local, prec)?);
            }
            Ok(out)
        },
        move |w| (0..reps_g.len()).all(|j| reps_g[j].in_domain(&sched_g.extract(w, j))),
    )
}

// ===== McShane–Whitney extension =====

/// Values of a partial function on a subset of a finite metric space.
#[derive(Debug, Clone)]
pub struct PartialFunction {
    /// (point index, value) — indices must be distinct.
    pub values: Vec<(usize, Dyadic)>,
}

/// The two canonical Lipschitz extensions and their midpoint, all exact.
///
/// `low(x) = max_z f(z) - L·d(z,x)` is the least `L`-Lipschitz extension,
/// `high(x) = min_z f(z) + L·d(z,x)` the greatest; any `L`-Lipschitz
/// extension is squeezed between them.
pub struct Extension {
    pub low: Vec<Dyadic>,
    pub high: Vec<Dyadic>,
    pub mid: Vec<Dyadic>,
}

pub fn mcshane_whitney(
    space: &FiniteMetricSpace,
    f: &PartialFunction,
    lipschitz: &Dyadic,
) -> Result<Extension, RepError> {
    if f.values.is_empty() {
        return Err(RepError::Invalid("extension of the empty function".into()));
    }
    let mut low = Vec::with_capacity(space.len());
    let mut high = Vec::with_capacity(space.len());
    let mut mid = Vec::with_capacity(space.len());
    for x in 0..space.len() {
        let mut lo: Option<Dyadic> = None;
        let mut hi: Option<Dyadic> = None;
        for (z, fz) in &f.values {
            let slack = lipschitz.clone() * space.dist(*z, x);
            let cand_lo = fz.clone() - slack.clone();
            let cand_hi = fz.clone() + slack;
            lo = Some(match lo {
                Some(v) => v.max(cand_lo),
                None => cand_lo,
            });
            hi = Some(match hi {
                Some(v) => v.min(cand_hi),
                None => cand_hi,
            });
        }
        let (lo, hi) = (lo.expect("nonempty"), hi.expect("nonempty"));
        if lo > hi {
            return Err(RepError::Invalid(format!(
                "no {lipschitz}-Lipschitz extension exists (gap at point {x})"
            )));
        }
        mid.push(Dyadic::midpoint(&lo, &hi));
        low.push(lo);
        high.push(hi);
    }
    Ok(Extension { low, high, mid })
}

// ===== hyperspace of compact subsets =====

/// The hyperspace name of a subset `A` lists, for every word `v` in the
/// domain of the standard representation, one bit at index
/// `word_to_nat(v)`: whether the point designated by `v` at level `n`
/// (where `|v| = κ(n)`) lies within `2^{-n}` of `A`. Its modulus is
/// `m ↦ 2^{κ(m)+1} - 1`, the index range of words up to length `κ(m)`.
pub struct Hyperspace {
    pub family: CoveringFamily,
    pub kappa: GrowthFn,
}

impl Hyperspace {
    pub fn new(family: CoveringFamily) -> Self {
        let kappa = crate::standard_rep::kappa_of(&family);
        Hyperspace { family, kappa }
    }

    pub fn modulus(&self) -> GrowthFn {
        let kappa = self.kappa.clone();
        GrowthFn::from_fn("hyper-modulus", true, move |m| {
            let k = kappa.eval(m)?;
            if k >= 63 {
                return Err(crate::moduli::GrowthError::Overflow("hyperspace index".into()));
            }
            Ok((1u64 << (k + 1)) - 1)
        })
    }

    /// Enumerate the valid names of length `κ(n)` as center-pick sequences,
    /// yielding `(global bit index, designated point)` per name.
    fn valid_names(&self, n: u64) -> Result<Vec<(u64, usize)>, RepError> {
        let mut out = Vec::new();
        let mut stack: Vec<(u64, Word)> = vec![(0, Word::empty())];
        while let Some((m, prefix)) = stack.pop() {
            if m > n {
                let idx = word_to_nat(&prefix)
                    .to_u64()
                    .ok_or(RepError::CodeLengthOverflow(prefix.len() as u64))?;
                let c = standard_decode(&self.family, &prefix, n)?;
                out.push((idx, c));
                continue;
            }
            let level = &self.family.levels[m as usize];
            for slot in 0..level.centers.len() {
                let mut w = prefix.clone();
                for b in (0..level.code_bits).rev() {
                    w.push(((slot as u64 >> b) & 1) as u8);
                }
                // Only descend into consistent prefixes.
                if standard_decode(&self.family, &w, m).is_ok() {
                    stack.push((m + 1, w));
                }
            }
        }
        Ok(out)
    }

    /// Name of the subset `A` carrying levels `0..=depth`.
    pub fn encode(&self, a: &[usize], depth: u64) -> Result<Word, RepError> {
        if a.is_empty() {
            return Err(RepError::Invalid("hyperspace of the empty set".into()));
        }
        let k = self
            .kappa
            .eval(depth)
            .map_err(|e| RepError::Invalid(format!("kappa: {e}")))?;
        if k >= 32 {
            return Err(RepError::CodeLengthOverflow(k));
        }
        let total = (1usize << (k + 1)) - 1;
        let mut bits = vec![0u8; total];
        for n in 0..=depth {
            let r = Dyadic::pow2_neg(n as u32);
            for (idx, c) in self.valid_names(n)? {
                let close = a.iter().any(|&p| self.family.space.within(c, p, &r));
                bits[idx as usize] = close as u8;
            }
        }
        Ok(Word::from_bits(bits))
    }

    /// Decode level `n`: the designated points of all valid level-`n`
    /// names whose bit is set. The result is within Hausdorff distance
    /// `2^{-n}` of the encoded set.
    pub fn decode(&self, w: &Word, n: u64) -> Result<Vec<usize>, RepError> {
        let names = self.valid_names(n)?;
        let mut out: Vec<usize> = Vec::new();
        for (idx, c) in names {
            if idx as usize >= w.len() {
                return Err(RepError::PrefixTooShort {
                    needed: idx as usize + 1,
                    got: w.len(),
                    n,
                });
            }
            if w.bit(idx as usize) == 1 && !out.contains(&c) {
                out.push(c);
            }
        }
        if out.is_empty() {
            return Err(RepError::Invalid(format!("no level-{n} bit set")));
        }
        out.sort_unstable();
        Ok(out)
    }
}

// ===== Lipschitz function codes =====

/// Level-`n` code of a `1`-Lipschitz `f: X → [0;1]`: quantise to
/// `f'_n = round(2^n f)/2^n`, store the root value on `n+1` bits and one
/// 4-bit delta per spanning-tree edge of the level-`n` net (edges join net
/// points within `2^{-n+2}`, so deltas stay in `{-6·2^-n, …, 6·2^-n}`).
pub struct LipschitzCoder {
    pub space: FiniteMetricSpace,
    pub n: u64,
    pub net: Vec<usize>,
    /// BFS order: (parent position in `net`, child position in `net`).
    pub tree: Vec<(usize, usize)>,
}

pub const DELTA_BITS: u64 = 4;
pub const DELTA_RANGE: i64 = 6;

impl LipschitzCoder {
    pub fn new(space: &FiniteMetricSpace, n: u64) -> Result<Self, RepError> {
        if n < 2 {
            return Err(RepError::Invalid("function codes start at level 2".into()));
        }
        let net = greedy_net(space, &Dyadic::pow2_neg(n as u32));
        let r = Dyadic::pow2_neg(n as u32 - 2);
        let mut order = vec![usize::MAX; net.len()];
        let mut tree = Vec::new();
        let mut queue = std::collections::VecDeque::from([0usize]);
        order[0] = 0;
        while let Some(u) = queue.pop_front() {
            for v in 0..net.len() {
                if order[v] == usize::MAX && space.within(net[u], net[v], &r) {
                    order[v] = 0;
                    tree.push((u, v));
                    queue.push_back(v);
                }
            }
        }
        if tree.len() + 1 != net.len() {
            return Err(RepError::Invalid(format!(
                "net not chain-connected at 2^-({} - 2)",
                n
            )));
        }
        Ok(LipschitzCoder { space: space.clone(), n, net, tree })
    }

    fn quantise(&self, v: &Dyadic) -> i64 {
        // round(2^n · v), clamped to [0, 2^n]
        let r = v.shl(self.n as u32).round_half_toward_zero();
        r.to_i64().unwrap_or(0).clamp(0, 1 << self.n)
    }

    /// Encode values `f` (one per space point, in `[0;1]`, `1`-Lipschitz).
    pub fn encode(&self, f: &[Dyadic]) -> Result<Word, RepError> {
        if f.len() != self.space.len() {
            return Err(RepError::Invalid("value vector length mismatch".into()));
        }
        let q: Vec<i64> = self.net.iter().map(|&p| self.quantise(&f[p])).collect();
        let mut w = Word::empty();
        for b in (0..=self.n).rev() {
            w.push(((q[0] >> b) & 1) as u8);
        }
        for &(u, v) in &self.tree {
            let delta = q[v] - q[u];
            if delta.abs() > DELTA_RANGE {
                return Err(RepError::DeltaOutOfRange { level: self.n, delta });
            }
            let packed = (delta + DELTA_RANGE) as u64;
            for b in (0..DELTA_BITS).rev() {
                w.push(((packed >> b) & 1) as u8);
            }
        }
        Ok(w)
    }

    /// Decode to quantised values at the net points: `(point, f'_n(point))`.
    pub fn decode(&self, w: &Word) -> Result<Vec<(usize, Dyadic)>, RepError> {
        let need = (self.n + 1 + DELTA_BITS * self.tree.len() as u64) as usize;
        if w.len() < need {
            return Err(RepError::PrefixTooShort { needed: need, got: w.len(), n: self.n });
        }
        let mut q = vec![0i64; self.net.len()];
        let mut offset = 0usize;
        for _ in 0..=self.n {
            q[0] = q[0] << 1 | w.bit(offset) as i64;
            offset += 1;
        }
        if q[0] > 1 << self.n {
            return Err(RepError::BlockNotInDomain { level: self.n, block: format!("root {}", q[0]) });
        }
        for &(u, v) in &self.tree {
            let mut packed = 0u64;
            for _ in 0..DELTA_BITS {
                packed = packed << 1 | w.bit(offset) as u64;
                offset += 1;
            }
            let delta = packed as i64 - DELTA_RANGE;
            if delta.abs() > DELTA_RANGE {
                return Err(RepError::DeltaOutOfRange { level: self.n, delta });
            }
            q[v] = q[u] + delta;
            if !(0..=1 << self.n).contains(&q[v]) {
                return Err(RepError::BlockNotInDomain {
                    level: self.n,
                    block: format!("value {} at net point {v}", q[v]),
                });
            }
        }
        Ok(self
            .net
            .iter()
            .zip(q)
            .map(|(&p, a)| (p, Dyadic::ratio(a, self.n as u32)))
            .collect())
    }

    /// Upper bound on the number of level-`n` codes:
    /// `(2^n + 1) · 13^(#net - 1)`.
    pub fn code_count_bound(&self) -> BigUint {
        let root = BigUint::from((1u64 << self.n) + 1);
        let deltas = BigUint::from(13u8).pow(self.net.len() as u32 - 1);
        root * deltas
    }
}

/// Evaluate a coded Lipschitz function at an abstractly given point of the
/// unit-interval grid stand-in: at each level `n`, decode the level code,
/// locate a grid point near `x`, walk to a net point within `2^{-n+1}`, and
/// output its quantised value. The results satisfy `|y_n - f(x)| ≤ 2^{-n+3}`.
pub fn apply_on_grid(
    coders: &[LipschitzCoder],
    codes: &[Word],
    x: &PointApprox,
) -> Result<Vec<Dyadic>, RepError> {
    if coders.len() != codes.len() {
        return Err(RepError::Invalid("one code per level required".into()));
    }
    let mut ys = Vec::with_capacity(coders.len());
    for (coder, code) in coders.iter().zip(codes) {
        let n = coder.n;
        let values = coder.decode(code)?;
        // Grid point nearest the approximation x.at(n+2).
        let space = &coder.space;
        let q = x.at(n + 2)?;
        let nearest = (0..space.len())
            .min_by(|&i, &j| {
                let di = (space.dist(0, i) - q.clone()).abs();
                let dj = (space.dist(0, j) - q.clone()).abs();
                di.cmp(&dj)
            })
            .expect("nonempty grid");
        // Net point within 2^{-n} of the nearest grid point (net maximality).
        let r = Dyadic::pow2_neg(n as u32);
        let (_, y) = values
            .iter()
            .find(|(p, _)| space.within(*p, nearest, &r))
            .ok_or(RepError::NoCoveringBall { level: n, point: nearest })?;
        ys.push(y.clone());
    }
    Ok(ys)
}

/// Full application realizer: compose the levelwise evaluation with the
/// signed-digit encoder, producing a signed name of `f(x)`.
pub fn apply_to_signed(
    coders: &[LipschitzCoder],
    codes: &[Word],
    x: &PointApprox,
    digits: u64,
) -> Result<Vec<SignedDigit>, RepError> {
    let ys = apply_on_grid(coders, codes, x)?;
    // apply_on_grid yields y at levels coder[0].n, …; approx_to_signed wants
    // |y_m - f(x)| ≤ 2^{3-m} indexed from 0. Pad with the first value.
    let base = coders.first().map(|c| c.n).unwrap_or(0) as usize;
    let mut seq = vec![ys.first().cloned().unwrap_or_else(Dyadic::zero); base];
    seq.extend(ys);
    approx_to_signed(&seq, digits)
}
