//! The standard representation of a finite metric space and its
//! position-scheduled subsampling.
//!
//! Level `n` of a covering family is a minimum covering of the space by
//! closed balls of radius `2^{-(n+1)}`; its centers are
//! addressed by fixed-width lexicographic codes of `⌈log₂ #centers⌉` bits.
//! A standard name concatenates one code per level, subject to the domain
//! condition that the designated centers stay pairwise consistent. The
//! scheduled variant keeps only levels `φ(0) < φ(1) < …`, where `φ` is cut
//! greedily so that the total code length through scale `n` stays within a
//! constant factor of the entropy at scale `n`.

use crate::cantor::Word;
use crate::dyadic::Dyadic;
use crate::entropy::{ceil_log2, covering_number, FiniteMetricSpace};
use crate::moduli::GrowthFn;
use crate::rep::{Rep, RepError};
use serde::{Deserialize, Serialize};

/// One level of a covering family: centers of closed balls of radius
/// `2^-(radius_exp)` covering the space, in increasing index order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Level {
    pub radius_exp: u32,
    pub centers: Vec<usize>,
    pub code_bits: u64,
    /// Whether the covering was certified minimum (then `code_bits` is the
    /// entropy `η(radius_exp)` exactly).
    pub exact: bool,
}

#[derive(Clone)]
pub struct CoveringFamily {
    pub space: FiniteMetricSpace,
    /// `levels[n]` covers at radius `2^{-(n+1)}`.
    pub levels: Vec<Level>,
}

/// Build levels `0 ..= depth`, each a covering at radius `2^{-(n+1)}`.
pub fn build_covering_family(
    space: &FiniteMetricSpace,
    depth: u64,
    budget: u64,
) -> CoveringFamily {
    let levels = (0..=depth)
        .map(|n| {
            let radius_exp = n as u32 + 1;
            let bracket = covering_number(space, &Dyadic::pow2_neg(radius_exp), budget);
            let mut centers = bracket.witness;
            centers.sort_unstable();
            Level {
                radius_exp,
                code_bits: ceil_log2(centers.len().max(1) as u64),
                centers,
                exact: bracket.exact,
            }
        })
        .collect();
    CoveringFamily { space: space.clone(), levels }
}

impl CoveringFamily {
    pub fn depth(&self) -> u64 {
        self.levels.len() as u64 - 1
    }

    pub fn all_exact(&self) -> bool {
        self.levels.iter().all(|l| l.exact)
    }

    /// Entropy at scale `n+1` as witnessed by level `n`.
    pub fn eta(&self, n: u64) -> u64 {
        self.levels[n as usize].code_bits
    }

    fn code_of(&self, n: u64, slot: usize) -> Word {
        let bits = self.levels[n as usize].code_bits;
        let mut w = Word::empty();
        for b in (0..bits).rev() {
            w.push(((slot as u64 >> b) & 1) as u8);
        }
        w
    }

    fn read_code(&self, word: &Word, offset: usize, n: u64) -> Result<(usize, usize), RepError> {
        let bits = self.levels[n as usize].code_bits as usize;
        if word.len() < offset + bits {
            return Err(RepError::PrefixTooShort { needed: offset + bits, got: word.len(), n });
        }
        let mut slot = 0usize;
        for i in 0..bits {
            slot = slot << 1 | word.bit(offset + i) as usize;
        }
        Ok((slot, offset + bits))
    }
}

fn check_pairwise(
    space: &FiniteMetricSpace,
    picks: &[(u32, usize)], // (radius_exp, point)
) -> Result<(), RepError> {
    for (i, &(ei, ci)) in picks.iter().enumerate() {
        for &(ej, cj) in picks.iter().skip(i + 1) {
            let slack = Dyadic::pow2_neg(ei) + Dyadic::pow2_neg(ej);
            if space.dist(ci, cj) > slack {
                return Err(RepError::InconsistentBlocks {
                    i: i as u64,
                    j: (i + 1) as u64,
                    vi: space.label(ci).to_string(),
                    vj: space.label(cj).to_string(),
                });
            }
        }
    }
    Ok(())
}

/// Designated center at level `n`: decodes blocks `0 ..= n` and returns the
/// last one, a point within `2^{-(n+1)}` of everything the name describes.
pub fn standard_decode(family: &CoveringFamily, word: &Word, n: u64) -> Result<usize, RepError> {
    if n > family.depth() {
        return Err(RepError::Invalid(format!("level {n} beyond family depth {}", family.depth())));
    }
    let mut offset = 0usize;
    let mut picks: Vec<(u32, usize)> = Vec::new();
    for m in 0..=n {
        let (slot, next) = family.read_code(word, offset, m)?;
        offset = next;
        let level = &family.levels[m as usize];
        if slot >= level.centers.len() {
            return Err(RepError::BlockNotInDomain { level: m, block: format!("slot {slot}") });
        }
        picks.push((level.radius_exp, level.centers[slot]));
    }
    check_pairwise(&family.space, &picks)?;
    Ok(picks.last().expect("n + 1 picks").1)
}

/// Canonical name of point `x` through level `depth`: at each level the
/// center equal to `x` if present, otherwise the least center within range.
pub fn standard_encode(family: &CoveringFamily, x: usize, depth: u64) -> Result<Word, RepError> {
    let mut out = Word::empty();
    for n in 0..=depth.min(family.depth()) {
        let level = &family.levels[n as usize];
        let r = Dyadic::pow2_neg(level.radius_exp);
        let slot = level
            .centers
            .iter()
            .position(|&c| c == x)
            .or_else(|| level.centers.iter().position(|&c| family.space.within(c, x, &r)))
            .ok_or(RepError::NoCoveringBall { level: n, point: x })?;
        out.extend(&family.code_of(n, slot));
    }
    Ok(out)
}

/// Cumulative code length: `κ(n) = Σ_{m ≤ n} code_bits(m)`.
pub fn kappa_of(family: &CoveringFamily) -> GrowthFn {
    let mut acc = 0u64;
    let table: Vec<u64> = family
        .levels
        .iter()
        .map(|l| {
            acc += l.code_bits;
            acc
        })
        .collect();
    GrowthFn::table(table).expect("cumulative bits are monotone")
}

pub fn standard_rep(family: &CoveringFamily) -> Rep<usize> {
    let f = family.clone();
    let g = family.clone();
    Rep::new(
        "standard",
        kappa_of(family),
        move |w, n| standard_decode(&f, w, n),
        move |w| standard_decode(&g, w, g.depth()).is_ok(),
    )
}

// ===== run-cut schedules =====

/// A strictly increasing schedule `φ(0) = 0 < φ(1) < …` cut so that the
/// entropy grows by at least `c` but at most `c²` across each run.
/// `c = c_num / c_den > 1` is rational; all comparisons cross-multiplied.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhiSchedule {
    pub values: Vec<u64>,
    pub c_num: u64,
    pub c_den: u64,
}

impl PhiSchedule {
    pub fn phi(&self) -> GrowthFn {
        GrowthFn::table(self.values.clone()).expect("cuts are increasing")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Least `m` with `φ(m) ≥ n` (the lower semi-inverse on the cut range).
    pub fn loinv(&self, n: u64) -> Option<u64> {
        self.values.iter().position(|&v| v >= n).map(|m| m as u64)
    }
}

/// Greedy maximum-skip run cutter: from the last cut `p`, jump to the
/// largest `v ≤ n_max` with
///   `η(v) ≤ c²·η(p+1)`  (runs span at most a `c²` factor),
///   `c·η(p) ≤ η(v)`     (consecutive cuts grow by `c`),
///   `c·η(p+1) ≤ η(v+1)` (…also one position in).
/// Stops when no jump inside `n_max` qualifies, returning the finite cut.
pub fn run_cut_schedule(
    eta: &GrowthFn,
    c_num: u64,
    c_den: u64,
    n_max: u64,
) -> Result<PhiSchedule, RepError> {
    if c_num <= c_den || c_den == 0 {
        return Err(RepError::Invalid(format!("need c > 1, got {c_num}/{c_den}")));
    }
    let e = |n: u64| -> Result<u128, RepError> { Ok(eta.eval(n)? as u128) };
    let (cn, cd) = (c_num as u128, c_den as u128);
    let mut values = vec![0u64];
    loop {
        let p = *values.last().expect("nonempty");
        let (ep, ep1) = (e(p)?, e(p + 1)?);
        let mut found = None;
        for v in (p + 1..=n_max).rev() {
            let (ev, ev1) = (e(v)?, e(v + 1)?);
            let within_run = ev * cd * cd <= cn * cn * ep1;
            let grows = cn * ep <= cd * ev;
            let grows_shifted = cn * ep1 <= cd * ev1;
            if within_run && grows && grows_shifted {
                found = Some(v);
                break;
            }
        }
        match found {
            Some(v) => values.push(v),
            None => break,
        }
    }
    Ok(PhiSchedule { values, c_num, c_den })
}

/// Post-hoc audit of a schedule against an entropy function: the three run
/// conditions per cut, plus the summability bound
/// `Σ_{m ≤ loinv(φ)(n)} η(φ(m)) ≤ c³/(c-1) · η(n)` for every `n ≤ n_max`.
#[derive(Debug, Clone, Serialize)]
pub struct ScheduleAudit {
    pub run_factor_ok: bool,
    pub growth_ok: bool,
    pub growth_shifted_ok: bool,
    pub sum_bound_ok: bool,
    pub first_violation: Option<String>,
}

pub fn verify_schedule(
    eta: &GrowthFn,
    sched: &PhiSchedule,
    n_max: u64,
) -> Result<ScheduleAudit, RepError> {
    let (cn, cd) = (sched.c_num as u128, sched.c_den as u128);
    let e = |n: u64| -> Result<u128, RepError> { Ok(eta.eval(n)? as u128) };
    let mut audit = ScheduleAudit {
        run_factor_ok: true,
        growth_ok: true,
        growth_shifted_ok: true,
        sum_bound_ok: true,
        first_violation: None,
    };
    let note = |field: &mut bool, msg: String, first: &mut Option<String>| {
        *field = false;
        first.get_or_insert(msg);
    };
    for w in sched.values.windows(2) {
        let (p, v) = (w[0], w[1]);
        if e(v)? * cd * cd > cn * cn * e(p + 1)? {
            note(
                &mut audit.run_factor_ok,
                format!("run factor fails at cut {p} -> {v}"),
                &mut audit.first_violation,
            );
        }
        if cn * e(p)? > cd * e(v)? {
            note(
                &mut audit.growth_ok,
                format!("growth fails at cut {p} -> {v}"),
                &mut audit.first_violation,
            );
        }
        if cn * e(p + 1)? > cd * e(v + 1)? {
            note(
                &mut audit.growth_shifted_ok,
                format!("shifted growth fails at cut {p} -> {v}"),
                &mut audit.first_violation,
            );
        }
    }
    // Σ η(φ(m)) ≤ c³/(c-1)·η(n) ⟺ Σ·cd²·(cn-cd) ≤ cn³·η(n).
    let top = *sched.values.last().expect("nonempty schedule");
    for n in 1..=n_max.min(top) {
        let cut = match sched.loinv(n) {
            Some(m) => m,
            None => break,
        };
        let mut sum = 0u128;
        for m in 0..=cut {
            sum += e(sched.values[m as usize])?;
        }
        if sum * cd * cd * (cn - cd) > cn * cn * cn * e(n)? {
            note(
                &mut audit.sum_bound_ok,
                format!("sum bound fails at n = {n}"),
                &mut audit.first_violation,
            );
        }
    }
    Ok(audit)
}

// ===== scheduled standard representation =====

/// Decode the scheduled name at precision `n`: blocks are the family levels
/// `φ(0), φ(1), …`, and precision `n` needs blocks through the first cut
/// `φ(m) ≥ n` (whose center is within `2^{-(φ(m)+1)} ≤ 2^{-n}`).
pub fn subsampled_decode(
    family: &CoveringFamily,
    sched: &PhiSchedule,
    word: &Word,
    n: u64,
) -> Result<usize, RepError> {
    let cut = sched
        .loinv(n)
        .ok_or_else(|| RepError::Invalid(format!("precision {n} beyond schedule")))?;
    let mut offset = 0usize;
    let mut picks: Vec<(u32, usize)> = Vec::new();
    for m in 0..=cut {
        let lvl_idx = sched.values[m as usize];
        if lvl_idx > family.depth() {
            return Err(RepError::Invalid(format!(
                "schedule level {lvl_idx} beyond family depth {}",
                family.depth()
            )));
        }
        let (slot, next) = family.read_code(word, offset, lvl_idx)?;
        offset = next;
        let level = &family.levels[lvl_idx as usize];
        if slot >= level.centers.len() {
            return Err(RepError::BlockNotInDomain { level: lvl_idx, block: format!("slot {slot}") });
        }
        picks.push((level.radius_exp, level.centers[slot]));
    }
    check_pairwise(&family.space, &picks)?;
    Ok(picks.last().expect("cut + 1 picks").1)
}

pub fn subsampled_encode(
    family: &CoveringFamily,
    sched: &PhiSchedule,
    x: usize,
    blocks: u64,
) -> Result<Word, RepError> {
    let mut out = Word::empty();
    for m in 0..blocks.min(sched.values.len() as u64) {
        let lvl_idx = sched.values[m as usize];
        let level = &family.levels[lvl_idx as usize];
        let r = Dyadic::pow2_neg(level.radius_exp);
        let slot = level
            .centers
            .iter()
            .position(|&c| c == x)
            .or_else(|| level.centers.iter().position(|&c| family.space.within(c, x, &r)))
            .ok_or(RepError::NoCoveringBall { level: lvl_idx, point: x })?;
        out.extend(&family.code_of(lvl_idx, slot));
    }
    Ok(out)
}

/// Modulus of the scheduled representation:
/// `κ^φ(n) = Σ_{m ≤ loinv(φ)(n)} code_bits(φ(m))`.
pub fn kappa_phi_of(family: &CoveringFamily, sched: &PhiSchedule) -> GrowthFn {
    let top = (*sched.values.last().expect("nonempty schedule")).min(family.depth());
    let mut table = Vec::with_capacity(top as usize + 1);
    for n in 0..=top {
        let cut = sched.loinv(n).expect("n ≤ last cut");
        let mut acc = 0u64;
        for m in 0..=cut {
            acc += family.levels[sched.values[m as usize] as usize].code_bits;
        }
        table.push(acc);
    }
    GrowthFn::table(table).expect("cumulative bits are monotone")
}

pub fn subsampled_rep(family: &CoveringFamily, sched: &PhiSchedule) -> Rep<usize> {
    let (f, s) = (family.clone(), sched.clone());
    let (g, t) = (family.clone(), sched.clone());
    Rep::new(
        format!("standard-scheduled(c={}/{})", sched.c_num, sched.c_den),
        kappa_phi_of(family, sched),
        move |w, n| subsampled_decode(&f, &s, w, n),
        move |w| {
            let top = *t.values.last().expect("nonempty");
            subsampled_decode(&g, &t, w, top).is_ok()
        },
    )
}

// ===== JSON =====

#[derive(Serialize, Deserialize)]
struct FamilyJson {
    space: serde_json::Value,
    levels: Vec<Level>,
}

pub fn family_to_json(family: &CoveringFamily) -> String {
    let doc = FamilyJson {
        space: serde_json::from_str(&family.space.to_json()).expect("own output parses"),
        levels: family.levels.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serialises")
}

pub fn family_from_json(text: &str) -> Result<CoveringFamily, RepError> {
    let doc: FamilyJson =
        serde_json::from_str(text).map_err(|e| RepError::Invalid(format!("json: {e}")))?;
    let space = FiniteMetricSpace::from_json(&doc.space.to_string())?;
    for l in &doc.levels {
        if l.centers.iter().any(|&c| c >= space.len()) {
            return Err(RepError::Invalid("center index out of range".into()));
        }
        // Re-verify the covering property of untrusted levels.
        let r = Dyadic::pow2_neg(l.radius_exp);
        for p in 0..space.len() {
            if !l.centers.iter().any(|&c| space.within(c, p, &r)) {
                return Err(RepError::NoCoveringBall { level: l.radius_exp as u64, point: p });
            }
        }
    }
    Ok(CoveringFamily { space, levels: doc.levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::DEFAULT_NODE_BUDGET;

    fn grid_family(k: u32, depth: u64) -> CoveringFamily {
        build_covering_family(&FiniteMetricSpace::grid_pow2(k), depth, DEFAULT_NODE_BUDGET)
    }

    #[test]
    fn encode_decode_round_trip_designates_close_centers() {
        let family = grid_family(6, 5);
        assert!(family.all_exact());
        for x in [0usize, 1, 17, 32, 64] {
            let w = standard_encode(&family, x, 5).unwrap();
            for n in 0..=5u64 {
                let c = standard_decode(&family, &w, n).unwrap();
                let r = Dyadic::pow2_neg(n as u32 + 1);
                assert!(family.space.within(c, x, &r), "x={x} n={n} c={c}");
            }
        }
    }

    #[test]
    fn decode_rejects_out_of_range_and_inconsistent_codes() {
        let family = grid_family(4, 3);
        // All-ones word: level 0 has 1 center? code 0 bits... craft manually.
        let w = standard_encode(&family, 0, 3).unwrap();
        // Append garbage so a later level picks a far-away center: encode 16
        // (the far end) at levels 2..3 after 0 at levels 0..1.
        let w0 = standard_encode(&family, 0, 1).unwrap();
        let w16 = standard_encode(&family, 16, 3).unwrap();
        let mut frank = w0.clone();
        for i in w0.len()..w16.len() {
            frank.push(w16.bit(i));
        }
        assert!(standard_decode(&family, &w, 3).is_ok());
        assert!(matches!(
            standard_decode(&family, &frank, 3),
            Err(RepError::InconsistentBlocks { .. }) | Err(RepError::BlockNotInDomain { .. })
        ));
    }

    #[test]
    fn kappa_accumulates_code_bits() {
        let family = grid_family(6, 4);
        let kappa = kappa_of(&family);
        let mut acc = 0;
        for n in 0..=4u64 {
            acc += family.eta(n);
            assert_eq!(kappa.eval(n).unwrap(), acc);
        }
    }

    #[test]
    fn run_cut_on_identity_entropy() {
        // η̃ = id, c = 3/2: cuts 0, 2, 6, 15, … (largest v with v ≤ (9/4)(p+1)).
        let sched = run_cut_schedule(&GrowthFn::id(), 3, 2, 500).unwrap();
        assert_eq!(&sched.values[..4], &[0, 2, 6, 15]);
        let audit = verify_schedule(&GrowthFn::id(), &sched, 400).unwrap();
        assert!(audit.run_factor_ok, "{:?}", audit.first_violation);
        assert!(audit.growth_ok);
        assert!(audit.growth_shifted_ok);
        assert!(audit.sum_bound_ok, "{:?}", audit.first_violation);
    }

    #[test]
    fn run_cut_rejects_c_not_above_one() {
        assert!(run_cut_schedule(&GrowthFn::id(), 2, 2, 100).is_err());
    }

    #[test]
    fn scheduled_rep_on_grid_meets_linear_budget() {
        // Grid entropy η(n) = n - 1 (η(n+1) = n): the 27/4 bound of the
        // run-cut construction says κ^φ(n) ≤ 27/4·η(n+1).
        let family = grid_family(8, 7);
        let eta_shifted = GrowthFn::from_fn("eta(n+1)", false, {
            let family = family.clone();
            move |n| {
                if n as usize >= family.levels.len() {
                    return Err(crate::moduli::GrowthError::Overflow("beyond family".into()));
                }
                Ok(family.eta(n))
            }
        });
        // n_max 6: the search probes η at v+1, which must stay inside the family.
        let sched = run_cut_schedule(&eta_shifted, 3, 2, 6).unwrap();
        let kappa_phi = kappa_phi_of(&family, &sched);
        let top = *sched.values.last().unwrap();
        for n in 1..=top {
            let k = kappa_phi.eval(n).unwrap();
            let eta_n1 = family.eta(n); // η(n+1)
            assert!(k >= eta_n1, "n={n}: κ^φ={k} < η(n+1)={eta_n1}");
            assert!(4 * k <= 27 * eta_n1.max(1), "n={n}: κ^φ={k} vs 27/4·{eta_n1}");
        }
        // And the names decode correctly.
        for x in [0usize, 100, 256] {
            let w = subsampled_encode(&family, &sched, x, sched.values.len() as u64).unwrap();
            for n in 1..=top {
                let c = subsampled_decode(&family, &sched, &w, n).unwrap();
                assert!(family.space.within(c, x, &Dyadic::pow2_neg(n as u32)), "x={x} n={n}");
            }
        }
    }

    #[test]
    fn family_json_round_trip() {
        let family = grid_family(3, 2);
        let text = family_to_json(&family);
        let back = family_from_json(&text).unwrap();
        assert_eq!(back.levels.len(), family.levels.len());
        for (a, b) in back.levels.iter().zip(&family.levels) {
            assert_eq!(a.centers, b.centers);
        }
        // Corrupt a center list: no longer a covering.
        let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        doc["levels"][1]["centers"] = serde_json::json!([0]);
        assert!(family_from_json(&doc.to_string()).is_err());
    }
}
