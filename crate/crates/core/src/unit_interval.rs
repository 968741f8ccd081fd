//! Digit-stream representations of the unit interval.
//!
//! Four representations with very different quantitative behaviour:
//!
//! * **binary** — plain binary expansion; optimal modulus but no continuous
//!   encoder (kept as a foil for the admissibility audits);
//! * **rational block** — self-delimiting numerator/denominator pairs; fails
//!   to be uniformly continuous (no modulus at all);
//! * **dyadic block** — self-delimiting dyadic approximations; modulus
//!   `2(n+1)(n+2)`, quadratically worse than the entropy;
//! * **signed digit** — balanced digits in `{-1, 0, +1}`, two wire bits per
//!   digit; modulus `2n`, linear in the entropy, and closed under the
//!   averaging transducer.
//!
//! Plus the position-scheduled signed representation, which spends the
//! two-bit signed digits only on a sparse set of positions.

use crate::cantor::{delimit, nat_to_word, undelimit, word_to_nat, CantorError, Stream, Word};
use crate::dyadic::Dyadic;
use crate::moduli::{upper_semi_inverse_at, GrowthFn, DEFAULT_SEARCH_CEILING};
use crate::rep::{Rep, RepError};
use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

/// A balanced signed digit. On the wire each digit occupies two bits:
/// `00 ↦ 0`, `01 ↦ +1`, `10 ↦ -1`; the pair `11` is illegal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignedDigit {
    Minus,
    Zero,
    Plus,
}

impl SignedDigit {
    pub fn value(self) -> i8 {
        match self {
            SignedDigit::Minus => -1,
            SignedDigit::Zero => 0,
            SignedDigit::Plus => 1,
        }
    }

    pub fn from_value(v: i8) -> Option<Self> {
        match v {
            -1 => Some(SignedDigit::Minus),
            0 => Some(SignedDigit::Zero),
            1 => Some(SignedDigit::Plus),
            _ => None,
        }
    }

    pub fn wire_bits(self) -> (u8, u8) {
        match self {
            SignedDigit::Zero => (0, 0),
            SignedDigit::Plus => (0, 1),
            SignedDigit::Minus => (1, 0),
        }
    }

    pub fn from_wire(hi: u8, lo: u8, at: usize) -> Result<Self, RepError> {
        match (hi, lo) {
            (0, 0) => Ok(SignedDigit::Zero),
            (0, 1) => Ok(SignedDigit::Plus),
            (1, 0) => Ok(SignedDigit::Minus),
            _ => Err(RepError::IllegalDigitPair(at)),
        }
    }

    /// Display character: '-', '0', '+'.
    pub fn glyph(self) -> char {
        match self {
            SignedDigit::Minus => '-',
            SignedDigit::Zero => '0',
            SignedDigit::Plus => '+',
        }
    }
}

/// An abstract point known through dyadic approximations: `at(n)` is within
/// `2^-n` of the point. Queried values are cached and cross-checked, so an
/// inconsistent oracle is detected at the first contradictory pair.
#[derive(Clone)]
pub struct PointApprox {
    at: Arc<dyn Fn(u64) -> Result<Dyadic, RepError> + Send + Sync>,
    probed: Arc<Mutex<BTreeMap<u64, Dyadic>>>,
}

impl PointApprox {
    pub fn new<F>(at: F) -> Self
    where
        F: Fn(u64) -> Result<Dyadic, RepError> + Send + Sync + 'static,
    {
        PointApprox { at: Arc::new(at), probed: Arc::new(Mutex::new(BTreeMap::new())) }
    }

    /// An exactly known point.
    pub fn exact(x: Dyadic) -> Self {
        PointApprox::new(move |_| Ok(x.clone()))
    }

    pub fn at(&self, n: u64) -> Result<Dyadic, RepError> {
        let v = (self.at)(n)?;
        let mut probed = self.probed.lock().unwrap();
        if let Some(old) = probed.get(&n) {
            if *old != v {
                return Err(RepError::InconsistentSequence {
                    n,
                    m: n,
                    gap: format!("{} vs {}", old, v),
                });
            }
            return Ok(v);
        }
        for (&m, u) in probed.iter() {
            let slack = Dyadic::pow2_neg(n.min(u32::MAX as u64) as u32)
                + Dyadic::pow2_neg(m.min(u32::MAX as u64) as u32);
            let gap = (v.clone() - u.clone()).abs();
            if gap > slack {
                return Err(RepError::InconsistentSequence { n, m, gap: gap.to_string() });
            }
        }
        probed.insert(n, v.clone());
        Ok(v)
    }
}

// ===== binary representation =====

/// Value of the first `n` binary digits: `Σ_{m<n} b_m 2^{-m-1}`. The true
/// point lies within `2^-n` above this.
pub fn binary_decode(prefix: &Word, n: u64) -> Result<Dyadic, RepError> {
    let n = n as usize;
    if prefix.len() < n {
        return Err(RepError::PrefixTooShort { needed: n, got: prefix.len(), n: n as u64 });
    }
    let mut acc = Dyadic::zero();
    for m in 0..n {
        if prefix.bit(m) == 1 {
            acc = acc + Dyadic::pow2_neg(m as u32 + 1);
        }
    }
    Ok(acc)
}

pub fn binary_rep() -> Rep<Dyadic> {
    Rep::new(
        "binary",
        GrowthFn::id(),
        binary_decode,
        |_| true,
    )
}

// ===== rational block representation =====

/// Parse the `k`-th rational approximation `(a_k, c_k)` from a prefix of
/// alternating self-delimiting numerator/denominator blocks; checks the
/// pairwise consistency `|a_i/c_i - a_j/c_j| ≤ 2^-i + 2^-j` of all complete
/// pairs (exact cross-multiplied comparison).
pub fn rational_decode_fraction(prefix: &Word, k: u64) -> Result<(BigUint, BigUint), RepError> {
    let mut offset = 0usize;
    let mut fractions: Vec<(BigUint, BigUint)> = Vec::new();
    while fractions.len() <= k as usize {
        let (a, next) = undelimit(prefix, offset)?;
        let (c, next) = undelimit(prefix, next)?;
        offset = next;
        let num = word_to_nat(&a);
        let den = word_to_nat(&c);
        if den.is_zero() {
            return Err(RepError::Invalid(format!(
                "denominator block {} encodes zero",
                fractions.len()
            )));
        }
        fractions.push((num, den));
    }
    for (i, (ai, ci)) in fractions.iter().enumerate() {
        for (j, (aj, cj)) in fractions.iter().enumerate().skip(i + 1) {
            // |a_i/c_i - a_j/c_j| <= 2^-i + 2^-j, cross-multiplied by
            // c_i c_j 2^(i+j) ... keep it exact with BigInt.
            let lhs = (BigInt::from(ai.clone()) * BigInt::from(cj.clone())
                - BigInt::from(aj.clone()) * BigInt::from(ci.clone()))
            .abs()
                << (i + j);
            let rhs = BigInt::from(ci.clone() * cj.clone())
                * ((BigInt::from(1) << j) + (BigInt::from(1) << i));
            if lhs > rhs {
                return Err(RepError::InconsistentBlocks {
                    i: i as u64,
                    j: j as u64,
                    vi: format!("{}/{}", ai, ci),
                    vj: format!("{}/{}", aj, cj),
                });
            }
        }
    }
    Ok(fractions.pop().expect("at least one fraction"))
}

/// Dyadic approximation of the `k`-th rational block, within `2^-k-1` of the
/// fraction and hence within `2^-k + 2^-k-1` of the point.
pub fn rational_decode(prefix: &Word, k: u64) -> Result<Dyadic, RepError> {
    let (a, c) = rational_decode_fraction(prefix, k)?;
    let shift = k as u32 + 1;
    let scaled = (a << shift) / c;
    Ok(Dyadic::new(BigInt::from(scaled), shift))
}

/// Encode a name prefix from exact fractions (used to build rival names in
/// the audits; the representation has no modulus, so no `Rep` is exposed).
pub fn rational_encode_word(fractions: &[(u64, u64)]) -> Word {
    let mut out = Word::empty();
    for &(a, c) in fractions {
        out.extend(&delimit(&nat_to_word(&BigUint::from(a))));
        out.extend(&delimit(&nat_to_word(&BigUint::from(c))));
    }
    out
}

// ===== dyadic block representation =====

/// Declared modulus of the dyadic block representation: `2(n+1)(n+2)`.
pub fn dyadic_block_modulus() -> GrowthFn {
    GrowthFn::from_fn("2(n+1)(n+2)", true, |n| {
        (n + 1)
            .checked_mul(n + 2)
            .and_then(|x| x.checked_mul(2))
            .ok_or_else(|| crate::moduli::GrowthError::Overflow("2(n+1)(n+2)".into()))
    })
}

/// Parse blocks `a_0, a_1, …` and return `a_n / 2^n`, checking `a_m ≤ 2^m`
/// and the pairwise admissibility `|a_i/2^i - a_j/2^j| ≤ 2^-i + 2^-j`.
pub fn dyadic_decode(prefix: &Word, n: u64) -> Result<Dyadic, RepError> {
    let mut offset = 0usize;
    let mut approx: Vec<Dyadic> = Vec::new();
    while approx.len() <= n as usize {
        let (blk, next) = undelimit(prefix, offset)?;
        offset = next;
        let m = approx.len() as u64;
        let a = word_to_nat(&blk);
        if a > (BigUint::from(1u8) << m as u32) {
            return Err(RepError::BlockNotInDomain { level: m, block: format!("{}", a) });
        }
        approx.push(Dyadic::new(BigInt::from(a), m as u32));
    }
    for i in 0..approx.len() {
        for j in (i + 1)..approx.len() {
            let slack = Dyadic::pow2_neg(i as u32) + Dyadic::pow2_neg(j as u32);
            if (approx[i].clone() - approx[j].clone()).abs() > slack {
                return Err(RepError::InconsistentBlocks {
                    i: i as u64,
                    j: j as u64,
                    vi: approx[i].to_string(),
                    vj: approx[j].to_string(),
                });
            }
        }
    }
    Ok(approx.pop().expect("n + 1 blocks parsed"))
}

/// The block sequence of the canonical dyadic name: `a_m = round(at(m+1)·2^m)`
/// clamped to `[0, 2^m]`, which keeps every pair of blocks admissible.
pub fn dyadic_encode_word(x: &PointApprox, blocks: u64) -> Result<Word, RepError> {
    let mut out = Word::empty();
    for m in 0..blocks {
        let r = x.at(m + 1)?;
        let scaled = r.shl(m as u32);
        let mut a = scaled.round_half_toward_zero();
        if a.is_negative() {
            a = BigInt::zero();
        }
        let cap = BigInt::from(1) << m as u32;
        if a > cap {
            a = cap;
        }
        out.extend(&delimit(&nat_to_word(&a.to_biguint().expect("clamped to ≥ 0"))));
    }
    Ok(out)
}

/// Stream view of the canonical dyadic name: enough blocks are generated to
/// satisfy any prefix request up to the horizon.
pub fn dyadic_encode(x: &PointApprox, horizon_bits: usize) -> Stream {
    let x = x.clone();
    Stream::new(horizon_bits, move |want| {
        let mut blocks = 1u64;
        loop {
            let w = dyadic_encode_word(&x, blocks)
                .map_err(|e| CantorError::Generator(e.to_string()))?;
            if w.len() >= want {
                return Ok(w);
            }
            blocks += 1;
        }
    })
}

pub fn dyadic_rep() -> Rep<Dyadic> {
    Rep::new(
        "dyadic-block",
        dyadic_block_modulus(),
        dyadic_decode,
        |w| {
            // Every complete block must stay admissible.
            let (blocks, _) = crate::cantor::undelimit_all(w);
            if blocks.is_empty() {
                return true;
            }
            dyadic_decode(w, blocks.len() as u64 - 1).is_ok()
        },
    )
}

// ===== signed digit representation =====

/// Digits of a signed name prefix (two wire bits per digit).
pub fn signed_digits(prefix: &Word) -> Result<Vec<SignedDigit>, RepError> {
    let mut digits = Vec::with_capacity(prefix.len() / 2);
    let mut i = 0;
    while i + 1 < prefix.len() {
        digits.push(SignedDigit::from_wire(prefix.bit(i), prefix.bit(i + 1), i / 2)?);
        i += 2;
    }
    Ok(digits)
}

pub fn signed_digits_to_word(digits: &[SignedDigit]) -> Word {
    let mut w = Word::empty();
    for d in digits {
        let (hi, lo) = d.wire_bits();
        w.push(hi);
        w.push(lo);
    }
    w
}

/// Value of the first `n` signed digits: `1/2 + Σ_{m<n} d_m 2^{-m-2}`.
/// The point named lies within `2^{-n-1}` of this.
pub fn signed_decode(prefix: &Word, n: u64) -> Result<Dyadic, RepError> {
    let n = n as usize;
    if prefix.len() < 2 * n {
        return Err(RepError::PrefixTooShort { needed: 2 * n, got: prefix.len(), n: n as u64 });
    }
    let digits = signed_digits(&prefix.prefix(2 * n))?;
    let mut acc = Dyadic::ratio(1, 1);
    for (m, d) in digits.iter().enumerate() {
        match d {
            SignedDigit::Plus => acc = acc + Dyadic::pow2_neg(m as u32 + 2),
            SignedDigit::Minus => acc = acc - Dyadic::pow2_neg(m as u32 + 2),
            SignedDigit::Zero => {}
        }
    }
    Ok(acc)
}

pub fn signed_rep() -> Rep<Dyadic> {
    Rep::new(
        "signed-digit",
        GrowthFn::linear(0, 2),
        signed_decode,
        |w| signed_digits(&w.prefix(w.len() & !1)).is_ok(),
    )
}

/// Shared interval-tracking digit extractor. `at(n)` must be within
/// `2^(slack - n)` of the point; digit `k` queries `at(k + 3 + slack)`.
///
/// Invariant: after emitting digits `d_0 … d_{k-1}` with partial value
/// `r_k = 1/2 + Σ d_m 2^{-m-2}`, the point lies in `[r_k ± 2^{-k-1}]`. Each
/// step intersects that interval with the new query interval and re-centres.
fn signed_from_approximations<F>(at: F, slack: u64, digits: u64) -> Result<Vec<SignedDigit>, RepError>
where
    F: Fn(u64) -> Result<Dyadic, RepError>,
{
    let mut out = Vec::with_capacity(digits as usize);
    let mut center = Dyadic::ratio(1, 1); // r'_0 = 1/2
    for k in 0..digits {
        let q = at(k + 3 + slack)?;
        let eps = Dyadic::pow2_neg(k as u32 + 3);
        let half = Dyadic::pow2_neg(k as u32 + 1);
        let lo = (center.clone() - half.clone()).max(q.clone() - eps.clone());
        let hi = (center.clone() + half).min(q + eps);
        if lo > hi {
            return Err(RepError::DriftDetected(k));
        }
        let mid = Dyadic::midpoint(&lo, &hi);
        // d = clamp(round((mid - center)·2^{k+2}), -1, 1)
        let t = (mid - center.clone()).shl(k as u32 + 2);
        let r = t.round_half_toward_zero();
        let d = if r < BigInt::from(-1) {
            SignedDigit::Minus
        } else if r > BigInt::from(1) {
            SignedDigit::Plus
        } else {
            SignedDigit::from_value(r.to_i8().expect("|r| <= 1")).unwrap()
        };
        match d {
            SignedDigit::Plus => center = center + Dyadic::pow2_neg(k as u32 + 2),
            SignedDigit::Minus => center = center - Dyadic::pow2_neg(k as u32 + 2),
            SignedDigit::Zero => {}
        }
        // The tracking interval must still contain the feasible set.
        let bound = Dyadic::pow2_neg(k as u32 + 2);
        if (lo.clone() - center.clone()) > bound.clone() || (center.clone() - hi.clone()) > bound {
            return Err(RepError::DriftDetected(k));
        }
        out.push(d);
    }
    Ok(out)
}

/// Encode a point as a signed-digit name. Digit `k` reads `at(k+3)`, so a
/// prefix of `n` digits (`2n` wire bits) costs approximation level `n + 2`.
pub fn signed_encode_digits(x: &PointApprox, digits: u64) -> Result<Vec<SignedDigit>, RepError> {
    let x = x.clone();
    signed_from_approximations(move |n| x.at(n), 0, digits)
}

pub fn signed_encode_word(x: &PointApprox, digits: u64) -> Result<Word, RepError> {
    Ok(signed_digits_to_word(&signed_encode_digits(x, digits)?))
}

pub fn signed_encode(x: &PointApprox, digit_horizon: u64) -> Stream {
    let x = x.clone();
    Stream::new(2 * digit_horizon as usize, move |want| {
        let digits = (want as u64).div_ceil(2);
        signed_encode_word(&x, digits).map_err(|e| CantorError::Generator(e.to_string()))
    })
}

/// Recode a sequence of converging approximations `y_n` with the loose
/// contract `|y_n - x| ≤ 2^{3-n}` into signed digits; `ys.len()` must exceed
/// `digits + 9`. Pairwise consistency of the queried values is enforced.
pub fn approx_to_signed(ys: &[Dyadic], digits: u64) -> Result<Vec<SignedDigit>, RepError> {
    let probed: Mutex<BTreeMap<u64, ()>> = Mutex::new(BTreeMap::new());
    let at = |n: u64| -> Result<Dyadic, RepError> {
        let i = n as usize;
        if i >= ys.len() {
            return Err(RepError::PrefixTooShort { needed: i + 1, got: ys.len(), n });
        }
        let mut probed = probed.lock().unwrap();
        for &m in probed.keys() {
            let slack = Dyadic::pow2_neg(n.saturating_sub(3).min(60) as u32)
                + Dyadic::pow2_neg(m.saturating_sub(3).min(60) as u32);
            let gap = (ys[i].clone() - ys[m as usize].clone()).abs();
            if gap > slack {
                return Err(RepError::InconsistentSequence { n, m, gap: gap.to_string() });
            }
        }
        probed.insert(n, ());
        // |y_n - x| ≤ 2^{3-n}: shift the index so the extractor sees the
        // accuracy it asked for.
        Ok(ys[i].clone())
    };
    signed_from_approximations(at, 3, digits)
}

// ===== averaging transducer =====

/// Exact average of two signed-digit names, computed by a finite-state
/// online transducer: one digit pair in, one digit out, after a constant
/// delay of two digits.
///
/// State is the integer remainder `R` with invariant `|R| ≤ 12`: after
/// reading input digit sums `s_0 … s_t` and emitting `c_0 … c_{t-2}`,
/// `Σ_{j≤t} s_j 2^{-j-1} - Σ_{j≤t-2} c_j 2^{-j} = R·2^{-t-2}`.
pub fn average_digits(
    x: &[SignedDigit],
    y: &[SignedDigit],
    out_digits: u64,
) -> Result<Vec<SignedDigit>, RepError> {
    let need = out_digits as usize + 2;
    if x.len() < need || y.len() < need {
        return Err(RepError::PrefixTooShort {
            needed: need,
            got: x.len().min(y.len()),
            n: out_digits,
        });
    }
    let mut out = Vec::with_capacity(out_digits as usize);
    let mut r: i64 = 0;
    for t in 0..need {
        let s = (x[t].value() + y[t].value()) as i64;
        let v = 2 * r + 2 * s;
        if t >= 2 {
            // c = clamp(round(v / 16), -1, 1), ties toward zero.
            let c = if v > 8 {
                1
            } else if v < -8 {
                -1
            } else {
                0
            };
            r = v - 16 * c;
            debug_assert!(r.abs() <= 12, "remainder escaped its invariant");
            out.push(SignedDigit::from_value(c as i8).unwrap());
        } else {
            r = v;
        }
    }
    Ok(out)
}

/// Average two signed-digit name streams; the result is a stream again
/// (horizon shrinks by the transducer delay).
pub fn average(x: &Stream, y: &Stream) -> Stream {
    let horizon = ((x.horizon().min(y.horizon()) / 2).saturating_sub(2)) * 2;
    let (x, y) = (x.clone(), y.clone());
    Stream::new(horizon, move |want| {
        let digits = (want as u64).div_ceil(2);
        let need = (digits as usize + 2) * 2;
        let err = |e: RepError| CantorError::Generator(e.to_string());
        let dx = signed_digits(&x.prefix(need)?).map_err(err)?;
        let dy = signed_digits(&y.prefix(need)?).map_err(err)?;
        Ok(signed_digits_to_word(
            &average_digits(&dx, &dy, digits).map_err(err)?,
        ))
    })
}

// ===== position-scheduled signed representation =====

/// Wire layout of a scheduled signed name: positions in the range of `phi`
/// carry a two-bit signed digit, all other positions a single unsigned bit.
#[derive(Debug, Clone)]
pub struct ScheduleLayout {
    /// For each digit position `m < n`: (wire offset, signed?).
    pub slots: Vec<(usize, bool)>,
    pub total_bits: usize,
}

/// Compute the layout of the first `n` digit positions. `phi` must be
/// strictly increasing with `phi(0) = 0`.
pub fn sigma_phi_layout(phi: &GrowthFn, n: u64) -> Result<ScheduleLayout, RepError> {
    if phi.eval(0)? != 0 {
        return Err(RepError::BadSchedule(phi.eval(0)?));
    }
    let mut signed_positions = std::collections::BTreeSet::new();
    let mut k = 0u64;
    loop {
        let v = phi.eval(k)?;
        if v >= n {
            break;
        }
        signed_positions.insert(v);
        k += 1;
    }
    let mut slots = Vec::with_capacity(n as usize);
    let mut offset = 0usize;
    for m in 0..n {
        let signed = signed_positions.contains(&m);
        slots.push((offset, signed));
        offset += if signed { 2 } else { 1 };
    }
    Ok(ScheduleLayout { slots, total_bits: offset })
}

/// Value of the first `n` scheduled digits: `Σ_{m<n} c_m 2^{-m-1}` (no
/// constant term; the leading position is signed and carries the coarse
/// location). The point lies within `2^{-n}` of this.
pub fn sigma_phi_decode(prefix: &Word, phi: &GrowthFn, n: u64) -> Result<Dyadic, RepError> {
    let layout = sigma_phi_layout(phi, n)?;
    if prefix.len() < layout.total_bits {
        return Err(RepError::PrefixTooShort { needed: layout.total_bits, got: prefix.len(), n });
    }
    let mut acc = Dyadic::zero();
    for (m, &(offset, signed)) in layout.slots.iter().enumerate() {
        let v: i8 = if signed {
            SignedDigit::from_wire(prefix.bit(offset), prefix.bit(offset + 1), m)?.value()
        } else {
            prefix.bit(offset) as i8
        };
        match v {
            1 => acc = acc + Dyadic::pow2_neg(m as u32 + 1),
            -1 => acc = acc - Dyadic::pow2_neg(m as u32 + 1),
            _ => {}
        }
    }
    Ok(acc)
}

pub fn sigma_phi_rep(phi: &GrowthFn) -> Rep<Dyadic> {
    let phi_for_decode = phi.clone();
    let phi_for_domain = phi.clone();
    let phi_for_modulus = phi.clone();
    // Modulus: n digits pin the value to 2^-n, and the first n positions
    // occupy n + #(range(phi) ∩ [0,n)) wire bits.
    let modulus = GrowthFn::from_fn(format!("sigma-phi-bits({})", phi.name()), true, move |n| {
        let layout = sigma_phi_layout(&phi_for_modulus, n)
            .map_err(|e| crate::moduli::GrowthError::Overflow(format!("layout: {e}")))?;
        Ok(layout.total_bits as u64)
    });
    Rep::new(
        format!("scheduled-signed({})", phi.name()),
        modulus,
        move |w, n| sigma_phi_decode(w, &phi_for_decode, n),
        move |w| {
            // Check all complete digits parse.
            for n in (1..=w.len() as u64).rev() {
                match sigma_phi_layout(&phi_for_domain, n) {
                    Ok(l) if l.total_bits <= w.len() => {
                        return sigma_phi_decode(&w.prefix(l.total_bits), &phi_for_domain, n).is_ok()
                    }
                    _ => continue,
                }
            }
            true
        },
    )
}

/// Recode a plain signed-digit name into the scheduled representation.
///
/// Works block by block: between consecutive scheduled positions the digits
/// are forced to be unsigned bits, so the block value (tentative leading bit
/// plus incoming signed digits) is re-expressed with a signed digit only at
/// the leading scheduled position; the lowest bit stays tentative for the
/// next block. `blocks` blocks consume `2·phi(blocks)` input bits and emit
/// the first `phi(blocks)` output digits.
pub fn sigma_to_sigma_phi(sigma_prefix: &Word, phi: &GrowthFn, blocks: u64) -> Result<Word, RepError> {
    if phi.eval(0)? != 0 {
        return Err(RepError::BadSchedule(phi.eval(0)?));
    }
    let n_digits = phi.eval(blocks)?;
    let input = signed_digits(&sigma_prefix.prefix(2 * n_digits as usize))?;
    if (input.len() as u64) < n_digits {
        return Err(RepError::PrefixTooShort {
            needed: 2 * n_digits as usize,
            got: sigma_prefix.len(),
            n: n_digits,
        });
    }
    // Input in "digit at position p has weight 2^{-p-1}" form: t_0 = 1 is
    // the constant 1/2, t_p = input digit p-1 for p ≥ 1.
    let t = |p: u64| -> i64 {
        if p == 0 {
            1
        } else {
            input[(p - 1) as usize].value() as i64
        }
    };

    let mut out_digits: Vec<(u64, i8)> = Vec::new(); // (position, value), signedness per layout
    let mut tentative: i64 = t(0); // bit pending at position phi(k-1)
    for k in 1..=blocks {
        let lo = phi.eval(k - 1)?;
        let hi = phi.eval(k)?;
        if hi <= lo {
            return Err(RepError::BadSchedule(hi));
        }
        let len = hi - lo;
        if len > 62 {
            return Err(RepError::CarryOverflow(k));
        }
        // Block value: tentative bit at the top, then incoming digits.
        let mut v: i64 = tentative << len;
        for i in 1..=len {
            v += t(lo + i) << (len - i);
        }
        // Re-express: leading signed digit at position lo, unsigned bits at
        // lo+1 .. hi-1, lowest bit tentative at position hi.
        let (lead, w) = if v < 0 {
            (-1i8, v + (1 << len))
        } else if v < (1 << len) {
            (0i8, v)
        } else if v < (2 << len) {
            (1i8, v - (1 << len))
        } else {
            return Err(RepError::CarryOverflow(k));
        };
        if !(0..(1 << len)).contains(&w) {
            return Err(RepError::CarryOverflow(k));
        }
        out_digits.push((lo, lead));
        for i in 1..len {
            out_digits.push((lo + i, ((w >> (len - i)) & 1) as i8));
        }
        tentative = w & 1;
    }

    // Serialise according to the layout.
    let layout = sigma_phi_layout(phi, n_digits)?;
    let mut bits = vec![0u8; layout.total_bits];
    for (pos, val) in out_digits {
        let (offset, signed) = layout.slots[pos as usize];
        if signed {
            let d = SignedDigit::from_value(val).ok_or(RepError::CarryOverflow(pos))?;
            let (hi, lo) = d.wire_bits();
            bits[offset] = hi;
            bits[offset + 1] = lo;
        } else {
            debug_assert!(val == 0 || val == 1);
            bits[offset] = val as u8;
        }
    }
    Ok(Word::from_bits(bits))
}

/// Modulus of the recoding realizer: to fix the first `n` output wire bits
/// it suffices to read `2·phi(upinv(id + phi)(n) + 1)` input bits.
pub fn sigma_to_sigma_phi_modulus(phi: &GrowthFn) -> GrowthFn {
    let phi = phi.clone();
    GrowthFn::from_fn(format!("recode-modulus({})", phi.name()), false, move |n| {
        let id_plus_phi = GrowthFn::sum(&GrowthFn::id(), &phi);
        let k = upper_semi_inverse_at(&id_plus_phi, n, DEFAULT_SEARCH_CEILING)?;
        Ok(2 * phi.eval(k + 1)?)
    })
}
