//! Empirical certification: moduli of continuity, reductions between
//! representations, admissibility audits, and the forward/backward bound
//! calculators with their roundtrip constant.
//!
//! Everything here is corroboration, not proof: certificates quantify over
//! generated name suites (exhaustive families where feasible, seeded
//! sampling beyond) and report explicit witnesses on failure.

use crate::cantor::{delimit, nat_to_word, Word};
use crate::dyadic::Dyadic;
use crate::moduli::{lower_semi_inverse_at, GrowthFn, DEFAULT_SEARCH_CEILING};
use crate::rep::{Realizer, Rep, RepError};
use crate::standard_rep::{CoveringFamily, PhiSchedule};
use crate::unit_interval::{
    binary_decode, dyadic_decode, dyadic_encode_word, signed_decode, signed_digits_to_word,
    signed_encode_word, PointApprox, SignedDigit,
};
use num_bigint::{BigInt, BigUint};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use num_traits::Zero;
use serde::Serialize;
use std::collections::HashMap;

// ===== modulus certification =====

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub n: u64,
    pub agree_bits: u64,
    pub gap: String,
    pub a: String,
    pub b: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModulusCertificate {
    pub rep: String,
    pub candidate: String,
    pub n_max: u64,
    pub names: usize,
    pub proxy_precision: u64,
    pub violations: Vec<Violation>,
    pub ok: bool,
}

/// Check the prefix law "names agreeing on the first `candidate(n)` bits
/// denote points within `2^-n`" over a suite of names. Points are proxied
/// by decoding at `proxy` (so the tolerance is `2^-n + 2^{1-proxy}`).
/// A failing certificate carries explicit witness pairs — which is exactly
/// how a candidate below the true modulus is refuted.
pub fn certify_modulus(
    rep: &Rep<Dyadic>,
    candidate: &GrowthFn,
    names: &[Word],
    n_max: u64,
    proxy: u64,
) -> Result<ModulusCertificate, RepError> {
    let mut decoded: Vec<Dyadic> = Vec::with_capacity(names.len());
    for w in names {
        decoded.push(rep.decode(w, proxy)?);
    }
    let tol_extra = Dyadic::pow2_neg(proxy as u32 - 1);
    let mut violations = Vec::new();
    for n in 1..=n_max {
        let bits = candidate.eval(n)? as usize;
        // Group by prefix; track the extremes (Dyadic is totally ordered).
        let mut groups: HashMap<Vec<u8>, (usize, usize)> = HashMap::new();
        for (i, w) in names.iter().enumerate() {
            if w.len() < bits {
                continue;
            }
            let key = w.prefix(bits).bits().to_vec();
            groups
                .entry(key)
                .and_modify(|(lo, hi)| {
                    if decoded[i] < decoded[*lo] {
                        *lo = i;
                    }
                    if decoded[i] > decoded[*hi] {
                        *hi = i;
                    }
                })
                .or_insert((i, i));
        }
        let tolerance = Dyadic::pow2_neg(n as u32) + tol_extra.clone();
        for (lo, hi) in groups.values() {
            let gap = (decoded[*hi].clone() - decoded[*lo].clone()).abs();
            if gap > tolerance {
                violations.push(Violation {
                    n,
                    agree_bits: bits as u64,
                    gap: gap.to_string(),
                    a: names[*lo].to_string(),
                    b: names[*hi].to_string(),
                });
            }
        }
    }
    Ok(ModulusCertificate {
        rep: rep.name().to_string(),
        candidate: candidate.name().to_string(),
        n_max,
        names: names.len(),
        proxy_precision: proxy,
        ok: violations.is_empty(),
        violations,
    })
}

// ===== name suites =====

/// Random signed-digit names plus, per position `k`, a pair sharing a random
/// `k`-digit prefix and then diverging maximally (all `+1` vs all `-1`) —
/// the extremal pairs that witness the tightness of the `2n` modulus.
pub fn signed_name_suite(seed: u64, random: usize, digits: u64) -> Vec<Word> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut names = Vec::new();
    let rand_digit = |rng: &mut ChaCha8Rng| match rng.gen_range(0..3) {
        0 => SignedDigit::Minus,
        1 => SignedDigit::Zero,
        _ => SignedDigit::Plus,
    };
    for _ in 0..random {
        let ds: Vec<SignedDigit> = (0..digits).map(|_| rand_digit(&mut rng)).collect();
        names.push(signed_digits_to_word(&ds));
    }
    for k in 0..digits {
        let prefix: Vec<SignedDigit> = (0..k).map(|_| rand_digit(&mut rng)).collect();
        for tail in [SignedDigit::Plus, SignedDigit::Minus] {
            let mut ds = prefix.clone();
            ds.extend(std::iter::repeat_n(tail, (digits - k) as usize));
            names.push(signed_digits_to_word(&ds));
        }
    }
    names
}

/// Canonical dyadic-block names of seeded random points.
pub fn dyadic_name_suite(seed: u64, count: usize, blocks: u64) -> Vec<Word> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let num = rng.gen_range(0..=(1u64 << 20)) as i64;
            let x = Dyadic::ratio(num, 20);
            dyadic_encode_word(&PointApprox::exact(x), blocks).expect("exact oracle encodes")
        })
        .collect()
}

/// The quadratic lower-bound witness for the dyadic-block representation:
/// canonical names of `3/4 ± 2^{-k-2}` agree block by block (rounding ties
/// go toward zero on both sides) through block `k+1` — quadratically many
/// wire bits — while the points are `2^{-k-1}` apart.
pub fn dyadic_quadratic_witness(k: u64) -> Result<(Word, Word, u64, Dyadic), RepError> {
    let base = Dyadic::ratio(3, 2);
    let eps = Dyadic::pow2_neg(k as u32 + 2);
    let x = base.clone() + eps.clone();
    let y = base.clone() - eps;
    let blocks = k + 4;
    // The blocks of the midpoint 3/4 are within 2^{-k-2} ≤ 2^{-m} of either
    // perturbed point for m ≤ k+1, so names sharing them through that level
    // remain admissible for both points; they diverge only afterwards.
    let shared = dyadic_encode_word(&PointApprox::exact(base), k + 2)?;
    let tail = |p: Dyadic| -> Result<Word, RepError> {
        let mut w = shared.clone();
        for m in (k + 2)..blocks {
            let a = p
                .shl(m as u32)
                .round_half_toward_zero()
                .max(BigInt::zero())
                .min(BigInt::from(1) << m as u32);
            w.extend(&delimit(&nat_to_word(&a.to_biguint().expect("clamped to ≥ 0"))));
        }
        Ok(w)
    };
    let wx = tail(x)?;
    let wy = tail(y)?;
    let agree = match wx.first_difference(&wy) {
        Some(i) => i as u64,
        None => wx.len().min(wy.len()) as u64,
    };
    Ok((wx, wy, agree, Dyadic::pow2_neg(k as u32 + 1)))
}

// ===== reductions =====

#[derive(Debug, Clone, Serialize)]
pub struct ReductionCheck {
    pub realizer: String,
    pub from: String,
    pub to: String,
    pub n_max: u64,
    pub checked: usize,
    pub skipped_short: usize,
    pub failures: Vec<String>,
    pub ok: bool,
}

/// Verify that a realizer carries `from`-names to `to`-names of the same
/// point: for every suite name and precision, its declared modulus supplies
/// enough output bits and both decodes agree within `2^{1-n}`.
pub fn verify_reduction(
    realizer: &Realizer,
    from: &Rep<Dyadic>,
    to: &Rep<Dyadic>,
    names: &[Word],
    n_max: u64,
) -> Result<ReductionCheck, RepError> {
    let mut checked = 0usize;
    let mut skipped = 0usize;
    let mut failures = Vec::new();
    for w in names {
        for n in 1..=n_max {
            let out_bits = to.bits_for(n)?;
            let in_bits = realizer.modulus().eval(out_bits as u64)? as usize;
            let from_bits = from.bits_for(n)?;
            if w.len() < in_bits.max(from_bits) {
                skipped += 1;
                continue;
            }
            let out = realizer.apply(&w.prefix(in_bits))?;
            let x = from.decode(w, n)?;
            // Block codes are variable-length, so `out` may legitimately be
            // shorter than the worst-case modulus; what matters is that the
            // promised input prefix already determines the output at level n.
            let y = match to.decode(&out, n) {
                Ok(y) => y,
                Err(e) => {
                    failures.push(format!("n={n}: output failed to decode: {e}"));
                    continue;
                }
            };
            let gap = (x - y).abs();
            if gap > Dyadic::pow2_neg(n as u32 - 1) {
                failures.push(format!("n={n}: decodes differ by {gap}"));
            }
            checked += 1;
        }
    }
    Ok(ReductionCheck {
        realizer: realizer.name.clone(),
        from: from.name().to_string(),
        to: to.name().to_string(),
        n_max,
        checked,
        skipped_short: skipped,
        ok: failures.is_empty(),
        failures,
    })
}

/// Binary names to signed names: digit `k` of the output reads the binary
/// value one level deeper. Modulus `m ↦ ⌈m/2⌉ + 4`.
pub fn binary_to_signed() -> Realizer {
    Realizer::new(
        "binary->signed",
        GrowthFn::from_fn("ceil(n/2)+4", false, |m| Ok(m.div_ceil(2) + 4)),
        |w| {
            let digits = (w.len() as u64).saturating_sub(4);
            let w = w.clone();
            let x = PointApprox::new(move |p| {
                // Midpoint of the binary prefix interval: within 2^{-p-1}.
                Ok(binary_decode(&w, p + 1)? + Dyadic::pow2_neg(p as u32 + 2))
            });
            signed_encode_word(&x, digits)
        },
    )
}

/// Dyadic-block names to signed names. Digit `k` queries approximation
/// `k+3`, which sits in block `k+3` of worst-case width `2(k+4)+1` bits;
/// modulus `m ↦ (⌈m/2⌉ + 4)²`.
pub fn dyadic_to_signed() -> Realizer {
    Realizer::new(
        "dyadic->signed",
        GrowthFn::from_fn("(ceil(n/2)+4)^2", false, |m| {
            let b = m.div_ceil(2) + 4;
            b.checked_mul(b).ok_or_else(|| crate::moduli::GrowthError::Overflow("square".into()))
        }),
        |w| {
            // Count complete blocks available.
            let (blocks, _) = crate::cantor::undelimit_all(w);
            let digits = (blocks.len() as u64).saturating_sub(3);
            let w = w.clone();
            let x = PointApprox::new(move |p| dyadic_decode(&w, p));
            signed_encode_word(&x, digits)
        },
    )
}

/// Signed names to dyadic-block names: block `b` queries approximation
/// `b+1`, i.e. `2(b+1)` input bits. Modulus `m ↦ 2⌈√m⌉ + 2` (block `b`
/// ends within `(b+1)²` output bits).
pub fn signed_to_dyadic() -> Realizer {
    Realizer::new(
        "signed->dyadic",
        GrowthFn::from_fn("2*ceil(sqrt(n))+2", false, |m| {
            let mut b = 0u64;
            while b * b < m {
                b += 1;
            }
            Ok(2 * b + 2)
        }),
        |w| {
            let blocks = (w.len() as u64 / 2).saturating_sub(1);
            let w = w.clone();
            let x = PointApprox::new(move |p| signed_decode(&w, p));
            dyadic_encode_word(&x, blocks)
        },
    )
}

/// Full standard names to schedule-subsampled names: keep the scheduled
/// blocks. Modulus (from the code-length tables): to emit the blocks
/// through cut `t` it reads the full name through level `φ(t)`.
pub fn standard_to_subsampled(family: &CoveringFamily, sched: &PhiSchedule) -> Realizer {
    // Cumulative full-name bits through level l, and output bits per cut.
    let full: Vec<u64> = {
        let mut acc = 0;
        family
            .levels
            .iter()
            .map(|l| {
                acc += l.code_bits;
                acc
            })
            .collect()
    };
    let cuts: Vec<u64> = sched
        .values
        .iter()
        .filter(|&&v| v <= family.depth()).copied()
        .collect();
    let out_ends: Vec<u64> = {
        let mut acc = 0;
        cuts.iter()
            .map(|&v| {
                acc += family.levels[v as usize].code_bits;
                acc
            })
            .collect()
    };
    let modulus = {
        let (full, cuts, out_ends) = (full.clone(), cuts.clone(), out_ends.clone());
        GrowthFn::from_fn("subsample-bits", false, move |m| {
            if m == 0 {
                return Ok(0);
            }
            let t = out_ends
                .iter()
                .position(|&e| e >= m)
                .ok_or_else(|| crate::moduli::GrowthError::Overflow("beyond schedule".into()))?;
            Ok(full[cuts[t] as usize])
        })
    };
    let family = family.clone();
    let cuts_t = cuts;
    Realizer::new("standard->subsampled", modulus, move |w| {
        let mut out = Word::empty();
        let mut offset = 0usize;
        for (level_idx, level) in family.levels.iter().enumerate() {
            let bits = level.code_bits as usize;
            if w.len() < offset + bits {
                break;
            }
            if cuts_t.contains(&(level_idx as u64)) {
                for i in 0..bits {
                    out.push(w.bit(offset + i));
                }
            }
            offset += bits;
        }
        Ok(out)
    })
}

// ===== admissibility audits =====

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdmissibilityForm {
    Linear,
    Polynomial,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionOne {
    pub form: AdmissibilityForm,
    pub c_max: u64,
    pub n_max: u64,
    /// Least constant under which the bound holds everywhere, if any.
    pub passing_c: Option<u64>,
    /// For each failing `C` (only recorded when all fail): a witness `n`.
    pub witness_at_c_max: Option<(u64, u64, u64)>,
}

/// Condition (i) of the admissibility audit: does some constant `C ≤ c_max`
/// satisfy, for all `n ≤ n_max`,
///   linear:      `κ(n) ≤ C + C·η(n + C)`,
///   polynomial:  `κ(n) ≤ (C + C·η(C + C·n))^C`.
pub fn condition_one(
    kappa: &GrowthFn,
    eta: &GrowthFn,
    form: AdmissibilityForm,
    c_max: u64,
    n_max: u64,
) -> Result<ConditionOne, RepError> {
    let fails_at = |c: u64| -> Result<Option<u64>, RepError> {
        for n in 0..=n_max {
            let k = kappa.eval(n)? as u128;
            let ok = match form {
                AdmissibilityForm::Linear => {
                    let e = eta.eval(n + c)? as u128;
                    k <= c as u128 + c as u128 * e
                }
                AdmissibilityForm::Polynomial => {
                    let arg = c
                        .checked_mul(n)
                        .and_then(|cn| cn.checked_add(c))
                        .ok_or_else(|| RepError::Invalid("argument overflow".into()))?;
                    let e = eta.eval(arg)?;
                    let base = BigUint::from(c) + BigUint::from(c) * BigUint::from(e);
                    BigUint::from(k) <= base.pow(c as u32)
                }
            };
            if !ok {
                return Ok(Some(n));
            }
        }
        Ok(None)
    };
    let mut witness = None;
    for c in 1..=c_max {
        match fails_at(c)? {
            None => {
                return Ok(ConditionOne {
                    form,
                    c_max,
                    n_max,
                    passing_c: Some(c),
                    witness_at_c_max: None,
                })
            }
            Some(n) => {
                if c == c_max {
                    witness = Some((c, n, kappa.eval(n)?));
                }
            }
        }
    }
    Ok(ConditionOne { form, c_max, n_max, passing_c: None, witness_at_c_max: witness })
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub rep: String,
    pub linear_i: ConditionOne,
    pub polynomial_i: ConditionOne,
    pub reductions: Vec<ReductionCheck>,
    /// Linear condition (i) holds and all rival reductions verified.
    pub audits_linear: bool,
    pub audits_polynomial: bool,
}

/// Assemble the audit of one representation: entropy comparison of its
/// modulus (condition (i), linear and polynomial forms) plus a suite of
/// verified reductions from rival representations (condition (ii),
/// corroborated on the given name suites).
pub fn audit_admissibility(
    rep_name: &str,
    kappa: &GrowthFn,
    eta: &GrowthFn,
    c_max: u64,
    n_max: u64,
    reductions: Vec<ReductionCheck>,
) -> Result<AdmissibilityReport, RepError> {
    let linear_i = condition_one(kappa, eta, AdmissibilityForm::Linear, c_max, n_max)?;
    let polynomial_i = condition_one(kappa, eta, AdmissibilityForm::Polynomial, c_max, n_max)?;
    let reds_ok = reductions.iter().all(|r| r.ok);
    Ok(AdmissibilityReport {
        rep: rep_name.to_string(),
        audits_linear: linear_i.passing_c.is_some() && reds_ok,
        audits_polynomial: polynomial_i.passing_c.is_some() && reds_ok,
        linear_i,
        polynomial_i,
        reductions,
    })
}

// ===== main theorem bound calculators =====

/// Forward direction: a function with modulus `μ` between spaces with
/// representation moduli `κ` (source) and `λ` (target) has a realizer with
/// modulus `ν(n) = κ((1 + μ)(loinv(λ)(n) + c))`.
pub fn forward_modulus(kappa: &GrowthFn, mu: &GrowthFn, lambda: &GrowthFn, c: u64) -> GrowthFn {
    let (kappa, mu, lambda) = (kappa.clone(), mu.clone(), lambda.clone());
    GrowthFn::from_fn("forward-bound", false, move |n| {
        let t = lower_semi_inverse_at(&lambda, n, DEFAULT_SEARCH_CEILING)? + c;
        kappa.eval(1 + mu.eval(t)?)
    })
}

/// Backward direction: a realizer with modulus `ν` induces a function
/// modulus `μ'(n) = loinv(κ)(ν(λ(n + 1))) + c`.
pub fn backward_modulus(kappa: &GrowthFn, nu: &GrowthFn, lambda: &GrowthFn, c: u64) -> GrowthFn {
    let (kappa, nu, lambda) = (kappa.clone(), nu.clone(), lambda.clone());
    GrowthFn::from_fn("backward-bound", false, move |n| {
        let v = nu.eval(lambda.eval(n + 1)?)?;
        Ok(lower_semi_inverse_at(&kappa, v, DEFAULT_SEARCH_CEILING)? + c)
    })
}

/// Least `C ≤ c_max` with `μ'(n) ≤ μ(n + C) + C` for all `n ≤ n_max` —
/// the constant-shift roundtrip claim.
pub fn roundtrip_shift(
    mu: &GrowthFn,
    mu_prime: &GrowthFn,
    n_max: u64,
    c_max: u64,
) -> Result<Option<u64>, RepError> {
    'outer: for c in 0..=c_max {
        for n in 0..=n_max {
            if mu_prime.eval(n)? > mu.eval(n + c)? + c {
                continue 'outer;
            }
        }
        return Ok(Some(c));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unit_interval::{dyadic_block_modulus, dyadic_rep, signed_rep};

    #[test]
    fn signed_modulus_certifies_2n_and_refutes_2n_minus_2() {
        let rep = signed_rep();
        let names = signed_name_suite(42, 300, 24);
        let cert = certify_modulus(&rep, &GrowthFn::linear(0, 2), &names, 10, 22).unwrap();
        assert!(cert.ok, "2n violated: {:?}", cert.violations.first());
        let too_small = GrowthFn::from_fn("2n-2", false, |n| Ok((2 * n).saturating_sub(2)));
        let refute = certify_modulus(&rep, &too_small, &names, 10, 22).unwrap();
        assert!(!refute.ok, "2n-2 should be refuted by the extremal pairs");
    }

    #[test]
    fn dyadic_modulus_certifies_quadratic() {
        let rep = dyadic_rep();
        let names = dyadic_name_suite(7, 200, 16);
        let cert = certify_modulus(&rep, &dyadic_block_modulus(), &names, 8, 14).unwrap();
        assert!(cert.ok, "declared modulus violated: {:?}", cert.violations.first());
    }

    #[test]
    fn quadratic_witness_agreement_grows_quadratically() {
        for k in 4..=12u64 {
            let (wx, wy, agree, dist) = dyadic_quadratic_witness(k).unwrap();
            assert!(wx != wy);
            assert_eq!(dist, Dyadic::pow2_neg(k as u32 + 1));
            // Agreement through block k+1 is at least Σ_{j≤k+1} (2j+1) ∼ k².
            assert!(agree >= (k + 1) * (k + 1) / 2, "k={k}: agree={agree}");
        }
    }

    #[test]
    fn recoding_realizers_verify() {
        let signed = signed_rep();
        let dyadic = dyadic_rep();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let points: Vec<Dyadic> =
            (0..20).map(|_| Dyadic::ratio(rng.gen_range(0..=1 << 16), 16)).collect();
        let signed_names: Vec<Word> = points
            .iter()
            .map(|p| signed_encode_word(&PointApprox::exact(p.clone()), 40).unwrap())
            .collect();
        let dyadic_names: Vec<Word> = points
            .iter()
            .map(|p| dyadic_encode_word(&PointApprox::exact(p.clone()), 20).unwrap())
            .collect();
        let s2d = verify_reduction(&signed_to_dyadic(), &signed, &dyadic, &signed_names, 8).unwrap();
        assert!(s2d.ok, "{:?}", s2d.failures.first());
        assert!(s2d.checked > 0);
        let d2s = verify_reduction(&dyadic_to_signed(), &dyadic, &signed, &dyadic_names, 8).unwrap();
        assert!(d2s.ok, "{:?}", d2s.failures.first());
        assert!(d2s.checked > 0);
    }

    #[test]
    fn condition_one_separates_linear_from_quadratic() {
        // Grid entropy stand-in η(n) = n: σ's κ(n) = 2n is linear in η.
        let eta = GrowthFn::id();
        let lin = condition_one(&GrowthFn::linear(0, 2), &eta, AdmissibilityForm::Linear, 16, 512)
            .unwrap();
        assert_eq!(lin.passing_c, Some(2));
        // δ's κ(n) = 2(n+1)(n+2) admits no linear witness below 2^10 …
        let lin2 =
            condition_one(&dyadic_block_modulus(), &eta, AdmissibilityForm::Linear, 1 << 10, 1 << 12)
                .unwrap();
        assert_eq!(lin2.passing_c, None);
        // … but an easy polynomial one.
        let poly =
            condition_one(&dyadic_block_modulus(), &eta, AdmissibilityForm::Polynomial, 8, 1 << 12)
                .unwrap();
        assert!(poly.passing_c.is_some());
    }

    #[test]
    fn roundtrip_recovers_constant_shift() {
        // σ/σ pair, function modulus μ = id (1-Lipschitz-like).
        let kappa = GrowthFn::linear(0, 2);
        let lambda = GrowthFn::linear(0, 2);
        let mu = GrowthFn::id();
        let nu = forward_modulus(&kappa, &mu, &lambda, 1);
        let mu_prime = backward_modulus(&kappa, &nu, &lambda, 1);
        let c = roundtrip_shift(&mu, &mu_prime, 256, 16).unwrap();
        assert!(c.is_some(), "no constant shift ≤ 16 recovers μ");
        // And the recovered modulus never undershoots μ itself at shift 0
        // by more than the constant.
        let c = c.unwrap();
        for n in 0..=256u64 {
            assert!(mu_prime.eval(n).unwrap() <= mu.eval(n + c).unwrap() + c);
        }
    }
}
