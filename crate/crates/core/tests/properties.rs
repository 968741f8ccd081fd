use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;

use repkit::cantor::{
    cantor_distance, delimit, nat_to_word, pair, undelimit, unpair, word_to_nat, Word,
};
use repkit::dyadic::Dyadic;
use repkit::moduli::{lower_semi_inverse_at, upper_semi_inverse_at, GrowthFn};
use repkit::unit_interval::{
    dyadic_decode, dyadic_encode_word, signed_decode, signed_encode_word, PointApprox,
};

fn dyadic() -> impl Strategy<Value = Dyadic> {
    (any::<i32>(), 0..24u32).prop_map(|(num, exp)| Dyadic::new(BigInt::from(num), exp))
}

fn unit_point() -> impl Strategy<Value = Dyadic> {
    (0..=1u64 << 20).prop_map(|a| Dyadic::new(BigInt::from(a), 20))
}

fn word() -> impl Strategy<Value = Word> {
    proptest::collection::vec(0..2u8, 0..48).prop_map(Word::from_bits)
}

// Tables start at 0 so the adjunction `μ(upinv(n)) ≤ n` has a witness at
// every level; a table starting above n has no m with μ(m) ≤ n at all.
fn monotone_table() -> impl Strategy<Value = Vec<u64>> {
    proptest::collection::vec(0..4u64, 1..10).prop_map(|steps| {
        let mut acc = 0;
        let mut vals = vec![0];
        vals.extend(steps.into_iter().map(|s| {
            acc += s;
            acc
        }));
        vals
    })
}

proptest! {
    #[test]
    fn dyadic_ring_laws(a in dyadic(), b in dyadic()) {
        prop_assert_eq!((a.clone() + b.clone()) - b.clone(), a.clone());
        prop_assert_eq!(a.clone() + b.clone(), b.clone() + a.clone());
        prop_assert!((a.clone() - b.clone()).abs() == (b - a).abs());
    }

    #[test]
    fn dyadic_shift_round_trip(a in dyadic(), k in 0..20u32) {
        prop_assert_eq!(a.shl(k).shr(k), a.clone());
        prop_assert_eq!(a.shr(k).shl(k), a);
    }

    #[test]
    fn midpoint_is_between(a in dyadic(), b in dyadic()) {
        let m = Dyadic::midpoint(&a, &b);
        let (lo, hi) = (a.clone().min(b.clone()), a.max(b));
        prop_assert!(lo <= m && m <= hi);
    }

    #[test]
    fn word_number_bijection(n in 0..1_000_000u64) {
        let w = nat_to_word(&BigUint::from(n));
        prop_assert_eq!(word_to_nat(&w), BigUint::from(n));
    }

    #[test]
    fn delimiting_round_trips_at_any_offset(w in word(), tail in word()) {
        let framed = delimit(&w).concat(&tail);
        let (back, next) = undelimit(&framed, 0).unwrap();
        prop_assert_eq!(back, w.clone());
        prop_assert_eq!(next, 2 * w.len() + 1);
    }

    #[test]
    fn pairing_is_a_bijection(n in 0..10_000u64, m in 0..10_000u64) {
        prop_assert_eq!(unpair(pair(n, m).unwrap()), (n, m));
    }

    #[test]
    fn interleaving_round_trips(x in word(), y in word()) {
        // Interleaving reads one bit from each in turn while both last.
        let k = x.len().min(y.len());
        let (bx, by) = repkit::constructions::deinterleave(
            &repkit::constructions::interleave(&x.prefix(k), &y.prefix(k)),
        );
        prop_assert_eq!(bx, x.prefix(k));
        prop_assert_eq!(by, y.prefix(k));
    }

    #[test]
    fn prefix_distance_is_an_ultrametric(
        // Words of a common length: on uneven lengths the distance degenerates
        // to 0 whenever one word is a prefix of the other.
        (x, y, z) in (1..48usize).prop_flat_map(|k| {
            let w = || proptest::collection::vec(0..2u8, k).prop_map(Word::from_bits);
            (w(), w(), w())
        }),
    ) {
        let d = |a: &Word, b: &Word| cantor_distance(a, b);
        prop_assert_eq!(d(&x, &y), d(&y, &x));
        prop_assert!(d(&x, &z) <= d(&x, &y).max(d(&y, &z)));
    }

    #[test]
    fn signed_name_decodes_within_tolerance(x in unit_point(), n in 1..20u64) {
        let w = signed_encode_word(&PointApprox::exact(x.clone()), n + 2).unwrap();
        let v = signed_decode(&w, n).unwrap();
        prop_assert!((v - x).abs() <= Dyadic::pow2_neg(n as u32));
    }

    #[test]
    fn dyadic_name_decodes_within_tolerance(x in unit_point(), n in 1..16u64) {
        let w = dyadic_encode_word(&PointApprox::exact(x.clone()), n + 1).unwrap();
        let v = dyadic_decode(&w, n).unwrap();
        prop_assert!((v - x).abs() <= Dyadic::pow2_neg(n as u32));
    }

    #[test]
    fn semi_inverses_are_adjoint(vals in monotone_table(), n in 0..8u64) {
        let mu = GrowthFn::table(vals).unwrap();
        let l = lower_semi_inverse_at(&mu, n, 1 << 12).unwrap();
        let u = upper_semi_inverse_at(&mu, n, 1 << 12).unwrap();
        prop_assert!(mu.eval(l).unwrap() >= n);
        prop_assert!(mu.eval(u).unwrap() <= n);
        prop_assert!(l <= u + 1);
        let mn = mu.eval(n).unwrap();
        prop_assert!(lower_semi_inverse_at(&mu, mn, 1 << 12).unwrap() <= n);
        prop_assert!(upper_semi_inverse_at(&mu, mn, 1 << 12).unwrap() >= n);
    }
}
