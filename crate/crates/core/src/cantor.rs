//! Finite binary words, lazily evaluated binary streams, and the
//! combinatorial codings shared by all representations: self-delimiting
//! blocks, the word/number bijection, the diagonal pairing function, and
//! ultrametric distances on words.

use crate::dyadic::Dyadic;
use crate::moduli::GrowthFn;
use num_bigint::BigUint;
use num_traits::One;
use std::fmt;
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum CantorError {
    #[error("requested prefix of length {requested} exceeds the stream's declared horizon {horizon}")]
    HorizonExceeded { requested: usize, horizon: usize },
    #[error("stream generator changed its mind: prefix of length {len} disagrees with an earlier call at position {at}")]
    InconsistentStream { len: usize, at: usize },
    #[error("stream generator returned {got} bits for a request of {requested}")]
    ShortGenerator { requested: usize, got: usize },
    #[error("malformed self-delimiting block at offset {0}")]
    BadBlock(usize),
    #[error("prefix ends inside a self-delimiting block (offset {0})")]
    TruncatedBlock(usize),
    #[error("name text contains {0:?}; expected ASCII '0'/'1' and whitespace")]
    BadChar(char),
    #[error("pairing overflow for ({0}, {1})")]
    PairOverflow(u64, u64),
    #[error("stream generator failed: {0}")]
    Generator(String),
}

/// A finite binary word. Bits are stored one per byte (values 0 or 1);
/// clarity beats packing at the scales this crate works at.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_bits(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Word(bits)
    }

    /// All words of the given length, in lexicographic order.
    pub fn all_of_length(len: usize) -> Vec<Word> {
        let mut out = Vec::with_capacity(1 << len.min(24));
        let mut w = vec![0u8; len];
        loop {
            out.push(Word(w.clone()));
            // Lexicographic increment.
            let mut i = len;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if w[i] == 0 {
                    w[i] = 1;
                    break;
                }
                w[i] = 0;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn push(&mut self, b: u8) {
        debug_assert!(b <= 1);
        self.0.push(b);
    }

    pub fn extend(&mut self, other: &Word) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn concat(mut self, other: &Word) -> Word {
        self.extend(other);
        self
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn slice(&self, from: usize, to: usize) -> Word {
        Word(self.0[from..to].to_vec())
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    /// Index of the first position where the words differ, if any
    /// (positions past the shorter word's end do not count).
    pub fn first_difference(&self, other: &Word) -> Option<usize> {
        self.0.iter().zip(&other.0).position(|(a, b)| a != b)
    }

    /// Parse name text: ASCII '0'/'1' with arbitrary whitespace.
    pub fn parse_text(s: &str) -> Result<Word, CantorError> {
        let mut bits = Vec::new();
        for ch in s.chars() {
            match ch {
                '0' => bits.push(0),
                '1' => bits.push(1),
                c if c.is_whitespace() => {}
                c => return Err(CantorError::BadChar(c)),
            }
        }
        Ok(Word(bits))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", b)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({})", self)
    }
}

// ----- self-delimiting blocks -----

/// `(x_0 … x_{n-1}) ↦ (0 x_0 0 x_1 … 0 x_{n-1} 1)`, length `2n + 1`.
pub fn delimit(w: &Word) -> Word {
    let mut out = Vec::with_capacity(2 * w.len() + 1);
    for &b in w.bits() {
        out.push(0);
        out.push(b);
    }
    out.push(1);
    Word(out)
}

/// Read one self-delimiting block starting at `offset`; returns the payload
/// and the offset just past the block.
pub fn undelimit(w: &Word, offset: usize) -> Result<(Word, usize), CantorError> {
    let mut payload = Vec::new();
    let mut i = offset;
    loop {
        if i >= w.len() {
            return Err(CantorError::TruncatedBlock(offset));
        }
        match w.bit(i) {
            1 => return Ok((Word(payload), i + 1)),
            0 => {
                if i + 1 >= w.len() {
                    return Err(CantorError::TruncatedBlock(offset));
                }
                payload.push(w.bit(i + 1));
                i += 2;
            }
            _ => return Err(CantorError::BadBlock(i)),
        }
    }
}

/// Split a prefix into complete self-delimiting blocks; trailing bits that
/// do not form a complete block are ignored and their count returned.
pub fn undelimit_all(w: &Word) -> (Vec<Word>, usize) {
    let mut blocks = Vec::new();
    let mut offset = 0;
    while offset < w.len() {
        match undelimit(w, offset) {
            Ok((blk, next)) => {
                blocks.push(blk);
                offset = next;
            }
            Err(_) => break,
        }
    }
    (blocks, w.len() - offset)
}

// ----- word ↔ number bijection -----

/// Bijection `{0,1}* → ℕ`: the word `(b_0 … b_{n-1})` maps to
/// `2^n - 1 + Σ_j b_j 2^j`.
pub fn word_to_nat(w: &Word) -> BigUint {
    let n = w.len();
    let mut a = (BigUint::one() << n) - BigUint::one();
    for (j, &b) in w.bits().iter().enumerate() {
        if b == 1 {
            a += BigUint::one() << j;
        }
    }
    a
}

/// Inverse of [`word_to_nat`].
pub fn nat_to_word(a: &BigUint) -> Word {
    // n is maximal with 2^n - 1 <= a, i.e. n = bits(a + 1) - 1.
    let n = ((a + BigUint::one()).bits() - 1) as usize;
    let b = a - ((BigUint::one() << n) - BigUint::one());
    let mut bits = vec![0u8; n];
    for (j, bit) in bits.iter_mut().enumerate() {
        if b.bit(j as u64) {
            *bit = 1;
        }
    }
    Word(bits)
}

pub fn word_to_u64(w: &Word) -> Option<u64> {
    word_to_nat(w).try_into().ok()
}

pub fn u64_to_word(a: u64) -> Word {
    nat_to_word(&BigUint::from(a))
}

// ----- pairing -----

/// Diagonal pairing `⟨n, m⟩ = (n + m)(n + m + 1)/2 + n`.
pub fn pair(n: u64, m: u64) -> Result<u64, CantorError> {
    let s = n.checked_add(m).ok_or(CantorError::PairOverflow(n, m))?;
    let t = s
        .checked_mul(s + 1)
        .map(|x| x / 2)
        .and_then(|x| x.checked_add(n))
        .ok_or(CantorError::PairOverflow(n, m))?;
    Ok(t)
}

/// Inverse of [`pair`].
pub fn unpair(p: u64) -> (u64, u64) {
    // Largest s with s(s+1)/2 <= p.
    let mut s = (((8u128 * p as u128 + 1) as f64).sqrt() as u64).saturating_sub(2) / 2;
    while (s + 1) * (s + 2) / 2 <= p {
        s += 1;
    }
    let n = p - s * (s + 1) / 2;
    (n, s - n)
}

// ----- distances on words -----

/// `2^-min{ n : x_n ≠ y_n }`; zero when the words agree on their overlap.
pub fn cantor_distance(x: &Word, y: &Word) -> Dyadic {
    match x.first_difference(y) {
        Some(n) => Dyadic::pow2_neg(n as u32),
        None => Dyadic::zero(),
    }
}

/// `2^-phi(n)` for `n` the first difference: the rescaled ultrametric whose
/// entropy is the lower semi-inverse of `phi`.
pub fn phi_distance(x: &Word, y: &Word, phi: &GrowthFn) -> Result<Dyadic, crate::moduli::GrowthError> {
    match x.first_difference(y) {
        Some(n) => Ok(Dyadic::pow2_neg(phi.eval(n as u64)?.min(u32::MAX as u64) as u32)),
        None => Ok(Dyadic::zero()),
    }
}

// ----- streams -----

/// A lazily evaluated binary stream with a declared horizon. Generators are
/// re-invoked per prefix request; every response is checked for consistency
/// against the longest previously returned prefix, so a non-deterministic
/// generator is caught instead of silently corrupting downstream decoders.
#[derive(Clone)]
pub struct Stream {
    gen: Arc<dyn Fn(usize) -> Result<Word, CantorError> + Send + Sync>,
    horizon: usize,
    cache: Arc<Mutex<Word>>,
}

impl Stream {
    pub fn new<F>(horizon: usize, gen: F) -> Self
    where
        F: Fn(usize) -> Result<Word, CantorError> + Send + Sync + 'static,
    {
        Stream { gen: Arc::new(gen), horizon, cache: Arc::new(Mutex::new(Word::empty())) }
    }

    pub fn from_word(w: Word) -> Self {
        let horizon = w.len();
        Stream::new(horizon, move |n| Ok(w.prefix(n)))
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn prefix(&self, n: usize) -> Result<Word, CantorError> {
        if n > self.horizon {
            return Err(CantorError::HorizonExceeded { requested: n, horizon: self.horizon });
        }
        let mut cache = self.cache.lock().unwrap();
        if n <= cache.len() {
            return Ok(cache.prefix(n));
        }
        let w = (self.gen)(n)?;
        if w.len() < n {
            return Err(CantorError::ShortGenerator { requested: n, got: w.len() });
        }
        if let Some(at) = cache.first_difference(&w) {
            return Err(CantorError::InconsistentStream { len: n, at });
        }
        *cache = w.prefix(n);
        Ok(cache.clone())
    }
}

impl fmt::Debug for Stream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Stream(horizon={})", self.horizon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse_text(s).unwrap()
    }

    #[test]
    fn delimit_round_trip() {
        for s in ["", "0", "1", "0110", "11111"] {
            let word = w(s);
            let enc = delimit(&word);
            assert_eq!(enc.len(), 2 * word.len() + 1);
            let (dec, next) = undelimit(&enc, 0).unwrap();
            assert_eq!(dec, word);
            assert_eq!(next, enc.len());
        }
        // Two blocks back to back.
        let two = delimit(&w("01")).concat(&delimit(&w("1")));
        let (blocks, trailing) = undelimit_all(&two);
        assert_eq!(blocks, vec![w("01"), w("1")]);
        assert_eq!(trailing, 0);
    }

    #[test]
    fn undelimit_rejects_truncation() {
        let enc = delimit(&w("0110"));
        assert!(matches!(undelimit(&enc.prefix(5), 0), Err(CantorError::TruncatedBlock(0))));
    }

    #[test]
    fn word_nat_bijection_small_values() {
        // 0 ↦ ε, 1 ↦ 0, 2 ↦ 1, 3 ↦ 00, 4 ↦ 10, 5 ↦ 01, 6 ↦ 11.
        let expected = ["", "0", "1", "00", "10", "01", "11"];
        for (a, s) in expected.iter().enumerate() {
            assert_eq!(nat_to_word(&BigUint::from(a)), w(s), "a={a}");
            assert_eq!(word_to_nat(&w(s)), BigUint::from(a));
        }
        for a in 0u64..600 {
            assert_eq!(word_to_u64(&u64_to_word(a)).unwrap(), a);
        }
    }

    #[test]
    fn pairing_small_values_and_round_trip() {
        assert_eq!(pair(0, 0).unwrap(), 0);
        assert_eq!(pair(0, 1).unwrap(), 1);
        assert_eq!(pair(1, 0).unwrap(), 2);
        assert_eq!(pair(0, 2).unwrap(), 3);
        assert_eq!(pair(1, 1).unwrap(), 4);
        assert_eq!(pair(2, 0).unwrap(), 5);
        for n in 0..60u64 {
            for m in 0..60u64 {
                assert_eq!(unpair(pair(n, m).unwrap()), (n, m));
            }
        }
        // The pairing is a bijection onto an initial segment.
        let mut seen: Vec<u64> = (0..30).flat_map(|n| (0..30).map(move |m| pair(n, m).unwrap())).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 900);
    }

    #[test]
    fn distances() {
        assert_eq!(cantor_distance(&w("0101"), &w("0111")), Dyadic::pow2_neg(2));
        assert_eq!(cantor_distance(&w("01"), &w("0100")), Dyadic::zero());
        let phi = GrowthFn::linear(0, 2);
        assert_eq!(phi_distance(&w("10"), &w("11"), &phi).unwrap(), Dyadic::pow2_neg(2));
    }

    #[test]
    fn stream_checks_horizon_and_consistency() {
        let s = Stream::new(8, |n| Ok(Word::from_bits(vec![1; n])));
        assert_eq!(s.prefix(3).unwrap(), w("111"));
        assert!(matches!(s.prefix(9), Err(CantorError::HorizonExceeded { .. })));

        // A generator that flips its first bit after the first call.
        use std::sync::atomic::{AtomicUsize, Ordering};
        let calls = AtomicUsize::new(0);
        let bad = Stream::new(8, move |n| {
            let c = calls.fetch_add(1, Ordering::SeqCst);
            let mut bits = vec![0u8; n];
            if c > 0 {
                bits[0] = 1;
            }
            Ok(Word::from_bits(bits))
        });
        bad.prefix(2).unwrap();
        assert!(matches!(bad.prefix(4), Err(CantorError::InconsistentStream { .. })));
    }

    #[test]
    fn words_of_length_enumerate_lexicographically() {
        let ws = Word::all_of_length(2);
        assert_eq!(ws, vec![w("00"), w("01"), w("10"), w("11")]);
        assert_eq!(Word::all_of_length(0), vec![Word::empty()]);
    }
}
