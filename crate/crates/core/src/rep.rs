//! Shared plumbing for representations and realizers.
//!
//! A representation pairs a prefix decoder with a declared modulus of
//! continuity: reading the first `modulus(n)` bits of any name pins the
//! represented point down to distance `2^-n`. Points are generic: `Dyadic`
//! approximations for the unit interval, indices for finite stand-in spaces.

use crate::cantor::{CantorError, Word};
use crate::moduli::{GrowthError, GrowthFn};
use std::sync::Arc;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum RepError {
    #[error(transparent)]
    Cantor(#[from] CantorError),
    #[error(transparent)]
    Growth(#[from] GrowthError),
    #[error("prefix of {got} bits is too short; {needed} bits needed for accuracy 2^-{n}")]
    PrefixTooShort { needed: usize, got: usize, n: u64 },
    #[error("illegal digit pair 11 at digit index {0}")]
    IllegalDigitPair(usize),
    #[error("blocks {i} and {j} are inconsistent: |{vi} - {vj}| > 2^-{i} + 2^-{j}")]
    InconsistentBlocks { i: u64, j: u64, vi: String, vj: String },
    #[error("approximation sequence inconsistent: |at({n}) - at({m})| = {gap} exceeds the allowed slack")]
    InconsistentSequence { n: u64, m: u64, gap: String },
    #[error("encoder drifted outside its tracking interval at digit {0} (inconsistent input approximations)")]
    DriftDetected(u64),
    #[error("carry re-coding overflowed at block {0}")]
    CarryOverflow(u64),
    #[error("digit schedule must start at position 0, got {0}")]
    BadSchedule(u64),
    #[error("block {block} is not a valid level-{level} code")]
    BlockNotInDomain { level: u64, block: String },
    #[error("no covering ball at level {level} contains point {point}")]
    NoCoveringBall { level: u64, point: usize },
    #[error("code length {0} too large to materialise")]
    CodeLengthOverflow(u64),
    #[error("function delta {delta} outside the representable range at level {level}")]
    DeltaOutOfRange { level: u64, delta: i64 },
    #[error("hyperspace name bits inconsistent between levels {coarse} and {fine}")]
    InconsistentBits { coarse: u64, fine: u64 },
    #[error("product size {size} exceeds the cap {cap}")]
    SizeCapExceeded { size: usize, cap: usize },
    #[error("{0}")]
    Invalid(String),
}

/// A represented space: prefix decoder + declared modulus + domain predicate.
///
/// `decode(w, n)` may assume `w` is a prefix of a valid name of length at
/// least `modulus(n)` and must return a point within `2^-n` of the point
/// named; it fails with a descriptive error otherwise.
type Decoder<P> = Arc<dyn Fn(&Word, u64) -> Result<P, RepError> + Send + Sync>;
type WordMap = Arc<dyn Fn(&Word) -> Result<Word, RepError> + Send + Sync>;

pub struct Rep<P> {
    pub name: String,
    pub modulus: GrowthFn,
    decode: Decoder<P>,
    in_domain: Arc<dyn Fn(&Word) -> bool + Send + Sync>,
}

// Manual impl: the derive would demand `P: Clone`, which the `Arc` fields
// never need.
impl<P> Clone for Rep<P> {
    fn clone(&self) -> Self {
        Rep {
            name: self.name.clone(),
            modulus: self.modulus.clone(),
            decode: Arc::clone(&self.decode),
            in_domain: Arc::clone(&self.in_domain),
        }
    }
}

impl<P> Rep<P> {
    pub fn new<D, G>(name: impl Into<String>, modulus: GrowthFn, decode: D, in_domain: G) -> Self
    where
        D: Fn(&Word, u64) -> Result<P, RepError> + Send + Sync + 'static,
        G: Fn(&Word) -> bool + Send + Sync + 'static,
    {
        Rep { name: name.into(), modulus, decode: Arc::new(decode), in_domain: Arc::new(in_domain) }
    }

    /// Bits needed for accuracy `2^-n`.
    pub fn bits_for(&self, n: u64) -> Result<usize, GrowthError> {
        Ok(self.modulus.eval(n)? as usize)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn modulus(&self) -> &GrowthFn {
        &self.modulus
    }

    pub fn decode(&self, w: &Word, n: u64) -> Result<P, RepError> {
        (self.decode)(w, n)
    }

    /// Whether the word is extendable to a name (prefix domain predicate).
    pub fn in_domain(&self, w: &Word) -> bool {
        (self.in_domain)(w)
    }
}

/// A computable map between name spaces: a monotone prefix transformer with
/// a declared modulus. Feeding `modulus(n)` input bits yields at least `n`
/// output bits.
#[derive(Clone)]
pub struct Realizer {
    pub name: String,
    pub modulus: GrowthFn,
    transform: WordMap,
}

impl Realizer {
    pub fn new<F>(name: impl Into<String>, modulus: GrowthFn, transform: F) -> Self
    where
        F: Fn(&Word) -> Result<Word, RepError> + Send + Sync + 'static,
    {
        Realizer { name: name.into(), modulus, transform: Arc::new(transform) }
    }

    pub fn apply(&self, w: &Word) -> Result<Word, RepError> {
        (self.transform)(w)
    }

    pub fn modulus(&self) -> &GrowthFn {
        &self.modulus
    }

    /// Apply, then truncate the output to `n` bits (erroring when the
    /// transform produced fewer).
    pub fn apply_for(&self, w: &Word, n: usize) -> Result<Word, RepError> {
        let out = self.apply(w)?;
        if out.len() < n {
            return Err(RepError::PrefixTooShort { needed: n, got: out.len(), n: n as u64 });
        }
        Ok(out.prefix(n))
    }

    /// `self ∘ earlier`: run `earlier` first. The modulus composes the other
    /// way around: to get n output bits, `self` needs `self.modulus(n)` bits
    /// from `earlier`, which needs `earlier.modulus(self.modulus(n))` input
    /// bits.
    pub fn compose(&self, earlier: &Realizer) -> Realizer {
        let f = self.clone();
        let g = earlier.clone();
        let modulus = GrowthFn::compose(&earlier.modulus, &self.modulus);
        Realizer::new(
            format!("({} ∘ {})", self.name, earlier.name),
            modulus,
            move |w| f.apply(&g.apply(w)?),
        )
    }
}

/// Compose a chain of realizers, rightmost applied first.
pub fn compose_reductions(chain: &[Realizer]) -> Option<Realizer> {
    let mut iter = chain.iter().rev();
    let first = iter.next()?.clone();
    Some(iter.fold(first, |acc, r| r.compose(&acc)))
}
