//! Toolkit for quantitative representation theory of compact metric spaces.
//!
//! The library is organised bottom-up:
//!
//! * [`dyadic`] — exact arithmetic on dyadic rationals `a / 2^k` (no floating
//!   point anywhere in decoding or encoding paths);
//! * [`moduli`] — a calculus of non-decreasing unbounded `ℕ → ℕ` growth
//!   functions: composition, semi-inverses, growth-class witnesses, and the
//!   gauge (modulus-of-continuity ↔ subadditive gauge) translation;
//! * [`cantor`] — finite binary words, infinite binary streams with declared
//!   horizons, and the combinatorial codings (pairing, delimiting,
//!   binary-word/number bijection) used by every representation;
//! * [`unit_interval`] — concrete digit-stream representations of `[0;1]`:
//!   binary, rational-block, dyadic-block and signed-digit, together with
//!   encoders, the signed-digit averaging transducer and recodings;
//! * [`entropy`] — finite metric spaces with exact covering/packing numbers
//!   and metric-entropy profiles;
//! * [`standard_rep`] — covering-code ("standard") representations built from
//!   covering families, plus the run-cut schedule that subsamples levels so
//!   the name length tracks the entropy linearly;
//! * [`constructions`] — products (binary, naive countable, scheduled
//!   countable), hyperspaces of closed subsets, Lipschitz extension
//!   operators, and codes for spaces of 1-Lipschitz functions;
//! * [`harness`] — empirical certification: modulus certificates by
//!   perturbation, reduction verification, admissibility audits, and the
//!   quantitative main-theorem bound calculators.

pub mod cantor;
pub mod constructions;
pub mod dyadic;
pub mod entropy;
pub mod harness;
pub mod moduli;
pub mod rep;
pub mod standard_rep;
pub mod unit_interval;

pub use dyadic::Dyadic;
