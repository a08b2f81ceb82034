//! Kochen-Specker pseudo-telepathy, end to end.
//!
//! The crate covers four layers that build on one another:
//!
//! * [`ks`]: integer-exact rays and orthogonal bases in real 4-space, with
//!   the canonical 18-ray/9-basis construction and structural validation.
//! * [`coloring`]: noncontextual and contextual 0/1 valuations: the
//!   exhaustive impossibility search, the parity certificate, and the
//!   minimum-contextuality search.
//! * [`quantum`], [`strategies`], [`harness`]: exact rational outcome
//!   probabilities for the shared entangled state, the four game strategies,
//!   and a referee that plays seeded, reproducible rounds.
//! * [`hvt2d`]: the explicit two-dimensional hidden-variable model and its
//!   agreement with the Born rule, analytically and by Monte Carlo.
//!
//! Game probabilities are exact rationals throughout; floating point appears
//! only in the two-dimensional model, where unit vectors force it.

pub mod coloring;
pub mod harness;
pub mod hvt2d;
pub mod ks;
pub mod quantum;
pub mod rng;
pub mod strategies;

pub use ks::{cabello_set, canonicalize, validate_ks_set, Basis, CanonicalVec, IntVec4, KsSet};
pub use quantum::ExactProb;
