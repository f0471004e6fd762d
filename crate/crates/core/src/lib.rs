//! Deterministic simulation of Smart Objects that exchange level-tagged
//! knowledge over simulated IoT links.
//!
//! * [`knowledge`] holds the per-object partitioned triple store.
//! * [`lexicon`] is the static word table used for synonym and category lookup.
//! * [`lifecycle`] moves knowledge between levels: induction, abduction and
//!   statistical verification.
//! * [`exchange`] frames messages under IoT protocol profiles and implements the
//!   Smart Object message handler.
//! * [`netsim`] is the discrete-event transport.
//! * [`harness`] loads scenarios, generates sensor streams and drives runs.
//!
//! The statistics in [`lifecycle`] are generic over [`Scalar`]; the aliases
//! below pin the common precisions.

pub mod exchange;
pub mod harness;
pub mod knowledge;
pub mod lexicon;
pub mod lifecycle;
pub mod netsim;
pub mod scalar;

pub use knowledge::{KnowledgeLevel, KnowledgeStore, NodeId, Observation, Term, Tick, Triple};
pub use lexicon::Lexicon;
pub use scalar::Scalar;

pub type IntervalRuleF32 = lifecycle::IntervalRule<f32>;
pub type IntervalRuleF64 = lifecycle::IntervalRule<f64>;
pub type ThresholdsF32 = lifecycle::Thresholds<f32>;
pub type ThresholdsF64 = lifecycle::Thresholds<f64>;
pub type WilsonIntervalF32 = lifecycle::WilsonInterval<f32>;
pub type WilsonIntervalF64 = lifecycle::WilsonInterval<f64>;
