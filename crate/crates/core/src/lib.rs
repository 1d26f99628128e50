//! Analog network coding for multi-user chaos-based spread spectrum.
//!
//! `L` users exchange data in pairs through one relay. Both members of a
//! pair spread with the same Bernoulli-map chaotic sequence; the relay
//! forwards the raw superposition of every user's signal, and each user
//! despreads with its pair's sequence, decodes the ternary pair sum and
//! subtracts its own symbol.
//!
//! - [`chaos`]: sequence generation and normalization
//! - [`modem`]: spreading, despreading, sign detection
//! - [`channel`]: AWGN hops and Eb/N0 conversion
//! - [`network`]: the four-phase relay round
//! - [`analysis`]: Gaussian-approximation BER (closed form and quadrature)
//! - [`montecarlo`]: parallel, seeded BER estimation

pub mod analysis;
pub mod channel;
pub mod chaos;
pub mod error;
pub mod modem;
pub mod montecarlo;
pub mod network;
pub mod quadrature;
pub mod seeding;

pub use analysis::{AnalyticPoint, BerModel};
pub use channel::{ChannelParams, NoiseSource};
pub use chaos::{BernoulliParams, ChaoticSequence, MapShape, PairId};
pub use error::{Error, Result};
pub use modem::{BitStream, ChipFrame, DecisionVariable};
pub use montecarlo::{BerPoint, GateVerdict, LinkSettings, StopRule, SweepConfig, Tally};
pub use network::{EnergyReference, ExtractionRule, NetworkConfig, RoundOptions, TernarySymbol, Thresholds};
