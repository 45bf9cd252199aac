//! Relay selection for dual-hop networks in which every relay is connected to
//! source and destination by a parallel FSO/RF link pair.
//!
//! The crate contains the channel models, the per-slot optimal selection
//! rules with and without relay buffers, a queue-aware variant for finite
//! buffers, comparison schemes, a timer-based distributed implementation and
//! a Monte-Carlo engine that runs everything on common fading traces.
//!
//! Policy code is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix the double-precision instantiation used by the engine and CLI.

pub mod ba;
pub mod benchmarks;
pub mod channels;
pub mod delay;
pub mod distributed;
pub mod engine;
mod error;
pub mod nonba;
pub mod oracle;
pub mod scalar;
pub mod source;
pub mod verify;

pub use channels::{
    ChannelModel, FadingRealization, FsoLinkParams, Hop, NetworkConfig, RfLinkParams,
};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use source::{SimRng, SlotSource};

pub type CapacityMatrix = channels::CapacityMatrix<f64>;
pub type SelectionDecision = nonba::SelectionDecision<f64>;
pub type BaWeights = ba::BaWeights<f64>;
pub type BaDecision = ba::BaDecision<f64>;
pub type QueueState = delay::QueueState<f64>;
