//! Bit-exact stochastic-computing (SC) circuit simulation and an analytical
//! model of an SC neural-network accelerator.
//!
//! The crate is layered bottom-up:
//!
//! * [`bitstream`] holds packed stochastic streams and the single-gate operators.
//! * [`rns`] provides random word sources (LFSRs and a seeded ideal source).
//! * [`pcc`] turns binary words into streams (comparator, MUX chain, NAND-NOR chain).
//! * [`counter`] has the full-adder parallel counter, adder tree and B2S/S2B converters.
//! * [`neuron`] composes these into a 25-input SC neuron with OR-based ReLU and pooling.
//! * [`network`] runs quantized CNNs either in fixed point or bit-level SC.
//! * [`accel`] is the analytical latency/area/energy model of the accelerator.

pub mod accel;
pub mod bitstream;
pub mod counter;
pub mod error;
pub mod network;
pub mod neuron;
pub mod pcc;
pub mod rns;

pub use error::{Error, Result};

/// Root seed used when a command is not given one.
pub const DEFAULT_SEED: u64 = 0x5C_2024;
