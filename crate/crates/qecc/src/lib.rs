//! Construction and numerical verification of CSS quantum error-correcting
//! codes built from nested classical binary linear codes.
//!
//! The crate is organized bottom-up: [`gf2`] packs GF(2) vectors and matrices
//! into machine words, [`codes`] layers classical linear codes and nested code
//! pairs on top, [`qsim`] is a dense statevector simulator with named
//! registers, [`css`] builds the quantum code itself (codewords, encoding,
//! coherent two-stage recovery), [`channels`] drives noise models through the
//! encode/decohere/recover/decode pipeline, and [`bounds`] collects the
//! closed-form rate and capacity curves the simulations are compared against.

pub mod bounds;
pub mod channels;
pub mod codes;
pub mod css;
pub mod gf2;
pub mod qsim;

pub use bounds::BoundCurvePoint;
pub use channels::{
    FidelityReport, GeneralDecoherence, Pauli, PauliChannelSpec, TrialRecord,
};
pub use codes::{CodeTower, LinearCode};
pub use css::{CssCode, RecoveryRecord};
pub use gf2::{BinMatrix, BitWord};
pub use qsim::{DensityMatrix, Register, RegisterLayout, StateVector};
