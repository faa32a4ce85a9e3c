//! Coalition values and stability analysis for cooperative wireless networks.
//!
//! The crate computes coalition values for four cooperation models and
//! analyzes the coalitional games they induce:
//!
//! * [`rx`]: receivers that jointly decode (a TU game) or apply linear
//!   multiuser detectors (NTU point games);
//! * [`jamming`]: perfectly cooperating transmitters facing worst-case
//!   jamming from everyone outside the coalition (TU);
//! * [`pdf`]: clustered transmitters cooperating by partial
//!   decode-and-forward (NTU rate regions).
//!
//! [`game`] holds the game-theoretic side: superadditivity, cohesiveness,
//! core feasibility by linear programming, NTU grand-coalition stability and
//! equal-split stable structures.

pub mod channel;
pub mod error;
pub mod game;
pub mod jamming;
pub mod numerics;
pub mod pdf;
pub mod rx;
pub mod verify;

pub use error::{Error, Result};

/// Converts a natural-log quantity to bits.
pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}

/// `10^(db/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
