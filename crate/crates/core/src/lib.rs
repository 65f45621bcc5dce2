//! Simulator and Nash-equilibrium engine for two-player quantum games in the
//! entangling-gate quantization scheme, with the Battle of the Sexes as the
//! worked example.

pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod fullspace;
pub mod game;
pub mod optimize;
pub mod qlinalg;
pub mod scheme;

pub use error::{QgameError, Result};
