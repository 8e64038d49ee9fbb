//! One-shot smoothed quantum divergences.

use openblas_src as _;

pub mod asymptotics;
pub mod cli;
pub mod conic;
pub mod divergence;
pub mod error;
pub mod io;
pub mod operator;
pub mod oracles;
pub mod randomness;
pub mod smoothing;

pub use error::{Error, Result};
