//! Las Vegas locality-sensitive filters.
//!
//! Near-neighbour indexes for Hamming space and Braun-Blanquet set
//! similarity whose queries never miss: if a stored point lies within the
//! near radius (or above the near similarity) of the query, some point within
//! the far threshold is returned. Randomness affects only running time.

pub mod bitvec;
pub mod cli;
pub mod dimred;
pub mod error;
pub mod formats;
pub mod hamming;
pub mod index;
pub mod oracle;
pub mod seed;
pub mod setpoint;
pub mod splitter;
pub mod turan;

pub use bitvec::{hamming_distance, project, BitVector};
pub use error::{Error, Result};
pub use seed::Seed;
pub use setpoint::{braun_blanquet, SetPoint, Similarity};
