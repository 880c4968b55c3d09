//! Random walks on Erdős–Rényi graphs.
//!
//! The crate computes the average starting hitting time `H^i` of simple random
//! walk on a realization of `G(n+1, p)` by two independent routes (first-step
//! linear solves and the spectral formula over the normalized adjacency
//! `B = D^{-1/2} A D^{-1/2}`), rewrites it as an incomplete U-statistic over a
//! triangular array, and checks the resulting central limit theorem and law of
//! large numbers by Monte Carlo.
//!
//! Module map:
//!
//! * [`graphs`]: sampling `G(n+1, p)`, connectivity conditioning, monotone
//!   coupled sequences, stationary distribution, reduced degrees.
//! * [`walk_spectra`]: `B`, its spectrum, hitting matrices, trace identities.
//! * [`binomial_moments`]: exact inverse and central moments of the binomial.
//! * [`ustat`]: the kernel, its Hoeffding split, `U_n`, `V_n`, `Z_n`, `T_n`,
//!   the standardized hitting statistic and numeric condition diagnostics.
//! * [`harness`]: Monte Carlo campaigns, KS distance, summaries, CSV output.
//! * [`appendix`]: brute-force enumeration of the weighted stone configurations.
//! * [`acceptance`]: the acceptance criteria, shared by the test suite and the
//!   `selftest` subcommand.

pub mod acceptance;
pub mod appendix;
pub mod binomial_moments;
pub mod cli;
mod error;
pub mod graphs;
pub mod harness;
pub mod output;
pub mod rng;
pub mod sum;
pub mod ustat;
pub mod walk_spectra;

pub use error::{Error, Result};
