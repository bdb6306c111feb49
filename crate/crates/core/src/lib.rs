//! Simulation core for random processes with immigration at renewal epochs.
//!
//! A random process with immigration superposes independent copies of a
//! kernel process `X`, one started at each epoch of a zero-delayed renewal
//! sequence:
//!
//! ```text
//! Y(t) = Σ_{k≥0} X_{k+1}(t − S_k),      S_0 = 0, S_n = ξ_1 + … + ξ_n
//! ```
//!
//! Its stationary counterpart replaces the one-sided epochs by the two-sided
//! stationary renewal point process `(S*_k)_{k∈ℤ}`:
//!
//! ```text
//! Y*(u) = Σ_{k∈ℤ} X_{k+1}(u + S*_k)
//! ```
//!
//! The crate is `no_std` (it needs `alloc`) and has no IO. Every random
//! operation takes an explicit stream handle from [`rng`], so results are
//! bit-reproducible from a seed. File formats and the command-line front end
//! live in the `immigration-tools` crate.
//!
//! Module map:
//!
//! - [`distributions`]: interarrival laws `ξ`, their size-biased and
//!   integrated-tail companions, and the mark laws `η` used by kernels.
//! - [`kernels`]: kernel families and sampled trajectories.
//! - [`renewal`]: forward renewal sequences and the two-sided stationary
//!   window.
//! - [`process`]: `Y(t+u)` and `Y*(u)` on a grid, with truncation control.
//! - [`stats`]: empirical distributions and two-sample tests.
//! - [`diagnostics`]: integrability criteria, point-process checks and the
//!   convergence-to-stationarity harness.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod diagnostics;
pub mod distributions;
mod error;
pub mod kernels;
mod math;
pub mod process;
pub mod renewal;
pub mod rng;
pub mod stats;

pub use distributions::{EtaLaw, InterarrivalLaw};
pub use error::{Error, Result, TruncationFailure, TruncationReason};
pub use kernels::{Kernel, KernelSpec, Path, PathSample};
pub use process::{Mode, ProcessSample, SampleKind};
pub use renewal::{RenewalRealization, StationaryWindow};
pub use rng::{RngStream, StreamKey};
