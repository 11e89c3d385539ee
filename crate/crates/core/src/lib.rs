//! Markovian covariance dynamics of two uncoupled oscillators in a common
//! thermal bath, with the Simon separability function and logarithmic
//! negativity as entanglement diagnostics.
//!
//! ```
//! use gaussentangle::{esd_time, CovarianceState, PhysParams};
//!
//! let p = PhysParams::new(1.0, 3.0, 0.1, 1.0).unwrap();
//! let s0 = CovarianceState::two_mode_squeezed(2.0);
//! let esd = esd_time(&s0, &p, 100.0, 1e-8).unwrap();
//! assert!(esd.esd_time.is_some());
//! ```

#![allow(clippy::needless_range_loop)]

pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod physics;
pub mod states;

pub use dynamics::{block_expm, propagate, rk4_oracle, sample_trajectory, steady_state, Evolution, Trajectory};
pub use entanglement::{
    asymptotic_log_negativity, asymptotic_simon, esd_time, is_entangled, log_negativity, simon_at, simon_function,
    symplectic_spectrum_pt, EsdResult, SimonValue, SymplecticSpectrum,
};
pub use error::{Error, Result};
pub use linalg::{Mat2, Mat4};
pub use physics::{build_drift, build_thermal_diffusion, validate_cp, CpReport, EnvMatrices, PhysParams};
pub use states::{BlockDecomp, CovarianceState};
