//! Observable regularity diagnostics for the 3D Navier–Stokes equations on a
//! periodic box.
//!
//! The crate is organised as a pipeline:
//!
//! * [`spectral`]: Fourier representation of zero-mean vector fields on the
//!   torus `[0, L]³`, the Leray projector, Stokes eigenvalues and norms.
//! * [`solver`]: integrating-factor RK4 pseudo-spectral integrator producing
//!   reference trajectories, plus analytic and random initial data.
//! * [`observers`]: modal (low Fourier modes) and nodal (cube-vertex point
//!   values) observations.
//! * [`tetra`]: the piecewise-linear interpolant on the five-tetrahedra
//!   subdivision of each cube, its exact gradient and the coarse directional
//!   derivative matrices that bound its H¹ seminorm from the data alone.
//! * [`monitor`]: the data norm `M_h`, the bound `W_h` and the regularity
//!   criterion built from them.
//! * [`nudging`]: the data-assimilation (nudged) system driven by
//!   interpolated observations.
//! * [`io`] and [`cli`]: configuration, binary snapshots, reports and the
//!   `obsreg` command line.

pub mod cli;
pub mod error;
mod fft;
pub mod io;
pub mod monitor;
pub mod nudging;
pub mod observers;
pub mod solver;
pub mod spectral;
pub mod tetra;

pub use error::{Error, Result};
pub use monitor::{CriterionReport, ObservationSeries, Variant};
pub use nudging::{NudgeConfig, SyncSeries};
pub use observers::{ModalData, NodalData, Observation, ObserverSpec};
pub use solver::{SolverConfig, Trajectory};
pub use spectral::{PhysicalField, SpectralField, TorusConfig, WaveVector};
pub use tetra::{DirectionalData, Interpolant, TetraBasis, TetraTopology};
