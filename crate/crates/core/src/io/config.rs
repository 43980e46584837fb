//! TOML experiment configuration.
//!
//! ```toml
//! output_dir = "out"
//!
//! [torus]
//! length = 6.283185307179586
//! n_spec = 16
//!
//! [solver]
//! nu = 0.1
//! dt = 0.01
//! t_end = 1.0
//! snapshot_every = 10
//! forcing = { kind = "beltrami", amplitude = 0.05, wavenumber = 1 }
//!
//! [initial]
//! kind = "beltrami"      # zero | beltrami | random
//! amplitude = 0.1
//! wavenumber = 1
//!
//! [observer]
//! kind = "nodal"         # modal | nodal
//! n_cubes = 8
//!
//! [monitor]
//! c = 1.0
//! t0 = 0.0
//! n_cubes_sweep = [4, 8, 16]
//!
//! [nudge]
//! mu = 5.0               # omit for the default gain
//! ```
//!
//! The only environment variable honoured is `OBSREG_OUT`, which replaces
//! `output_dir`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observers::{available_modes, ObserverSpec};
use crate::solver::initial::{beltrami, random_field};
use crate::solver::SolverConfig;
use crate::spectral::{SpectralField, TorusConfig};

pub const OUT_ENV: &str = "OBSREG_OUT";

fn default_length() -> f64 {
    2.0 * std::f64::consts::PI
}
fn default_true() -> bool {
    true
}
fn default_one() -> f64 {
    1.0
}
fn default_snapshot_every() -> usize {
    1
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusSection {
    #[serde(default = "default_length")]
    pub length: f64,
    pub n_spec: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase", tag = "kind", deny_unknown_fields)]
pub enum ForcingSection {
    #[default]
    None,
    /// `f = amplitude · (ABC field at wavenumber)`
    Beltrami { amplitude: f64, wavenumber: i64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
    #[serde(default)]
    pub forcing: ForcingSection,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase", tag = "kind", deny_unknown_fields)]
pub enum InitialSection {
    #[default]
    Zero,
    Beltrami { amplitude: f64, wavenumber: i64 },
    Random { amplitude: f64, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObserverKind {
    Modal,
    Nodal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverSection {
    pub kind: ObserverKind,
    #[serde(default)]
    pub n_cubes: Option<usize>,
    /// Number `N` of retained Stokes eigenvalues for modal observation.
    #[serde(default)]
    pub cutoff: Option<usize>,
    /// Compare nodal samples with collocation values of the spectral grid,
    /// which requires the cube vertices to be grid points.
    #[serde(default)]
    pub compare_collocation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorSection {
    #[serde(default = "default_one")]
    pub c: f64,
    #[serde(default)]
    pub t0: f64,
    #[serde(default)]
    pub n_cubes_sweep: Vec<usize>,
}

impl Default for MonitorSection {
    fn default() -> Self {
        MonitorSection {
            c: 1.0,
            t0: 0.0,
            n_cubes_sweep: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NudgeSection {
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default = "default_true")]
    pub project_feedback: bool,
    #[serde(default = "default_one")]
    pub c: f64,
}

impl Default for NudgeSection {
    fn default() -> Self {
        NudgeSection {
            mu: None,
            project_feedback: true,
            c: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    pub torus: TorusSection,
    pub solver: SolverSection,
    #[serde(default)]
    pub initial: InitialSection,
    pub observer: ObserverSection,
    #[serde(default)]
    pub monitor: MonitorSection,
    #[serde(default)]
    pub nudge: NudgeSection,
}

impl ExperimentConfig {
    /// Parses and validates TOML text.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::InvalidConfig(msg) => Error::format(path, format!("invalid configuration: {msg}")),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// `OBSREG_OUT` if set, `output_dir` otherwise.
    pub fn resolved_output_dir(&self) -> PathBuf {
        std::env::var_os(OUT_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .unwrap_or_else(|| self.output_dir.clone())
    }

    pub fn torus(&self) -> Result<TorusConfig> {
        TorusConfig::new(self.torus.length, self.torus.n_spec)
    }

    pub fn forcing(&self) -> Result<SpectralField> {
        let torus = self.torus()?;
        match self.solver.forcing {
            ForcingSection::None => Ok(SpectralField::zeros(torus)),
            ForcingSection::Beltrami { amplitude, wavenumber } => beltrami(torus, amplitude, wavenumber)
                .map_err(|e| Error::InvalidConfig(format!("solver.forcing.wavenumber: {e}"))),
        }
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let s = &self.solver;
        Ok(SolverConfig::new(s.nu, s.dt, s.t_end, self.forcing()?)?.with_dealias(s.dealias))
    }

    pub fn initial_field(&self) -> Result<SpectralField> {
        let torus = self.torus()?;
        match self.initial {
            InitialSection::Zero => Ok(SpectralField::zeros(torus)),
            InitialSection::Beltrami { amplitude, wavenumber } => beltrami(torus, amplitude, wavenumber)
                .map_err(|e| Error::InvalidConfig(format!("initial.wavenumber: {e}"))),
            InitialSection::Random { amplitude, seed } => Ok(random_field(torus, amplitude, seed, true)),
        }
    }

    pub fn observer_spec(&self) -> Result<ObserverSpec> {
        match self.observer.kind {
            ObserverKind::Modal => {
                let cutoff = self
                    .observer
                    .cutoff
                    .ok_or_else(|| Error::InvalidConfig("observer.cutoff is required for modal observation".into()))?;
                Ok(ObserverSpec::Modal { cutoff })
            }
            ObserverKind::Nodal => {
                let n_cubes = self
                    .observer
                    .n_cubes
                    .ok_or_else(|| Error::InvalidConfig("observer.n_cubes is required for nodal observation".into()))?;
                Ok(ObserverSpec::Nodal { n_cubes })
            }
        }
    }

    /// Cross-field consistency checks; messages name the offending fields.
    pub fn validate(&self) -> Result<()> {
        let torus = self.torus()?;
        let solver = self.solver_config()?;
        solver.n_steps()?;
        if self.solver.snapshot_every == 0 {
            return Err(Error::InvalidConfig("solver.snapshot_every must be at least 1".into()));
        }
        match self.initial {
            InitialSection::Beltrami { amplitude, .. } | InitialSection::Random { amplitude, .. }
                if !amplitude.is_finite() =>
            {
                return Err(Error::InvalidConfig("initial.amplitude must be finite".into()));
            }
            _ => {}
        }
        self.initial_field()?;

        let spec = self.observer_spec()?;
        match spec {
            ObserverSpec::Modal { cutoff } => {
                let available = available_modes(&torus);
                if cutoff == 0 || cutoff > available {
                    return Err(Error::InvalidConfig(format!(
                        "observer.cutoff = {cutoff} must lie in [1, {available}] for torus.n_spec = {}",
                        torus.n_spec
                    )));
                }
                if self.observer.compare_collocation {
                    return Err(Error::InvalidConfig(
                        "observer.compare_collocation applies to nodal observation only".into(),
                    ));
                }
            }
            ObserverSpec::Nodal { n_cubes } => {
                if n_cubes < 2 {
                    return Err(Error::InvalidConfig(format!("observer.n_cubes = {n_cubes} must be at least 2")));
                }
                if self.observer.compare_collocation && torus.n_spec % n_cubes != 0 {
                    return Err(Error::InvalidConfig(format!(
                        "observer.n_cubes = {n_cubes} must divide torus.n_spec = {} when \
                         observer.compare_collocation is set",
                        torus.n_spec
                    )));
                }
            }
        }

        let m = &self.monitor;
        if !(m.c.is_finite() && m.c > 0.0) {
            return Err(Error::InvalidConfig(format!("monitor.c must be positive, got {}", m.c)));
        }
        if !(m.t0 >= 0.0 && m.t0 <= self.solver.t_end) {
            return Err(Error::InvalidConfig(format!(
                "monitor.t0 = {} must lie in [0, solver.t_end = {}]",
                m.t0, self.solver.t_end
            )));
        }
        if let Some(n) = m.n_cubes_sweep.iter().find(|n| **n < 2) {
            return Err(Error::InvalidConfig(format!("monitor.n_cubes_sweep entry {n} must be at least 2")));
        }

        let n = &self.nudge;
        if let Some(mu) = n.mu {
            if !(mu.is_finite() && mu >= 0.0) {
                return Err(Error::InvalidConfig(format!("nudge.mu must be nonnegative, got {mu}")));
            }
        }
        if !(n.c.is_finite() && n.c > 0.0) {
            return Err(Error::InvalidConfig(format!("nudge.c must be positive, got {}", n.c)));
        }
        Ok(())
    }
}
