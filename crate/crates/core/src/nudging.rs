//! The nudged (data-assimilation) system
//!
//! ```text
//! dw/dt + B(w, w) + ν A w = f + μ P_σ(Iu - Iw),     w(0) = 0
//! ```
//!
//! driven by observations `Iu` of a reference trajectory. Observations are
//! held piecewise constant in time: during a step starting at `t` the data
//! from the latest reference snapshot at or before `t` is used.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observers::{observe_modal, observe_nodal, Observation, ObserverSpec};
use crate::solver::{nonlinear_term, Integrator, Snapshot, SolverConfig, Trajectory};
use crate::spectral::{PhysicalField, SpectralField};
use crate::tetra::mean_correct;

#[derive(Clone, Debug, PartialEq)]
pub struct NudgeConfig {
    /// Relaxation gain `μ` (1/time).
    pub mu: f64,
    pub observer: ObserverSpec,
    /// Apply `P_σ` to the feedback term.
    pub project_feedback: bool,
    /// Viscosity, forcing, step and horizon of the `w` equation.
    pub solver: SolverConfig,
}

/// `min(ν/(c h²), 10·max(ν λ₁, 1))` for observer scale `h`.
pub fn default_gain(nu: f64, lambda1: f64, h: f64, c: f64) -> f64 {
    (nu / (c * h * h)).min(10.0 * (nu * lambda1).max(1.0))
}

impl NudgeConfig {
    pub fn new(mu: f64, observer: ObserverSpec, solver: SolverConfig) -> Result<Self> {
        let cfg = NudgeConfig {
            mu,
            observer,
            project_feedback: true,
            solver,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Uses [`default_gain`] for the observer's scale.
    pub fn with_default_gain(observer: ObserverSpec, solver: SolverConfig, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidConfig(format!("nudge.c must be positive, got {c}")));
        }
        let torus = solver.torus();
        let h = observer.scale(torus)?;
        let mu = default_gain(solver.nu, torus.lambda1(), h, c);
        Self::new(mu, observer, solver)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return Err(Error::InvalidConfig(format!("nudge.mu must be nonnegative, got {}", self.mu)));
        }
        self.observer.scale(self.solver.torus())?;
        self.solver.validate()
    }
}

/// `μ P_σ(Iu - Iw)` as a spectral field on the grid of `w`.
pub fn feedback(u_obs: &Observation, w: &SpectralField, cfg: &NudgeConfig) -> Result<SpectralField> {
    if u_obs.spec() != cfg.observer {
        return Err(Error::ResolutionMismatch(format!(
            "observation is {:?}, nudging expects {:?}",
            u_obs.spec(),
            cfg.observer
        )));
    }
    let torus = *w.config();
    if cfg.mu == 0.0 {
        return Ok(SpectralField::zeros(torus));
    }
    let mut diff = match u_obs {
        Observation::Modal(m) => {
            if m.torus != torus {
                return Err(Error::ResolutionMismatch(format!(
                    "modal data on n_spec = {}, w on n_spec = {}",
                    m.torus.n_spec, torus.n_spec
                )));
            }
            m.reconstruct().sub(&observe_modal(w, m.cutoff)?.reconstruct())
        }
        Observation::Nodal(n) => {
            if (n.length() - torus.length).abs() > 1e-12 * torus.length {
                return Err(Error::ResolutionMismatch(format!(
                    "nodal data on a box of side {}, w on {}",
                    n.length(),
                    torus.length
                )));
            }
            let interp = mean_correct(n.sub(&observe_nodal(w, n.n_cubes)?)?);
            let mut f = PhysicalField::from_fn(torus, |x| interp.evaluate(x)).to_spectral(true);
            if cfg.solver.dealias {
                f.dealias();
            }
            f
        }
    };
    if cfg.project_feedback {
        diff.leray_project_in_place();
    }
    Ok(diff.scaled(cfg.mu))
}

/// One synchronization sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyncEntry {
    pub t: f64,
    /// `|u - w|` (L²).
    pub l2: f64,
    /// `‖u - w‖` (H¹ seminorm).
    pub h1: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SyncSeries {
    pub entries: Vec<SyncEntry>,
}

impl SyncSeries {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last(&self) -> Option<&SyncEntry> {
        self.entries.last()
    }

    /// Largest `‖u - w‖` over the series.
    pub fn max_h1(&self) -> f64 {
        self.entries.iter().map(|e| e.h1).fold(0.0, f64::max)
    }

    fn push(&mut self, t: f64, u: &SpectralField, w: &SpectralField) {
        let norms = u.sub(w).norms();
        self.entries.push(SyncEntry {
            t,
            l2: norms.l2,
            h1: norms.h1,
        });
    }
}

/// Integrates the nudged system from `w(0) = 0` over `[0, cfg.solver.t_end]`,
/// recording `w` and the synchronization error at every reference snapshot
/// time.
pub fn run_nudged(reference: &Trajectory, cfg: &NudgeConfig) -> Result<(Trajectory, SyncSeries)> {
    cfg.validate()?;
    let torus = *cfg.solver.torus();
    if reference.torus() != &torus {
        return Err(Error::ResolutionMismatch(format!(
            "reference on n_spec = {}, nudged system on n_spec = {}",
            reference.torus().n_spec,
            torus.n_spec
        )));
    }
    let dt = cfg.solver.dt;
    if (reference.solver.dt - dt).abs() > 1e-12 * dt {
        return Err(Error::InvalidConfig(format!(
            "nudged step {dt} differs from reference step {}",
            reference.solver.dt
        )));
    }
    let n_steps = cfg.solver.n_steps()?;
    let tol = 1e-9 * dt;
    if reference.last().t + tol < cfg.solver.t_end {
        return Err(Error::InvalidConfig(format!(
            "reference ends at {} before t_end = {}",
            reference.last().t,
            cfg.solver.t_end
        )));
    }

    let integrator = Integrator::new(&cfg.solver);
    let mut w = SpectralField::zeros(torus);
    let mut snapshots = vec![Snapshot { t: 0.0, field: w.clone() }];
    let mut sync = SyncSeries::default();
    sync.push(0.0, &reference.at_or_before(0.0).field, &w);

    let mut held: Option<(f64, Observation)> = None;
    let mut next_record = 1;
    for n in 0..n_steps {
        let t = n as f64 * dt;
        let snap = reference.at_or_before(t);
        if held.as_ref().map(|(ts, _)| *ts) != Some(snap.t) {
            held = Some((snap.t, cfg.observer.observe(&snap.field)?));
        }
        let obs = &held.as_ref().expect("observation set above").1;
        let mut rhs = |v: &SpectralField, _: f64| -> Result<SpectralField> {
            let mut r = cfg.solver.forcing.clone();
            r.add_scaled(-1.0, &nonlinear_term(v, cfg.solver.dealias));
            r.add_scaled(1.0, &feedback(obs, v, cfg)?);
            Ok(r)
        };
        w = integrator.step(&w, t, &mut rhs)?;

        let t_new = (n + 1) as f64 * dt;
        while next_record < reference.snapshots.len() && reference.snapshots[next_record].t < t_new - tol {
            next_record += 1;
        }
        if next_record < reference.snapshots.len() && (reference.snapshots[next_record].t - t_new).abs() <= tol {
            sync.push(t_new, &reference.snapshots[next_record].field, &w);
            snapshots.push(Snapshot { t: t_new, field: w.clone() });
            next_record += 1;
        }
    }
    Ok((
        Trajectory {
            snapshots,
            solver: cfg.solver.clone(),
        },
        sync,
    ))
}
