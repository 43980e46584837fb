//! Pseudo-spectral integrator for
//!
//! ```text
//! du/dt + B(u, u) + ν A u = f,     u(0) = u₀
//! ```
//!
//! in Leray-projected form. The viscous term is integrated exactly through
//! the factor `exp(-ν λ(k) t)`; the nonlinearity and forcing are advanced
//! with classical RK4 in the integrating-factor frame. Pressure never
//! appears.

pub mod initial;

use crate::error::{Error, Result};
use crate::spectral::{PhysicalField, SpectralField, TorusConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Kinematic viscosity `ν`.
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    /// 2/3-rule truncation of the nonlinear product.
    pub dealias: bool,
    /// Stationary body force, solenoidal and zero-mean.
    pub forcing: SpectralField,
}

impl SolverConfig {
    pub fn new(nu: f64, dt: f64, t_end: f64, forcing: SpectralField) -> Result<Self> {
        let cfg = SolverConfig {
            nu,
            dt,
            t_end,
            dealias: true,
            forcing,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn unforced(torus: TorusConfig, nu: f64, dt: f64, t_end: f64) -> Result<Self> {
        Self::new(nu, dt, t_end, SpectralField::zeros(torus))
    }

    pub fn with_dealias(mut self, dealias: bool) -> Self {
        self.dealias = dealias;
        self
    }

    pub fn torus(&self) -> &TorusConfig {
        self.forcing.config()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return Err(Error::InvalidConfig(format!("solver.nu must be positive, got {}", self.nu)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig(format!("solver.dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "solver.t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        self.n_steps()?;
        let scale = self.forcing.norms().l2.max(1.0);
        if self.forcing.max_divergence() > 1e-12 * scale {
            return Err(Error::InvalidConfig("solver.forcing must be solenoidal".into()));
        }
        if self.forcing.coeffs()[0].iter().any(|z| z.norm() != 0.0) {
            return Err(Error::InvalidConfig("solver.forcing must have zero mean".into()));
        }
        Ok(())
    }

    /// Number of steps covering `[0, t_end]`; `t_end` must be a whole number
    /// of steps.
    pub fn n_steps(&self) -> Result<usize> {
        let steps = (self.t_end / self.dt).round();
        if (steps * self.dt - self.t_end).abs() > 1e-9 * self.dt.max(self.t_end) {
            return Err(Error::InvalidConfig(format!(
                "solver.t_end = {} is not a whole number of steps dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(steps as usize)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: SpectralField,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub solver: SolverConfig,
}

impl Trajectory {
    pub fn torus(&self) -> &TorusConfig {
        self.solver.torus()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    /// Latest snapshot with time `≤ t` (the first one if `t` precedes all).
    pub fn at_or_before(&self, t: f64) -> &Snapshot {
        let tol = 1e-9 * self.solver.dt;
        let idx = self.snapshots.partition_point(|s| s.t <= t + tol);
        &self.snapshots[idx.saturating_sub(1)]
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory has at least one snapshot")
    }
}

/// `P_σ((u·∇)w)` evaluated pseudo-spectrally, zero-mean.
pub fn advection(u: &SpectralField, w: &SpectralField, dealias: bool) -> SpectralField {
    let config = *u.config();
    let u_phys = u.to_physical();
    let grads: Vec<PhysicalField> = (0..3).map(|j| w.derivative(j).to_physical()).collect();
    let mut prod = PhysicalField::zeros(config);
    for (node, out) in prod.values_mut().iter_mut().enumerate() {
        let uj = u_phys.values()[node];
        for i in 0..3 {
            out[i] = uj[0] * grads[0].values()[node][i]
                + uj[1] * grads[1].values()[node][i]
                + uj[2] * grads[2].values()[node][i];
        }
    }
    let mut out = prod.to_spectral(true);
    if dealias {
        out.dealias();
    }
    out.leray_project_in_place();
    out
}

/// `B(u, u) = P_σ((u·∇)u)`.
pub fn nonlinear_term(u: &SpectralField, dealias: bool) -> SpectralField {
    advection(u, u, dealias)
}

/// Integrating-factor RK4 stepper. The explicit part is supplied per call so
/// the nudged system can reuse the scheme.
pub(crate) struct Integrator {
    dt: f64,
    full: Vec<f64>,
    half: Vec<f64>,
}

impl Integrator {
    pub(crate) fn new(cfg: &SolverConfig) -> Self {
        let torus = cfg.torus();
        let (mut full, mut half) = (Vec::with_capacity(torus.n_modes()), Vec::with_capacity(torus.n_modes()));
        for i in 0..torus.n_modes() {
            let lambda = torus.lambda1() * torus.wave_vector(i).norm_sq() as f64;
            full.push((-cfg.nu * lambda * cfg.dt).exp());
            half.push((-cfg.nu * lambda * cfg.dt * 0.5).exp());
        }
        Integrator { dt: cfg.dt, full, half }
    }

    fn apply(factors: &[f64], f: &SpectralField) -> SpectralField {
        let mut out = f.clone();
        for (c, s) in out.coeffs_mut().iter_mut().zip(factors) {
            for z in c.iter_mut() {
                *z *= *s;
            }
        }
        out
    }

    /// One step from time `t`; `rhs(v, τ)` is the explicit right-hand side.
    pub(crate) fn step(
        &self,
        u: &SpectralField,
        t: f64,
        rhs: &mut dyn FnMut(&SpectralField, f64) -> Result<SpectralField>,
    ) -> Result<SpectralField> {
        let dt = self.dt;
        let a = rhs(u, t)?;

        let mut u1 = u.clone();
        u1.add_scaled(0.5 * dt, &a);
        let u1 = Self::apply(&self.half, &u1);
        let b = rhs(&u1, t + 0.5 * dt)?;

        let mut u2 = Self::apply(&self.half, u);
        u2.add_scaled(0.5 * dt, &b);
        let c = rhs(&u2, t + 0.5 * dt)?;

        let mut u3 = Self::apply(&self.full, u);
        u3.add_scaled(dt, &Self::apply(&self.half, &c));
        let d = rhs(&u3, t + dt)?;

        let mut bc = b;
        bc.add_scaled(1.0, &c);
        let mut out = Self::apply(&self.full, u);
        out.add_scaled(dt / 6.0, &Self::apply(&self.full, &a));
        out.add_scaled(dt / 3.0, &Self::apply(&self.half, &bc));
        out.add_scaled(dt / 6.0, &d);

        if !out.is_finite() {
            return Err(Error::BlowUp { time: t + dt });
        }
        Ok(out)
    }
}

fn nse_rhs(cfg: &SolverConfig) -> impl FnMut(&SpectralField, f64) -> Result<SpectralField> + '_ {
    move |v, _| {
        let mut r = cfg.forcing.clone();
        r.add_scaled(-1.0, &nonlinear_term(v, cfg.dealias));
        Ok(r)
    }
}

/// Advances `u` by one step of `cfg.dt`.
pub fn step(u: &SpectralField, cfg: &SolverConfig) -> Result<SpectralField> {
    step_from(u, 0.0, cfg)
}

/// As [`step`], reporting blow-up relative to the starting time `t`.
pub fn step_from(u: &SpectralField, t: f64, cfg: &SolverConfig) -> Result<SpectralField> {
    Integrator::new(cfg).step(u, t, &mut nse_rhs(cfg))
}

/// Integrates from `u0` over `[0, t_end]`, storing every `snapshot_every`-th
/// step plus the final state.
pub fn run(u0: &SpectralField, cfg: &SolverConfig, snapshot_every: usize) -> Result<Trajectory> {
    cfg.validate()?;
    if snapshot_every == 0 {
        return Err(Error::InvalidConfig("snapshot_every must be at least 1".into()));
    }
    if u0.config() != cfg.torus() {
        return Err(Error::InvalidConfig("initial data and forcing live on different grids".into()));
    }
    let n_steps = cfg.n_steps()?;
    let integrator = Integrator::new(cfg);
    let mut rhs = nse_rhs(cfg);
    let mut u = u0.clone();
    let mut snapshots = vec![Snapshot { t: 0.0, field: u.clone() }];
    for n in 0..n_steps {
        let t = n as f64 * cfg.dt;
        u = integrator.step(&u, t, &mut rhs)?;
        if (n + 1) % snapshot_every == 0 || n + 1 == n_steps {
            snapshots.push(Snapshot {
                t: (n + 1) as f64 * cfg.dt,
                field: u.clone(),
            });
        }
    }
    Ok(Trajectory {
        snapshots,
        solver: cfg.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn torus(n: usize) -> TorusConfig {
        TorusConfig::new(2.0 * PI, n).unwrap()
    }

    #[test]
    fn zero_stays_zero() {
        let t = torus(8);
        let cfg = SolverConfig::unforced(t, 0.1, 0.01, 0.05).unwrap();
        let z = SpectralField::zeros(t);
        assert_eq!(nonlinear_term(&z, true), z);
        assert_eq!(step(&z, &cfg).unwrap(), z);
    }

    #[test]
    fn config_validation() {
        let t = torus(8);
        assert!(SolverConfig::unforced(t, 0.0, 0.01, 1.0).is_err());
        assert!(SolverConfig::unforced(t, 0.1, -0.01, 1.0).is_err());
        assert!(SolverConfig::unforced(t, 0.1, 0.3, 1.0).is_err());
        let mut f = SpectralField::zeros(t);
        f.coeffs_mut()[0][0] = Complex64::new(1.0, 0.0);
        assert!(SolverConfig::new(0.1, 0.1, 1.0, f).is_err());
        let mut g = SpectralField::zeros(t);
        g.set_pair(crate::WaveVector([1, 0, 0]), [Complex64::new(1.0, 0.0), Complex64::default(), Complex64::default()])
            .unwrap();
        assert!(SolverConfig::new(0.1, 0.1, 1.0, g.clone()).is_err());
        assert!(SolverConfig::new(0.1, 0.1, 1.0, g.leray_project()).is_ok());
    }

    #[test]
    fn t_end_zero_gives_initial_only() {
        let t = torus(8);
        let u0 = initial::beltrami(t, 1.0, 1).unwrap();
        let cfg = SolverConfig::unforced(t, 0.1, 0.01, 0.0).unwrap();
        let traj = run(&u0, &cfg, 1).unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        assert_eq!(traj.snapshots[0].field, u0);
    }

    #[test]
    fn beltrami_decays_exactly() {
        let t = torus(16);
        let u0 = initial::beltrami(t, 1.0, 1).unwrap();
        let lambda = initial::beltrami_eigenvalue(&t, 1);
        let cfg = SolverConfig::unforced(t, 0.1, 1e-3, 0.2).unwrap();
        let traj = run(&u0, &cfg, 50).unwrap();
        assert_eq!(traj.snapshots.len(), 5);
        for s in &traj.snapshots {
            let exact = u0.scaled((-cfg.nu * lambda * s.t).exp());
            let err = s.field.sub(&exact).norms().l2 / exact.norms().l2;
            assert!(err < 1e-6, "t = {} err = {err}", s.t);
        }
    }

    #[test]
    fn blow_up_is_reported() {
        let t = torus(8);
        let mut u0 = initial::beltrami(t, 1.0, 1).unwrap();
        u0.coeffs_mut()[t.flat_index(crate::WaveVector([1, 0, 0])).unwrap()][1] = Complex64::new(f64::NAN, 0.0);
        let cfg = SolverConfig::unforced(t, 0.1, 0.01, 0.05).unwrap();
        match run(&u0, &cfg, 1) {
            Err(Error::BlowUp { time }) => assert!((time - 0.01).abs() < 1e-15),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn at_or_before_holds_last_snapshot() {
        let t = torus(8);
        let u0 = initial::beltrami(t, 1.0, 1).unwrap();
        let cfg = SolverConfig::unforced(t, 0.1, 0.1, 1.0).unwrap();
        let traj = run(&u0, &cfg, 3).unwrap();
        assert_eq!(traj.times().len(), 5);
        assert_eq!(traj.at_or_before(0.25).t, 0.0);
        assert!((traj.at_or_before(0.3).t - 0.3).abs() < 1e-12);
        assert!((traj.at_or_before(5.0).t - 1.0).abs() < 1e-12);
    }
}
