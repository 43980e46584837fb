//! The observable regularity criterion.
//!
//! From a time series of observations the monitor forms
//!
//! ```text
//! M_h² = max_t  L³ Σ_{λ(k) ≤ λ_N} λ(k) |û(k, t)|²          (modal)
//!        max_t  Σ_α Σ_i vol(T_i^α) ‖D^{α,i}(u, t)‖_F²       (nodal)
//! W_h² = c ‖f‖² / (ν² λ₁) + c M_h²
//! ```
//!
//! and tests
//!
//! ```text
//! max{ ν λ₁,  W_h⁴ / ν³,  c ‖∇u(t₀)‖⁴ / ν³ } ≤ ν / (c h²)
//! ```
//!
//! (threshold `ν / (4 c h²)` for the late-start variant, which only needs
//! data on `[t₀, T]` with `t₀ > 0`). The maximum over stored snapshots stands
//! in for the essential supremum in time and can only under-estimate it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observers::{ModalData, NodalData, Observation, ObserverSpec};
use crate::solver::Trajectory;
use crate::spectral::SpectralField;
use crate::tetra::h1_data_norms;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Data on `[0, T]`, initial term `c‖∇u(0)‖⁴/ν³`, threshold `ν/(ch²)`.
    Sufficient,
    /// Data on `[t₀, T]`, initial term `c‖u(t₀)‖⁴/ν³`, threshold
    /// `ν/(4ch²)`. Satisfiable for some `h` exactly when `u` is regular.
    Characterization,
}

impl Variant {
    /// `Sufficient` when the window starts at zero.
    pub fn for_window_start(t0: f64) -> Self {
        if t0 > 0.0 {
            Variant::Characterization
        } else {
            Variant::Sufficient
        }
    }
}

/// Where `‖∇u(t₀)‖` came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientSource {
    /// The full reference field.
    Reference,
    /// The first observation in the window (the observer lacks the field).
    Observation,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Observations {
    Modal(Vec<(f64, ModalData)>),
    Nodal(Vec<(f64, NodalData)>),
}

/// Time-ordered observations of a single kind over `[t₀, T]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationSeries {
    window: (f64, f64),
    observations: Observations,
}

impl ObservationSeries {
    pub fn new(window: (f64, f64), observations: Observations) -> Result<Self> {
        let (t0, t1) = window;
        if !(t0.is_finite() && t1.is_finite() && t0 <= t1) {
            return Err(Error::InvalidSeries(format!("window [{t0}, {t1}] is not an interval")));
        }
        let times: Vec<f64> = match &observations {
            Observations::Modal(v) => v.iter().map(|e| e.0).collect(),
            Observations::Nodal(v) => v.iter().map(|e| e.0).collect(),
        };
        if times.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some(t) = times.iter().find(|t| **t < t0 || **t > t1) {
            return Err(Error::InvalidSeries(format!("time {t} outside window [{t0}, {t1}]")));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSeries("times must be strictly increasing".into()));
        }
        Ok(ObservationSeries { window, observations })
    }

    /// Observes every snapshot of `traj` inside `window`.
    pub fn from_trajectory(traj: &Trajectory, spec: ObserverSpec, window: (f64, f64)) -> Result<Self> {
        let tol = 1e-9 * traj.solver.dt;
        let inside = traj
            .snapshots
            .iter()
            .filter(|s| s.t >= window.0 - tol && s.t <= window.1 + tol);
        let observations = match spec {
            ObserverSpec::Modal { cutoff } => Observations::Modal(
                inside
                    .map(|s| Ok((s.t, crate::observers::observe_modal(&s.field, cutoff)?)))
                    .collect::<Result<_>>()?,
            ),
            ObserverSpec::Nodal { n_cubes } => Observations::Nodal(
                inside
                    .map(|s| Ok((s.t, crate::observers::observe_nodal(&s.field, n_cubes)?)))
                    .collect::<Result<_>>()?,
            ),
        };
        // snapshot times may overshoot the window by rounding
        let window = (window.0 - tol, window.1 + tol);
        Self::new(window, observations)
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn observations(&self) -> &Observations {
        &self.observations
    }

    pub fn len(&self) -> usize {
        match &self.observations {
            Observations::Modal(v) => v.len(),
            Observations::Nodal(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_modal(&self) -> bool {
        matches!(self.observations, Observations::Modal(_))
    }

    /// `(t, data norm²)` for every entry.
    pub fn data_norms(&self) -> Vec<(f64, f64)> {
        match &self.observations {
            Observations::Modal(v) => v.iter().map(|(t, m)| (*t, modal_data_norm_sq(m))).collect(),
            Observations::Nodal(v) => v.iter().map(|(t, n)| (*t, nodal_data_norm_sq(n))).collect(),
        }
    }

    /// First entry as a generic observation.
    pub fn first(&self) -> Observation {
        match &self.observations {
            Observations::Modal(v) => Observation::Modal(v[0].1.clone()),
            Observations::Nodal(v) => Observation::Nodal(v[0].1.clone()),
        }
    }
}

/// `L³ Σ λ(k) |û(k)|²` over the retained modes.
pub fn modal_data_norm_sq(m: &ModalData) -> f64 {
    let lambda1 = m.torus.lambda1();
    let sum: f64 = m
        .modes
        .iter()
        .map(|mc| lambda1 * mc.k.norm_sq() as f64 * mc.c.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum();
    m.torus.volume() * sum
}

/// `Σ_α Σ_i vol(T_i^α) ‖D^{α,i}‖_F²`
pub fn nodal_data_norm_sq(n: &NodalData) -> f64 {
    h1_data_norms(n).data.powi(2)
}

/// Maximum data norm over the series and the time where it is attained
/// (earliest on ties).
pub fn mh_with_time(series: &ObservationSeries) -> Result<(f64, f64)> {
    series
        .data_norms()
        .into_iter()
        .map(|(t, v)| (v, t))
        .reduce(|best, cur| if cur.0 > best.0 { cur } else { best })
        .ok_or(Error::EmptySeries)
}

/// `M_h²` for a series of either kind.
pub fn mh(series: &ObservationSeries) -> Result<f64> {
    mh_with_time(series).map(|(v, _)| v)
}

pub fn mh_modal(series: &ObservationSeries) -> Result<f64> {
    if !series.is_modal() {
        return Err(Error::InvalidSeries("expected a modal series".into()));
    }
    mh(series)
}

pub fn mh_nodal(series: &ObservationSeries) -> Result<f64> {
    if series.is_modal() {
        return Err(Error::InvalidSeries("expected a nodal series".into()));
    }
    mh(series)
}

/// `W_h² = c ‖f‖² / (ν² λ₁) + c M_h²`, with `f_l2_sq = ‖f‖²_{L²}`.
pub fn wh_from_forcing_norm(m2: f64, f_l2_sq: f64, nu: f64, lambda1: f64, c: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::InvalidConfig(format!("nu must be positive, got {nu}")));
    }
    if !(lambda1 > 0.0) {
        return Err(Error::InvalidConfig(format!("lambda1 must be positive, got {lambda1}")));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidConfig(format!("c must be positive, got {c}")));
    }
    Ok(c * f_l2_sq / (nu * nu * lambda1) + c * m2)
}

/// `W_h²` for the body force `f`.
pub fn wh(m2: f64, f: &SpectralField, nu: f64, lambda1: f64, c: f64) -> Result<f64> {
    wh_from_forcing_norm(m2, f.norms().l2.powi(2), nu, lambda1, c)
}

/// H¹ seminorm of the field behind the first observation: `‖P_N u‖` for
/// modal data, `‖∇Iu‖` (broken) for nodal data.
pub fn observed_initial_gradient(series: &ObservationSeries) -> f64 {
    match series.first() {
        Observation::Modal(m) => modal_data_norm_sq(&m).sqrt(),
        Observation::Nodal(n) => h1_data_norms(&n).exact,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriterionInputs {
    pub nu: f64,
    pub lambda1: f64,
    pub c: f64,
    /// Observation scale.
    pub h: f64,
    /// `M_h²`
    pub m2: f64,
    /// `W_h²`
    pub w2: f64,
    /// `‖∇u(t₀)‖`
    pub initial_gradient: f64,
    pub gradient_source: GradientSource,
    pub variant: Variant,
    pub window: (f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionTerms {
    /// `ν λ₁`
    pub viscous: f64,
    /// `W_h⁴ / ν³`
    pub data: f64,
    /// `c ‖∇u(t₀)‖⁴ / ν³`
    pub initial: f64,
}

impl CriterionTerms {
    pub fn max(&self) -> f64 {
        self.viscous.max(self.data).max(self.initial)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub variant: Variant,
    pub nu: f64,
    pub lambda1: f64,
    pub c: f64,
    pub h: f64,
    pub t0: f64,
    pub t_end: f64,
    pub m2: f64,
    pub w2: f64,
    /// Predicted bound `W_h` on `‖u(t)‖`.
    pub w_bound: f64,
    pub initial_gradient: f64,
    pub initial_gradient_source: GradientSource,
    pub terms: CriterionTerms,
    pub max_term: f64,
    pub threshold: f64,
    pub satisfied: bool,
}

impl CriterionReport {
    /// Recomputes the verdict from the stored terms and threshold.
    pub fn is_consistent(&self) -> bool {
        self.max_term == self.terms.max() && self.satisfied == (self.max_term <= self.threshold)
    }
}

pub fn check(inputs: &CriterionInputs) -> CriterionReport {
    let CriterionInputs {
        nu,
        lambda1,
        c,
        h,
        m2,
        w2,
        initial_gradient,
        gradient_source,
        variant,
        window,
    } = *inputs;
    let nu3 = nu.powi(3);
    let terms = CriterionTerms {
        viscous: nu * lambda1,
        data: w2 * w2 / nu3,
        initial: c * initial_gradient.powi(4) / nu3,
    };
    let threshold = match variant {
        Variant::Sufficient => nu / (c * h * h),
        Variant::Characterization => nu / (4.0 * c * h * h),
    };
    let max_term = terms.max();
    CriterionReport {
        variant,
        nu,
        lambda1,
        c,
        h,
        t0: window.0,
        t_end: window.1,
        m2,
        w2,
        w_bound: w2.sqrt(),
        initial_gradient,
        initial_gradient_source: gradient_source,
        terms,
        max_term,
        threshold,
        satisfied: max_term <= threshold,
    }
}

/// Shared physical parameters of a sweep over observation scales.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepParams {
    pub nu: f64,
    pub lambda1: f64,
    pub c: f64,
    /// `‖f‖²_{L²}`
    pub f_l2_sq: f64,
    pub initial_gradient: f64,
    pub gradient_source: GradientSource,
    pub variant: Variant,
}

/// Evaluates the criterion for each observer in `specs`, using
/// `series_for(spec)` to obtain the data and `spec.scale` for `h`.
pub fn sweep_series<F>(
    params: &SweepParams,
    torus: &crate::spectral::TorusConfig,
    specs: &[ObserverSpec],
    mut series_for: F,
) -> Result<Vec<CriterionReport>>
where
    F: FnMut(ObserverSpec) -> Result<ObservationSeries>,
{
    specs
        .iter()
        .map(|spec| {
            let series = series_for(*spec)?;
            let m2 = mh(&series)?;
            let w2 = wh_from_forcing_norm(m2, params.f_l2_sq, params.nu, params.lambda1, params.c)?;
            Ok(check(&CriterionInputs {
                nu: params.nu,
                lambda1: params.lambda1,
                c: params.c,
                h: spec.scale(torus)?,
                m2,
                w2,
                initial_gradient: params.initial_gradient,
                gradient_source: params.gradient_source,
                variant: params.variant,
                window: series.window(),
            }))
        })
        .collect()
}

/// Nodal refinement study on a reference trajectory over `[t₀, T]`, one
/// report per entry of `n_cubes` (coarse to fine). `‖∇u(t₀)‖` is taken from
/// the reference.
pub fn h_sweep(traj: &Trajectory, c: f64, n_cubes: &[usize], t0: f64, variant: Variant) -> Result<Vec<CriterionReport>> {
    let torus = *traj.torus();
    let t_end = traj.last().t;
    let params = SweepParams {
        nu: traj.solver.nu,
        lambda1: torus.lambda1(),
        c,
        f_l2_sq: traj.solver.forcing.norms().l2.powi(2),
        initial_gradient: traj.at_or_before(t0).field.norms().h1,
        gradient_source: GradientSource::Reference,
        variant,
    };
    let specs: Vec<ObserverSpec> = n_cubes.iter().map(|&n| ObserverSpec::Nodal { n_cubes: n }).collect();
    sweep_series(&params, &torus, &specs, |spec| {
        ObservationSeries::from_trajectory(traj, spec, (t0, t_end))
    })
}

/// Coarsest admissible scale in a sweep, if any.
pub fn first_admissible(reports: &[CriterionReport]) -> Option<&CriterionReport> {
    reports.iter().find(|r| r.satisfied)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observers::{observe_modal, observe_nodal, Boundary};
    use crate::solver::{initial, run, SolverConfig};
    use crate::spectral::{TorusConfig, WaveVector};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn inputs(h: f64) -> CriterionInputs {
        CriterionInputs {
            nu: 1.0,
            lambda1: 1.0,
            c: 1.0,
            h,
            m2: 0.0,
            w2: 1.0,
            initial_gradient: 1.0,
            gradient_source: GradientSource::Reference,
            variant: Variant::Sufficient,
            window: (0.0, 1.0),
        }
    }

    #[test]
    fn hand_computed_verdicts() {
        let r = check(&inputs(0.5));
        assert_eq!((r.terms.viscous, r.terms.data, r.terms.initial), (1.0, 1.0, 1.0));
        assert_eq!(r.threshold, 4.0);
        assert!(r.satisfied && r.is_consistent());
        let r = check(&inputs(2.0));
        assert_eq!(r.threshold, 0.25);
        assert!(!r.satisfied && r.is_consistent());
        let r = check(&CriterionInputs {
            variant: Variant::Characterization,
            ..inputs(0.5)
        });
        assert_eq!(r.threshold, 1.0);
        assert!(r.satisfied);
    }

    #[test]
    fn zero_flow_threshold() {
        for (c, lambda1) in [(1.0, 1.0), (2.0, 0.5), (0.3, 39.47841760435743)] {
            for h in [0.05, 0.3, 0.9, 1.0, 1.1, 1.9] {
                let r = check(&CriterionInputs {
                    nu: 0.7,
                    lambda1,
                    c,
                    h,
                    m2: 0.0,
                    w2: 0.0,
                    initial_gradient: 0.0,
                    ..inputs(h)
                });
                assert_eq!(r.terms.data, 0.0);
                assert_eq!(r.terms.initial, 0.0);
                assert_eq!(r.satisfied, h * h <= 1.0 / (c * lambda1), "c={c} λ={lambda1} h={h}");
            }
        }
    }

    #[test]
    fn wh_formula() {
        assert_eq!(wh_from_forcing_norm(0.0, 0.0, 1.0, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(wh_from_forcing_norm(3.5, 0.0, 0.2, 4.0, 2.0).unwrap(), 7.0);
        assert_eq!(wh_from_forcing_norm(0.0, 1.25, 1.0, 1.0, 1.0).unwrap(), 1.25);
        assert!(wh_from_forcing_norm(1.0, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(wh_from_forcing_norm(1.0, 1.0, 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn modal_single_pair() {
        let t = TorusConfig::new(2.0 * PI, 8).unwrap();
        let z = Complex64::default();
        let a = Complex64::new(0.3, -0.4);
        let mut u = SpectralField::zeros(t);
        u.set_pair(WaveVector([1, 1, 0]), [z, z, a]).unwrap();
        let obs = observe_modal(&u, 18).unwrap();
        let series = ObservationSeries::new((0.0, 1.0), Observations::Modal(vec![(0.0, obs.clone()), (1.0, obs)])).unwrap();
        let m2 = mh_modal(&series).unwrap();
        let want = 2.0 * t.volume() * 2.0 * a.norm_sqr();
        assert!((m2 - want).abs() < 1e-12 * want);
        assert!((m2 - u.norms().h1.powi(2)).abs() < 1e-12 * want);
        assert!(mh_nodal(&series).is_err());
    }

    #[test]
    fn zero_series() {
        let t = TorusConfig::new(1.0, 8).unwrap();
        let z = SpectralField::zeros(t);
        let s = ObservationSeries::new((0.0, 0.0), Observations::Nodal(vec![(0.0, observe_nodal(&z, 4).unwrap())])).unwrap();
        assert_eq!(mh_nodal(&s).unwrap(), 0.0);
        let s = ObservationSeries::new((0.0, 0.0), Observations::Modal(vec![(0.0, observe_modal(&z, 6).unwrap())])).unwrap();
        assert_eq!(mh_modal(&s).unwrap(), 0.0);
    }

    #[test]
    fn series_validation() {
        let t = TorusConfig::new(1.0, 8).unwrap();
        let n = observe_nodal(&SpectralField::zeros(t), 2).unwrap();
        assert!(matches!(
            ObservationSeries::new((0.0, 1.0), Observations::Nodal(vec![])),
            Err(Error::EmptySeries)
        ));
        assert!(ObservationSeries::new((0.0, 1.0), Observations::Nodal(vec![(0.5, n.clone()), (0.5, n.clone())])).is_err());
        assert!(ObservationSeries::new((0.0, 1.0), Observations::Nodal(vec![(1.5, n.clone())])).is_err());
        assert!(ObservationSeries::new((1.0, 0.0), Observations::Nodal(vec![(0.5, n)])).is_err());
    }

    #[test]
    fn linear_field_data_norm_brackets_exact() {
        let g = [[0.5, -1.0, 0.25], [0.0, 2.0, 1.0], [-0.75, 0.5, 0.125]];
        let nodal = NodalData::from_fn(4, 2.0, Boundary::Open, |x| {
            [0, 1, 2].map(|l| g[l][0] * x[0] + g[l][1] * x[1] + g[l][2] * x[2])
        })
        .unwrap();
        let s = ObservationSeries::new((0.0, 1.0), Observations::Nodal(vec![(0.0, nodal.clone()), (1.0, nodal)])).unwrap();
        let data2 = mh_nodal(&s).unwrap();
        let exact2 = 8.0 * g.iter().flatten().map(|x| x * x).sum::<f64>();
        let b = crate::tetra::TetraBasis::standard();
        assert!(exact2 / b.m_norm.powi(2) <= data2 * (1.0 + 1e-12));
        assert!(data2 <= exact2 * b.m_inv_norm.powi(2) * (1.0 + 1e-12));
    }

    #[test]
    fn decaying_flow_peaks_first() {
        let t = TorusConfig::new(2.0 * PI, 8).unwrap();
        let u0 = initial::beltrami(t, 0.1, 1).unwrap();
        let cfg = SolverConfig::unforced(t, 0.1, 0.01, 0.5).unwrap();
        let traj = run(&u0, &cfg, 10).unwrap();
        let s = ObservationSeries::from_trajectory(&traj, ObserverSpec::Nodal { n_cubes: 8 }, (0.0, 0.5)).unwrap();
        let (_, t_max) = mh_with_time(&s).unwrap();
        assert_eq!(t_max, 0.0);
        let norms = s.data_norms();
        assert!(norms.windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn zero_trajectory_sweep() {
        let t = TorusConfig::new(2.0 * PI, 8).unwrap();
        let cfg = SolverConfig::unforced(t, 0.1, 0.1, 0.2).unwrap();
        let traj = run(&SpectralField::zeros(t), &cfg, 1).unwrap();
        let reports = h_sweep(&traj, 1.0, &[2, 4, 6, 8, 16], 0.0, Variant::Sufficient).unwrap();
        for r in &reports {
            assert_eq!(r.m2, 0.0);
            assert_eq!(r.satisfied, r.h * r.h <= 1.0 / t.lambda1());
        }
        // h = π, π/2 fail; h ≤ π/3 passes
        let verdicts: Vec<bool> = reports.iter().map(|r| r.satisfied).collect();
        assert_eq!(verdicts, vec![false, false, false, true, true]);
        // monotone in h for the zero flow
        assert!(verdicts.windows(2).all(|w| !w[0] || w[1]));
        assert_eq!(first_admissible(&reports).unwrap().h, 2.0 * PI / 8.0);
    }
}
