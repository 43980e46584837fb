//! Finite observation sets of a velocity field: modal (the Fourier
//! coefficients below a Stokes-eigenvalue cutoff) and nodal (point values at
//! the vertices of a uniform cube grid).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Coeff, SpectralField, TorusConfig, WaveVector};

/// Wave vectors that count towards the modal cutoff: nonzero and off the
/// Nyquist planes, so that every retained mode has its conjugate partner.
fn ranked_norms(torus: &TorusConfig) -> Vec<i64> {
    let mut norms: Vec<i64> = (0..torus.n_modes())
        .map(|i| torus.wave_vector(i))
        .filter(|k| !k.is_zero() && !torus.is_nyquist(*k))
        .map(|k| k.norm_sq())
        .collect();
    norms.sort_unstable();
    norms
}

/// Number of wave vectors a modal cutoff can range over.
pub fn available_modes(torus: &TorusConfig) -> usize {
    let m = torus.n_spec - 1;
    m * m * m - 1
}

/// `|k|²` of the `cutoff`-th Stokes eigenvalue, counted with multiplicity
/// over wave vectors.
pub fn cutoff_norm_sq(torus: &TorusConfig, cutoff: usize) -> Result<i64> {
    let available = available_modes(torus);
    if cutoff == 0 || cutoff > available {
        return Err(Error::CutoffTooLarge {
            requested: cutoff,
            available,
        });
    }
    Ok(ranked_norms(torus)[cutoff - 1])
}

/// `λ_N`, the Stokes eigenvalue at the cutoff.
pub fn cutoff_eigenvalue(torus: &TorusConfig, cutoff: usize) -> Result<f64> {
    Ok(torus.lambda1() * cutoff_norm_sq(torus, cutoff)? as f64)
}

/// Smallest Stokes eigenvalue strictly above `λ_N` on the grid, or `None`
/// when the cutoff retains every mode.
pub fn first_excluded_eigenvalue(torus: &TorusConfig, cutoff: usize) -> Result<Option<f64>> {
    let kmax = cutoff_norm_sq(torus, cutoff)?;
    Ok((0..torus.n_modes())
        .map(|i| torus.wave_vector(i).norm_sq())
        .filter(|&q| q > kmax)
        .min()
        .map(|q| torus.lambda1() * q as f64))
}

/// Cutoff that retains every available mode.
pub fn full_cutoff(torus: &TorusConfig) -> usize {
    available_modes(torus)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModalCoeff {
    pub k: WaveVector,
    pub c: Coeff,
}

/// `P_N u`: the retained Fourier coefficients `{k ≠ 0 : λ(k) ≤ λ_N}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModalData {
    pub cutoff: usize,
    pub torus: TorusConfig,
    pub modes: Vec<ModalCoeff>,
}

impl ModalData {
    /// Reconstruction `P_N u` as a spectral field.
    pub fn reconstruct(&self) -> SpectralField {
        let mut f = SpectralField::zeros(self.torus);
        for m in &self.modes {
            let i = self.torus.flat_index(m.k).expect("retained mode on the grid");
            f.coeffs_mut()[i] = m.c;
        }
        f
    }

    /// `λ_N`
    pub fn cutoff_eigenvalue(&self) -> f64 {
        cutoff_eigenvalue(&self.torus, self.cutoff).expect("cutoff validated on construction")
    }

    /// Observation scale `h = λ_N^{-1/2}`.
    pub fn scale(&self) -> f64 {
        self.cutoff_eigenvalue().powf(-0.5)
    }
}

pub fn observe_modal(u: &SpectralField, cutoff: usize) -> Result<ModalData> {
    let torus = *u.config();
    let kmax = cutoff_norm_sq(&torus, cutoff)?;
    let modes = u
        .modes()
        .filter(|(k, _)| !k.is_zero() && !torus.is_nyquist(*k) && k.norm_sq() <= kmax)
        .map(|(k, c)| ModalCoeff { k, c: *c })
        .collect();
    Ok(ModalData { cutoff, torus, modes })
}

/// How vertex indices beyond the last cube are resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// `n_cubes³` vertices; index `n_cubes` wraps to `0`.
    Periodic,
    /// `(n_cubes + 1)³` vertices covering the closed box, no wrap. Used for
    /// data that is not periodic, such as globally affine test fields.
    Open,
}

/// Point values `u(j h, k h, l h)` at the cube-grid vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodalData {
    pub n_cubes: usize,
    pub h: f64,
    pub boundary: Boundary,
    /// Row-major over `(j, k, l)`.
    pub samples: Vec<[f64; 3]>,
}

impl NodalData {
    pub fn new(n_cubes: usize, length: f64, boundary: Boundary, samples: Vec<[f64; 3]>) -> Result<Self> {
        if n_cubes < 1 {
            return Err(Error::InvalidConfig("n_cubes must be positive".into()));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidConfig(format!("length must be positive, got {length}")));
        }
        let data = NodalData {
            n_cubes,
            h: length / n_cubes as f64,
            boundary,
            samples,
        };
        let want = data.side().pow(3);
        if data.samples.len() != want {
            return Err(Error::InvalidConfig(format!(
                "{boundary:?} nodal data with n_cubes = {n_cubes} needs {want} samples, got {}",
                data.samples.len()
            )));
        }
        if data.samples.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("nodal samples must be finite".into()));
        }
        Ok(data)
    }

    pub fn from_fn(
        n_cubes: usize,
        length: f64,
        boundary: Boundary,
        mut f: impl FnMut([f64; 3]) -> [f64; 3],
    ) -> Result<Self> {
        let side = match boundary {
            Boundary::Periodic => n_cubes,
            Boundary::Open => n_cubes + 1,
        };
        let h = length / n_cubes as f64;
        let mut samples = Vec::with_capacity(side * side * side);
        for j in 0..side {
            for k in 0..side {
                for l in 0..side {
                    samples.push(f([j as f64 * h, k as f64 * h, l as f64 * h]));
                }
            }
        }
        Self::new(n_cubes, length, boundary, samples)
    }

    /// Vertices per side.
    pub fn side(&self) -> usize {
        match self.boundary {
            Boundary::Periodic => self.n_cubes,
            Boundary::Open => self.n_cubes + 1,
        }
    }

    pub fn length(&self) -> f64 {
        self.h * self.n_cubes as f64
    }

    pub fn n_cells(&self) -> usize {
        self.n_cubes.pow(3)
    }

    /// Sample at vertex `idx`, each component in `0..=n_cubes`.
    pub fn sample(&self, idx: [usize; 3]) -> [f64; 3] {
        let (side, n) = (self.side(), self.n_cubes);
        let wrap = |i: usize| match self.boundary {
            Boundary::Periodic => i % n,
            Boundary::Open => i,
        };
        self.samples[(wrap(idx[0]) * side + wrap(idx[1])) * side + wrap(idx[2])]
    }

    fn check_compatible(&self, other: &NodalData) -> Result<()> {
        if self.n_cubes != other.n_cubes || self.boundary != other.boundary || self.h != other.h {
            return Err(Error::ResolutionMismatch(format!(
                "nodal grids differ: {} cubes of {} vs {} cubes of {}",
                self.n_cubes, self.h, other.n_cubes, other.h
            )));
        }
        Ok(())
    }

    pub fn sub(&self, other: &NodalData) -> Result<NodalData> {
        self.check_compatible(other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| [a[0] - b[0], a[1] - b[1], a[2] - b[2]])
            .collect();
        Ok(NodalData {
            samples,
            ..self.clone()
        })
    }

    pub fn scaled(&self, s: f64) -> NodalData {
        NodalData {
            samples: self.samples.iter().map(|v| v.map(|x| x * s)).collect(),
            ..self.clone()
        }
    }
}

/// Nodal observation on `n_cubes³` periodic vertices by exact trigonometric
/// summation.
pub fn observe_nodal(u: &SpectralField, n_cubes: usize) -> Result<NodalData> {
    if n_cubes < 2 {
        return Err(Error::InvalidConfig(format!("n_cubes must be at least 2, got {n_cubes}")));
    }
    let length = u.config().length;
    let h = length / n_cubes as f64;
    let coords: Vec<f64> = (0..n_cubes).map(|j| j as f64 * h).collect();
    NodalData::new(n_cubes, length, Boundary::Periodic, u.evaluate_on_lattice(&coords))
}

/// Which observation operator to apply, and at what resolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum ObserverSpec {
    /// Fourier modes up to the `cutoff`-th Stokes eigenvalue.
    Modal { cutoff: usize },
    /// Point values on an `n_cubes³` vertex grid.
    Nodal { n_cubes: usize },
}

impl ObserverSpec {
    pub fn observe(&self, u: &SpectralField) -> Result<Observation> {
        match *self {
            ObserverSpec::Modal { cutoff } => observe_modal(u, cutoff).map(Observation::Modal),
            ObserverSpec::Nodal { n_cubes } => observe_nodal(u, n_cubes).map(Observation::Nodal),
        }
    }

    /// Observation scale `h`: `λ_N^{-1/2}` for modal data, `L / n_cubes` for
    /// nodal data.
    pub fn scale(&self, torus: &TorusConfig) -> Result<f64> {
        match *self {
            ObserverSpec::Modal { cutoff } => Ok(cutoff_eigenvalue(torus, cutoff)?.powf(-0.5)),
            ObserverSpec::Nodal { n_cubes } => {
                if n_cubes < 2 {
                    return Err(Error::InvalidConfig(format!("n_cubes must be at least 2, got {n_cubes}")));
                }
                Ok(torus.length / n_cubes as f64)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Observation {
    Modal(ModalData),
    Nodal(NodalData),
}

impl Observation {
    pub fn spec(&self) -> ObserverSpec {
        match self {
            Observation::Modal(m) => ObserverSpec::Modal { cutoff: m.cutoff },
            Observation::Nodal(n) => ObserverSpec::Nodal { n_cubes: n.n_cubes },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::initial;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn torus() -> TorusConfig {
        TorusConfig::new(2.0 * PI, 8).unwrap()
    }

    #[test]
    fn cutoff_ranking() {
        let t = torus();
        assert_eq!(available_modes(&t), 7 * 7 * 7 - 1);
        // six wave vectors with |k|² = 1
        for n in 1..=6 {
            assert_eq!(cutoff_norm_sq(&t, n).unwrap(), 1);
        }
        assert_eq!(cutoff_norm_sq(&t, 7).unwrap(), 2);
        assert!((first_excluded_eigenvalue(&t, 6).unwrap().unwrap() - 2.0).abs() < 1e-14);
        match cutoff_norm_sq(&t, 10_000) {
            Err(Error::CutoffTooLarge { available, .. }) => assert_eq!(available, 342),
            other => panic!("{other:?}"),
        }
        assert!(cutoff_norm_sq(&t, 0).is_err());
    }

    #[test]
    fn single_mode_retained_or_dropped() {
        let t = torus();
        let z = Complex64::default();
        let mut u = SpectralField::zeros(t);
        u.set_pair(WaveVector([1, 1, 0]), [z, z, Complex64::new(0.3, 0.1)]).unwrap();
        let kept = observe_modal(&u, 18).unwrap();
        assert_eq!(kept.modes.len(), 18);
        assert_eq!(kept.reconstruct(), u);
        let dropped = observe_modal(&u, 6).unwrap();
        assert_eq!(dropped.reconstruct(), SpectralField::zeros(t));
    }

    #[test]
    fn modal_projection_bounds() {
        let t = torus();
        for seed in 0..100 {
            let u = initial::random_field(t, 1.0, seed, true);
            for cutoff in [6, 18, 26, 56] {
                let pn = observe_modal(&u, cutoff).unwrap().reconstruct();
                let lam = first_excluded_eigenvalue(&t, cutoff).unwrap().unwrap();
                let n = u.norms();
                assert!(pn.norms().l2 <= n.l2);
                assert!(u.sub(&pn).norms().l2 <= lam.powf(-0.5) * n.h1 * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn modal_projection_is_idempotent_and_monotone() {
        let t = torus();
        let u = initial::random_field(t, 1.0, 9, true);
        let mut prev = 0;
        for cutoff in [1, 6, 7, 18, 19, 26, 100, 342] {
            let data = observe_modal(&u, cutoff).unwrap();
            assert_eq!(observe_modal(&data.reconstruct(), cutoff).unwrap(), data);
            assert!(data.modes.len() >= prev);
            let kmax = cutoff_norm_sq(&t, cutoff).unwrap();
            let want = (0..t.n_modes())
                .map(|i| t.wave_vector(i))
                .filter(|k| !k.is_zero() && !t.is_nyquist(*k) && k.norm_sq() <= kmax)
                .count();
            assert_eq!(data.modes.len(), want);
            prev = data.modes.len();
        }
    }

    #[test]
    fn nodal_sine_values() {
        let t = TorusConfig::new(1.0, 8).unwrap();
        let z = Complex64::default();
        let mut u = SpectralField::zeros(t);
        u.set_pair(WaveVector([1, 0, 0]), [z, Complex64::new(0.0, -0.5), z]).unwrap();
        let obs = observe_nodal(&u, 4).unwrap();
        for (j, want) in [0.0, 1.0, 0.0, -1.0].into_iter().enumerate() {
            for k in 0..4 {
                let s = obs.sample([j, k, 3]);
                assert!(s[0].abs() < 1e-12 && s[2].abs() < 1e-12);
                assert!((s[1] - want).abs() < 1e-12);
            }
        }
        assert_eq!(obs.sample([4, 0, 0]), obs.sample([0, 0, 0]));
        assert!(observe_nodal(&u, 1).is_err());
        let zero = observe_nodal(&SpectralField::zeros(t), 4).unwrap();
        assert!(zero.samples.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn nodal_matches_collocation_and_is_linear() {
        let t = TorusConfig::new(1.7, 8).unwrap();
        let u = initial::random_field(t, 1.0, 1, true);
        let w = initial::random_field(t, 1.0, 2, true);
        let phys = u.to_physical();
        let obs = observe_nodal(&u, 4).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    let p = phys.values()[((2 * j) * 8 + 2 * k) * 8 + 2 * l];
                    let s = obs.sample([j, k, l]);
                    for d in 0..3 {
                        assert!((p[d] - s[d]).abs() < 1e-12);
                    }
                }
            }
        }
        let mut sum = u.clone();
        sum.add_scaled(-2.5, &w);
        let lhs = observe_nodal(&sum, 5).unwrap();
        let (a, b) = (observe_nodal(&u, 5).unwrap(), observe_nodal(&w, 5).unwrap());
        for ((x, y), z) in lhs.samples.iter().zip(&a.samples).zip(&b.samples) {
            for d in 0..3 {
                assert!((x[d] - (y[d] - 2.5 * z[d])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn nodal_validation() {
        assert!(NodalData::new(2, 1.0, Boundary::Periodic, vec![[0.0; 3]; 8]).is_ok());
        assert!(NodalData::new(2, 1.0, Boundary::Open, vec![[0.0; 3]; 8]).is_err());
        assert!(NodalData::new(2, 1.0, Boundary::Periodic, vec![[f64::NAN; 3]; 8]).is_err());
        let a = NodalData::new(2, 1.0, Boundary::Periodic, vec![[1.0; 3]; 8]).unwrap();
        let b = NodalData::new(3, 1.0, Boundary::Periodic, vec![[1.0; 3]; 27]).unwrap();
        assert!(matches!(a.sub(&b), Err(Error::ResolutionMismatch(_))));
    }
}
