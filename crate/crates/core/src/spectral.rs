//! Discrete function spaces on the periodic box `Ω = [0, L]³`.
//!
//! A [`SpectralField`] stores one complex 3-vector per wave vector of an
//! `n_spec³` grid with the convention
//!
//! ```text
//! u(x) = Σ_k û(k) exp(i (2π/L) k·x)
//! ```
//!
//! so that Parseval reads `∫_Ω |u|² dx = L³ Σ_k |û(k)|²`. Every norm in the
//! crate goes through this normalisation; [`to_physical`](SpectralField::to_physical)
//! is the unnormalised inverse DFT and [`to_spectral`](PhysicalField::to_spectral)
//! divides by `n_spec³`.
//!
//! Wave-vector components live in `[-n_spec/2, n_spec/2)`; storage index `i`
//! maps to `i` for `i < n_spec/2` and to `i - n_spec` otherwise.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{fft3, Direction};

/// Complex 3-vector: the Fourier coefficient of a velocity field at one mode.
pub type Coeff = [Complex64; 3];

const ZERO: Coeff = [Complex64::new(0.0, 0.0); 3];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusConfig {
    /// Side length `L` of the box.
    pub length: f64,
    /// Spectral resolution per dimension (even, at least 4).
    pub n_spec: usize,
}

impl TorusConfig {
    pub fn new(length: f64, n_spec: usize) -> Result<Self> {
        let cfg = TorusConfig { length, n_spec };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "torus.length must be positive, got {}",
                self.length
            )));
        }
        if self.n_spec < 4 || self.n_spec % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "torus.n_spec must be even and at least 4, got {}",
                self.n_spec
            )));
        }
        Ok(())
    }

    pub fn n_modes(&self) -> usize {
        self.n_spec * self.n_spec * self.n_spec
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(3)
    }

    /// `2π/L`
    pub fn base_wavenumber(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Smallest Stokes eigenvalue `λ₁ = (2π/L)²`.
    pub fn lambda1(&self) -> f64 {
        self.base_wavenumber().powi(2)
    }

    /// Collocation grid spacing `L / n_spec`.
    pub fn grid_spacing(&self) -> f64 {
        self.length / self.n_spec as f64
    }

    pub(crate) fn wavenumber(&self, idx: usize) -> i64 {
        let n = self.n_spec;
        if idx < n / 2 {
            idx as i64
        } else {
            idx as i64 - n as i64
        }
    }

    pub fn wave_vector(&self, flat: usize) -> WaveVector {
        let n = self.n_spec;
        WaveVector([
            self.wavenumber(flat / (n * n)),
            self.wavenumber((flat / n) % n),
            self.wavenumber(flat % n),
        ])
    }

    /// Storage index of `k`, or `None` when `k` lies outside the grid.
    pub fn flat_index(&self, k: WaveVector) -> Option<usize> {
        let n = self.n_spec as i64;
        let mut flat = 0usize;
        for &c in &k.0 {
            if c < -n / 2 || c >= n / 2 {
                return None;
            }
            flat = flat * self.n_spec + c.rem_euclid(n) as usize;
        }
        Some(flat)
    }

    pub(crate) fn neg_index(&self, flat: usize) -> usize {
        let n = self.n_spec;
        let (i, j, l) = (flat / (n * n), (flat / n) % n, flat % n);
        (((n - i) % n) * n + (n - j) % n) * n + (n - l) % n
    }

    /// True when some component sits on the Nyquist plane `-n_spec/2`.
    pub fn is_nyquist(&self, k: WaveVector) -> bool {
        let half = (self.n_spec / 2) as i64;
        k.0.iter().any(|&c| c == -half)
    }

    /// Whether `k` survives 2/3-rule truncation.
    pub fn dealias_keeps(&self, k: WaveVector) -> bool {
        let n = self.n_spec as i64;
        k.0.iter().all(|&c| 3 * c.abs() < n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WaveVector(pub [i64; 3]);

impl WaveVector {
    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0]
    }

    pub fn neg(&self) -> WaveVector {
        WaveVector([-self.0[0], -self.0[1], -self.0[2]])
    }

    fn dot(&self, c: &Coeff) -> Complex64 {
        c[0] * self.0[0] as f64 + c[1] * self.0[1] as f64 + c[2] * self.0[2] as f64
    }
}

/// Stokes eigenvalue `(2π/L)² |k|²`; the zero mode is excluded.
pub fn stokes_eigenvalue(k: WaveVector, config: &TorusConfig) -> Result<f64> {
    if k.is_zero() {
        return Err(Error::ZeroMode);
    }
    Ok(config.lambda1() * k.norm_sq() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms {
    /// `|u|`, the L² norm.
    pub l2: f64,
    /// `‖u‖`, the H¹ seminorm `‖∇u‖_{L²}`.
    pub h1: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    config: TorusConfig,
    coeffs: Vec<Coeff>,
}

impl SpectralField {
    pub fn zeros(config: TorusConfig) -> Self {
        SpectralField {
            config,
            coeffs: vec![ZERO; config.n_modes()],
        }
    }

    pub fn from_coeffs(config: TorusConfig, coeffs: Vec<Coeff>) -> Result<Self> {
        if coeffs.len() != config.n_modes() {
            return Err(Error::InvalidConfig(format!(
                "expected {} coefficients for n_spec = {}, got {}",
                config.n_modes(),
                config.n_spec,
                coeffs.len()
            )));
        }
        Ok(SpectralField { config, coeffs })
    }

    pub fn config(&self) -> &TorusConfig {
        &self.config
    }

    pub fn coeffs(&self) -> &[Coeff] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Coeff] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Coeff> {
        self.coeffs
    }

    /// Coefficient at `k`; zero for wave vectors outside the grid.
    pub fn get(&self, k: WaveVector) -> Coeff {
        self.config
            .flat_index(k)
            .map(|i| self.coeffs[i])
            .unwrap_or(ZERO)
    }

    pub fn set(&mut self, k: WaveVector, value: Coeff) -> Result<()> {
        let i = self.config.flat_index(k).ok_or_else(|| {
            Error::InvalidConfig(format!("wave vector {:?} outside the spectral grid", k.0))
        })?;
        self.coeffs[i] = value;
        Ok(())
    }

    /// Sets `û(k) = value` and `û(-k) = conj(value)`.
    pub fn set_pair(&mut self, k: WaveVector, value: Coeff) -> Result<()> {
        self.set(k, value)?;
        self.set(k.neg(), value.map(|c| c.conj()))
    }

    pub fn modes(&self) -> impl Iterator<Item = (WaveVector, &Coeff)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.config.wave_vector(i), c))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    fn check_same_grid(&self, other: &SpectralField) {
        assert_eq!(
            self.config, other.config,
            "spectral fields live on different grids"
        );
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, s: f64, other: &SpectralField) {
        self.check_same_grid(other);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            for d in 0..3 {
                a[d] += b[d] * s;
            }
        }
    }

    pub fn scaled(&self, s: f64) -> SpectralField {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            for z in c.iter_mut() {
                *z *= s;
            }
        }
        out
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.add_scaled(-1.0, other);
        out
    }

    pub fn remove_mean(&mut self) {
        self.coeffs[0] = ZERO;
    }

    /// Zeroes every mode outside the 2/3-rule band.
    pub fn dealias(&mut self) {
        for i in 0..self.coeffs.len() {
            if !self.config.dealias_keeps(self.config.wave_vector(i)) {
                self.coeffs[i] = ZERO;
            }
        }
    }

    /// Multiplies mode `k` by `factor(k)`.
    pub fn map_modes(&mut self, mut factor: impl FnMut(WaveVector) -> f64) {
        for i in 0..self.coeffs.len() {
            let s = factor(self.config.wave_vector(i));
            for z in self.coeffs[i].iter_mut() {
                *z *= s;
            }
        }
    }

    /// Leray projection: removes the component of each coefficient along `k`.
    pub fn leray_project(&self) -> SpectralField {
        let mut out = self.clone();
        out.leray_project_in_place();
        out
    }

    pub fn leray_project_in_place(&mut self) {
        for i in 0..self.coeffs.len() {
            let k = self.config.wave_vector(i);
            if k.is_zero() {
                self.coeffs[i] = ZERO;
                continue;
            }
            let c = &mut self.coeffs[i];
            let proj = k.dot(c) / k.norm_sq() as f64;
            for d in 0..3 {
                c[d] -= proj * k.0[d] as f64;
            }
        }
    }

    /// `max_k |k · û(k)|`, zero for a solenoidal field.
    pub fn max_divergence(&self) -> f64 {
        self.modes()
            .map(|(k, c)| k.dot(c).norm())
            .fold(0.0, f64::max)
    }

    /// `max_k |û(-k) - conj(û(k))|`, zero for real fields. Nyquist modes,
    /// whose negatives wrap onto the grid edge, are skipped.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.coeffs.len() {
            if self.config.is_nyquist(self.config.wave_vector(i)) {
                continue;
            }
            let j = self.config.neg_index(i);
            for d in 0..3 {
                worst = worst.max((self.coeffs[j][d] - self.coeffs[i][d].conj()).norm());
            }
        }
        worst
    }

    /// L² and H¹-seminorm via Parseval.
    pub fn norms(&self) -> Norms {
        let lambda1 = self.config.lambda1();
        let (mut l2, mut h1) = (0.0, 0.0);
        for (k, c) in self.modes() {
            let e: f64 = c.iter().map(|z| z.norm_sqr()).sum();
            l2 += e;
            h1 += lambda1 * k.norm_sq() as f64 * e;
        }
        let vol = self.config.volume();
        Norms {
            l2: (vol * l2).sqrt(),
            h1: (vol * h1).sqrt(),
        }
    }

    /// Real L² inner product `(u, v) = ∫ u·v dx`.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        self.check_same_grid(other);
        let mut acc = 0.0;
        for (a, b) in self.coeffs.iter().zip(&other.coeffs) {
            for d in 0..3 {
                acc += (a[d] * b[d].conj()).re;
            }
        }
        acc * self.config.volume()
    }

    /// Spectral derivative `∂_axis` of every component.
    pub fn derivative(&self, axis: usize) -> SpectralField {
        let kappa = self.config.base_wavenumber();
        let mut out = self.clone();
        for i in 0..out.coeffs.len() {
            let k = self.config.wave_vector(i);
            let factor = Complex64::new(0.0, kappa * k.0[axis] as f64);
            for z in out.coeffs[i].iter_mut() {
                *z *= factor;
            }
        }
        out
    }

    /// Inverse transform onto the `n_spec³` collocation grid.
    pub fn to_physical(&self) -> PhysicalField {
        let n = self.config.n_spec;
        let mut values = vec![[0.0; 3]; self.config.n_modes()];
        let mut buf = vec![Complex64::default(); self.config.n_modes()];
        for d in 0..3 {
            for (b, c) in buf.iter_mut().zip(&self.coeffs) {
                *b = c[d];
            }
            fft3(&mut buf, n, Direction::Inverse);
            for (v, b) in values.iter_mut().zip(&buf) {
                v[d] = b.re;
            }
        }
        PhysicalField {
            config: self.config,
            values,
        }
    }

    /// Complex inverse transform, for checking that Hermitian data is real.
    pub fn to_physical_complex(&self) -> Vec<Coeff> {
        let n = self.config.n_spec;
        let mut out = vec![ZERO; self.config.n_modes()];
        let mut buf = vec![Complex64::default(); self.config.n_modes()];
        for d in 0..3 {
            for (b, c) in buf.iter_mut().zip(&self.coeffs) {
                *b = c[d];
            }
            fft3(&mut buf, n, Direction::Inverse);
            for (v, b) in out.iter_mut().zip(&buf) {
                v[d] = *b;
            }
        }
        out
    }

    /// Point value at `x` by direct trigonometric summation over the nonzero
    /// modes (real part).
    pub fn evaluate(&self, x: [f64; 3]) -> [f64; 3] {
        let kappa = self.config.base_wavenumber();
        let mut out = [0.0; 3];
        for (k, c) in self.modes() {
            if c.iter().all(|z| *z == Complex64::default()) {
                continue;
            }
            let phase = kappa
                * (k.0[0] as f64 * x[0] + k.0[1] as f64 * x[1] + k.0[2] as f64 * x[2]);
            let e = Complex64::from_polar(1.0, phase);
            for d in 0..3 {
                out[d] += (c[d] * e).re;
            }
        }
        out
    }

    /// Exact trigonometric evaluation on the tensor-product lattice
    /// `coords × coords × coords`, returned row-major as `(a·m + b)·m + c`.
    ///
    /// The sum is contracted one axis at a time, so the cost is
    /// `O(n³m + n²m² + nm³)` instead of `O(n³m³)`.
    pub fn evaluate_on_lattice(&self, coords: &[f64]) -> Vec<[f64; 3]> {
        let n = self.config.n_spec;
        let m = coords.len();
        let kappa = self.config.base_wavenumber();
        // phase[p * n + idx] = exp(i κ k(idx) x_p)
        let phase: Vec<Complex64> = coords
            .iter()
            .flat_map(|&x| {
                (0..n).map(move |idx| Complex64::from_polar(1.0, kappa * self.config.wavenumber(idx) as f64 * x))
            })
            .collect();
        let zero = Complex64::default();
        let mut out = vec![[0.0; 3]; m * m * m];
        for d in 0..3 {
            // contract the fastest index l: t1[(i n + j) m + c]
            let mut t1 = vec![zero; n * n * m];
            for ij in 0..n * n {
                let row = &self.coeffs[ij * n..(ij + 1) * n];
                if row.iter().all(|c| c[d] == zero) {
                    continue;
                }
                for p in 0..m {
                    let ph = &phase[p * n..(p + 1) * n];
                    let mut acc = zero;
                    for l in 0..n {
                        acc += row[l][d] * ph[l];
                    }
                    t1[ij * m + p] = acc;
                }
            }
            // contract j: t2[(i m + b) m + c]
            let mut t2 = vec![zero; n * m * m];
            for i in 0..n {
                for j in 0..n {
                    let src = &t1[(i * n + j) * m..(i * n + j + 1) * m];
                    if src.iter().all(|z| *z == zero) {
                        continue;
                    }
                    for b in 0..m {
                        let e = phase[b * n + j];
                        let dst = &mut t2[(i * m + b) * m..(i * m + b + 1) * m];
                        for (o, s) in dst.iter_mut().zip(src) {
                            *o += s * e;
                        }
                    }
                }
            }
            // contract i
            let mut acc = vec![zero; m * m];
            for a in 0..m {
                acc.iter_mut().for_each(|z| *z = zero);
                for i in 0..n {
                    let src = &t2[i * m * m..(i + 1) * m * m];
                    if src.iter().all(|z| *z == zero) {
                        continue;
                    }
                    let e = phase[a * n + i];
                    for (o, s) in acc.iter_mut().zip(src) {
                        *o += s * e;
                    }
                }
                for (bc, z) in acc.iter().enumerate() {
                    out[a * m * m + bc][d] = z.re;
                }
            }
        }
        out
    }
}

/// Point values on the `n_spec³` collocation grid `x = (i, j, l) · L/n_spec`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalField {
    config: TorusConfig,
    values: Vec<[f64; 3]>,
}

impl PhysicalField {
    pub fn zeros(config: TorusConfig) -> Self {
        PhysicalField {
            config,
            values: vec![[0.0; 3]; config.n_modes()],
        }
    }

    pub fn from_values(config: TorusConfig, values: Vec<[f64; 3]>) -> Result<Self> {
        if values.len() != config.n_modes() {
            return Err(Error::InvalidConfig(format!(
                "expected {} grid values, got {}",
                config.n_modes(),
                values.len()
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("grid values must be finite".into()));
        }
        Ok(PhysicalField { config, values })
    }

    pub fn from_fn(config: TorusConfig, mut f: impl FnMut([f64; 3]) -> [f64; 3]) -> Self {
        let values = (0..config.n_modes())
            .map(|i| f(Self::position_of(&config, i)))
            .collect();
        PhysicalField { config, values }
    }

    fn position_of(config: &TorusConfig, flat: usize) -> [f64; 3] {
        let n = config.n_spec;
        let h = config.grid_spacing();
        [
            (flat / (n * n)) as f64 * h,
            ((flat / n) % n) as f64 * h,
            (flat % n) as f64 * h,
        ]
    }

    pub fn position(&self, flat: usize) -> [f64; 3] {
        Self::position_of(&self.config, flat)
    }

    pub fn config(&self) -> &TorusConfig {
        &self.config
    }

    pub fn values(&self) -> &[[f64; 3]] {
        &self.values
    }

    /// Forward transform. The zero mode is kept unless `remove_mean`.
    pub fn to_spectral(&self, remove_mean: bool) -> SpectralField {
        let n = self.config.n_spec;
        let scale = 1.0 / self.config.n_modes() as f64;
        let mut coeffs = vec![ZERO; self.config.n_modes()];
        let mut buf = vec![Complex64::default(); self.config.n_modes()];
        for d in 0..3 {
            for (b, v) in buf.iter_mut().zip(&self.values) {
                *b = Complex64::new(v[d], 0.0);
            }
            fft3(&mut buf, n, Direction::Forward);
            for (c, b) in coeffs.iter_mut().zip(&buf) {
                c[d] = b * scale;
            }
        }
        let mut out = SpectralField {
            config: self.config,
            coeffs,
        };
        if remove_mean {
            out.remove_mean();
        }
        out
    }

    /// L² norm by the collocation (trapezoid) rule.
    pub fn l2_quadrature(&self) -> f64 {
        let cell = self.config.grid_spacing().powi(3);
        let sum: f64 = self
            .values
            .iter()
            .map(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
            .sum();
        (sum * cell).sqrt()
    }

    /// Pointwise product used by the pseudo-spectral nonlinearity.
    pub(crate) fn values_mut(&mut self) -> &mut [[f64; 3]] {
        &mut self.values
    }
}
