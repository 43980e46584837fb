//! Initial data and forcing generators.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::{SpectralField, TorusConfig, WaveVector};

/// ABC (Arnold–Beltrami–Childress) field at integer wavenumber `kappa`:
///
/// ```text
/// u = (A sin κz + C cos κy,  B sin κx + A cos κz,  C sin κy + B cos κx)
/// ```
///
/// with `κ = 2π·kappa/L`. It satisfies `curl u = κ u`, so the nonlinearity is
/// a pure gradient and the field decays as `exp(-ν κ² t)`.
pub fn abc(config: TorusConfig, amplitudes: [f64; 3], kappa: i64) -> Result<SpectralField> {
    if kappa <= 0 || 2 * kappa >= config.n_spec as i64 {
        return Err(Error::InvalidConfig(format!(
            "ABC wavenumber {kappa} must lie in [1, {})",
            config.n_spec / 2
        )));
    }
    let [a, b, c] = amplitudes;
    let z = Complex64::default();
    let sin = |amp: f64| Complex64::new(0.0, -0.5 * amp);
    let cos = |amp: f64| Complex64::new(0.5 * amp, 0.0);
    let mut f = SpectralField::zeros(config);
    // B sin κx in y, B cos κx in z
    f.set_pair(WaveVector([kappa, 0, 0]), [z, sin(b), cos(b)])?;
    // C cos κy in x, C sin κy in z
    f.set_pair(WaveVector([0, kappa, 0]), [cos(c), z, sin(c)])?;
    // A sin κz in x, A cos κz in y
    f.set_pair(WaveVector([0, 0, kappa]), [sin(a), cos(a), z])?;
    Ok(f)
}

/// Symmetric ABC field with `A = B = C = amplitude`.
pub fn beltrami(config: TorusConfig, amplitude: f64, kappa: i64) -> Result<SpectralField> {
    abc(config, [amplitude; 3], kappa)
}

/// Stokes eigenvalue shared by every mode of [`abc`] at `kappa`.
pub fn beltrami_eigenvalue(config: &TorusConfig, kappa: i64) -> f64 {
    config.lambda1() * (kappa * kappa) as f64
}

/// Random real field with spectrum `amplitude · exp(-|k|)`, supported on the
/// nonzero modes of the 2/3-rule band, optionally Leray-projected.
/// Deterministic in `seed`.
pub fn random_field(config: TorusConfig, amplitude: f64, seed: u64, solenoidal: bool) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(config);
    for i in 0..config.n_modes() {
        let k = config.wave_vector(i);
        let j = config.flat_index(k.neg()).unwrap_or(i);
        if k.is_zero() || !config.dealias_keeps(k) || j < i {
            continue;
        }
        let env = amplitude * (-(k.norm_sq() as f64).sqrt()).exp();
        let c = [0; 3].map(|_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * env
        });
        f.coeffs_mut()[i] = c;
        f.coeffs_mut()[j] = c.map(|z| z.conj());
    }
    if solenoidal {
        f.leray_project_in_place();
    }
    f
}
