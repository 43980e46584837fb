//! Nodal observation, the five-tetrahedra interpolant and its H1 seminorm
//! recovered from the data alone.
//!
//! cargo run --release --example nodal_interpolation

use obsreg::observers::observe_nodal;
use obsreg::tetra::{h1_data_norms, l2_error, mean_correct};
use obsreg::{SpectralField, TorusConfig, WaveVector};
use num_complex::Complex64;

fn main() -> obsreg::Result<()> {
    let torus = TorusConfig::new(1.0, 32)?;
    // u = sin(2 pi x1) e2 + cos(2 pi x3) e1
    let z = Complex64::new(0.0, 0.0);
    let mut u = SpectralField::zeros(torus);
    u.set_pair(WaveVector([1, 0, 0]), [z, Complex64::new(0.0, -0.5), z])?;
    u.set_pair(WaveVector([0, 0, 1]), [Complex64::new(0.5, 0.0), z, z])?;
    println!("||u|| (exact) = {:.6}", u.norms().h1);

    println!("{:>4} {:>10} {:>12} {:>12} {:>12} {:>12} {:>10}", "n", "h", "|u - Iu|", "lower", "||grad Iu||", "upper", "jump");
    let mut prev: Option<f64> = None;
    for n in [4, 8, 16] {
        let nodal = observe_nodal(&u, n)?;
        let h = nodal.h;
        let norms = h1_data_norms(&nodal);
        let interp = mean_correct(nodal);
        let err = l2_error(&interp, &u, 4)?;
        println!(
            "{n:>4} {h:>10.5} {err:>12.4e} {:>12.6} {:>12.6} {:>12.6} {:>10.2e}",
            norms.lower,
            norms.exact,
            norms.upper,
            interp.max_face_jump()
        );
        if let Some(p) = prev {
            println!("     observed order {:.3}", (p / err).log2());
        }
        prev = Some(err);
    }
    Ok(())
}
