//! Fourier representation, Leray projection and norms on the torus.
//!
//! cargo run --example spectral_transforms

use obsreg::solver::initial::random_field;
use obsreg::spectral::stokes_eigenvalue;
use obsreg::{PhysicalField, TorusConfig, WaveVector};

fn main() -> obsreg::Result<()> {
    let torus = TorusConfig::new(2.0, 16)?;
    println!("L = {}, n_spec = {}, lambda1 = {:.6}", torus.length, torus.n_spec, torus.lambda1());

    // a compressible field built on the grid: u = (sin πx, cos πy, 0)
    let pi = std::f64::consts::PI;
    let u = PhysicalField::from_fn(torus, |x| [(pi * x[0]).sin(), (pi * x[1]).cos(), 0.0]).to_spectral(true);
    let p = u.leray_project();
    println!("max |k.u(k)| before projection: {:.3e}", u.max_divergence());
    println!("max |k.u(k)| after projection:  {:.3e}", p.max_divergence());

    let r = random_field(torus, 1.0, 7, true);
    let back = r.to_physical().to_spectral(true);
    println!("round-trip error on a random field: {:.3e}", back.sub(&r).norms().l2);

    let n = r.norms();
    println!("|u| = {:.6}, ||u|| = {:.6}, Poincare ratio = {:.4} (>= 1)", n.l2, n.h1, n.h1 / (torus.lambda1().sqrt() * n.l2));

    for k in [[1, 0, 0], [1, 1, 0], [2, 1, 1]] {
        println!("lambda({k:?}) = {:.6}", stokes_eigenvalue(WaveVector(k), &torus)?);
    }
    Ok(())
}
