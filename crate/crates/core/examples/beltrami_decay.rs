//! Integrating-factor RK4 on the ABC (Beltrami) flow, whose nonlinearity is a
//! pure gradient, against the exact decay `exp(-nu lambda t)`.
//!
//! cargo run --release --example beltrami_decay

use std::f64::consts::PI;

use obsreg::solver::initial::{beltrami, beltrami_eigenvalue};
use obsreg::solver::{nonlinear_term, run};
use obsreg::{SolverConfig, TorusConfig};

fn main() -> obsreg::Result<()> {
    let torus = TorusConfig::new(2.0 * PI, 16)?;
    let (nu, kappa) = (0.1, 1);
    let u0 = beltrami(torus, 1.0, kappa)?;
    println!("|P(u.grad u)| for the ABC field: {:.3e}", nonlinear_term(&u0, true).norms().l2);

    let cfg = SolverConfig::unforced(torus, nu, 1e-3, 1.0)?;
    let traj = run(&u0, &cfg, 200)?;
    let rate = nu * beltrami_eigenvalue(&torus, kappa);
    println!("{:>6} {:>14} {:>14} {:>10}", "t", "|u|", "exact", "rel err");
    for s in &traj.snapshots {
        let exact = u0.scaled((-rate * s.t).exp());
        let err = s.field.sub(&exact).norms().l2 / exact.norms().l2;
        println!("{:>6.3} {:>14.10} {:>14.10} {:>10.2e}", s.t, s.field.norms().l2, exact.norms().l2, err);
    }
    Ok(())
}
