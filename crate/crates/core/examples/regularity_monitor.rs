//! The observable regularity criterion on a decaying ABC trajectory: sweep
//! the nodal scale h and report the coarsest admissible one.
//!
//! cargo run --release --example regularity_monitor

use std::f64::consts::PI;

use obsreg::monitor::{first_admissible, h_sweep, Variant};
use obsreg::solver::initial::beltrami;
use obsreg::solver::run;
use obsreg::{SolverConfig, TorusConfig};

fn main() -> obsreg::Result<()> {
    let torus = TorusConfig::new(2.0 * PI, 16)?;
    let cfg = SolverConfig::unforced(torus, 0.1, 0.01, 1.0)?;
    let traj = run(&beltrami(torus, 0.005, 1)?, &cfg, 10)?;

    for (t0, variant) in [(0.0, Variant::Sufficient), (0.5, Variant::Characterization)] {
        println!("window [{t0}, 1], {variant:?}");
        println!("{:>8} {:>12} {:>12} {:>12} {:>12} {:>6}", "h", "M_h^2", "W_h^2", "max term", "threshold", "ok");
        let reports = h_sweep(&traj, 1.0, &[4, 8, 16, 32], t0, variant)?;
        for r in &reports {
            println!(
                "{:>8.4} {:>12.6e} {:>12.6e} {:>12.6e} {:>12.6e} {:>6}",
                r.h, r.m2, r.w2, r.max_term, r.threshold, r.satisfied
            );
        }
        match first_admissible(&reports) {
            Some(r) => println!("coarsest admissible h = {:.4}\n", r.h),
            None => println!("no admissible h\n"),
        }
    }
    Ok(())
}
