//! Continuous data assimilation: drive w from zero towards a reference u
//! using modal and nodal observations.
//!
//! cargo run --release --example nudging_sync

use std::f64::consts::PI;

use obsreg::nudging::{run_nudged, NudgeConfig};
use obsreg::observers::full_cutoff;
use obsreg::solver::initial::{beltrami, random_field};
use obsreg::solver::run;
use obsreg::{ObserverSpec, SolverConfig, TorusConfig};

fn main() -> obsreg::Result<()> {
    let torus = TorusConfig::new(2.0 * PI, 16)?;
    let forcing = beltrami(torus, 0.05, 1)?;
    let solver = SolverConfig::new(0.1, 0.01, 3.0, forcing)?;
    let u0 = random_field(torus, 0.5, 21, true);
    let reference = run(&u0, &solver, 25)?;

    for (spec, mu) in [
        (ObserverSpec::Modal { cutoff: full_cutoff(&torus) }, None),
        (ObserverSpec::Modal { cutoff: 26 }, Some(5.0)),
        (ObserverSpec::Nodal { n_cubes: 8 }, Some(5.0)),
    ] {
        let cfg = match mu {
            Some(mu) => NudgeConfig::new(mu, spec, solver.clone())?,
            None => NudgeConfig::with_default_gain(spec, solver.clone(), 1.0)?,
        };
        let (_, sync) = run_nudged(&reference, &cfg)?;
        println!("{spec:?}, mu = {:.3}", cfg.mu);
        for e in &sync.entries {
            println!("  t = {:>5.2}  |u-w| = {:.4e}  ||u-w|| = {:.4e}", e.t, e.l2, e.h1);
        }
    }
    Ok(())
}
