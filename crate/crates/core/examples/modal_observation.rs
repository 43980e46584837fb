//! Modal observation `P_N u` and the modal data norm.
//!
//! cargo run --example modal_observation

use obsreg::monitor::modal_data_norm_sq;
use obsreg::observers::{available_modes, cutoff_eigenvalue, first_excluded_eigenvalue, observe_modal};
use obsreg::solver::initial::random_field;
use obsreg::TorusConfig;

fn main() -> obsreg::Result<()> {
    let torus = TorusConfig::new(1.0, 12)?;
    let u = random_field(torus, 1.0, 3, true);
    println!("available modes: {}, ||u||^2 = {:.6}", available_modes(&torus), u.norms().h1.powi(2));
    println!("{:>6} {:>12} {:>12} {:>10} {:>14} {:>14}", "N", "lambda_N", "next", "h", "M^2", "|u - P_N u|");
    for n in [1, 6, 18, 80, 400] {
        let data = observe_modal(&u, n)?;
        let next = first_excluded_eigenvalue(&torus, n)?.unwrap_or(f64::INFINITY);
        let tail = u.sub(&data.reconstruct()).norms().l2;
        println!(
            "{n:>6} {:>12.4} {next:>12.4} {:>10.5} {:>14.8} {tail:>14.6e}",
            cutoff_eigenvalue(&torus, n)?,
            data.scale(),
            modal_data_norm_sq(&data)
        );
    }
    Ok(())
}
