//! Explicit data at and above the heat threshold where monotonicity fails.

use ultraflow::counterexamples::{first_obstruction, second_obstruction, sign_certificate};

fn main() -> ultraflow::Result<()> {
    let r = first_obstruction(5.0, 1.0, 0.4, 128)?;
    println!(
        "p = 2^*: F = {:.1e}, dF/dt = {:.1e} under both flows; heat flow reaches F = {:.4e}",
        r.deficit, r.fde_dissipation, r.heat_max_deficit
    );
    let r = second_obstruction(5.0, 3.25, 1.0, 0.4, 128)?;
    println!("p = 3.25: beta_- = {:.6}, A = {:.6e}, J_cc = {:.6}", r.beta, r.A_closed_form, r.J_cc);
    println!("  2 A J_cc / (d beta^2) = {:.12e}", r.rhs);
    println!("  carre du champ        = {:.12e}", r.dFdt_analytic);
    println!("  finite difference     = {:.12e}", r.dFdt_numeric);
    let rows = sign_certificate(&[3.0, 4.0, 5.0, 8.0], 100)?;
    let min = rows.iter().map(|r| r.a_coef).fold(f64::INFINITY, f64::min);
    println!("min A(p, beta_-) over {} points: {min:.4e}", rows.len());
    Ok(())
}
