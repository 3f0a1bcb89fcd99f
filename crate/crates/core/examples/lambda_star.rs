//! Constrained spectral minimum, the improved constant it yields, and a
//! sampled check of the improved inequality.

use ultraflow::improvements::{estimate_lambda_star, logsob_improvement, verify_improved_inequality};

fn main() -> ultraflow::Result<()> {
    let (d, p) = (4.0, 3.0);
    let est = estimate_lambda_star(d, p, 64, 8)?;
    println!("lambda* = {:.12} ({} of {} restarts converged)", est.lambda_star, est.converged, est.restarts);
    println!("relaxed quotient {:.12}, gradient norm {:.1e}", est.relaxed_quotient, est.gradient_norm);
    let lambda = est.lambda_bound.expect("p <= 2^#");
    println!("improved constant {lambda:.12} > d = {d}");
    let r = verify_improved_inequality(d, p, lambda, 200)?;
    println!("{} moment-projected samples: min slack {:.3e}, violations {}", r.samples, r.min_slack, r.violations);
    let l = logsob_improvement(d)?;
    println!("log-Sobolev: b* = {:.12}, delta = {:.12}, crossing residual {:.1e}", l.b_star, l.delta, l.crossing_residual);
    Ok(())
}
