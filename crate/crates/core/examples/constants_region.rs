//! Exponents, admissible `beta` range and a coarse `(p, beta)` map for `d = 5`.

use ultraflow::constants::{beta_roots, critical_exponents, gamma_one, region_sweep, Params, SweepGrid};

fn main() -> ultraflow::Result<()> {
    let d = 5.0;
    let (star, sharp) = critical_exponents(&Params::new(d, 2.0)?);
    println!("d = {d}: 2^* = {star:?}, 2^# = {sharp:?}");
    for p in [1.5, 2.0, 3.0, 3.1875, 3.3] {
        let params = Params::new(d, p)?;
        let r = beta_roots(&params)?;
        println!(
            "p = {p:<6} beta_- = {:<22} beta_+ = {:<22} gamma(1) = {:+.6}",
            r.beta_minus.to_field(),
            r.beta_plus.to_field(),
            gamma_one(&params)
        );
    }
    let star = star.finite().unwrap();
    let grid = SweepGrid { d, p_min: 1.0, p_max: star, beta_min: 0.0, beta_max: 3.0, n_p: 12, n_beta: 31 };
    let sweep = region_sweep(grid)?;
    println!("\nadmissible (#) and A > 0 (+), p down, beta across [0, 3]:");
    for line in sweep.rows.chunks(grid.n_beta) {
        let row: String = line
            .iter()
            .map(|r| match (r.admissible, r.a_positive) {
                (true, true) => '*',
                (true, false) => '#',
                (false, true) => '+',
                _ => '.',
            })
            .collect();
        println!("{:6.3} {row}", line[0].p);
    }
    Ok(())
}
