//! Constants for even functions and the spectral bound behind them.

use ultraflow::improvements::{antipodal_constants, antipodal_spectral_check};

fn main() -> ultraflow::Result<()> {
    let d = 5.0;
    for p in [1.5, 2.0, 2.5, 3.0, 3.1875, 3.3] {
        let k = antipodal_constants(d, p)?;
        let prop = k.prop_const.map_or("-".to_string(), |c| format!("{c:.8}"));
        println!("p = {p:<6} basic {prop:>12}  sharp {:.8}  theta {:.6}", k.thm_const, k.theta);
    }
    let r = antipodal_spectral_check(3.0, 64, 100, 0)?;
    println!(
        "d = 3: min int (Lf)^2 / int |f'|^2 nu over even f = {:.12} (bound {}), odd f gives {}",
        r.min_ratio, r.bound, r.odd_ratio
    );
    Ok(())
}
