//! `int z u^p` decays like `exp(-d t)` along the linear flow.

use ultraflow::constants::{FlowSpec, Params};
use ultraflow::discretization::Basis;
use ultraflow::flows::{moment_decay_check, FlowConfig, FlowForm};
use ultraflow::init::InitSpec;

fn main() -> ultraflow::Result<()> {
    let params = Params::new(4.0, 3.0)?;
    let b = Basis::new(4.0, 64)?;
    let state = InitSpec::Random { seed: 2, modes: 6 }.state(&b, FlowForm::ULinear, FlowSpec::heat(&params))?;
    let r = moment_decay_check(&state, 1.0, &FlowConfig { samples: 10, ..Default::default() })?;
    for ((t, m), e) in r.times.iter().zip(&r.moments).zip(&r.predicted) {
        println!("t = {t:.1}  M = {m:+.12e}  M(0) e^(-dt) = {e:+.12e}");
    }
    println!("max error {:.1e}, fitted rate {:.9}", r.max_error, r.empirical_rate.unwrap_or(f64::NAN));
    Ok(())
}
