//! The two integration-by-parts identities on random positive polynomials.

use ultraflow::discretization::Basis;
use ultraflow::functionals::lemma_identities;
use ultraflow::sampling;

fn main() -> ultraflow::Result<()> {
    let b = Basis::new(5.0, 128)?;
    let mut rng = sampling::rng(1);
    for _ in 0..5 {
        let f = sampling::random_positive(&b, &mut rng, 10);
        let l = lemma_identities(&f)?;
        println!(
            "{:.12} = {:.12} ({:.1e})   {:.12} = {:.12} ({:.1e})",
            l.first_lhs, l.first_rhs, l.first_residual, l.second_lhs, l.second_rhs, l.second_residual
        );
    }
    Ok(())
}
