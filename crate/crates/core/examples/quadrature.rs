//! Gauss rule for `d nu_d` and the spectrum of the ultraspherical operator.

use ultraflow::discretization::{Basis, GridFn};

fn main() -> ultraflow::Result<()> {
    for d in [1.0, 2.5, 5.0, 10.0] {
        let b = Basis::new(d, 64)?;
        let q = b.quadrature();
        let mass = q.integrate(|_| 1.0);
        let m2 = q.integrate(|z| z * z);
        println!("d = {d:>4}: int 1 = {mass:.16}, int z^2 = {m2:.16} (1/(d+1) = {:.16})", 1.0 / (d + 1.0));
    }
    let b = Basis::new(5.0, 32)?;
    for k in 0..5 {
        let f = GridFn::basis_function(&b, k)?;
        let lf = f.apply_l()?;
        let ratio = -lf.inner(&f)? / f.norm_sq();
        println!("mode {k}: -<L p_k, p_k> = {ratio:.12}, k(k+d-1) = {}", k * (k + 4));
    }
    Ok(())
}
