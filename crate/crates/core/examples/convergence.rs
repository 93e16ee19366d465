//! Observed convergence order and Richardson limit of lambda_1 and mu_2
//! on the square.

use std::f64::consts::PI;

use dn_spectra::fem_scalar::{ScalarBc, DEFAULT_TOL};
use dn_spectra::geometry::square;
use dn_spectra::verify::convergence_study;

fn main() -> dn_spectra::Result<()> {
    let polygon = square(PI)?;
    for (bc, k) in [(ScalarBc::Dirichlet, 1), (ScalarBc::Neumann, 2)] {
        let r = convergence_study(&polygon, bc, k, &[2, 3, 4, 5], DEFAULT_TOL)?;
        println!(
            "{bc:?} k={k}: values {:.6?} orders {:.3?} limit {:.6} non-increasing {}",
            r.values, r.orders, r.extrapolated, r.non_increasing
        );
    }
    Ok(())
}
