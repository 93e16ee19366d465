//! Test-space certificate: 2k fields built from Dirichlet eigenfunctions
//! have vector-form Rayleigh quotients at most lambda_k.

use dn_spectra::fem_scalar::DEFAULT_TOL;
use dn_spectra::geometry::{regular_polygon, triangulate};
use dn_spectra::verify::test_space_certificate;

fn main() -> dn_spectra::Result<()> {
    let mesh = triangulate(&regular_polygon(6, 1.0)?, 3)?;
    for k in 1..=4 {
        let c = test_space_certificate(&mesh, k, DEFAULT_TOL, true)?;
        println!(
            "k={k} dim {}/{} lambda_k {:.5} max rayleigh {:.5} identity defect {:.1e} vector count {:?} passed {}",
            c.dimension,
            c.target_dimension,
            c.lambda_k,
            c.max_rayleigh,
            c.identity_defect,
            c.a_h_count,
            c.passed()
        );
    }
    Ok(())
}
