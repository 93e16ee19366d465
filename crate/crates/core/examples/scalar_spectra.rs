//! Dirichlet and Neumann eigenvalues on the square of side pi against the
//! closed form m^2 + n^2.

use std::f64::consts::PI;

use dn_spectra::analytic::square_spectrum;
use dn_spectra::fem_scalar::{scalar_spectrum, ScalarBc, DEFAULT_TOL};
use dn_spectra::geometry::{square, triangulate};

fn main() -> dn_spectra::Result<()> {
    let mesh = triangulate(&square(PI)?, 4)?;
    println!("{} points, h = {:.4}", mesh.num_points(), mesh.h);
    for bc in [ScalarBc::Dirichlet, ScalarBc::Neumann] {
        let fem = scalar_spectrum(&mesh, bc, 8, DEFAULT_TOL)?;
        let exact = square_spectrum(bc, 8, PI);
        println!("{:?} (max residual {:.1e})", bc, fem.max_residual());
        for (k, (f, e)) in fem.values.iter().zip(&exact.values).enumerate() {
            println!("  {:>2}  {f:>10.6}  {e:>4}", k + 1);
        }
    }
    Ok(())
}
