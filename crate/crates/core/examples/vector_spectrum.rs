//! Eigenvalues of the div-curl form on tangential fields, with each
//! eigenfield labelled as a gradient or a perpendicular gradient.

use std::f64::consts::PI;

use dn_spectra::fem_scalar::DEFAULT_TOL;
use dn_spectra::fem_vector::vector_spectrum;
use dn_spectra::geometry::{square, triangulate};

fn main() -> dn_spectra::Result<()> {
    let mesh = triangulate(&square(PI)?, 5)?;
    let (spectrum, fields) = vector_spectrum(&mesh, 10, DEFAULT_TOL)?;
    println!("{} reduced dof", spectrum.dof.unwrap_or(0));
    for (k, f) in fields.iter().enumerate() {
        println!(
            "{:>2}  {:>9.5}  div {:>9.5}  curl {:>9.5}  {:?}",
            k + 1,
            f.eigenvalue,
            f.div_energy,
            f.curl_energy,
            f.label
        );
    }
    Ok(())
}
