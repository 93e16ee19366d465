//! Checks mu_{k+2} <= lambda_k for k <= 8 on a small domain corpus, keeping
//! a verdict only when two refinement levels agree.

use std::f64::consts::PI;

use dn_spectra::fem_scalar::{scalar_spectrum, ScalarBc, DEFAULT_TOL};
use dn_spectra::geometry::{l_shape, regular_polygon, square, triangulate, Polygon};
use dn_spectra::verify::{check_inequality, slack_for, InequalityReport};

fn report(polygon: &Polygon, level: usize) -> dn_spectra::Result<InequalityReport> {
    let mesh = triangulate(polygon, level)?;
    let n = scalar_spectrum(&mesh, ScalarBc::Neumann, 11, DEFAULT_TOL)?;
    let d = scalar_spectrum(&mesh, ScalarBc::Dirichlet, 8, DEFAULT_TOL)?;
    check_inequality(&n, &d, 8, slack_for(Some(mesh.h)))
}

fn main() -> dn_spectra::Result<()> {
    let corpus = [
        ("square", square(PI)?, 4),
        ("hexagon", regular_polygon(6, 1.0)?, 3),
        ("lshape", l_shape(), 3),
        ("disk:64", regular_polygon(64, 1.0)?, 2),
    ];
    for (name, polygon, level) in corpus {
        let stable = report(&polygon, level + 1)?.stabilized(&report(&polygon, level)?);
        println!("{name} (levels {level}, {})", level + 1);
        for r in &stable.records {
            println!(
                "  k={}  mu_k+2 {:>9.5}  lambda_k {:>9.5}  {}",
                r.k,
                r.mu_k2,
                r.lambda_k,
                r.verdict.as_str()
            );
        }
    }
    Ok(())
}
