//! Writes the JSON, CSV and SVG reports for the hexagon into a directory.
//!
//! cargo run --example reports -- [out_dir]

use std::path::PathBuf;

use dn_spectra::fem_scalar::{scalar_spectrum, ScalarBc, DEFAULT_TOL};
use dn_spectra::geometry::{regular_polygon, triangulate};
use dn_spectra::report;
use dn_spectra::verify::{check_inequality, merge_spectra, min_max_crosscheck, slack_for};

fn main() -> dn_spectra::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "reports".into()));
    std::fs::create_dir_all(&dir)?;
    let polygon = regular_polygon(6, 1.0)?;
    let mesh = triangulate(&polygon, 3)?;
    let n = scalar_spectrum(&mesh, ScalarBc::Neumann, 9, DEFAULT_TOL)?;
    let d = scalar_spectrum(&mesh, ScalarBc::Dirichlet, 6, DEFAULT_TOL)?;
    let ineq = check_inequality(&n, &d, 6, slack_for(Some(mesh.h)))?;
    let merged = merge_spectra(&n, &d)?;
    let cross = min_max_crosscheck(&polygon, &[2, 3], 8, DEFAULT_TOL)?;

    let doc = report::document("crosscheck", "hexagon", &cross, false)?;
    std::fs::write(dir.join("crosscheck.json"), report::to_pretty(&doc)?)?;
    std::fs::write(dir.join("inequality.csv"), report::inequality_csv(&ineq)?)?;
    std::fs::write(
        dir.join("merged.svg"),
        report::merged_svg(&merged, Some(&ineq)),
    )?;
    println!(
        "wrote crosscheck.json, inequality.csv, merged.svg to {}",
        dir.display()
    );
    Ok(())
}
