//! Triangulates a polygon and prints mesh statistics per refinement level.
//!
//! cargo run --example mesh -- [path/to/polygon.json]

use dn_spectra::geometry::{l_shape, triangulate, Polygon};

fn main() -> dn_spectra::Result<()> {
    let polygon = match std::env::args().nth(1) {
        Some(path) => Polygon::from_json_file(path)?,
        None => l_shape(),
    };
    println!(
        "vertices {} area {:.6} convex {}",
        polygon.len(),
        polygon.area(),
        polygon.is_convex()
    );
    for level in 0..=4 {
        let mesh = triangulate(&polygon, level)?;
        println!(
            "level {level}: {:>6} points {:>6} triangles h {:.4} area {:.6} reentrant corners {}",
            mesh.num_points(),
            mesh.num_triangles(),
            mesh.h,
            mesh.area(),
            mesh.reentrant_corners().len()
        );
    }
    Ok(())
}
