use std::f64::consts::PI;

use dn_spectra::analytic::{disk_spectrum, square_spectrum};
use dn_spectra::fem_scalar::{scalar_spectrum, ScalarBc};
use dn_spectra::geometry::{make_polygon, regular_polygon, triangulate};
use dn_spectra::verify::{check_inequality, merge_spectra, slack_for, Verdict};
use proptest::prelude::*;

fn star(radii: &[f64]) -> Vec<[f64; 2]> {
    let n = radii.len();
    radii
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let t = 2.0 * PI * i as f64 / n as f64;
            [r * t.cos(), r * t.sin()]
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn discrete_spectra_order_on_random_stars(radii in prop::collection::vec(0.5f64..1.0, 5..9)) {
        let poly = make_polygon(&star(&radii)).unwrap();
        let mesh = triangulate(&poly, 3).unwrap();
        let n = scalar_spectrum(&mesh, ScalarBc::Neumann, 6, 1e-8).unwrap();
        let d = scalar_spectrum(&mesh, ScalarBc::Dirichlet, 4, 1e-8).unwrap();
        for k in 1..=4 {
            // discrete Neumann lies below discrete Dirichlet on the same mesh
            prop_assert!(n.values[k - 1] <= d.values[k - 1] * (1.0 + 1e-10));
        }
        let r = check_inequality(&n, &d, 4, slack_for(Some(mesh.h))).unwrap();
        for rec in &r.records {
            prop_assert!(rec.filonov != Verdict::Violated);
        }
    }

    #[test]
    fn refinement_never_raises_eigenvalues(n in 3usize..9) {
        let poly = regular_polygon(n, 1.0).unwrap();
        let coarse = scalar_spectrum(&triangulate(&poly, 2).unwrap(), ScalarBc::Dirichlet, 3, 1e-8).unwrap();
        let fine = scalar_spectrum(&triangulate(&poly, 3).unwrap(), ScalarBc::Dirichlet, 3, 1e-8).unwrap();
        for (c, f) in coarse.values.iter().zip(&fine.values) {
            prop_assert!(*f <= c * (1.0 + 1e-8));
        }
    }

    #[test]
    fn analytic_merge_is_sorted(count in 4usize..30) {
        for (nn, dd) in [
            (square_spectrum(ScalarBc::Neumann, count + 2, PI), square_spectrum(ScalarBc::Dirichlet, count, PI)),
            (disk_spectrum(ScalarBc::Neumann, count + 2, 1.0).unwrap(), disk_spectrum(ScalarBc::Dirichlet, count, 1.0).unwrap()),
        ] {
            let m = merge_spectra(&nn, &dd).unwrap();
            let v = m.values();
            prop_assert!(v.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(v.iter().all(|&x| x > 0.0));
        }
    }
}
