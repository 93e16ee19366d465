//! Acceptance gate. Prints one PASS or FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use dn_spectra::analytic::{
    bessel_zero, disk_spectrum, square_spectrum, BesselZeroTable, ZeroKind,
};
use dn_spectra::cli;
use dn_spectra::fem_scalar::{scalar_eigenpairs, scalar_spectrum, ScalarBc};
use dn_spectra::fem_vector::{perp_gradient_normal_trace, vector_spectrum};
use dn_spectra::geometry::{l_shape, regular_polygon, square, triangulate, Polygon};
use dn_spectra::verify::{
    check_inequality, convergence_study, counting_check, merge_spectra, min_max_crosscheck,
    slack_for, test_space_certificate,
};
use serde_json::Value;

const TOL: f64 = 1e-8;

type Outcome = (bool, String);

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

fn close_all(got: &[f64], want: &[f64], tol: f64) -> bool {
    got.len() >= want.len()
        && want.iter().zip(got).all(|(&w, &g)| {
            if w == 0.0 {
                g.abs() < 1e-8
            } else {
                rel(g, w) <= tol
            }
        })
}

/// Independent Bessel oracle: power series and plain bisection.
mod oracle {
    pub fn j(n: u32, x: f64) -> f64 {
        let half = x / 2.0;
        let mut term = half.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
        let mut sum = term;
        for m in 1..200 {
            term *= -half * half / (m as f64 * (m + n) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    }

    pub fn j_prime(n: u32, x: f64) -> f64 {
        if n == 0 {
            -j(1, x)
        } else {
            0.5 * (j(n - 1, x) - j(n + 1, x))
        }
    }

    pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let fa0 = f(a);
        assert!(fa0 * f(b) < 0.0, "bracket has no sign change");
        let mut fa = fa0;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let fm = f(m);
            if fa * fm <= 0.0 {
                b = m;
            } else {
                a = m;
                fa = fm;
            }
        }
        0.5 * (a + b)
    }

    pub fn j01() -> f64 {
        bisect(|x| j(0, x), 2.0, 3.0)
    }

    pub fn jp11() -> f64 {
        bisect(|x| j_prime(1, x), 1.5, 2.2)
    }
}

fn verify_json(args: &[&str]) -> Value {
    let mut argv = vec!["dn-spectra", "verify", "--no-timestamp"];
    argv.extend_from_slice(args);
    let mut out = Vec::new();
    let code = cli::run_with_output(argv, &mut out);
    assert_eq!(code, 0, "verify exited with {code}");
    serde_json::from_slice(&out).expect("verify writes json")
}

fn values(v: &Value) -> Vec<f64> {
    v["values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

fn criterion_1_square_references() -> Outcome {
    let start = Instant::now();
    let doc = verify_json(&["--domain", "builtin:square", "--levels", "5", "--kmax", "6"]);
    let elapsed = start.elapsed();
    let lambda = values(&doc["dirichlet"]);
    let mu = values(&doc["neumann"]);
    let ok_l = close_all(&lambda, &[2.0, 5.0, 5.0, 8.0], 1e-2);
    let ok_m = close_all(&mu, &[0.0, 1.0, 1.0, 2.0, 4.0, 4.0, 5.0, 5.0, 8.0], 1e-2);
    let ok_t = elapsed < Duration::from_secs(60);
    (
        ok_l && ok_m && ok_t,
        format!(
            "square level 5 lambda {:.4?} mu {:.4?} in {elapsed:.1?}",
            &lambda[..4],
            &mu[..9]
        ),
    )
}

fn criterion_2_merged_spectrum_identity() -> Outcome {
    let mesh = triangulate(&square(PI).unwrap(), 5).unwrap();
    let (spec, _) = vector_spectrum(&mesh, 12, TOL).unwrap();
    let want = [1.0, 1.0, 2.0, 2.0, 4.0, 4.0, 5.0, 5.0, 5.0, 5.0, 8.0, 8.0];
    let ok_v = spec.dof.unwrap() <= 3000 && close_all(&spec.values, &want, 3e-2);
    let cc = min_max_crosscheck(&square(PI).unwrap(), &[2, 3, 4], 12, TOL).unwrap();
    let ok_c = cc.min_shrink() >= 2.0;
    (
        ok_v && ok_c,
        format!(
            "vector eigenvalues {:.4?} with {} dof, crosscheck shrink factors {:.2?}",
            spec.values,
            spec.dof.unwrap(),
            cc.shrink_factors
        ),
    )
}

fn criterion_3_disk_sharpness() -> Outcome {
    let doc = verify_json(&[
        "--domain",
        "builtin:disk:256",
        "--levels",
        "1",
        "--kmax",
        "2",
    ]);
    let lambda = values(&doc["dirichlet"]);
    let mu = values(&doc["neumann"]);
    let l_ref = oracle::j01().powi(2);
    let m_ref = oracle::jp11().powi(2);
    let ok_vals =
        rel(lambda[0], l_ref) <= 1e-2 && rel(mu[1], m_ref) <= 1e-2 && rel(mu[2], m_ref) <= 1e-2;
    let rec = &doc["inequality"]["records"][0];
    let ok_order = rec["k"] == 1 && rec["verdict"] == "strict" && rec["shift_three_fails"] == true;
    (ok_vals && ok_order,
        format!(
            "disk:256 lambda_1 {:.4} (ref {l_ref:.4}), mu_2 {:.4}, mu_3 {:.4} (ref {m_ref:.4}), mu_4 {:.4}",
            lambda[0], mu[1], mu[2], mu[3]
        ),
    )
}

fn criterion_4_shift_inequality_corpus() -> Outcome {
    let star = Polygon::from_json_file(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/data/star12.json"
    ))
    .unwrap();
    let corpus: [(&str, Polygon, [usize; 2]); 5] = [
        ("square", square(PI).unwrap(), [4, 5]),
        ("hexagon", regular_polygon(6, 1.0).unwrap(), [3, 4]),
        ("lshape", l_shape(), [3, 4]),
        ("disk:64", regular_polygon(64, 1.0).unwrap(), [2, 3]),
        ("star12", star, [3, 4]),
    ];
    let mut ok = true;
    let mut summary = Vec::new();
    for (name, poly, levels) in corpus {
        let reports: Vec<_> = levels
            .iter()
            .map(|&level| {
                let mesh = triangulate(&poly, level).unwrap();
                let n = scalar_spectrum(&mesh, ScalarBc::Neumann, 11, TOL).unwrap();
                let d = scalar_spectrum(&mesh, ScalarBc::Dirichlet, 8, TOL).unwrap();
                check_inequality(&n, &d, 8, slack_for(Some(mesh.h))).unwrap()
            })
            .collect();
        let stable = reports[1].stabilized(&reports[0]);
        let strict = stable.all_strict() && stable.records.len() == 8;
        ok &= strict;
        summary.push(format!(
            "{name}@{levels:?}={}",
            if strict { "strict" } else { "not strict" }
        ));
    }
    (
        ok,
        format!("mu_(k+2) < lambda_k for k <= 8: {}", summary.join(", ")),
    )
}

fn criterion_5_exact_identities() -> Outcome {
    let mut worst_identity: f64 = 0.0;
    let mut worst_trace: f64 = 0.0;
    let mut ok = true;
    for poly in [square(PI).unwrap(), regular_polygon(6, 1.0).unwrap()] {
        let mesh = triangulate(&poly, 3).unwrap();
        for k in 1..=5 {
            let cert = test_space_certificate(&mesh, k, TOL, false).unwrap();
            ok &= cert.identity_holds && cert.dimension == 2 * k;
            worst_identity = worst_identity.max(cert.identity_defect);
        }
        let pairs = scalar_eigenpairs(&mesh, ScalarBc::Dirichlet, 5, TOL).unwrap();
        for phi in &pairs.modes {
            let trace = perp_gradient_normal_trace(&mesh, phi);
            worst_trace = trace.iter().fold(worst_trace, |m, t| m.max(t.abs()));
        }
    }
    ok &= worst_identity <= 1e-10 && worst_trace <= 1e-12;
    (ok,
        format!("identity defect {worst_identity:.2e}, normal trace {worst_trace:.2e} on square and hexagon"),
    )
}

fn criterion_6_counting_argument() -> Outcome {
    let mut ok = true;
    let square_n = square_spectrum(ScalarBc::Neumann, 20, PI);
    let square_d = square_spectrum(ScalarBc::Dirichlet, 10, PI);
    let disk_n = disk_spectrum(ScalarBc::Neumann, 20, 1.0).unwrap();
    let disk_d = disk_spectrum(ScalarBc::Dirichlet, 10, 1.0).unwrap();
    for (n, d) in [(&square_n, &square_d), (&disk_n, &disk_d)] {
        let merged = merge_spectra(n, d).unwrap();
        for k in 1..=5 {
            ok &= counting_check(&merged, d, k, slack_for(None)).unwrap();
        }
    }
    let mesh = triangulate(&square(PI).unwrap(), 4).unwrap();
    let mut counts = Vec::new();
    for k in 1..=3 {
        let cert = test_space_certificate(&mesh, k, TOL, true).unwrap();
        let count = cert.a_h_count.unwrap();
        ok &= count >= 2 * k && cert.counting_holds == Some(true);
        counts.push(count);
    }
    (ok,
        format!("analytic counting for k <= 5 on square and disk, vector counts below lambda_k {counts:?}"),
    )
}

fn criterion_7_bessel_layer() -> Outcome {
    let j01 = bessel_zero(ZeroKind::J, 0, 1).unwrap();
    let jp11 = bessel_zero(ZeroKind::JPrime, 1, 1).unwrap();
    let ok_oracle = (j01 - oracle::j01()).abs() <= 1e-6 && (jp11 - oracle::jp11()).abs() <= 1e-6;
    let ok_published = (j01 - 2.404826).abs() <= 1e-6 && (jp11 - 1.841184).abs() <= 1e-6;
    let table = BesselZeroTable::build(ZeroKind::J, 10, 10).unwrap();
    let ok_table = table.is_increasing() && table.is_interlaced();
    (
        ok_oracle && ok_published && ok_table,
        format!(
            "j_0,1 = {j01:.9}, j'_1,1 = {jp11:.9}, zero table n, k <= 10 interlaced {ok_table}"
        ),
    )
}

fn criterion_8_convergence() -> Outcome {
    let poly = square(PI).unwrap();
    let d = convergence_study(&poly, ScalarBc::Dirichlet, 1, &[3, 4, 5], TOL).unwrap();
    let n = convergence_study(&poly, ScalarBc::Neumann, 2, &[3, 4, 5], TOL).unwrap();
    let ok = (d.order() - 2.0).abs() <= 0.3
        && (n.order() - 2.0).abs() <= 0.3
        && d.non_increasing
        && n.non_increasing;
    (
        ok,
        format!(
            "order lambda_1 {:.3} (limit {:.5}), order mu_2 {:.3} (limit {:.5})",
            d.order(),
            d.extrapolated,
            n.order(),
            n.extrapolated
        ),
    )
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 8] = [
        (1, criterion_1_square_references),
        (2, criterion_2_merged_spectrum_identity),
        (3, criterion_3_disk_sharpness),
        (4, criterion_4_shift_inequality_corpus),
        (5, criterion_5_exact_identities),
        (6, criterion_6_counting_argument),
        (7, criterion_7_bessel_layer),
        (8, criterion_8_convergence),
    ];
    let mut failed = 0;
    for (n, check) in criteria {
        let (ok, detail) = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        println!(
            "{} criterion {n}: {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
        failed += usize::from(!ok);
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
