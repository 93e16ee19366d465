use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dn-spectra"))
}

fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn reference_disk_values() {
    let out = bin()
        .args([
            "reference",
            "--domain",
            "builtin:disk",
            "--count",
            "4",
            "--no-timestamp",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let d = &doc["spectra"][0];
    assert_eq!(d["bc"], "analytic:dirichlet");
    assert!((d["values"][0].as_f64().unwrap() - 5.783185962946784).abs() < 1e-9);
    let n = &doc["spectra"][1];
    assert_eq!(n["values"][0].as_f64().unwrap(), 0.0);
    assert!((n["values"][1].as_f64().unwrap() - 3.389957716671889).abs() < 1e-9);
}

#[test]
fn self_intersecting_polygon_is_rejected() {
    let out = bin()
        .args(["mesh", "--domain", &data("bowtie.json")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("intersect"), "{err}");
}

#[test]
fn bad_usage_exits_one() {
    assert_eq!(bin().arg("verify").output().unwrap().status.code(), Some(1));
    assert_eq!(
        bin().args(["nonsense"]).output().unwrap().status.code(),
        Some(1)
    );
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
    let out = bin()
        .args(["reference", "--domain", "builtin:lshape"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn no_timestamp_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let status = bin()
            .args([
                "verify",
                "--domain",
                "builtin:square",
                "--levels",
                "3",
                "--kmax",
                "3",
                "--no-timestamp",
                "--out",
            ])
            .arg(&path)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn verify_csv_and_svg() {
    let csv = bin()
        .args([
            "verify",
            "--domain",
            "builtin:hexagon",
            "--levels",
            "3",
            "--kmax",
            "4",
            "--format",
            "csv",
        ])
        .output()
        .unwrap();
    assert_eq!(csv.status.code(), Some(0));
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("k,mu_k+2,lambda_k,gap,verdict"));
    assert_eq!(text.lines().count(), 5);
    let svg = bin()
        .args([
            "verify",
            "--domain",
            "builtin:hexagon",
            "--levels",
            "3",
            "--kmax",
            "4",
            "--format",
            "svg",
        ])
        .output()
        .unwrap();
    assert!(String::from_utf8(svg.stdout).unwrap().starts_with("<svg"));
}

#[test]
fn inline_domain_and_mesh_schema() {
    let out = bin()
        .args([
            "mesh",
            "--domain",
            r#"{"vertices": [[0,0],[1,0],[1,1],[0,1]]}"#,
            "--levels",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let mesh: Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["points", "triangles", "boundary_edges"] {
        assert!(mesh[key].is_array(), "missing {key}");
    }
}

#[test]
fn subcommands_report_json() {
    let cases: [&[&str]; 4] = [
        &[
            "solve",
            "--domain",
            "builtin:square",
            "--levels",
            "2",
            "--bc",
            "vector",
            "--count",
            "4",
        ],
        &[
            "crosscheck",
            "--domain",
            "builtin:square",
            "--levels",
            "2,3",
            "--count",
            "6",
        ],
        &[
            "certificate",
            "--domain",
            "builtin:square",
            "--levels",
            "2",
            "--k",
            "2",
        ],
        &[
            "converge",
            "--domain",
            "builtin:square",
            "--levels",
            "1,2,3",
        ],
    ];
    for args in cases {
        let out = bin().args(args).output().unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(doc["command"], args[0]);
        assert!(doc["generated_at_unix"].is_u64());
    }
}
