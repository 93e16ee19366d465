//! Checks on computed spectra: merging, the shifted inequality
//! `mu_{k+2} <= lambda_k`, counting, the vector/scalar min-max crosscheck,
//! the test-space certificate and refinement studies.
//!
//! Discrete eigenvalues bound the exact ones from above on both sides of
//! every comparison, so verdicts are numerical evidence only.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem_scalar::{assemble_scalar, scalar_eigenpairs, scalar_spectrum, ScalarBc};
use crate::fem_vector::{assemble_vector_form, vector_spectrum, FieldClass};
use crate::geometry::{triangulate, Polygon, TriMesh};
use crate::spectrum::{cluster_indices, BcLabel, Spectrum, MULTIPLICITY_TOL};

/// Label attached to every verdict.
pub const EVIDENCE: &str = "numerical evidence";

/// Constant in the slack policy `max(1e-6, C h^2)`.
pub const SLACK_C: f64 = 1.0;
pub const SLACK_FLOOR: f64 = 1e-6;

/// Relative slack for verdicts on a mesh of size `h` (none for exact spectra).
pub fn slack_for(h: Option<f64>) -> f64 {
    h.map_or(SLACK_FLOOR, |h| (SLACK_C * h * h).max(SLACK_FLOOR))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MergedEntry {
    pub value: f64,
    pub source: BcLabel,
    /// 1-based position in the source spectrum.
    pub source_index: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct MergedSpectrum {
    pub entries: Vec<MergedEntry>,
    /// Entries above this value may be missing from the truncated inputs.
    pub complete_below: f64,
    pub domain: Option<String>,
    pub mesh_h: Option<f64>,
}

impl MergedSpectrum {
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count_source(&self, source: BcLabel) -> usize {
        self.entries.iter().filter(|e| e.source == source).count()
    }

    /// Number of entries from `source` with value at most `threshold`.
    pub fn count_at_most(&self, source: BcLabel, threshold: f64) -> usize {
        self.entries
            .iter()
            .filter(|e| e.source == source && e.value <= threshold)
            .count()
    }

    pub fn to_spectrum(&self) -> Spectrum {
        let values = self.values();
        Spectrum {
            residuals: vec![0.0; values.len()],
            values,
            bc: BcLabel::Merged,
            analytic: self.mesh_h.is_none(),
            tol: 0.0,
            mesh_h: self.mesh_h,
            mesh_points: None,
            dof: None,
            domain: self.domain.clone(),
        }
    }
}

fn check_metadata(neumann: &Spectrum, dirichlet: &Spectrum) -> Result<()> {
    let mismatch = |m: String| Err(Error::MetadataMismatch(m));
    if neumann.bc != BcLabel::Neumann || dirichlet.bc != BcLabel::Dirichlet {
        return mismatch(format!(
            "expected neumann and dirichlet spectra, got {} and {}",
            neumann.bc_label(),
            dirichlet.bc_label()
        ));
    }
    if neumann.analytic != dirichlet.analytic {
        return mismatch("cannot merge an analytic spectrum with a discrete one".into());
    }
    if let (Some(a), Some(b)) = (&neumann.domain, &dirichlet.domain) {
        if a != b {
            return mismatch(format!("domains differ: {a} vs {b}"));
        }
    }
    if let (Some(a), Some(b)) = (neumann.mesh_h, dirichlet.mesh_h) {
        if (a - b).abs() > 1e-12 * a.max(b) {
            return mismatch(format!("mesh sizes differ: {a} vs {b}"));
        }
    }
    if let (Some(a), Some(b)) = (neumann.mesh_points, dirichlet.mesh_points) {
        if a != b {
            return mismatch(format!("meshes differ: {a} vs {b} vertices"));
        }
    }
    Ok(())
}

/// Sorted union of the positive Neumann and the Dirichlet eigenvalues.
pub fn merge_spectra(neumann: &Spectrum, dirichlet: &Spectrum) -> Result<MergedSpectrum> {
    check_metadata(neumann, dirichlet)?;
    let zero = neumann.zero_modes();
    let mut entries: Vec<MergedEntry> = neumann
        .values
        .iter()
        .enumerate()
        .skip(zero)
        .map(|(i, &value)| MergedEntry {
            value,
            source: BcLabel::Neumann,
            source_index: i + 1,
        })
        .chain(
            dirichlet
                .values
                .iter()
                .enumerate()
                .map(|(i, &value)| MergedEntry {
                    value,
                    source: BcLabel::Dirichlet,
                    source_index: i + 1,
                }),
        )
        .collect();
    // stable: Neumann entries first on ties
    entries.sort_by(|a, b| a.value.total_cmp(&b.value));
    let last = |s: &Spectrum| s.values.last().copied().unwrap_or(f64::INFINITY);
    let complete_below = if dirichlet.is_empty() {
        last(neumann)
    } else {
        last(neumann).min(last(dirichlet))
    };
    Ok(MergedSpectrum {
        entries,
        complete_below,
        domain: neumann.domain.clone().or_else(|| dirichlet.domain.clone()),
        mesh_h: neumann.mesh_h,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Strict,
    NonstrictWithinTol,
    Violated,
    /// The two finest levels disagree.
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Strict => "strict",
            Verdict::NonstrictWithinTol => "nonstrict_within_tol",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

pub fn verdict(lower: f64, upper: f64, slack: f64) -> Verdict {
    if lower < upper - slack * upper.abs() {
        Verdict::Strict
    } else if lower > upper + slack * upper.abs() {
        Verdict::Violated
    } else {
        Verdict::NonstrictWithinTol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityRecord {
    pub k: usize,
    #[serde(rename = "mu_k_plus_2")]
    pub mu_k2: f64,
    pub lambda_k: f64,
    pub gap: f64,
    pub verdict: Verdict,
    pub lambda_k_simple: bool,
    /// Sanity row `mu_{k+1} < lambda_k`.
    pub filonov: Verdict,
    /// `mu_{k+3} > lambda_k`, when `mu_{k+3}` is available: the shift 2 cannot be raised at this k.
    pub shift_three_fails: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    pub evidence: &'static str,
    pub domain: Option<String>,
    pub mesh_h: Option<f64>,
    pub slack: f64,
    pub boundary_has_segment: bool,
    pub records: Vec<InequalityRecord>,
}

impl InequalityReport {
    pub fn any_violated(&self) -> bool {
        self.records.iter().any(|r| r.verdict == Verdict::Violated)
    }

    pub fn all_strict(&self) -> bool {
        self.records.iter().all(|r| r.verdict == Verdict::Strict)
    }

    pub fn record(&self, k: usize) -> Option<&InequalityRecord> {
        self.records.iter().find(|r| r.k == k)
    }

    /// Keeps a verdict only if the coarser level agrees with it.
    pub fn stabilized(&self, coarser: &InequalityReport) -> InequalityReport {
        let mut out = self.clone();
        for r in &mut out.records {
            let agree = coarser.record(r.k).map(|c| c.verdict) == Some(r.verdict);
            if !agree {
                r.verdict = Verdict::Inconclusive;
            }
        }
        out
    }
}

/// Per-k check of `mu_{k+2} <= lambda_k` with relative `slack`.
pub fn check_inequality(
    neumann: &Spectrum,
    dirichlet: &Spectrum,
    k_max: usize,
    slack: f64,
) -> Result<InequalityReport> {
    check_metadata(neumann, dirichlet)?;
    if neumann.len() < k_max + 2 {
        return Err(Error::NotEnoughEigenvalues {
            which: "neumann",
            needed: k_max + 2,
            have: neumann.len(),
        });
    }
    if dirichlet.len() < k_max {
        return Err(Error::NotEnoughEigenvalues {
            which: "dirichlet",
            needed: k_max,
            have: dirichlet.len(),
        });
    }
    let groups = dirichlet.multiplicity_groups();
    let records = (1..=k_max)
        .map(|k| {
            let lambda = dirichlet.values[k - 1];
            let mu2 = neumann.values[k + 1];
            InequalityRecord {
                k,
                mu_k2: mu2,
                lambda_k: lambda,
                gap: lambda - mu2,
                verdict: verdict(mu2, lambda, slack),
                lambda_k_simple: groups.iter().any(|g| g.len() == 1 && g[0] == k - 1),
                filonov: verdict(neumann.values[k], lambda, slack),
                shift_three_fails: neumann.values.get(k + 2).map(|&mu3| mu3 > lambda),
            }
        })
        .collect();
    // a disk given by its exact spectrum has no straight boundary piece
    let boundary_has_segment = !(neumann.analytic && neumann.domain.as_deref() == Some("disk"));
    Ok(InequalityReport {
        evidence: EVIDENCE,
        domain: neumann.domain.clone().or_else(|| dirichlet.domain.clone()),
        mesh_h: neumann.mesh_h,
        slack,
        boundary_has_segment,
        records,
    })
}

/// At least `k + 1` positive Neumann eigenvalues lie at or below `lambda_k`.
pub fn counting_check(
    merged: &MergedSpectrum,
    dirichlet: &Spectrum,
    k: usize,
    slack: f64,
) -> Result<bool> {
    let lambda = dirichlet.nth(k).ok_or(Error::NotEnoughEigenvalues {
        which: "dirichlet",
        needed: k,
        have: dirichlet.len(),
    })?;
    let threshold = lambda * (1.0 + slack);
    let below = merged.count_at_most(BcLabel::Neumann, threshold);
    if below >= k + 1 {
        return Ok(true);
    }
    let decided = merged
        .entries
        .iter()
        .any(|e| e.source == BcLabel::Neumann && e.value > threshold);
    if decided {
        Ok(false)
    } else {
        Err(Error::NotEnoughEigenvalues {
            which: "neumann",
            needed: k + 1,
            have: below,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusterLabels {
    pub indices: Vec<usize>,
    pub neumann: usize,
    pub dirichlet: usize,
    pub gradient_type: usize,
    pub perp_gradient_type: usize,
    pub mixed: usize,
}

impl ClusterLabels {
    pub fn matches(&self) -> bool {
        self.mixed == 0
            && self.gradient_type == self.neumann
            && self.perp_gradient_type == self.dirichlet
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CrosscheckLevel {
    pub level: usize,
    pub h: f64,
    pub vector_dof: usize,
    pub vector: Vec<f64>,
    pub merged: Vec<f64>,
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    pub clusters: Vec<ClusterLabels>,
    pub labels_match: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrosscheckReport {
    pub evidence: &'static str,
    pub count: usize,
    pub levels: Vec<CrosscheckLevel>,
    /// `max_deviation[l] / max_deviation[l + 1]`.
    pub shrink_factors: Vec<f64>,
}

impl CrosscheckReport {
    /// Deviations decrease with h, allowing one non-monotone step.
    pub fn converging(&self) -> bool {
        self.shrink_factors.iter().filter(|&&f| f <= 1.0).count() <= 1
    }

    pub fn min_shrink(&self) -> f64 {
        self.shrink_factors
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn labels_match(&self) -> bool {
        self.levels.iter().all(|l| l.labels_match)
    }

    pub fn finest(&self) -> Option<&CrosscheckLevel> {
        self.levels.last()
    }
}

/// Compares the vector spectrum with the merged scalar spectra on the same
/// meshes, index by index, and eigenfield labels with merged sources cluster by cluster.
pub fn min_max_crosscheck(
    polygon: &Polygon,
    levels: &[usize],
    count: usize,
    tol: f64,
) -> Result<CrosscheckReport> {
    if count == 0 || levels.is_empty() {
        return Err(Error::InvalidArgument(
            "need count >= 1 and at least one level".into(),
        ));
    }
    // two extra values so clusters cut by the window can be recognized
    let window = count + 2;
    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        let mesh = triangulate(polygon, level)?;
        let (vs, fields) = vector_spectrum(&mesh, window, tol)?;
        // a request capped at the dimension returns the whole discrete spectrum,
        // so the merged prefix stays exact on coarse meshes
        let n = scalar_spectrum(
            &mesh,
            ScalarBc::Neumann,
            (window + 1).min(mesh.num_points()),
            tol,
        )?;
        let interior = mesh.interior_vertices().len();
        let d = scalar_spectrum(&mesh, ScalarBc::Dirichlet, window.min(interior), tol)?;
        let merged = merge_spectra(&n, &d)?;
        let eta: Vec<f64> = merged.values().into_iter().take(window).collect();
        let deviations: Vec<f64> = vs.values[..count]
            .iter()
            .zip(&eta)
            .map(|(v, e)| (v - e).abs() / e.abs())
            .collect();
        let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
        let clusters: Vec<ClusterLabels> = cluster_indices(&eta, MULTIPLICITY_TOL)
            .into_iter()
            .filter(|g| *g.last().unwrap() < count)
            .map(|g| {
                let mut c = ClusterLabels {
                    indices: g.clone(),
                    neumann: 0,
                    dirichlet: 0,
                    gradient_type: 0,
                    perp_gradient_type: 0,
                    mixed: 0,
                };
                for &i in &g {
                    match merged.entries[i].source {
                        BcLabel::Neumann => c.neumann += 1,
                        _ => c.dirichlet += 1,
                    }
                    match fields[i].label {
                        FieldClass::GradientType => c.gradient_type += 1,
                        FieldClass::PerpGradientType => c.perp_gradient_type += 1,
                        FieldClass::Mixed => c.mixed += 1,
                    }
                }
                c
            })
            .collect();
        let labels_match = clusters.iter().all(ClusterLabels::matches);
        out.push(CrosscheckLevel {
            level,
            h: mesh.h,
            vector_dof: vs.dof.unwrap_or(0),
            vector: vs.values[..count].to_vec(),
            merged: eta[..count].to_vec(),
            deviations,
            max_deviation,
            clusters,
            labels_match,
        });
    }
    let shrink_factors = out
        .windows(2)
        .map(|w| w[0].max_deviation / w[1].max_deviation)
        .collect();
    Ok(CrosscheckReport {
        evidence: EVIDENCE,
        count,
        levels: out,
        shrink_factors,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub evidence: &'static str,
    pub k: usize,
    pub target_dimension: usize,
    /// Rank of the test fields, from their mass Gram matrix.
    pub dimension: usize,
    pub lambda_k: f64,
    pub max_rayleigh: f64,
    pub rayleigh_bound_holds: bool,
    /// Largest constraint violation of any test field.
    pub membership_violation: f64,
    /// Largest relative defect of `a[u] = |grad u1|^2 + |grad u2|^2` over the basis.
    pub identity_defect: f64,
    pub identity_holds: bool,
    /// Number of eigenvalues of the vector operator at or below `lambda_k`, when requested.
    pub a_h_count: Option<usize>,
    pub counting_holds: Option<bool>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.dimension == self.target_dimension
            && self.membership_violation == 0.0
            && self.identity_holds
            && self.rayleigh_bound_holds
            && self.counting_holds != Some(false)
    }
}

/// Identity defect tolerated in the certificate.
pub const IDENTITY_TOL: f64 = 1e-10;

/// Builds the `2k` fields `(phi_j, 0)`, `(0, phi_j)` from discrete Dirichlet
/// eigenfunctions and checks them against the vector form.
pub fn test_space_certificate(
    mesh: &TriMesh,
    k: usize,
    tol: f64,
    count_vector: bool,
) -> Result<CertificateReport> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if count_vector {
        if let Some(&(vertex, angle)) = mesh.reentrant_corners().first() {
            return Err(Error::NonConvexCorner {
                vertex,
                angle_deg: angle.to_degrees(),
            });
        }
    }
    let pairs = scalar_eigenpairs(mesh, ScalarBc::Dirichlet, k, tol)?;
    let lambda_k = pairs.spectrum.values[k - 1];
    let system = assemble_vector_form(mesh);
    let form = system.form_full();
    let (stiffness, _) = assemble_scalar(mesh);

    let np = mesh.num_points();
    let mut fields: Vec<Vec<f64>> = Vec::with_capacity(2 * k);
    for c in 0..2 {
        for phi in &pairs.modes {
            let mut u = vec![0.0; 2 * np];
            for (v, &p) in phi.iter().enumerate() {
                u[2 * v + c] = p;
            }
            fields.push(u);
        }
    }
    let membership_violation = fields
        .iter()
        .map(|u| system.constraints.violation(u))
        .fold(0.0, f64::max);
    // fields[j] = (phi_j, 0), fields[k + j] = (0, phi_j)
    let identity_defect = (0..2 * k)
        .map(|i| {
            let grad = stiffness.quad_form(&pairs.modes[i % k]);
            (form.quad_form(&fields[i]) - grad).abs() / grad.abs()
        })
        .fold(0.0, f64::max);

    let m = 2 * k;
    let mut a = DMatrix::zeros(m, m);
    let mut g = DMatrix::zeros(m, m);
    let au: Vec<Vec<f64>> = fields.iter().map(|u| form.matvec(u)).collect();
    let mu: Vec<Vec<f64>> = fields.iter().map(|u| system.mass_full.matvec(u)).collect();
    for i in 0..m {
        for j in 0..m {
            a[(i, j)] = crate::sparse::dot(&fields[i], &au[j]);
            g[(i, j)] = crate::sparse::dot(&fields[i], &mu[j]);
        }
    }
    let a = 0.5 * (&a + a.transpose());
    let g = 0.5 * (&g + g.transpose());
    let (dimension, max_rayleigh) = match g.clone().cholesky() {
        Some(ch) => {
            let l_inv = ch
                .l()
                .try_inverse()
                .expect("triangular factor is invertible");
            let c = &l_inv * &a * l_inv.transpose();
            let top = c
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            (m, top)
        }
        None => {
            let rank = g
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .filter(|&&e| e > 1e-12)
                .count();
            (rank, f64::NAN)
        }
    };
    let rayleigh_bound_holds = max_rayleigh <= lambda_k * (1.0 + tol);

    let (a_h_count, counting_holds) = if count_vector {
        let want = (m + 4).min(system.constraints.reduced_dim());
        let (vs, _) = vector_spectrum(mesh, want, tol)?;
        let count = vs
            .values
            .iter()
            .filter(|&&v| v <= lambda_k * (1.0 + tol))
            .count();
        (Some(count), Some(count >= m))
    } else {
        (None, None)
    };

    Ok(CertificateReport {
        evidence: EVIDENCE,
        k,
        target_dimension: m,
        dimension,
        lambda_k,
        max_rayleigh,
        rayleigh_bound_holds,
        membership_violation,
        identity_defect,
        identity_holds: identity_defect <= IDENTITY_TOL,
        a_h_count,
        counting_holds,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub bc: ScalarBc,
    pub k: usize,
    pub levels: Vec<usize>,
    pub h: Vec<f64>,
    pub values: Vec<f64>,
    /// Observed orders from consecutive triples.
    pub orders: Vec<f64>,
    /// Richardson extrapolation from the last triple.
    pub extrapolated: f64,
    /// No value increases under refinement by more than the relative slack 1e-8.
    pub non_increasing: bool,
}

impl ConvergenceReport {
    pub fn order(&self) -> f64 {
        *self.orders.last().expect("at least one triple")
    }
}

/// Observed orders and extrapolated limit from values on consecutively refined meshes.
pub fn richardson(values: &[f64]) -> Result<(Vec<f64>, f64)> {
    if values.len() < 3 {
        return Err(Error::InvalidArgument(
            "need values on at least 3 levels".into(),
        ));
    }
    let unusable = || Error::NonMonotone {
        values: values.to_vec(),
    };
    let mut orders = Vec::new();
    for w in values.windows(3) {
        let (d1, d2) = (w[0] - w[1], w[1] - w[2]);
        if !(d1 / d2 > 0.0) || !(d1 / d2).is_finite() {
            return Err(unusable());
        }
        orders.push((d1 / d2).log2());
    }
    let p = *orders.last().unwrap();
    let n = values.len();
    let extrapolated = values[n - 1] - (values[n - 2] - values[n - 1]) / (2f64.powf(p) - 1.0);
    if !extrapolated.is_finite() {
        return Err(unusable());
    }
    Ok((orders, extrapolated))
}

/// The k-th eigenvalue across consecutive refinement levels.
pub fn convergence_study(
    polygon: &Polygon,
    bc: ScalarBc,
    k: usize,
    levels: &[usize],
    tol: f64,
) -> Result<ConvergenceReport> {
    if levels.len() < 3 || levels.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::InvalidArgument(
            "need at least 3 consecutive levels".into(),
        ));
    }
    let mut h = Vec::new();
    let mut values = Vec::new();
    for &level in levels {
        let mesh = triangulate(polygon, level)?;
        let s = scalar_spectrum(&mesh, bc, k, tol)?;
        h.push(mesh.h);
        values.push(s.values[k - 1]);
    }
    let non_increasing = values.windows(2).all(|w| w[1] <= w[0] + 1e-8 * w[0].abs());
    let (orders, extrapolated) = richardson(&values)?;
    Ok(ConvergenceReport {
        bc,
        k,
        levels: levels.to_vec(),
        h,
        values,
        orders,
        extrapolated,
        non_increasing,
    })
}
