use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Eigenvalues within this relative distance are reported as one cluster.
pub const MULTIPLICITY_TOL: f64 = 1e-2;

/// Values below this fraction of the second eigenvalue count as the Neumann zero mode.
pub const ZERO_MODE_CUTOFF: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BcLabel {
    #[serde(rename = "dirichlet")]
    Dirichlet,
    #[serde(rename = "neumann")]
    Neumann,
    #[serde(rename = "vector_A")]
    VectorA,
    #[serde(rename = "merged")]
    Merged,
}

impl BcLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            BcLabel::Dirichlet => "dirichlet",
            BcLabel::Neumann => "neumann",
            BcLabel::VectorA => "vector_A",
            BcLabel::Merged => "merged",
        }
    }
}

/// Ascending eigenvalue list with its provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub bc: BcLabel,
    /// Closed-form reference rather than a discretization.
    pub analytic: bool,
    pub residuals: Vec<f64>,
    /// Solver tolerance the residuals were checked against.
    pub tol: f64,
    pub mesh_h: Option<f64>,
    /// Number of mesh vertices, used to match spectra computed on the same mesh.
    pub mesh_points: Option<usize>,
    pub dof: Option<usize>,
    pub domain: Option<String>,
}

#[derive(Serialize)]
struct SpectrumExport<'a> {
    bc: String,
    values: &'a [f64],
    residuals: &'a [f64],
    mesh_h: Option<f64>,
    dof: Option<usize>,
}

impl Spectrum {
    pub fn analytic(bc: BcLabel, values: Vec<f64>, domain: &str) -> Self {
        let residuals = vec![0.0; values.len()];
        Self {
            values,
            bc,
            analytic: true,
            residuals,
            tol: 0.0,
            mesh_h: None,
            mesh_points: None,
            dof: None,
            domain: Some(domain.to_string()),
        }
    }

    pub fn with_domain(mut self, domain: impl Into<String>) -> Self {
        self.domain = Some(domain.into());
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// 1-based access, matching the usual eigenvalue numbering.
    pub fn nth(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }

    /// Label used in exports; analytic spectra carry an `analytic:` prefix.
    pub fn bc_label(&self) -> String {
        if self.analytic {
            format!("analytic:{}", self.bc.as_str())
        } else {
            self.bc.as_str().to_string()
        }
    }

    /// Threshold below which a value is the zero mode.
    pub fn zero_cutoff(&self) -> f64 {
        match self.values.get(1) {
            Some(&second) => ZERO_MODE_CUTOFF * second.abs(),
            None => 0.0,
        }
    }

    /// Number of leading values at or below the zero-mode cutoff.
    pub fn zero_modes(&self) -> usize {
        let cut = self.zero_cutoff();
        self.values.iter().take_while(|&&v| v <= cut).count()
    }

    /// Index groups of values that agree within [`MULTIPLICITY_TOL`].
    pub fn multiplicity_groups(&self) -> Vec<Vec<usize>> {
        cluster_indices(&self.values, MULTIPLICITY_TOL)
    }

    /// Size of the cluster containing 1-based index `k`.
    pub fn multiplicity_of(&self, k: usize) -> usize {
        self.multiplicity_groups()
            .into_iter()
            .find(|g| g.contains(&(k - 1)))
            .map_or(0, |g| g.len())
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, &r| m.max(r))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.export())?)
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self.export()).expect("spectrum export is plain data")
    }

    fn export(&self) -> SpectrumExport<'_> {
        SpectrumExport {
            bc: self.bc_label(),
            values: &self.values,
            residuals: &self.residuals,
            mesh_h: self.mesh_h,
            dof: self.dof,
        }
    }
}

/// Groups consecutive ascending values whose gap is within `rel` of the larger one.
pub fn cluster_indices(values: &[f64], rel: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        let joins = i > 0 && {
            let prev = values[i - 1];
            (v - prev).abs() <= rel * v.abs().max(prev.abs()) && v.abs().max(prev.abs()) > 0.0
                || (v == 0.0 && prev == 0.0)
        };
        if joins {
            groups.last_mut().unwrap().push(i);
        } else {
            groups.push(vec![i]);
        }
    }
    groups
}
