//! End-to-end analytic pipeline: profile, urn, spectrum and covariances,
//! packaged as a serializable report.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_rational::BigRational;
use serde::Serialize;

use crate::covariance::{min_eigenvalue, CovarianceSettings, Covariances, PathReport, UrnFloat};
use crate::error::Result;
use crate::linalg::{self, Matrix};
use crate::model::{BlockSet, Kind};
use crate::profile::{DegreeMap, DegreeProfile, BALANCED_NOTE};
use crate::scalar::Scalar;
use crate::urn::UrnModel;

pub const SCHEMA_VERSION: u32 = 1;

/// Profile and urn in a single numeric field.
#[derive(Clone, Debug)]
pub struct Model<S> {
    pub profile: DegreeProfile<S>,
    pub urn: UrnModel<S>,
}

impl<S: Scalar> Model<S> {
    pub fn build(bs: &BlockSet) -> Result<Self> {
        let profile = DegreeProfile::compute(bs)?;
        let urn = UrnModel::build(bs, &profile)?;
        Ok(Model { profile, urn })
    }

    pub fn to_float(&self) -> UrnFloat {
        UrnFloat {
            lambda1: self.profile.lambda1.to_f64(),
            intensity: linalg::to_dmatrix(&self.urn.intensity),
            activity: linalg::to_dvector(&self.urn.activity),
            v1: linalg::to_dvector(&self.urn.v1),
            second_moment: linalg::to_dmatrix(&self.urn.second_moment),
            eigenvalues: self.urn.eigenvalues.iter().map(Scalar::to_f64).collect(),
        }
    }
}

/// The model in exact rational arithmetic when the inputs allow it,
/// otherwise in binary floating point.
#[derive(Clone, Debug)]
pub enum AnyModel {
    Exact(Model<BigRational>),
    Float(Model<f64>),
}

impl AnyModel {
    pub fn build(bs: &BlockSet) -> Result<Self> {
        if bs.is_exact() {
            Model::build(bs).map(AnyModel::Exact)
        } else {
            Model::build(bs).map(AnyModel::Float)
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, AnyModel::Exact(_))
    }

    pub fn to_float(&self) -> UrnFloat {
        match self {
            AnyModel::Exact(m) => m.to_float(),
            AnyModel::Float(m) => m.to_float(),
        }
    }

    pub fn essential(&self) -> &[u32] {
        match self {
            AnyModel::Exact(m) => &m.profile.essential,
            AnyModel::Float(m) => &m.profile.essential,
        }
    }

    pub fn balanced(&self) -> bool {
        match self {
            AnyModel::Exact(m) => m.profile.balance.balanced,
            AnyModel::Float(m) => m.profile.balance.balanced,
        }
    }
}

/// Float view of the urn of `bs`.
pub fn float_urn(bs: &BlockSet) -> Result<UrnFloat> {
    Ok(AnyModel::build(bs)?.to_float())
}

/// Everything the analytic side predicts about a block set.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub model: AnyModel,
    pub urn: UrnFloat,
    pub covariances: Covariances,
}

impl Analysis {
    pub fn run(bs: &BlockSet) -> Result<Self> {
        Self::run_with(bs, &CovarianceSettings::default())
    }

    pub fn run_with(bs: &BlockSet, settings: &CovarianceSettings) -> Result<Self> {
        let model = AnyModel::build(bs)?;
        let urn = model.to_float();
        let covariances = Covariances::compute(&urn, settings)?;
        Ok(Analysis {
            model,
            urn,
            covariances,
        })
    }

    pub fn essential(&self) -> &[u32] {
        self.model.essential()
    }

    pub fn r(&self) -> usize {
        self.essential().len()
    }

    /// Predicted `E X_n / n` on the tracked coordinates: `λ₁ x`.
    pub fn mean_rates(&self) -> Vec<f64> {
        (0..self.r())
            .map(|i| self.urn.lambda1 * self.urn.v1[i])
            .collect()
    }

    /// Covariance of the limit law restricted to the tracked coordinates.
    pub fn tracked_sigma(&self) -> DMatrix<f64> {
        let r = self.r();
        self.covariances.sigma.sigma.view((0, 0), (r, r)).into_owned()
    }

    /// The projected second-moment covariance on the tracked coordinates.
    pub fn tracked_projected_sigma(&self) -> DMatrix<f64> {
        let r = self.r();
        self.covariances.projected.sigma.view((0, 0), (r, r)).into_owned()
    }

    pub fn report(&self, bs: &BlockSet) -> AnalysisReport {
        match &self.model {
            AnyModel::Exact(m) => build_report(bs, m, self),
            AnyModel::Float(m) => build_report(bs, m, self),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BalanceReport {
    pub s: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_exact: Option<Vec<String>>,
    pub balanced: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CovarianceReport {
    pub sigma: Vec<Vec<f64>>,
    pub sigma_min_eigenvalue: f64,
    pub sigma_paths: PathReport,
    pub sigma_projected: Vec<Vec<f64>>,
    pub sigma_projected_min_eigenvalue: f64,
    pub sigma_projected_paths: PathReport,
    /// `a'Σa`: zero exactly when the urn is balanced.
    pub activity_variance: f64,
}

/// Serializable analytic report. Fields with an `_exact` twin carry exact
/// rational strings when the model was analysed in rational arithmetic.
#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub kind: Kind,
    pub arithmetic: &'static str,
    pub chi: String,
    pub rho: String,
    pub r: usize,
    pub f: BTreeMap<u32, String>,
    pub g: BTreeMap<u32, String>,
    pub essential: Vec<u32>,
    pub lambda1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda1_exact: Option<String>,
    /// `nu` for hooking networks, `psi` for bipolar ones.
    pub limit_name: &'static str,
    pub limit: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_exact: Option<Vec<String>>,
    pub mean_rates: Vec<f64>,
    pub balance: BalanceReport,
    pub activity: Vec<f64>,
    pub intensity: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intensity_exact: Option<Vec<Vec<String>>>,
    pub eigenvalues: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvalues_exact: Option<Vec<String>>,
    pub spectrum_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub char_poly_verified: Option<bool>,
    pub v1: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v1_exact: Option<Vec<String>>,
    pub second_moment: Vec<Vec<f64>>,
    pub irreducible: bool,
    pub warnings: Vec<String>,
    pub covariance: CovarianceReport,
}

fn floats<S: Scalar>(v: &[S]) -> Vec<f64> {
    v.iter().map(Scalar::to_f64).collect()
}

fn exacts<S: Scalar>(v: &[S]) -> Option<Vec<String>> {
    v.iter().map(Scalar::exact_string).collect()
}

fn float_rows<S: Scalar>(m: &Matrix<S>) -> Vec<Vec<f64>> {
    m.iter().map(|row| floats(row)).collect()
}

fn exact_rows<S: Scalar>(m: &Matrix<S>) -> Option<Vec<Vec<String>>> {
    m.iter().map(|row| exacts(row)).collect()
}

fn dmatrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|row| row.iter().copied().collect()).collect()
}

fn map_strings<S: Scalar>(m: &DegreeMap<S>) -> BTreeMap<u32, String> {
    m.iter()
        .map(|(&k, v)| (k, v.exact_string().unwrap_or_else(|| v.to_string())))
        .collect()
}

fn build_report<S: Scalar>(bs: &BlockSet, m: &Model<S>, analysis: &Analysis) -> AnalysisReport {
    let p = &m.profile;
    let u = &m.urn;
    let cov = &analysis.covariances;
    let a = &analysis.urn.activity;
    let mut warnings = Vec::new();
    if !u.irreducible {
        warnings.push(
            "urn is reducible: some types cannot reach the special type, so limits may be degenerate"
                .to_string(),
        );
    }
    AnalysisReport {
        schema_version: SCHEMA_VERSION,
        kind: bs.kind,
        arithmetic: if S::EXACT { "exact" } else { "float" },
        chi: bs.chi.to_string(),
        rho: bs.rho.to_string(),
        r: p.r(),
        f: map_strings(&p.f),
        g: map_strings(&p.g),
        essential: p.essential.clone(),
        lambda1: p.lambda1.to_f64(),
        lambda1_exact: p.lambda1.exact_string(),
        limit_name: match bs.kind {
            Kind::Hooking => "nu",
            Kind::Bipolar => "psi",
        },
        limit: floats(&p.limit),
        limit_exact: exacts(&p.limit),
        mean_rates: analysis.mean_rates(),
        balance: BalanceReport {
            s: floats(&p.balance.per_block),
            s_exact: exacts(&p.balance.per_block),
            balanced: p.balance.balanced,
            note: p.balance.balanced.then(|| BALANCED_NOTE.to_string()),
        },
        activity: floats(&u.activity),
        intensity: float_rows(&u.intensity),
        intensity_exact: exact_rows(&u.intensity),
        eigenvalues: floats(&u.eigenvalues),
        eigenvalues_exact: exacts(&u.eigenvalues),
        spectrum_error: u.spectrum_error,
        char_poly_verified: u.char_poly_verified,
        v1: floats(&u.v1),
        v1_exact: exacts(&u.v1),
        second_moment: float_rows(&u.second_moment),
        irreducible: u.irreducible,
        warnings,
        covariance: CovarianceReport {
            sigma: dmatrix_rows(&cov.sigma.sigma),
            sigma_min_eigenvalue: min_eigenvalue(&cov.sigma.sigma),
            sigma_paths: cov.sigma.report.clone(),
            sigma_projected: dmatrix_rows(&cov.projected.sigma),
            sigma_projected_min_eigenvalue: min_eigenvalue(&cov.projected.sigma),
            sigma_projected_paths: cov.projected.report.clone(),
            activity_variance: (a.transpose() * &cov.sigma.sigma * a)[(0, 0)],
        },
    }
}

impl AnalysisReport {
    /// Plain-text summary for terminals.
    pub fn table(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let show = |f: &[f64], e: &Option<Vec<String>>| match e {
            Some(e) => e.join(", "),
            None => f.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(", "),
        };
        let _ = writeln!(out, "kind            {} ({} arithmetic)", self.kind, self.arithmetic);
        let _ = writeln!(out, "chi, rho        {}, {}", self.chi, self.rho);
        let _ = writeln!(out, "f               {:?}", self.f);
        let _ = writeln!(out, "g               {:?}", self.g);
        let _ = writeln!(out, "essential       {:?}", self.essential);
        let _ = writeln!(
            out,
            "lambda1         {}",
            self.lambda1_exact.clone().unwrap_or_else(|| format!("{:.6}", self.lambda1))
        );
        let _ = writeln!(out, "{:<15} ({})", self.limit_name, show(&self.limit, &self.limit_exact));
        let _ = writeln!(out, "s_i             ({})", show(&self.balance.s, &self.balance.s_exact));
        let _ = writeln!(out, "balanced        {}", self.balance.balanced);
        if let Some(note) = &self.balance.note {
            let _ = writeln!(out, "                {note}");
        }
        let _ = writeln!(out, "eigenvalues     {{{}}}", show(&self.eigenvalues, &self.eigenvalues_exact));
        let _ = writeln!(out, "v1              ({})", show(&self.v1, &self.v1_exact));
        let _ = writeln!(out, "irreducible     {}", self.irreducible);
        let _ = writeln!(out, "intensity matrix A:");
        match &self.intensity_exact {
            Some(rows) => {
                for row in rows {
                    let _ = writeln!(out, "  {}", row.iter().map(|x| format!("{x:>8}")).collect::<String>());
                }
            }
            None => {
                for row in &self.intensity {
                    let _ = writeln!(out, "  {}", row.iter().map(|x| format!("{x:>12.6}")).collect::<String>());
                }
            }
        }
        let _ = writeln!(out, "limit covariance Sigma:");
        for row in &self.covariance.sigma {
            let _ = writeln!(out, "  {}", row.iter().map(|x| format!("{x:>12.6}")).collect::<String>());
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}
