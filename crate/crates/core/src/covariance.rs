//! Limiting covariance of the urn composition.
//!
//! With `Â = A − λ₁v₁a'` (the intensity matrix with its dominant direction
//! removed) and `M = Â − (λ₁/2)I`, every covariance here has the form
//!
//! ```text
//! Σ(C) = λ₁ ∫₀^∞ e^{sM} C e^{sM'} ds
//! ```
//!
//! for a symmetric inner matrix `C`. Two inner matrices are provided:
//!
//! * `P_I B P_I'` with `P_I = I − v₁a'`, which projects the second-moment
//!   matrix `B` off the dominant direction;
//! * `Γ = B − λ₁² v₁v₁'`, the covariance of a single replacement vector
//!   drawn from the limiting type distribution.
//!
//! The two agree when every block changes the total activity by the same
//! amount. In general only `Γ` describes the fluctuations of the counts, since
//! the randomness of the activity increments feeds back into the later draw
//! probabilities; it is the matrix the Monte-Carlo verification compares to.
//!
//! Each `Σ(C)` is evaluated along two routes: a finite sum over dual
//! eigenbases when the spectrum is simple, and Romberg quadrature of the
//! integrand using matrix exponentials.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;

/// Numerical settings for evaluating the covariance integral.
#[derive(Clone, Debug)]
pub struct CovarianceSettings {
    /// Required agreement between the eigenbasis and quadrature routes.
    pub path_agreement: f64,
    /// Romberg stopping tolerance between successive extrapolations.
    pub quadrature_tolerance: f64,
    /// The integral is truncated where the integrand's norm drops below this.
    pub tail_tolerance: f64,
    pub max_levels: usize,
    /// Eigenbasis route is skipped above this eigenvector condition number.
    pub max_condition: f64,
}

impl Default for CovarianceSettings {
    fn default() -> Self {
        CovarianceSettings {
            path_agreement: 1e-6,
            quadrature_tolerance: 1e-8,
            tail_tolerance: 1e-12,
            max_levels: 20,
            max_condition: 1e8,
        }
    }
}

/// Float view of the urn quantities the covariance depends on.
#[derive(Clone, Debug)]
pub struct UrnFloat {
    pub lambda1: f64,
    pub intensity: DMatrix<f64>,
    pub activity: DVector<f64>,
    pub v1: DVector<f64>,
    pub second_moment: DMatrix<f64>,
    /// Closed-form eigenvalues, λ₁ first.
    pub eigenvalues: Vec<f64>,
}

impl UrnFloat {
    pub fn dim(&self) -> usize {
        self.v1.len()
    }

    /// `P_I = I − v₁a'`.
    pub fn projector(&self) -> DMatrix<f64> {
        DMatrix::identity(self.dim(), self.dim()) - &self.v1 * self.activity.transpose()
    }

    /// `Â = A − λ₁v₁a'`.
    pub fn deflated(&self) -> DMatrix<f64> {
        &self.intensity - &self.v1 * self.activity.transpose() * self.lambda1
    }

    /// `M = Â − (λ₁/2)I`, the generator of the covariance integrand.
    pub fn generator(&self) -> DMatrix<f64> {
        self.deflated() - DMatrix::identity(self.dim(), self.dim()) * (self.lambda1 / 2.0)
    }

    pub fn projected_inner(&self) -> DMatrix<f64> {
        let p = self.projector();
        linalg::symmetrize(&(&p * &self.second_moment * p.transpose()))
    }

    pub fn centered_inner(&self) -> DMatrix<f64> {
        let mu = &self.v1 * self.lambda1;
        linalg::symmetrize(&(&self.second_moment - &mu * mu.transpose()))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PathReport {
    pub eigenbasis_used: bool,
    /// Why the eigenbasis route was skipped, if it was.
    pub eigenbasis_skipped: Option<String>,
    pub eigenvector_condition: Option<f64>,
    pub quadrature_levels: usize,
    pub quadrature_horizon: f64,
    /// Largest entrywise difference between the two routes.
    pub path_difference: Option<f64>,
}

/// `Σ(C)` with evaluation diagnostics.
#[derive(Clone, Debug)]
pub struct CovarianceResult {
    pub sigma: DMatrix<f64>,
    pub eigenbasis: Option<DMatrix<f64>>,
    pub quadrature: DMatrix<f64>,
    pub report: PathReport,
}

/// `(V, U', λ̂, cond V)`.
type Eigenbasis = (DMatrix<f64>, DMatrix<f64>, Vec<f64>, f64);

/// Dual eigenbases of `Â`: columns of `V` are `v₁` and one null vector of
/// `A − λI` per other eigenvalue; `U' = V⁻¹`.
fn eigenbasis(urn: &UrnFloat, settings: &CovarianceSettings) -> std::result::Result<Eigenbasis, String> {
    let n = urn.dim();
    let others = &urn.eigenvalues[1..];
    for i in 0..others.len() {
        for j in 0..i {
            if (others[i] - others[j]).abs() <= 1e-9 * (1.0 + others[i].abs()) {
                return Err(format!("repeated eigenvalue {}", others[i]));
            }
        }
    }
    let mut v = DMatrix::zeros(n, n);
    v.set_column(0, &urn.v1);
    let mut hat = vec![0.0; n];
    for (j, &lam) in others.iter().enumerate() {
        let shifted = &urn.intensity - DMatrix::identity(n, n) * lam;
        let (x, _) = linalg::null_vector(&shifted).ok_or("singular value decomposition failed")?;
        v.set_column(j + 1, &x);
        hat[j + 1] = lam;
    }
    let cond = linalg::condition_number(&v);
    if !cond.is_finite() || cond > settings.max_condition {
        return Err(format!("eigenvector matrix condition number {cond:e} too large"));
    }
    let ut = v.clone().try_inverse().ok_or("eigenvector matrix is singular")?;
    Ok((v, ut, hat, cond))
}

/// `λ₁ V S̃ V'` with `S̃_jk = (U'CU)_jk / (λ₁ − λ̂_j − λ̂_k)`.
fn sigma_eigenbasis(urn: &UrnFloat, c: &DMatrix<f64>, v: &DMatrix<f64>, ut: &DMatrix<f64>, hat: &[f64]) -> DMatrix<f64> {
    let inner = ut * c * ut.transpose();
    let n = urn.dim();
    let s = DMatrix::from_fn(n, n, |j, k| inner[(j, k)] / (urn.lambda1 - hat[j] - hat[k]));
    linalg::symmetrize(&(v * s * v.transpose() * urn.lambda1))
}

/// Romberg quadrature of `∫₀^T e^{sM} C e^{sM'} ds`, with `T` doubled until
/// the integrand is negligible. Returns the integral, levels used and `T`.
fn integral_quadrature(
    urn: &UrnFloat,
    c: &DMatrix<f64>,
    settings: &CovarianceSettings,
) -> Result<(DMatrix<f64>, usize, f64)> {
    let m = urn.generator();
    let integrand = |e: &DMatrix<f64>| e * c * e.transpose();
    let scale = linalg::max_abs(c).max(1.0);

    let mut horizon = 1.0 / urn.lambda1;
    let decayed = |h: f64| {
        let tail = integrand(&(&m * h).exp()).norm() / urn.lambda1.min(1.0);
        tail <= settings.tail_tolerance * scale
    };
    let mut settled = false;
    for _ in 0..64 {
        if decayed(horizon) {
            settled = true;
            break;
        }
        horizon *= 2.0;
    }
    if !settled {
        return Err(Error::Numerical("covariance integrand does not decay".into()));
    }

    let tol = settings.quadrature_tolerance * scale;
    let end = integrand(&(&m * horizon).exp());
    let mut trapezoid = (c + &end) * (horizon / 2.0);
    let mut table: Vec<DMatrix<f64>> = vec![trapezoid.clone()];
    for level in 1..=settings.max_levels {
        let nodes = 1usize << (level - 1);
        let h = horizon / (2 * nodes) as f64;
        let step = (&m * (2.0 * h)).exp();
        let mut e = (&m * h).exp();
        let mut midpoints = DMatrix::zeros(c.nrows(), c.ncols());
        for i in 0..nodes {
            if i > 0 {
                e = &e * &step;
            }
            midpoints += integrand(&e);
        }
        trapezoid = trapezoid * 0.5 + midpoints * h;

        let mut row = vec![trapezoid.clone()];
        let mut factor = 1.0;
        for k in 1..=level.min(table.len()) {
            factor *= 4.0;
            let next = (&row[k - 1] * factor - &table[k - 1]) / (factor - 1.0);
            row.push(next);
        }
        let best = row.last().expect("nonempty").clone();
        let prev = table.last().expect("nonempty");
        let converged = level >= 3 && linalg::max_abs_diff(&best, prev) < tol;
        table = row;
        if converged {
            return Ok((linalg::symmetrize(&best), level, horizon));
        }
    }
    Err(Error::Numerical(format!(
        "covariance quadrature did not converge within {} levels",
        settings.max_levels
    )))
}

/// Evaluates `Σ(C) = λ₁ ∫₀^∞ e^{sM} C e^{sM'} ds` along both routes and
/// checks that they agree.
pub fn sigma_of(urn: &UrnFloat, c: &DMatrix<f64>, settings: &CovarianceSettings) -> Result<CovarianceResult> {
    let (integral, levels, horizon) = integral_quadrature(urn, c, settings)?;
    let quadrature = integral * urn.lambda1;
    let mut report = PathReport {
        eigenbasis_used: false,
        eigenbasis_skipped: None,
        eigenvector_condition: None,
        quadrature_levels: levels,
        quadrature_horizon: horizon,
        path_difference: None,
    };
    let eigen = match eigenbasis(urn, settings) {
        Ok((v, ut, hat, cond)) => {
            report.eigenvector_condition = Some(cond);
            Some(sigma_eigenbasis(urn, c, &v, &ut, &hat))
        }
        Err(reason) => {
            report.eigenbasis_skipped = Some(reason);
            None
        }
    };
    if let Some(e) = &eigen {
        let diff = linalg::max_abs_diff(e, &quadrature);
        report.eigenbasis_used = true;
        report.path_difference = Some(diff);
        let allowed = settings.path_agreement * linalg::max_abs(&quadrature).max(1.0);
        if diff > allowed {
            return Err(Error::Consistency(format!(
                "covariance routes disagree by {diff:e} (allowed {allowed:e})"
            )));
        }
    }
    Ok(CovarianceResult {
        sigma: eigen.clone().unwrap_or_else(|| quadrature.clone()),
        eigenbasis: eigen,
        quadrature,
        report,
    })
}

/// Both limiting covariances of an urn.
#[derive(Clone, Debug)]
pub struct Covariances {
    /// `Σ(Γ)`: the covariance of the Gaussian limit of the counts.
    pub sigma: CovarianceResult,
    /// `Σ(P_I B P_I')`, the projected second-moment form.
    pub projected: CovarianceResult,
}

impl Covariances {
    pub fn compute(urn: &UrnFloat, settings: &CovarianceSettings) -> Result<Self> {
        let sigma = sigma_of(urn, &urn.centered_inner(), settings)?;
        let projected = sigma_of(urn, &urn.projected_inner(), settings)?;
        Ok(Covariances { sigma, projected })
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    linalg::sym_eigenvalues(m).first().copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::float_urn;
    use crate::fixtures;

    fn lyapunov(urn: &UrnFloat, c: &DMatrix<f64>) -> DMatrix<f64> {
        // (I ⊗ M + M ⊗ I) vec X = −vec C
        let m = urn.generator();
        let n = m.nrows();
        let id = DMatrix::<f64>::identity(n, n);
        let k = id.kronecker(&m) + m.kronecker(&id);
        let rhs = DVector::from_iterator(n * n, c.iter().map(|x| -x));
        let x = k.lu().solve(&rhs).unwrap();
        DMatrix::from_column_slice(n, n, x.as_slice()) * urn.lambda1
    }

    #[test]
    fn fig1_routes_agree_with_lyapunov_solution() {
        let urn = float_urn(&fixtures::fig1()).unwrap();
        let cov = Covariances::compute(&urn, &CovarianceSettings::default()).unwrap();
        for res in [&cov.sigma, &cov.projected] {
            assert!(res.report.eigenbasis_used);
            assert!(res.report.path_difference.unwrap() < 1e-6);
        }
        let oracle = lyapunov(&urn, &urn.centered_inner());
        assert!(linalg::max_abs_diff(&oracle, &cov.sigma.sigma) < 1e-8);
        let oracle = lyapunov(&urn, &urn.projected_inner());
        assert!(linalg::max_abs_diff(&oracle, &cov.projected.sigma) < 1e-8);
    }

    #[test]
    fn fig3_repeated_spectrum_uses_quadrature() {
        let urn = float_urn(&fixtures::fig3()).unwrap();
        let cov = Covariances::compute(&urn, &CovarianceSettings::default()).unwrap();
        assert!(!cov.sigma.report.eigenbasis_used);
        let oracle = lyapunov(&urn, &urn.centered_inner());
        assert!(linalg::max_abs_diff(&oracle, &cov.sigma.sigma) < 1e-7);
        assert!(min_eigenvalue(&cov.sigma.sigma) > -1e-9);
    }

    #[test]
    fn activity_variance_is_zero_for_a_single_block() {
        let urn = float_urn(&fixtures::plane_tree().with_r(4).unwrap()).unwrap();
        let cov = Covariances::compute(&urn, &CovarianceSettings::default()).unwrap();
        for sigma in [&cov.sigma.sigma, &cov.projected.sigma] {
            let var = (urn.activity.transpose() * sigma * &urn.activity)[(0, 0)];
            assert!(var.abs() < 1e-8, "{var}");
        }
        // balanced urns make both inner matrices give the same covariance
        assert!(linalg::max_abs_diff(&cov.sigma.sigma, &cov.projected.sigma) < 1e-8);
    }

    #[test]
    fn activity_variance_matches_increment_variance() {
        // a'Σa equals the variance of the per-block activity change
        let bs = fixtures::fig1();
        let urn = float_urn(&bs).unwrap();
        let cov = Covariances::compute(&urn, &CovarianceSettings::default()).unwrap();
        let var = (urn.activity.transpose() * &cov.sigma.sigma * &urn.activity)[(0, 0)];
        let s = [4.0, 8.0, 10.0, 16.0];
        let p = [1.0 / 6.0, 1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0];
        let mean: f64 = s.iter().zip(&p).map(|(s, p)| s * p).sum();
        let expect: f64 = s.iter().zip(&p).map(|(s, p)| p * (s - mean).powi(2)).sum();
        assert!((var - expect).abs() < 1e-7, "{var} vs {expect}");
    }

    #[test]
    fn projector_is_idempotent_and_kills_v1() {
        let urn = float_urn(&fixtures::fig1()).unwrap();
        let p = urn.projector();
        assert!(linalg::max_abs_diff(&(&p * &p), &p) < 1e-10);
        assert!((&p * &urn.v1).amax() < 1e-12);
    }
}
