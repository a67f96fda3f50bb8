//! Closed-form Ricci eigenvalues of `dt² + F²θ² + G²g_K` and the Gray-condition
//! report built on them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ode::{ProfileGrid, ProfileState};

/// Default tolerance for [`ac_report`].
pub const AC_TOL: f64 = 1e-6;
/// Nodes this close to an end are skipped by the report.
pub const ENDPOINT_MARGIN: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurvatureError {
    #[error("fiber radius F = {0} must be positive")]
    DegenerateFiber(f64),
    #[error("base radius G = {0} must be positive")]
    DegenerateBase(f64),
    #[error("non-finite profile data")]
    NonFinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RicciSpectrum {
    /// Eigenvalue on `∂_t`.
    pub lambda0: f64,
    /// Eigenvalue on the fiber direction.
    pub lambda1: f64,
    /// Double eigenvalue on the horizontal plane.
    pub lambda2: f64,
    pub tau: f64,
}

impl RicciSpectrum {
    fn from_parts(lambda0: f64, lambda1: f64, lambda2: f64) -> Self {
        Self {
            lambda0,
            lambda1,
            lambda2,
            tau: lambda0 + lambda1 + 2.0 * lambda2,
        }
    }

    fn map2(a: &Self, b: &Self, op: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_parts(op(a.lambda0, b.lambda0), op(a.lambda1, b.lambda1), op(a.lambda2, b.lambda2))
    }
}

#[allow(clippy::too_many_arguments)]
pub fn ricci_closed_form(
    f: f64,
    df: f64,
    ddf: f64,
    g: f64,
    dg: f64,
    ddg: f64,
    s: f64,
    k: f64,
) -> Result<RicciSpectrum, CurvatureError> {
    if [f, df, ddf, g, dg, ddg, s, k].iter().any(|v| !v.is_finite()) {
        return Err(CurvatureError::NonFinite);
    }
    if f <= 0.0 {
        return Err(CurvatureError::DegenerateFiber(f));
    }
    if g <= 0.0 {
        return Err(CurvatureError::DegenerateBase(g));
    }
    let twist = 2.0 * s * s * f * f / g.powi(4);
    let mixed = df * dg / (f * g);
    let lambda0 = -2.0 * ddg / g - ddf / f;
    let lambda1 = -ddf / f - 2.0 * mixed + twist;
    let lambda2 = -ddg / g - mixed - (dg / g).powi(2) - twist + k / (g * g);
    Ok(RicciSpectrum::from_parts(lambda0, lambda1, lambda2))
}

pub fn spectrum_at(state: &ProfileState, s: f64, k: f64) -> Result<RicciSpectrum, CurvatureError> {
    ricci_closed_form(state.f, state.df, state.ddf, state.g, state.dg, state.ddg, s, k)
}

/// Closed-form spectra at every node with `F, G > 0`; `None` elsewhere.
pub fn node_spectra(grid: &ProfileGrid) -> Vec<Option<RicciSpectrum>> {
    (0..grid.len())
        .map(|i| spectrum_at(&grid.state(i), grid.s, grid.curvature).ok())
        .collect()
}

/// Smooth-extension spectra at `t = a` and `t = b` by one-sided Richardson
/// extrapolation from nodes 4, 8 and 16 steps inside.
pub fn endpoint_spectra(grid: &ProfileGrid) -> Option<[RicciSpectrum; 2]> {
    let n = grid.len().checked_sub(1)?;
    if n < 4 * ENDPOINT_MARGIN + 1 {
        return None;
    }
    let at = |i: usize| spectrum_at(&grid.state(i), grid.s, grid.curvature).ok();
    let extrapolate = |idx: [usize; 3]| -> Option<RicciSpectrum> {
        let (v1, v2, v4) = (at(idx[0])?, at(idx[1])?, at(idx[2])?);
        let r1 = RicciSpectrum::map2(&v1, &v2, |p, q| 2.0 * p - q);
        let r2 = RicciSpectrum::map2(&v2, &v4, |p, q| 2.0 * p - q);
        Some(RicciSpectrum::map2(&r1, &r2, |p, q| (4.0 * p - q) / 3.0))
    };
    let m = ENDPOINT_MARGIN;
    Some([
        extrapolate([m, 2 * m, 4 * m])?,
        extrapolate([n - m, n - 2 * m, n - 4 * m])?,
    ])
}

/// Least-squares fit `μ ≈ c·G² + d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuFit {
    pub c: f64,
    pub d: f64,
    /// Largest pointwise `|μ − c·G² − d|`, relative to `max(1, max|μ|)`.
    pub max_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ACReport {
    /// `max |λ₀ − λ₁| / max(1, |λ₀|)`.
    pub max_lambda01_gap: f64,
    /// `(max − min)(λ − 2μ) / max(1, max|λ − 2μ|)`.
    pub lambda_minus_2mu_spread: f64,
    pub mu_fit: MuFit,
    /// `max |μ' − 2(λ − μ)G'/G| / max(1, max|μ'|)`, with `μ'` by a five-point
    /// stencil. Equivalent to `μ'/(2(λ − μ)) = G'/G` where `G > 0`, and stays
    /// well conditioned where both sides vanish at a nut.
    pub mean_curvature_residual: f64,
    /// Nodes left out of the mean-curvature check because the rounding floor
    /// of the stencil there exceeds a tenth of the tolerance.
    pub mean_curvature_excluded: usize,
    pub tau_nonconstant: bool,
    pub tau_range: [f64; 2],
    pub eigen_difference_spread: f64,
    pub endpoint_spectra: Option<[RicciSpectrum; 2]>,
    pub nodes: usize,
    pub tolerance: f64,
    pub passed: bool,
}

fn interior_range(grid: &ProfileGrid) -> std::ops::RangeInclusive<usize> {
    let n = grid.len().saturating_sub(1);
    ENDPOINT_MARGIN..=n.saturating_sub(ENDPOINT_MARGIN)
}

fn scaled_spread(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi, peak) = values.fold((f64::INFINITY, f64::NEG_INFINITY, 0.0f64), |(lo, hi, peak), v| {
        (lo.min(v), hi.max(v), peak.max(v.abs()))
    });
    if lo > hi {
        return f64::NAN;
    }
    (hi - lo) / peak.max(1.0)
}

fn fit_mu(g2: &[f64], mu: &[f64]) -> MuFit {
    let m = g2.len() as f64;
    let (sx, sy) = (g2.iter().sum::<f64>(), mu.iter().sum::<f64>());
    let (mx, my) = (sx / m, sy / m);
    // centred normal equations
    let sxx: f64 = g2.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = g2.iter().zip(mu).map(|(x, y)| (x - mx) * (y - my)).sum();
    let c = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let d = my - c * mx;
    let peak = mu.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let max_residual = g2
        .iter()
        .zip(mu)
        .map(|(x, y)| (y - c * x - d).abs())
        .fold(0.0, f64::max)
        / peak;
    MuFit { c, d, max_residual }
}

/// Sum of the magnitudes of the terms of `λ₂`, which bounds its rounding.
fn lambda2_magnitude(st: &ProfileState, s: f64, k: f64) -> f64 {
    (st.ddg / st.g).abs()
        + (st.df * st.dg / (st.f * st.g)).abs()
        + (st.dg / st.g).powi(2)
        + 2.0 * s * s * st.f * st.f / st.g.powi(4)
        + k.abs() / (st.g * st.g)
}

struct MeanCurvature {
    residual: f64,
    excluded: usize,
}

fn mean_curvature_check(
    grid: &ProfileGrid,
    spectra: &[Option<RicciSpectrum>],
    interior: &[(usize, RicciSpectrum)],
    tolerance: f64,
) -> MeanCurvature {
    let h = grid.spacing();
    let stencil = |i: usize| -> Option<[f64; 4]> {
        let mut out = [0.0; 4];
        for (slot, j) in out.iter_mut().zip([i - 2, i - 1, i + 1, i + 2]) {
            *slot = spectra.get(j).copied().flatten()?.lambda2;
        }
        Some(out)
    };
    let mut rows = Vec::with_capacity(interior.len());
    for &(i, sp) in interior {
        let Some(nb) = stencil(i) else {
            return MeanCurvature {
                residual: f64::NAN,
                excluded: 0,
            };
        };
        let dmu = (nb[0] - 8.0 * nb[1] + 8.0 * nb[2] - nb[3]) / (12.0 * h);
        let r = (dmu - 2.0 * (sp.lambda0 - sp.lambda2) * grid.dg[i] / grid.g[i]).abs();
        let magnitude = (i - 2..=i + 2)
            .map(|j| lambda2_magnitude(&grid.state(j), grid.s, grid.curvature))
            .fold(0.0, f64::max);
        let floor = 1.5 * 8.0 * f64::EPSILON * magnitude / h;
        rows.push((dmu, r, floor));
    }
    let scale = rows.iter().fold(1.0f64, |acc, row| acc.max(row.0.abs()));
    let mut residual: f64 = 0.0;
    let mut excluded = 0;
    for (_, r, floor) in rows {
        if floor > 0.1 * tolerance * scale {
            excluded += 1;
        } else if r.is_nan() {
            residual = f64::NAN;
        } else {
            residual = residual.max(r / scale);
        }
    }
    MeanCurvature { residual, excluded }
}

/// Spread of `(λ − μ)/G²` over the interior nodes.
pub fn eigen_difference_law(grid: &ProfileGrid) -> f64 {
    let spectra = node_spectra(grid);
    scaled_spread(interior_range(grid).filter_map(|i| {
        let sp = spectra[i]?;
        Some((sp.lambda0 - sp.lambda2) / grid.g[i].powi(2))
    }))
}

pub fn ac_report(grid: &ProfileGrid, tolerance: f64) -> ACReport {
    let spectra = node_spectra(grid);
    let range = interior_range(grid);
    let interior: Vec<(usize, RicciSpectrum)> =
        range.clone().filter_map(|i| spectra[i].map(|sp| (i, sp))).collect();
    let complete = interior.len() == range.clone().count() && !interior.is_empty();

    let max_lambda01_gap = interior
        .iter()
        .map(|(_, sp)| (sp.lambda0 - sp.lambda1).abs() / sp.lambda0.abs().max(1.0))
        .fold(0.0, f64::max);
    let lambda_minus_2mu_spread = scaled_spread(interior.iter().map(|(_, sp)| sp.lambda0 - 2.0 * sp.lambda2));
    let g2: Vec<f64> = interior.iter().map(|(i, _)| grid.g[*i].powi(2)).collect();
    let mu: Vec<f64> = interior.iter().map(|(_, sp)| sp.lambda2).collect();
    let mu_fit = fit_mu(&g2, &mu);

    let mean = mean_curvature_check(grid, &spectra, &interior, tolerance);
    let mean_curvature_residual = mean.residual;

    let tau_lo = interior.iter().map(|(_, sp)| sp.tau).fold(f64::INFINITY, f64::min);
    let tau_hi = interior.iter().map(|(_, sp)| sp.tau).fold(f64::NEG_INFINITY, f64::max);
    let tau_scale = tau_lo.abs().max(tau_hi.abs()).max(1.0);
    let tau_nonconstant = tau_hi - tau_lo > 10.0 * tolerance * tau_scale;

    let residuals = [
        max_lambda01_gap,
        lambda_minus_2mu_spread,
        mu_fit.max_residual,
        mean_curvature_residual,
    ];
    let coverage = 4 * mean.excluded <= interior.len();
    let passed = complete && coverage && residuals.iter().all(|r| *r < tolerance) && tau_nonconstant;
    ACReport {
        max_lambda01_gap,
        lambda_minus_2mu_spread,
        mu_fit,
        mean_curvature_residual,
        mean_curvature_excluded: mean.excluded,
        tau_nonconstant,
        tau_range: [tau_lo, tau_hi],
        eigen_difference_spread: eigen_difference_law(grid),
        endpoint_spectra: endpoint_spectra(grid),
        nodes: interior.len(),
        tolerance,
        passed,
    }
}

/// Normalized `(C, D)` recovered from a μ-fit: `μ = (D/σs⁴)·G² − C/s²`.
pub fn fitted_cd(fit: &MuFit, s: f64, sigma: f64) -> (f64, f64) {
    (-fit.d * s * s, sigma * fit.c * s.powi(4))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{cp2_family, genus_family};
    use crate::ode::{synthesize_profile, DEFAULT_SAMPLES};
    use approx::assert_abs_diff_eq;

    fn constant_grid(s: f64, k: f64) -> ProfileGrid {
        let states: Vec<ProfileState> = (0..=64)
            .map(|i| ProfileState {
                t: i as f64 / 64.0,
                h: 0.0,
                f: 1.0,
                g: 1.0,
                df: 0.0,
                ddf: 0.0,
                dg: 0.0,
                ddg: 0.0,
            })
            .collect();
        ProfileGrid::from_states(&states, s, k)
    }

    #[test]
    fn round_sphere_calibration_values() {
        let sp = ricci_closed_form(1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 4.0).unwrap();
        assert_eq!((sp.lambda0, sp.lambda1, sp.lambda2, sp.tau), (0.0, 2.0, 2.0, 6.0));
        let flat = ricci_closed_form(1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(flat.tau, 0.0);
        let hyp = ricci_closed_form(1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -4.0).unwrap();
        assert_eq!((hyp.lambda2, hyp.tau), (-4.0, -8.0));
    }

    #[test]
    fn degenerate_radii_are_rejected() {
        assert!(matches!(
            ricci_closed_form(0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0),
            Err(CurvatureError::DegenerateFiber(_))
        ));
        assert!(matches!(
            ricci_closed_form(1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0),
            Err(CurvatureError::DegenerateBase(_))
        ));
    }

    #[test]
    fn scaling_divides_eigenvalues() {
        let (f, df, ddf, g, dg, ddg, s, k) = (0.8, 0.3, -0.2, 1.3, -0.1, 0.4, 1.5, 4.0);
        let base = ricci_closed_form(f, df, ddf, g, dg, ddg, s, k).unwrap();
        // c²·metric: F, G and t scale by c, θ and the base metric are unchanged
        let c = 2.0;
        let scaled = ricci_closed_form(c * f, df, ddf / c, c * g, dg, ddg / c, s, k).unwrap();
        assert_abs_diff_eq!(scaled.lambda0, base.lambda0 / (c * c), epsilon = 1e-14);
        assert_abs_diff_eq!(scaled.lambda1, base.lambda1 / (c * c), epsilon = 1e-14);
        assert_abs_diff_eq!(scaled.lambda2, base.lambda2 / (c * c), epsilon = 1e-14);
    }

    #[test]
    fn constant_profile_fails_tau_nonconstant() {
        let report = ac_report(&constant_grid(1.0, 4.0), AC_TOL);
        assert!(!report.tau_nonconstant);
        assert!(!report.passed);
        assert_eq!(report.tau_range, [6.0, 6.0]);
    }

    #[test]
    fn flat_product_has_zero_difference_law() {
        assert_eq!(eigen_difference_law(&constant_grid(0.0, 0.0)), 0.0);
    }

    #[test]
    fn genus_family_passes() {
        let spec = genus_family(2, 1, 0.5).unwrap();
        let grid = synthesize_profile(&spec, DEFAULT_SAMPLES).unwrap();
        let report = ac_report(&grid, AC_TOL);
        assert!(report.passed, "{report:#?}");
        assert_eq!(report.mean_curvature_excluded, 0);
        assert!(report.eigen_difference_spread < 1e-6);
    }

    #[test]
    fn cp2_family_passes_and_recovers_coefficients() {
        let spec = cp2_family(0.5, 1).unwrap();
        let grid = synthesize_profile(&spec, DEFAULT_SAMPLES).unwrap();
        let report = ac_report(&grid, AC_TOL);
        assert!(report.passed, "{report:#?}");
        let (c, d) = fitted_cd(&report.mu_fit, spec.s, spec.branch_sign());
        assert_abs_diff_eq!(c, spec.c, epsilon = 1e-6);
        assert_abs_diff_eq!(d, spec.d, epsilon = 1e-6);
    }

    #[test]
    fn perturbed_fiber_breaks_difference_law() {
        let spec = genus_family(2, 1, 0.5).unwrap();
        let mut grid = synthesize_profile(&spec, 512).unwrap();
        for i in 0..grid.len() {
            let noise = (17.0 * grid.t[i]).sin();
            grid.f[i] *= 1.0 + 0.01 * noise;
        }
        assert!(eigen_difference_law(&grid) > 1e-3);
        assert!(!ac_report(&grid, AC_TOL).passed);
    }

    #[test]
    fn endpoint_extrapolation_is_finite_and_symmetric() {
        let spec = genus_family(2, 1, 0.5).unwrap();
        let grid = synthesize_profile(&spec, DEFAULT_SAMPLES).unwrap();
        let [left, right] = endpoint_spectra(&grid).unwrap();
        assert_abs_diff_eq!(left.tau, right.tau, epsilon = 1e-6);
        assert_abs_diff_eq!(left.lambda0, left.lambda1, epsilon = 1e-5);
    }
}
