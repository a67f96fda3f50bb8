//! End-to-end check of one family member: synthesis, closure at the ends,
//! the Gray conditions, and recovery of the defining constants.

use serde::{Deserialize, Serialize};

use crate::curvature::{ac_report, fitted_cd, ACReport};
use crate::families::FamilySpec;
use crate::ode::{boundary_report, fit_profile_coefficients, BoundaryReport, Profile, ProfileError, ProfileGrid};

/// Tolerance for recovered `(C, D, E)`, relative to `max(1, |value|)`.
pub const COEFFICIENT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientCheck {
    /// `(C, D, E)` stored in the spec.
    pub closed_form: [f64; 3],
    /// `(C, D)` from the least-squares fit `μ ≈ c·G² + d`.
    pub from_mu_fit: [f64; 2],
    /// `(C, D, E)` from fitting `F²(1 − (H/s)²)` against the polynomial basis.
    pub from_profile: [f64; 3],
    pub max_error: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyVerification {
    pub spec: FamilySpec,
    pub samples: usize,
    pub length: f64,
    pub boundary: BoundaryReport,
    pub ac: ACReport,
    pub coefficients: CoefficientCheck,
    pub passed: bool,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

pub fn coefficient_check(spec: &FamilySpec, grid: &ProfileGrid, ac: &ACReport) -> CoefficientCheck {
    let (mu_c, mu_d) = fitted_cd(&ac.mu_fit, spec.s, spec.branch_sign());
    let (pc, pd, pe) = fit_profile_coefficients(grid, spec.eps);
    let closed = [spec.c, spec.d, spec.e];
    let max_error = [
        rel(mu_c, spec.c),
        rel(mu_d, spec.d),
        rel(pc, spec.c),
        rel(pd, spec.d),
        rel(pe, spec.e),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    CoefficientCheck {
        closed_form: closed,
        from_mu_fit: [mu_c, mu_d],
        from_profile: [pc, pd, pe],
        max_error,
        passed: max_error < COEFFICIENT_TOL,
    }
}

/// Synthesizes `spec` on `samples` intervals and runs every grid-level check
/// with tolerance `tol`. The grid is returned for export.
pub fn verify_family(
    spec: &FamilySpec,
    samples: usize,
    tol: f64,
) -> Result<(FamilyVerification, ProfileGrid), ProfileError> {
    let profile = Profile::from_spec(spec)?;
    let grid = profile.grid(samples)?;
    let boundary = boundary_report(&grid, tol);
    let ac = ac_report(&grid, tol);
    let coefficients = coefficient_check(spec, &grid, &ac);
    let passed = boundary.passed && ac.passed && coefficients.passed;
    Ok((
        FamilyVerification {
            spec: spec.clone(),
            samples,
            length: profile.length(),
            boundary,
            ac,
            coefficients,
            passed,
        },
        grid,
    ))
}
