//! Polynomial solution families for the profile function `z`.
//!
//! The metric `dt² + F²θ² + G²·g_can` over a surface of curvature `K` is
//! described through an auxiliary function `H` with `F = H'` and
//! `G² = |s² − H²|`. Writing `H' = sqrt(z(H))`, the Gray condition becomes a
//! first-order linear ODE for `z` whose solutions are
//!
//! ```text
//! z(h) = z0(h/s),   z0(t) = P(t) / (1 − t²),
//! P(t) = −4ε t² − D/5 t⁶ + (D − C/3) t⁴ + (2C − 3D) t² + E t − 4ε + C − D
//! ```
//!
//! in normalized constants `(C, D, E)`. Smooth closure at the ends of the
//! `H`-interval fixes the constants. All constants stored in [`FamilySpec`]
//! are the normalized ones; the raw ODE constants are `C/s²`, `D/s⁴`.
//!
//! Sign convention: `eps` is always `sgn(K·A)`, the sign entering the ODE. The
//! CP² families are conventionally labelled by the opposite sign (the label
//! is `+1` for the family with `H ∈ (x, 1)`); [`FamilySpec::cp2_label`]
//! recovers it.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{certify_positive, real_roots, Polynomial, PolyError, DEFAULT_ROOT_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("singular denominator in {formula} at x = {x}")]
    SingularDenominator { formula: &'static str, x: f64 },
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error(
        "x = {x} lies outside (eta, 1) with eta = {eta:.10}: Q_x is not positive on the profile interval (witness t = {witness})"
    )]
    EtaBoundary { x: f64, eta: f64, witness: f64 },
    #[error("P is not positive on (-{x}, {x}) (witness t = {witness}); this contradicts the genus-family construction")]
    PositivityFailure { x: f64, witness: f64 },
    #[error("genus 0 is not a genus family; use cp2_family (Hirzebruch families are not constructed)")]
    GenusZero,
    #[error("pole of z at h = {0}")]
    Pole(f64),
    #[error("h = {0} is outside the domain of the ODE")]
    Domain(f64),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    GenusFamily,
    Cp2Family,
    Custom,
}

/// Full parameter record of a constructed family member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub genus: u32,
    /// Degree of the circle bundle.
    pub k: i64,
    /// Euler characteristic `2 − 2·genus` of the base.
    pub chi: i64,
    pub s: f64,
    /// Sectional curvature of the base surface.
    pub curvature: f64,
    /// Sign `A` in `H² = s² + A·G²`.
    pub a_sign: i8,
    /// `sgn(K·A)`, the sign in the profile ODE.
    pub eps: i8,
    pub x: f64,
    pub y: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub p: Polynomial,
    pub case_tag: CaseTag,
}

impl FamilySpec {
    /// `σ` with `G² = σ·(s² − H²)`; equals `−A`.
    pub fn branch_sign(&self) -> f64 {
        -f64::from(self.a_sign)
    }

    /// Sign labelling a CP² family (`+1` for `H ∈ (x, 1)`, `−1` for `H ∈ (1, x)`).
    pub fn cp2_label(&self) -> i8 {
        -self.eps
    }

    /// Ends of the `H`-interval on which `z > 0`.
    pub fn h_interval(&self) -> (f64, f64) {
        match self.case_tag {
            CaseTag::Cp2Family => (self.x.min(1.0), self.x.max(1.0)),
            _ => {
                let (a, b) = (self.s * self.y, self.s * self.x);
                (a.min(b), a.max(b))
            }
        }
    }

    /// `z(h) = num(h) / den(h)` as a pair of polynomials in `h`.
    pub fn z_rational(&self) -> (Polynomial, Polynomial) {
        let num = self.p.rescale_argument(self.s);
        let den = Polynomial::new(vec![1.0, 0.0, -1.0 / (self.s * self.s)]);
        (num, den)
    }

    /// Raw (un-normalized) ODE constants `(C/s², D/s⁴)`.
    pub fn raw_cd(&self) -> (f64, f64) {
        (self.c / self.s.powi(2), self.d / self.s.powi(4))
    }
}

fn guard(value: f64, formula: &'static str, x: f64) -> Result<f64, FamilyError> {
    if value.abs() < 1e-12 || !value.is_finite() {
        Err(FamilyError::SingularDenominator { formula, x })
    } else {
        Ok(value)
    }
}

/// Normalized `(C, D)` making `x` a root of `P` with `z0'(x) = −2s`.
pub fn coeffs_cd(x: f64, e: f64, s: f64, eps: i8) -> Result<(f64, f64), FamilyError> {
    let ep = f64::from(eps);
    let (x2, x3, x4) = (x * x, x * x * x, x.powi(4));
    let base = guard(2.0 * (x - 1.0) * x * (1.0 + x), "coeffs_cd", x)?;
    let quartic = guard(15.0 + 10.0 * x2 - x4, "coeffs_cd", x)?;
    let d = 5.0
        * (-3.0 * e - 6.0 * s - 24.0 * ep * x + 3.0 * e * x2 - 12.0 * s * x2 - 8.0 * ep * x3
            + 2.0 * s * x4)
        / (base * quartic);
    let c = 3.0
        * (5.0 * e + 10.0 * s + 80.0 * ep * x + 30.0 * s * x2 - 10.0 * e * x2 + 5.0 * e * x4
            - 10.0 * s * x4
            - 16.0 * ep * x.powi(5)
            + 2.0 * s * x.powi(6))
        / (base * -quartic);
    Ok((c, d))
}

/// Solves the tangency system `P(x) = 0`, `z0'(x) = slope` for `(C, D)` by
/// direct linear elimination. With `slope = −2s` this reproduces
/// [`coeffs_cd`]; other slopes produce deliberately mis-closed profiles.
pub fn solve_tangency(x: f64, e: f64, eps: i8, slope: f64) -> Result<(f64, f64), FamilyError> {
    let ep = f64::from(eps);
    // P(t) = C·pc(t) + D·pd(t) + r(t)
    let pc = Polynomial::new(vec![1.0, 0.0, 2.0, 0.0, -1.0 / 3.0]);
    let pd = Polynomial::new(vec![-1.0, 0.0, -3.0, 0.0, 1.0, 0.0, -0.2]);
    let r = Polynomial::new(vec![-4.0 * ep, e, -4.0 * ep]);
    let (dpc, dpd, dr) = (pc.derivative(), pd.derivative(), r.derivative());
    let (a11, a12, b1) = (pc.eval(x), pd.eval(x), -r.eval(x));
    let (a21, a22, b2) = (dpc.eval(x), dpd.eval(x), slope * (1.0 - x * x) - dr.eval(x));
    let det = guard(a11 * a22 - a12 * a21, "solve_tangency", x)?;
    Ok(((b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det))
}

/// `P(t)` in normalized constants.
pub fn build_p(c: f64, d: f64, e: f64, eps: i8) -> Polynomial {
    let ep = f64::from(eps);
    Polynomial::new(vec![
        -4.0 * ep + c - d,
        e,
        -4.0 * ep + 2.0 * c - 3.0 * d,
        0.0,
        d - c / 3.0,
        0.0,
        -d / 5.0,
    ])
}

/// Factored form of `P` for the symmetric two-ended family (`y = −x`, `E = 0`).
pub fn build_p_symmetric(x: f64, s: f64, eps: i8) -> Result<Polynomial, FamilyError> {
    if !(x > 0.0 && x < 1.0) {
        return Err(FamilyError::OutOfRange(format!("symmetric family needs x in (0, 1), got {x}")));
    }
    let ep = f64::from(eps);
    let (x2, x4, x6) = (x * x, x.powi(4), x.powi(6));
    let denom = guard(x * (15.0 - 5.0 * x2 - 11.0 * x4 + x6), "build_p_symmetric", x)?;
    // s-part and ε-part, both even polynomials in t
    let s_part = Polynomial::new(vec![
        -15.0 + 10.0 * x2 - 3.0 * x4,
        0.0,
        10.0 + 12.0 * x2 - 6.0 * x4,
        0.0,
        -3.0 - 6.0 * x2 + x4,
    ])
    .scale(s);
    let eps_part = Polynomial::new(vec![x2 * (-5.0 + x2), 0.0, 5.0 + 2.0 * x2 + x4, 0.0, -(3.0 + x2)])
        .scale(4.0 * ep * x);
    let root_pair = Polynomial::new(vec![-x2, 0.0, 1.0]);
    Ok((&root_pair * &(&s_part + &eps_part)).scale(1.0 / denom))
}

/// `z0(t) = P(t) / (1 − t²)`, with the removable case `P(±1) = 0` taken as a
/// limit.
pub fn z0_eval(p: &Polynomial, t: f64) -> Result<f64, FamilyError> {
    let w = 1.0 - t * t;
    if w.abs() > 1e-12 {
        return Ok(p.eval(t) / w);
    }
    let r = t.signum();
    if p.eval(r).abs() > p.eval_error_bound(r).max(1e-12) {
        return Err(FamilyError::Pole(t));
    }
    // P = (t − r)·Q, 1 − t² = −(t − r)(t + r)
    let (q, _) = p.divide_linear(r);
    Ok(-q.eval(t) / (t + r))
}

/// `z(h) = z0(h / s)`.
pub fn z_eval(p: &Polynomial, s: f64, h: f64) -> Result<f64, FamilyError> {
    z0_eval(p, h / s).map_err(|err| match err {
        FamilyError::Pole(_) => FamilyError::Pole(h),
        other => other,
    })
}

/// `z0'(t)` by the quotient rule.
pub fn z0_derivative(p: &Polynomial, t: f64) -> Result<f64, FamilyError> {
    let w = 1.0 - t * t;
    if w.abs() < 1e-12 {
        return Err(FamilyError::Pole(t));
    }
    Ok((p.derivative().eval(t) * w + 2.0 * t * p.eval(t)) / (w * w))
}

/// Left side minus right side of the profile ODE
/// `z' − z(s²+h²)/(h(s²−h²)) = 4ε/h + D(s²−h²)²/h − C(s²−h²)/h`
/// in raw constants.
///
/// The `E`-term of `z` is a solution of the homogeneous equation, so the
/// residual vanishes for any `E`.
pub fn ode35_residual(spec: &FamilySpec, h: f64) -> Result<f64, FamilyError> {
    let s = spec.s;
    if h == 0.0 || (h.abs() - s).abs() < 1e-12 {
        return Err(FamilyError::Domain(h));
    }
    let z = z_eval(&spec.p, s, h)?;
    let dz = z0_derivative(&spec.p, h / s)? / s;
    let (c, d) = spec.raw_cd();
    let w = s * s - h * h;
    let lhs = dz - z * (s * s + h * h) / (h * w);
    let rhs = 4.0 * f64::from(spec.eps) / h + d * w * w / h - c * w / h;
    Ok(lhs - rhs)
}

/// The polynomial whose vanishing is necessary for a two-sided boundary
/// solution with roots `x > y`.
pub fn compatibility_residual(x: f64, y: f64, s: f64, eps: i8) -> f64 {
    let ep = f64::from(eps);
    let eps_part = -5.0 * x + x.powi(3) + 5.0 * y + 2.0 * x * x * y - 2.0 * x * y * y - y.powi(3);
    let s_part = 5.0 + 2.0 * x.powi(3) * y + 2.0 * x * y.powi(3) + 3.0 * y * y + 3.0 * x * x
        + x * x * y * y
        - 16.0 * x * y;
    (x + y) * (-4.0 * ep * eps_part + s * s_part)
}

/// Two-sphere-ended family on the ruled surface of the given genus and bundle
/// degree.
pub fn genus_family(genus: u32, k: i64, x: f64) -> Result<FamilySpec, FamilyError> {
    if genus == 0 {
        return Err(FamilyError::GenusZero);
    }
    if k < 1 {
        return Err(FamilyError::OutOfRange(format!("bundle degree k must be >= 1, got {k}")));
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(FamilyError::OutOfRange(format!("genus family needs x in (0, 1), got {x}")));
    }
    let chi = 2 - 2 * i64::from(genus);
    let (s, curvature, eps) = if genus == 1 {
        (k as f64, 0.0, 0)
    } else {
        (2.0 * k as f64 / chi.unsigned_abs() as f64, -4.0, 1)
    };
    let (c, d) = coeffs_cd(x, 0.0, s, eps)?;
    let p = build_p_symmetric(x, s, eps)?;
    let cert = certify_positive(&p, -x, x)?;
    if !cert.positive {
        return Err(FamilyError::PositivityFailure {
            x,
            witness: cert.witness.unwrap_or(0.0),
        });
    }
    Ok(FamilySpec {
        genus,
        k,
        chi,
        s,
        curvature,
        a_sign: -1,
        eps,
        x,
        y: -x,
        c,
        d,
        e: 0.0,
        p,
        case_tag: CaseTag::GenusFamily,
    })
}

/// `S(x) = x³ + 5x² + 75x + 59`.
pub fn eta_polynomial() -> Polynomial {
    Polynomial::new(vec![59.0, 75.0, 5.0, 1.0])
}

/// The unique real root of [`eta_polynomial`], the lower edge of the CP²
/// parameter range.
pub fn eta() -> f64 {
    static ETA: OnceLock<f64> = OnceLock::new();
    *ETA.get_or_init(|| {
        let roots = real_roots(&eta_polynomial(), -1.0, 0.0, DEFAULT_ROOT_TOL)
            .expect("S is a nonzero cubic");
        roots[0]
    })
}

/// `Q_x(t) = t³ + (2+x)t² + (5+6x)t + 8 + 13x + 4x²`.
pub fn q_polynomial(x: f64) -> Polynomial {
    Polynomial::new(vec![8.0 + 13.0 * x + 4.0 * x * x, 5.0 + 6.0 * x, 2.0 + x, 1.0])
}

/// Closed-form CP² constants `(C, D, E)` for parameter `x` and family label.
pub fn cp2_coefficients(x: f64, label: i8) -> Result<(f64, f64, f64), FamilyError> {
    let l = f64::from(label);
    let denom_d = guard(4.0 + x - 4.0 * x * x - x.powi(3), "cp2 D", x)?;
    let denom_c = guard((x - 1.0) * (1.0 + x) * (4.0 + x), "cp2 C", x)?;
    let d = -5.0 * l / denom_d;
    let c = 3.0 * l * (7.0 + 4.0 * x - x * x) / denom_c;
    let e = -8.0 / 15.0 * (5.0 * c - 6.0 * d + 15.0 * l);
    Ok((c, d, e))
}

/// One-parameter family on CP² with a bolt at `H = x` and a nut at `H = 1`.
///
/// `label = 1` requires `x ∈ (η, 1)`, `label = −1` requires `x > 1`.
pub fn cp2_family(x: f64, label: i8) -> Result<FamilySpec, FamilyError> {
    let (lo, hi) = match label {
        1 if x > -1.0 && x < 1.0 => (x, 1.0),
        -1 if x > 1.0 && x.is_finite() => (1.0, x),
        1 => return Err(FamilyError::OutOfRange(format!("label +1 needs x in (-1, 1), got {x}"))),
        -1 => return Err(FamilyError::OutOfRange(format!("label -1 needs x > 1, got {x}"))),
        _ => return Err(FamilyError::OutOfRange(format!("label must be +1 or -1, got {label}"))),
    };
    let cert = certify_positive(&q_polynomial(x), lo, hi)?;
    if !cert.positive {
        return Err(FamilyError::EtaBoundary {
            x,
            eta: eta(),
            witness: cert.witness.unwrap_or(lo),
        });
    }
    let (c, d, e) = cp2_coefficients(x, label)?;
    let eps = -label;
    Ok(FamilySpec {
        genus: 0,
        k: 1,
        chi: 2,
        s: 1.0,
        curvature: 4.0,
        a_sign: -label,
        eps,
        x,
        y: 1.0,
        c,
        d,
        e,
        p: build_p(c, d, e, eps),
        case_tag: CaseTag::Cp2Family,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductCase {
    /// `CP¹ × Σ_g` with `g > 1`.
    GenusGt1,
    /// `CP¹ × T²`.
    Torus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub alpha: f64,
    /// Closed form as printed alongside the nonexistence argument.
    pub x_printed: f64,
    /// Closed form re-derived from the four closure equations.
    pub x_derived: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonexistenceReport {
    pub case_tag: ProductCase,
    pub grid: String,
    pub points_scanned: usize,
    /// Largest value of the scanned quantity; negative means no admissible root.
    pub worst_residual: f64,
    pub found_solution: bool,
    pub detail: Vec<ScanPoint>,
    pub factor_polynomial: Option<Polynomial>,
    pub factor_roots_above_one: Vec<f64>,
    pub verdict: String,
}

/// Number of α samples in the `CP¹ × Σ_g` scan.
pub const ALPHA_GRID_POINTS: usize = 100_000;
const DETAIL_STRIDE: usize = 1_000;

/// `x(α)` as printed: `−4(α−1)(α²+3α+1) / (α(α²+α+2))`.
pub fn product_x_printed(alpha: f64) -> f64 {
    -4.0 * (alpha - 1.0) * (alpha * alpha + 3.0 * alpha + 1.0) / (alpha * (alpha * alpha + alpha + 2.0))
}

/// `x(α)` obtained by eliminating `(C, D, E)` from `z(x)=0, z'(x)=2,
/// z(αx)=0, z'(αx)=−2` for `z = −4 + D h⁴ + C h² + E/h`.
pub fn product_x_derived(alpha: f64) -> f64 {
    -4.0 * (alpha - 1.0) * (alpha * alpha + 3.0 * alpha + 1.0)
        / (alpha * (2.0 * alpha * alpha + alpha + 2.0))
}

/// `(α+1)(α−1)³(2α²+α+2)`.
pub fn torus_factor_polynomial() -> Polynomial {
    let a_plus = Polynomial::new(vec![1.0, 1.0]);
    let a_minus = Polynomial::new(vec![-1.0, 1.0]);
    let quad = Polynomial::new(vec![2.0, 1.0, 2.0]);
    let cube = &(&a_minus * &a_minus) * &a_minus;
    &(&a_plus * &cube) * &quad
}

/// Scans for two-ended solutions on the trivial ruled surfaces.
pub fn trivial_ruled_nonexistence(case: ProductCase) -> NonexistenceReport {
    match case {
        ProductCase::GenusGt1 => {
            let (lo, hi) = (1.0, 100.0);
            let step = (hi - lo) / ALPHA_GRID_POINTS as f64;
            let mut worst = f64::NEG_INFINITY;
            let mut detail = Vec::new();
            for i in 1..=ALPHA_GRID_POINTS {
                let alpha = lo + step * i as f64;
                let point = ScanPoint {
                    alpha,
                    x_printed: product_x_printed(alpha),
                    x_derived: product_x_derived(alpha),
                };
                worst = worst.max(point.x_printed).max(point.x_derived);
                if i % DETAIL_STRIDE == 0 || i == 1 {
                    detail.push(point);
                }
            }
            let found = worst >= 0.0;
            NonexistenceReport {
                case_tag: case,
                grid: format!("alpha = y/x on (1, 100], {ALPHA_GRID_POINTS} uniform points"),
                points_scanned: ALPHA_GRID_POINTS,
                worst_residual: worst,
                found_solution: found,
                detail,
                factor_polynomial: None,
                factor_roots_above_one: Vec::new(),
                verdict: if found {
                    "x(alpha) >= 0 somewhere: admissible two-ended solution found".into()
                } else {
                    "x(alpha) < 0 for every alpha > 1 scanned: no solution with 0 < x < y".into()
                },
            }
        }
        ProductCase::Torus => {
            let poly = torus_factor_polynomial();
            let roots = real_roots(&poly, 1.0 + 1e-9, 100.0, DEFAULT_ROOT_TOL)
                .expect("factor polynomial is nonzero");
            // No root above 100 either: every coefficient of p(1 + u) is positive.
            let shifted_positive = shift_argument(&poly, 1.0).coeffs().iter().all(|&c| c >= 0.0);
            let found = !roots.is_empty() || !shifted_positive;
            NonexistenceReport {
                case_tag: case,
                grid: "real roots of the factor polynomial on (1, 100]; Taylor shift at 1 for the tail".into(),
                points_scanned: 0,
                worst_residual: roots.first().copied().unwrap_or(f64::NEG_INFINITY),
                found_solution: found,
                detail: Vec::new(),
                factor_polynomial: Some(poly),
                factor_roots_above_one: roots,
                verdict: if found {
                    "factor polynomial has a root alpha > 1".into()
                } else {
                    "(alpha+1)(alpha-1)^3(2alpha^2+alpha+2) has no root alpha > 1".into()
                },
            }
        }
    }
}

/// Coefficients of `p(t + shift)`.
fn shift_argument(p: &Polynomial, shift: f64) -> Polynomial {
    let lin = Polynomial::new(vec![shift, 1.0]);
    p.coeffs()
        .iter()
        .rev()
        .fold(Polynomial::zero(), |acc, &c| &(&acc * &lin) + &Polynomial::constant(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn coeffs_cd_example_and_tangency() {
        let (c, d) = coeffs_cd(0.5, 0.0, 1.0, 1).unwrap();
        assert_abs_diff_eq!(d, 8.363201911589009, epsilon = 1e-12);
        assert_abs_diff_eq!(c, 12.939068100358423, epsilon = 1e-12);
        let p = build_p(c, d, 0.0, 1);
        assert!(p.eval(0.5).abs() < 1e-12);
        assert_abs_diff_eq!(z0_derivative(&p, 0.5).unwrap(), -2.0, epsilon = 1e-10);
    }

    #[test]
    fn coeffs_cd_matches_linear_elimination() {
        for &(x, e, s, eps) in &[(0.5, 0.0, 1.0, 1), (0.3, 0.7, 2.0, 0), (-0.6, -1.1, 0.5, -1), (2.5, 0.2, 1.0, 1)] {
            let closed = coeffs_cd(x, e, s, eps).unwrap();
            let solved = solve_tangency(x, e, eps, -2.0 * s).unwrap();
            assert_abs_diff_eq!(closed.0, solved.0, epsilon = 1e-9 * closed.0.abs().max(1.0));
            assert_abs_diff_eq!(closed.1, solved.1, epsilon = 1e-9 * closed.1.abs().max(1.0));
        }
    }

    #[test]
    fn reflecting_x_flips_the_slope_sign() {
        // With E = 0 the s-part of (C, D) is odd in x and the ε-part is even,
        // so x → −x is the same as s → −s.
        for i in 0..100 {
            let x = 0.05 + 0.009 * i as f64;
            for eps in [0, 1] {
                let (c1, d1) = coeffs_cd(-x, 0.0, 1.3, eps).unwrap();
                let (c2, d2) = coeffs_cd(x, 0.0, -1.3, eps).unwrap();
                assert_abs_diff_eq!(c1, c2, epsilon = 1e-10 * c1.abs().max(1.0));
                assert_abs_diff_eq!(d1, d2, epsilon = 1e-10 * d1.abs().max(1.0));
            }
            let (c1, d1) = coeffs_cd(-x, 0.0, 0.0, 1).unwrap();
            let (c2, d2) = coeffs_cd(x, 0.0, 0.0, 1).unwrap();
            assert_abs_diff_eq!(c1, c2, epsilon = 1e-10 * c1.abs().max(1.0));
            assert_abs_diff_eq!(d1, d2, epsilon = 1e-10 * d1.abs().max(1.0));
        }
    }

    #[test]
    fn coeffs_cd_rejects_singular_points() {
        for x in [0.0, 1.0, -1.0] {
            assert!(matches!(coeffs_cd(x, 0.0, 1.0, 1), Err(FamilyError::SingularDenominator { .. })));
        }
    }

    #[test]
    fn build_p_examples() {
        assert_eq!(build_p(0.0, 0.0, 0.0, 1), Polynomial::new(vec![-4.0, 0.0, -4.0]));
        assert_eq!(build_p(3.0, 0.0, 0.0, 0), Polynomial::new(vec![3.0, 0.0, 6.0, 0.0, -1.0]));
    }

    #[test]
    fn symmetric_form_matches_general_form() {
        for &x in &[0.2, 0.5, 0.8] {
            for &s in &[1.0, 2.0] {
                for eps in [0, 1] {
                    let (c, d) = coeffs_cd(x, 0.0, s, eps).unwrap();
                    let general = build_p(c, d, 0.0, eps);
                    let factored = build_p_symmetric(x, s, eps).unwrap();
                    for i in 0..7 {
                        let a = general.coeffs().get(i).copied().unwrap_or(0.0);
                        let b = factored.coeffs().get(i).copied().unwrap_or(0.0);
                        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
                    }
                    assert!(factored.eval(x).abs() < 1e-12);
                    assert!(factored.eval(-x).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn symmetric_value_at_zero() {
        // Expanded-form evaluation against the constant term of the factored product.
        let (x, s, eps) = (0.5f64, 1.0, 1);
        let p = build_p_symmetric(x, s, eps).unwrap();
        let (x2, x4) = (x * x, x.powi(4));
        let direct = (-x2) * (s * (-15.0 + 10.0 * x2 - 3.0 * x4) + 4.0 * x * x2 * (-5.0 + x2))
            / (x * (15.0 - 5.0 * x2 - 11.0 * x4 + x.powi(6)));
        assert_abs_diff_eq!(p.eval(0.0), direct, epsilon = 1e-14);
        // the displayed closed form carries ε = 1 implicitly
        let displayed = (-4.0 * x4 * (x2 - 5.0) + s * x * (15.0 - 10.0 * x2 + 3.0 * x4))
            / (15.0 - 5.0 * x2 - 11.0 * x4 + x.powi(6));
        assert_abs_diff_eq!(p.eval(0.0), displayed, epsilon = 1e-14);
    }

    #[test]
    fn z_eval_examples() {
        let spec = genus_family(2, 1, 0.5).unwrap();
        assert_eq!(z_eval(&spec.p, spec.s, 0.0).unwrap(), spec.p.eval(0.0));
        assert!(z_eval(&spec.p, spec.s, spec.s * 0.5).unwrap().abs() < 1e-12);
        for t in [-0.9, -0.2, 0.4, 0.7] {
            let lhs = z_eval(&spec.p, 3.0, 3.0 * t).unwrap();
            assert_abs_diff_eq!(lhs, spec.p.eval(t) / (1.0 - t * t), epsilon = 1e-12);
        }
        assert!(matches!(z_eval(&spec.p, 1.0, 1.0), Err(FamilyError::Pole(_))));
    }

    #[test]
    fn z_eval_removable_pole_for_cp2() {
        let spec = cp2_family(0.5, 1).unwrap();
        assert!(z_eval(&spec.p, 1.0, 1.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn ode35_residual_examples() {
        let spec = genus_family(2, 1, 0.5).unwrap();
        for h in [0.1, 0.25, 0.4] {
            assert!(ode35_residual(&spec, h).unwrap().abs() < 1e-9);
        }
        let mut flat = spec.clone();
        flat.c = 0.0;
        flat.d = 0.0;
        flat.e = 0.0;
        flat.eps = 0;
        flat.p = build_p(0.0, 0.0, 0.0, 0);
        assert_eq!(ode35_residual(&flat, 0.3).unwrap(), 0.0);

        // z keeps the original constants; only the ODE sees the shifted C
        let mut off = spec.clone();
        off.c += 0.1;
        assert!(ode35_residual(&off, 0.25).unwrap().abs() > 1e-3);
    }

    #[test]
    fn ode35_residual_vanishes_with_linear_term() {
        let spec = cp2_family(0.5, 1).unwrap();
        for h in [-0.5, 0.3, 0.6, 0.9] {
            assert!(ode35_residual(&spec, h).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn compatibility_examples() {
        for &(x, s, eps) in &[(0.3, 1.0, 1), (0.77, 2.5, 0), (0.1, 0.4, -1)] {
            assert_eq!(compatibility_residual(x, -x, s, eps), 0.0);
        }
        assert_abs_diff_eq!(compatibility_residual(0.5, 0.2, 1.0, 0), 3.0366, epsilon = 1e-12);
        assert_abs_diff_eq!(
            compatibility_residual(0.5, 0.2, 1.7, 0),
            compatibility_residual(0.2, 0.5, 1.7, 0),
            epsilon = 1e-14
        );
    }

    #[test]
    fn genus_family_examples() {
        let spec = genus_family(2, 1, 0.5).unwrap();
        assert_eq!((spec.chi, spec.s, spec.curvature, spec.eps), (-2, 1.0, -4.0, 1));
        assert!(certify_positive(&spec.p, -0.5, 0.5).unwrap().positive);
        assert_eq!(compatibility_residual(spec.x, spec.y, spec.s, spec.eps), 0.0);

        let torus = genus_family(1, 3, 0.5).unwrap();
        assert_eq!((torus.s, torus.curvature, torus.eps), (3.0, 0.0, 0));

        let g3 = genus_family(3, 2, 0.4).unwrap();
        assert_eq!(g3.s, 1.0);

        assert_eq!(genus_family(0, 1, 0.5), Err(FamilyError::GenusZero));
        assert!(genus_family(2, 0, 0.5).is_err());
        assert!(genus_family(2, 1, 1.2).is_err());
    }

    #[test]
    fn genus_family_closes_with_unit_slopes() {
        for &(g, k, x) in &[(1, 1, 0.3), (2, 1, 0.5), (2, 3, 0.8), (5, 2, 0.65)] {
            let spec = genus_family(g, k, x).unwrap();
            assert!(spec.p.eval(x).abs() < 1e-10);
            assert!(spec.p.eval(-x).abs() < 1e-10);
            assert_abs_diff_eq!(z0_derivative(&spec.p, x).unwrap(), -2.0 * spec.s, epsilon = 1e-9);
            assert_abs_diff_eq!(z0_derivative(&spec.p, -x).unwrap(), 2.0 * spec.s, epsilon = 1e-9);
        }
    }

    #[test]
    fn eta_is_the_real_root_of_s() {
        let eta = eta();
        assert!((eta + 0.8245).abs() < 5e-5);
        assert!(eta_polynomial().eval(eta).abs() < 1e-10);
        let cardano = {
            // depressed cubic u³ + pu + q with x = u − 5/3
            let p: f64 = 75.0 - 25.0 / 3.0;
            let q: f64 = 2.0 * 125.0 / 27.0 - 5.0 * 75.0 / 3.0 + 59.0;
            let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
            (-q / 2.0 + disc.sqrt()).cbrt() + (-q / 2.0 - disc.sqrt()).cbrt() - 5.0 / 3.0
        };
        assert_abs_diff_eq!(eta, cardano, epsilon = 1e-12);
    }

    #[test]
    fn cp2_closure_conditions() {
        let spec = cp2_family(0.5, 1).unwrap();
        assert!(z_eval(&spec.p, 1.0, 0.5).unwrap().abs() < 1e-12);
        assert!(z_eval(&spec.p, 1.0, 1.0).unwrap().abs() < 1e-12);
        assert_abs_diff_eq!(z0_derivative(&spec.p, 0.5).unwrap(), 2.0, epsilon = 1e-9);
        // derivative at the removable pole from the reduced form
        let (q, _) = spec.p.divide_linear(1.0);
        let (q2, _) = q.divide_linear(1.0);
        // z0 = −(t−1)·q2/(t+1) ⇒ z0'(1) = −q2(1)/2
        assert_abs_diff_eq!(-q2.eval(1.0) / 2.0, -2.0, epsilon = 1e-9);
        assert_eq!(spec.cp2_label(), 1);
        assert_eq!(spec.eps, -1);
    }

    #[test]
    fn cp2_matches_factored_profile() {
        for &(x, label) in &[(0.0, 1), (0.5, 1), (0.9, 1), (-0.8, 1), (1.5, -1), (3.0, -1)] {
            let spec = cp2_family(x, label).unwrap();
            let l = f64::from(label);
            for i in 1..20 {
                let (lo, hi) = spec.h_interval();
                let t = lo + (hi - lo) * i as f64 / 20.0;
                let factored = l * (t - 1.0) * (t - x) * q_polynomial(x).eval(t)
                    / ((1.0 + t) * (x - 1.0) * (1.0 + x) * (4.0 + x));
                let z = z_eval(&spec.p, 1.0, t).unwrap();
                assert_abs_diff_eq!(z, factored, epsilon = 1e-10 * factored.abs().max(1.0));
                assert!(z > 0.0);
            }
        }
    }

    #[test]
    fn cp2_range_checks() {
        assert!(matches!(cp2_family(-0.9, 1), Err(FamilyError::EtaBoundary { .. })));
        assert!(matches!(cp2_family(1.5, 1), Err(FamilyError::OutOfRange(_))));
        assert!(matches!(cp2_family(0.5, -1), Err(FamilyError::OutOfRange(_))));
        assert!(matches!(cp2_family(0.5, 0), Err(FamilyError::OutOfRange(_))));
        let eta = eta();
        assert!(cp2_family(eta + 1e-3, 1).is_ok());
        assert!(matches!(cp2_family(eta - 1e-3, 1), Err(FamilyError::EtaBoundary { .. })));
    }

    #[test]
    fn nonexistence_scans() {
        assert_abs_diff_eq!(product_x_printed(2.0), -2.75, epsilon = 1e-15);
        let report = trivial_ruled_nonexistence(ProductCase::GenusGt1);
        assert!(!report.found_solution);
        assert!(report.worst_residual < 0.0);

        let torus = trivial_ruled_nonexistence(ProductCase::Torus);
        assert!(!torus.found_solution);
        assert!(torus.factor_roots_above_one.is_empty());
        let quad = Polynomial::new(vec![2.0, 1.0, 2.0]);
        assert!(real_roots(&quad, -100.0, 100.0, 1e-12).unwrap().is_empty());
    }

    #[test]
    fn derived_product_root_satisfies_closure_system() {
        // Solve z(x)=0, z'(x)=2, z(y)=0 for (C, D, E) and check z'(y) = −2.
        for alpha in [1.5, 2.0, 7.0] {
            let x = product_x_derived(alpha);
            let y = alpha * x;
            let row = |h: f64| [h.powi(2), h.powi(4), 1.0 / h];
            let drow = |h: f64| [2.0 * h, 4.0 * h.powi(3), -1.0 / (h * h)];
            let m = nalgebra::Matrix3::from_rows(&[
                nalgebra::RowVector3::from(row(x)),
                nalgebra::RowVector3::from(drow(x)),
                nalgebra::RowVector3::from(row(y)),
            ]);
            let rhs = nalgebra::Vector3::new(4.0, 2.0, 4.0);
            let sol = m.lu().solve(&rhs).unwrap();
            let dz_y: f64 = drow(y).iter().zip(sol.iter()).map(|(a, b)| a * b).sum();
            assert_abs_diff_eq!(dz_y, -2.0, epsilon = 1e-8);
        }
    }
}
