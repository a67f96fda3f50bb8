//! Finite-difference curvature of the ansatz metric in explicit coordinates.
//!
//! Nothing here uses the closed-form eigenvalues: the metric is written out in
//! a chart `(t, u, v, w)`, Christoffel symbols come from central differences
//! of its components, and the Ricci tensor from central differences of those.
//! The connection form is normalized by `dθ = 2s·(area form of the base)`.

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curvature::{ricci_closed_form, spectrum_at};
use crate::families::{CaseTag, FamilySpec};
use crate::ode::{Profile, ProfileError, ProfileState};

/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-4;
/// Relative tolerance for eigenvalue agreement and calibration.
pub const AGREEMENT_TOL: f64 = 1e-5;
/// Tolerance for the cyclic Ricci defect.
pub const KILLING_TOL: f64 = 1e-4;
/// Inner step for the defect, which differentiates the metric three times.
pub const KILLING_STEP: f64 = 3e-4;
/// Metric condition numbers above this are flagged.
pub const CONDITION_LIMIT: f64 = 1e8;
/// Spherical charts are restricted to `u² + v² < SPHERE_CHART_RADIUS²`.
pub const SPHERE_CHART_RADIUS: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("point ({t}, {u}, {v}, {w}) lies outside the {chart:?} chart")]
    Domain {
        chart: ChartKind,
        t: f64,
        u: f64,
        v: f64,
        w: f64,
    },
    #[error("metric is not positive definite at t = {0}")]
    Degenerate(f64),
    #[error("calibration failed on the {chart:?} chart: max error {error:e}")]
    Calibration { chart: ChartKind, error: f64 },
    #[error("no chart for base curvature {0}")]
    Curvature(f64),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    Flat,
    Hyperbolic,
    Spherical,
}

impl ChartKind {
    pub fn for_curvature(k: f64) -> Result<Self, OracleError> {
        if k == 0.0 {
            Ok(Self::Flat)
        } else if k == -4.0 {
            Ok(Self::Hyperbolic)
        } else if k == 4.0 {
            Ok(Self::Spherical)
        } else {
            Err(OracleError::Curvature(k))
        }
    }

    /// Conformal factor `c` of the base metric `c·(du² + dv²)`.
    fn conformal(self, u: f64, v: f64) -> f64 {
        match self {
            Self::Flat => 1.0,
            Self::Hyperbolic => 1.0 / (4.0 * v * v),
            Self::Spherical => (1.0 + u * u + v * v).powi(-2),
        }
    }

    /// Coefficients `(a_u, a_v)` of `θ = dw + a_u du + a_v dv`.
    fn connection(self, s: f64, u: f64, v: f64) -> (f64, f64) {
        match self {
            Self::Flat => (0.0, -2.0 * s * u),
            Self::Hyperbolic => (s / (2.0 * v), 0.0),
            Self::Spherical => {
                let r = 1.0 + u * u + v * v;
                (-s * v / r, s * u / r)
            }
        }
    }

    fn contains(self, u: f64, v: f64) -> bool {
        match self {
            Self::Flat => u.is_finite() && v.is_finite(),
            Self::Hyperbolic => v > 0.0 && u.is_finite(),
            Self::Spherical => u * u + v * v < SPHERE_CHART_RADIUS * SPHERE_CHART_RADIUS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub chart: ChartKind,
}

impl ChartPoint {
    fn coords(&self) -> [f64; 4] {
        [self.t, self.u, self.v, self.w]
    }

    fn moved(&self, x: [f64; 4]) -> Self {
        Self {
            t: x[0],
            u: x[1],
            v: x[2],
            w: x[3],
            chart: self.chart,
        }
    }
}

/// Twist `s` and base curvature `K` of the ansatz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub s: f64,
    pub curvature: f64,
}

impl Geometry {
    pub fn from_spec(spec: &FamilySpec) -> Self {
        Self {
            s: spec.s,
            curvature: spec.curvature,
        }
    }
}

/// Profile functions the oracle can evaluate at arbitrary `t`.
pub trait SmoothProfile {
    /// `(F(t), G(t))`.
    fn radii(&self, t: f64) -> Result<(f64, f64), OracleError>;
    /// Radii together with their first two derivatives.
    fn state(&self, t: f64) -> Result<ProfileState, OracleError>;
    /// Open interval of admissible `t`.
    fn domain(&self) -> (f64, f64);
}

/// `c0 + Σ a_k cos(k·ω·t + φ_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigSeries {
    pub mean: f64,
    pub omega: f64,
    pub amplitudes: Vec<f64>,
    pub phases: Vec<f64>,
}

impl TrigSeries {
    pub fn constant(mean: f64) -> Self {
        Self {
            mean,
            omega: 1.0,
            amplitudes: Vec::new(),
            phases: Vec::new(),
        }
    }

    /// Value and first two derivatives.
    pub fn jet(&self, t: f64) -> [f64; 3] {
        let mut out = [self.mean, 0.0, 0.0];
        for (k, (a, p)) in self.amplitudes.iter().zip(&self.phases).enumerate() {
            let freq = (k + 1) as f64 * self.omega;
            let (sin, cos) = (freq * t + p).sin_cos();
            out[0] += a * cos;
            out[1] -= a * freq * sin;
            out[2] -= a * freq * freq * cos;
        }
        out
    }

    /// Random series with values in `[mean − 0.7, mean + 0.7]`.
    pub fn random<R: Rng>(rng: &mut R, modes: usize) -> Self {
        let mut amplitudes: Vec<f64> = (0..modes).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let total: f64 = amplitudes.iter().map(|a: &f64| a.abs()).sum();
        let budget = rng.gen_range(0.2..0.7);
        for a in &mut amplitudes {
            *a *= budget / total.max(1e-12);
        }
        Self {
            mean: 1.25,
            omega: rng.gen_range(0.5..2.0),
            amplitudes,
            phases: (0..modes).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigProfile {
    pub f: TrigSeries,
    pub g: TrigSeries,
}

impl TrigProfile {
    pub fn constant(f: f64, g: f64) -> Self {
        Self {
            f: TrigSeries::constant(f),
            g: TrigSeries::constant(g),
        }
    }
}

impl SmoothProfile for TrigProfile {
    fn radii(&self, t: f64) -> Result<(f64, f64), OracleError> {
        Ok((self.f.jet(t)[0], self.g.jet(t)[0]))
    }

    fn state(&self, t: f64) -> Result<ProfileState, OracleError> {
        let ([f, df, ddf], [g, dg, ddg]) = (self.f.jet(t), self.g.jet(t));
        Ok(ProfileState { t, h: f64::NAN, f, g, df, ddf, dg, ddg })
    }

    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

/// Exact profile of a family member, evaluated through the arc-length map.
#[derive(Clone, Debug)]
pub struct FamilyProfile {
    profile: Profile,
}

impl FamilyProfile {
    pub fn new(spec: &FamilySpec) -> Result<Self, OracleError> {
        Ok(Self {
            profile: Profile::from_spec(spec)?,
        })
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }
}

impl SmoothProfile for FamilyProfile {
    fn radii(&self, t: f64) -> Result<(f64, f64), OracleError> {
        let st = self.profile.state_at(t)?;
        Ok((st.f, st.g))
    }

    fn state(&self, t: f64) -> Result<ProfileState, OracleError> {
        Ok(self.profile.state_at(t)?)
    }

    fn domain(&self) -> (f64, f64) {
        self.profile.interval()
    }
}

/// Multiplies `G` by `1 + amplitude·sin(2π·3(t − a)/L)` in the metric only;
/// [`SmoothProfile::state`] still reports the unperturbed data.
#[derive(Clone, Debug)]
pub struct Perturbed<P> {
    pub inner: P,
    pub amplitude: f64,
    pub origin: f64,
    pub period: f64,
}

impl<P: SmoothProfile> Perturbed<P> {
    pub fn new(inner: P, amplitude: f64) -> Self {
        let (a, b) = inner.domain();
        let (origin, period) = if a.is_finite() && b.is_finite() { (a, (b - a) / 3.0) } else { (0.0, 2.0) };
        Self {
            inner,
            amplitude,
            origin,
            period,
        }
    }

    fn factor(&self, t: f64) -> f64 {
        1.0 + self.amplitude * (std::f64::consts::TAU * (t - self.origin) / self.period).sin()
    }
}

impl<P: SmoothProfile> SmoothProfile for Perturbed<P> {
    fn radii(&self, t: f64) -> Result<(f64, f64), OracleError> {
        let (f, g) = self.inner.radii(t)?;
        Ok((f, g * self.factor(t)))
    }

    fn state(&self, t: f64) -> Result<ProfileState, OracleError> {
        self.inner.state(t)
    }

    fn domain(&self) -> (f64, f64) {
        self.inner.domain()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    pub g: Matrix4<f64>,
}

/// Components of `dt² + F²θ² + G²·c(u, v)(du² + dv²)` at `p`.
pub fn chart_metric<P: SmoothProfile + ?Sized>(
    geom: Geometry,
    profile: &P,
    p: &ChartPoint,
) -> Result<MetricSample, OracleError> {
    let (lo, hi) = profile.domain();
    if !p.chart.contains(p.u, p.v) || !(p.t > lo && p.t < hi) || !p.w.is_finite() {
        return Err(OracleError::Domain {
            chart: p.chart,
            t: p.t,
            u: p.u,
            v: p.v,
            w: p.w,
        });
    }
    let (f, g) = profile.radii(p.t)?;
    let (au, av) = p.chart.connection(geom.s, p.u, p.v);
    let base = g * g * p.chart.conformal(p.u, p.v);
    let f2 = f * f;
    let mut m = Matrix4::zeros();
    m[(0, 0)] = 1.0;
    m[(1, 1)] = f2 * au * au + base;
    m[(2, 2)] = f2 * av * av + base;
    m[(3, 3)] = f2;
    m[(1, 2)] = f2 * au * av;
    m[(2, 1)] = m[(1, 2)];
    m[(1, 3)] = f2 * au;
    m[(3, 1)] = m[(1, 3)];
    m[(2, 3)] = f2 * av;
    m[(3, 2)] = m[(2, 3)];
    Ok(MetricSample { g: m })
}

type Christoffel = [[[f64; 4]; 4]; 4];

fn offset(x: [f64; 4], axis: usize, delta: f64) -> [f64; 4] {
    let mut y = x;
    y[axis] += delta;
    y
}

fn christoffel<P: SmoothProfile + ?Sized>(
    geom: Geometry,
    profile: &P,
    p: &ChartPoint,
    step: f64,
) -> Result<Christoffel, OracleError> {
    let x = p.coords();
    let g = chart_metric(geom, profile, p)?.g;
    let ginv = g.try_inverse().ok_or(OracleError::Degenerate(p.t))?;
    let mut dg = [Matrix4::zeros(); 4];
    for (axis, slot) in dg.iter_mut().enumerate() {
        let plus = chart_metric(geom, profile, &p.moved(offset(x, axis, step)))?.g;
        let minus = chart_metric(geom, profile, &p.moved(offset(x, axis, -step)))?.g;
        *slot = (plus - minus) / (2.0 * step);
    }
    let mut gamma = [[[0.0; 4]; 4]; 4];
    for (k, gk) in gamma.iter_mut().enumerate() {
        for i in 0..4 {
            for j in i..4 {
                let mut acc = 0.0;
                for l in 0..4 {
                    acc += ginv[(k, l)] * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)]);
                }
                gk[i][j] = 0.5 * acc;
                gk[j][i] = 0.5 * acc;
            }
        }
    }
    Ok(gamma)
}

#[allow(clippy::needless_range_loop)]
fn ricci_single<P: SmoothProfile + ?Sized>(
    geom: Geometry,
    profile: &P,
    p: &ChartPoint,
    step: f64,
) -> Result<(Matrix4<f64>, Christoffel), OracleError> {
    let x = p.coords();
    let gamma = christoffel(geom, profile, p, step)?;
    // dgamma[m][k][i][j] = ∂_m Γ^k_ij
    let mut dgamma = [[[[0.0; 4]; 4]; 4]; 4];
    for (m, slot) in dgamma.iter_mut().enumerate() {
        let plus = christoffel(geom, profile, &p.moved(offset(x, m, step)), step)?;
        let minus = christoffel(geom, profile, &p.moved(offset(x, m, -step)), step)?;
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    slot[k][i][j] = (plus[k][i][j] - minus[k][i][j]) / (2.0 * step);
                }
            }
        }
    }
    let mut ric = Matrix4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = 0.0;
            for k in 0..4 {
                acc += dgamma[k][k][i][j] - dgamma[j][k][i][k];
                for l in 0..4 {
                    acc += gamma[k][k][l] * gamma[l][i][j] - gamma[k][j][l] * gamma[l][i][k];
                }
            }
            ric[(i, j)] = acc;
        }
    }
    Ok((ric, gamma))
}

/// Finite-difference Ricci tensor with its spectrum relative to the metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RicciSample {
    pub ricci: Matrix4<f64>,
    pub metric: Matrix4<f64>,
    /// Eigenvalues of `g⁻¹·Ric`, ascending.
    pub eigenvalues: [f64; 4],
    /// `max |Ric_ij − Ric_ji|` before symmetrization.
    pub asymmetry: f64,
    pub condition: f64,
    pub ill_conditioned: bool,
}

fn metric_spectrum(metric: &Matrix4<f64>, tensor: &Matrix4<f64>, t: f64) -> Result<[f64; 4], OracleError> {
    let chol = metric.cholesky().ok_or(OracleError::Degenerate(t))?;
    let l_inv = chol.l().try_inverse().ok_or(OracleError::Degenerate(t))?;
    let reduced = l_inv * tensor * l_inv.transpose();
    let sym = 0.5 * (reduced + reduced.transpose());
    let mut values: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok([values[0], values[1], values[2], values[3]])
}

fn condition_number(metric: &Matrix4<f64>) -> f64 {
    let eig = SymmetricEigen::new(*metric).eigenvalues;
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v.abs()), hi.max(v.abs())));
    hi / lo
}

/// Ricci tensor by nested central differences, with one Richardson level
/// combining steps `h` and `2h`.
pub fn ricci_fd<P: SmoothProfile + ?Sized>(
    geom: Geometry,
    profile: &P,
    p: &ChartPoint,
    step: f64,
) -> Result<RicciSample, OracleError> {
    let metric = chart_metric(geom, profile, p)?.g;
    let (fine, _) = ricci_single(geom, profile, p, step)?;
    let (coarse, _) = ricci_single(geom, profile, p, 2.0 * step)?;
    let raw = (4.0 * fine - coarse) / 3.0;
    let asymmetry = (raw - raw.transpose()).abs().max();
    let ricci = 0.5 * (raw + raw.transpose());
    let condition = condition_number(&metric);
    Ok(RicciSample {
        eigenvalues: metric_spectrum(&metric, &ricci, p.t)?,
        ricci,
        metric,
        asymmetry,
        condition,
        ill_conditioned: condition > CONDITION_LIMIT,
    })
}

/// `(Ric(X, X), τ)` at a point, with `Ric` from [`ricci_fd`].
fn ricci_along<P: SmoothProfile + ?Sized>(
    geom: Geometry,
    profile: &P,
    p: &ChartPoint,
    x: &Vector4<f64>,
    step: f64,
) -> Result<(f64, f64), OracleError> {
    let sample = ricci_fd(geom, profile, p, step)?;
    let rho_xx = (x.transpose() * sample.ricci * x)[(0, 0)];
    let ginv = sample.metric.try_inverse().ok_or(OracleError::Degenerate(p.t))?;
    let tau = (ginv * sample.ricci).trace();
    Ok((rho_xx, tau))
}

/// `|(∇_X ρ)(X, X) − ⅓·X(τ)·g(X, X)|` with `X` normalized to unit length.
///
/// Derivatives along `X` use a five-point stencil with outer step `10·step`.
pub fn killing_defect<P: SmoothProfile + ?Sized>(
    geom: Geometry,
    profile: &P,
    p: &ChartPoint,
    direction: [f64; 4],
    step: f64,
) -> Result<f64, OracleError> {
    let metric = chart_metric(geom, profile, p)?.g;
    let raw = Vector4::from(direction);
    let norm = (raw.transpose() * metric * raw)[(0, 0)].sqrt();
    if !(norm > 0.0) {
        return Err(OracleError::Degenerate(p.t));
    }
    let x = raw / norm;
    let outer = 10.0 * step;
    let along = |k: f64| -> Result<(f64, f64), OracleError> {
        let c = p.coords();
        let moved = [c[0] + k * outer * x[0], c[1] + k * outer * x[1], c[2] + k * outer * x[2], c[3] + k * outer * x[3]];
        ricci_along(geom, profile, &p.moved(moved), &x, step)
    };
    let (m2, m1, p1, p2) = (along(-2.0)?, along(-1.0)?, along(1.0)?, along(2.0)?);
    let d = |a: f64, b: f64, c: f64, e: f64| (a - 8.0 * b + 8.0 * c - e) / (12.0 * outer);
    let d_rho = d(m2.0, m1.0, p1.0, p2.0);
    let d_tau = d(m2.1, m1.1, p1.1, p2.1);

    let (ric, gamma) = {
        let sample = ricci_fd(geom, profile, p, step)?;
        let gamma = christoffel(geom, profile, p, step)?;
        (sample.ricci, gamma)
    };
    // ∇_X X = Γ^k_ac X^a X^c ∂_k
    let mut nabla_xx = Vector4::zeros();
    for (k, gk) in gamma.iter().enumerate() {
        let mut acc = 0.0;
        for a in 0..4 {
            for c in 0..4 {
                acc += gk[a][c] * x[a] * x[c];
            }
        }
        nabla_xx[k] = acc;
    }
    let correction = 2.0 * (nabla_xx.transpose() * ric * x)[(0, 0)];
    Ok((d_rho - correction - d_tau / 3.0).abs())
}

/// Closed-form `{λ₀, λ₁, λ₂, λ₂}` sorted ascending.
pub fn closed_form_quad<P: SmoothProfile + ?Sized>(geom: Geometry, profile: &P, t: f64) -> Result<[f64; 4], OracleError> {
    let st = profile.state(t)?;
    let sp = spectrum_at(&st, geom.s, geom.curvature).map_err(|_| OracleError::Degenerate(t))?;
    let mut out = [sp.lambda0, sp.lambda1, sp.lambda2, sp.lambda2];
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// `max_i |a_i − b_i| / max(1, |b_i|)` for sorted spectra.
pub fn relative_mismatch(observed: &[f64; 4], expected: &[f64; 4]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (o - e).abs() / e.abs().max(1.0))
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCase {
    pub chart: ChartKind,
    pub s: f64,
    pub curvature: f64,
    pub expected: [f64; 4],
    pub observed: [f64; 4],
    pub error: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub cases: Vec<CalibrationCase>,
    pub tolerance: f64,
    pub passed: bool,
}

impl CalibrationReport {
    /// First failing chart as an error.
    pub fn check(&self) -> Result<(), OracleError> {
        match self.cases.iter().find(|c| !c.passed) {
            Some(c) => Err(OracleError::Calibration {
                chart: c.chart,
                error: c.error,
            }),
            None => Ok(()),
        }
    }
}

/// Round `S³ × ℝ`, flat `ℝ⁴` and `ℝ² × H²(−4)` against their known spectra.
pub fn calibrate() -> CalibrationReport {
    calibrate_with(DEFAULT_STEP)
}

pub fn calibrate_with(step: f64) -> CalibrationReport {
    let unit = TrigProfile::constant(1.0, 1.0);
    let cases = [
        (ChartKind::Spherical, 1.0, 4.0, [0.0, 2.0, 2.0, 2.0], (0.3, -0.2)),
        (ChartKind::Flat, 0.0, 0.0, [0.0; 4], (0.4, 0.1)),
        (ChartKind::Hyperbolic, 0.0, -4.0, [-4.0, -4.0, 0.0, 0.0], (0.2, 0.7)),
    ]
    .into_iter()
    .map(|(chart, s, curvature, expected, (u, v))| {
        let p = ChartPoint { t: 0.1, u, v, w: 0.3, chart };
        let observed = ricci_fd(Geometry { s, curvature }, &unit, &p, step)
            .map(|r| r.eigenvalues)
            .unwrap_or([f64::NAN; 4]);
        let error = relative_mismatch(&observed, &expected);
        CalibrationCase {
            chart,
            s,
            curvature,
            expected,
            observed,
            error,
            passed: error < AGREEMENT_TOL,
        }
    })
    .collect::<Vec<_>>();
    CalibrationReport {
        passed: cases.iter().all(|c| c.passed),
        cases,
        tolerance: AGREEMENT_TOL,
    }
}

fn random_base_point<R: Rng>(rng: &mut R, chart: ChartKind, t: f64) -> ChartPoint {
    let (u, v) = match chart {
        ChartKind::Hyperbolic => (rng.gen_range(-0.5..0.5), rng.gen_range(0.5..1.5)),
        _ => (rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)),
    };
    ChartPoint {
        t,
        u,
        v,
        w: rng.gen_range(-1.0..1.0),
        chart,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementCase {
    pub point: ChartPoint,
    pub s: f64,
    pub curvature: f64,
    pub closed_form: [f64; 4],
    pub finite_difference: [f64; 4],
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub seed: u64,
    pub step: f64,
    pub perturbation: f64,
    pub cases: Vec<AgreementCase>,
    pub max_relative_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Closed-form versus finite-difference spectra on `cases` random
/// trigonometric profiles. A nonzero `perturbation` distorts `G` in the
/// oracle metric only, which should make the comparison fail.
pub fn agreement_suite(seed: u64, cases: usize, step: f64, perturbation: f64) -> AgreementReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(cases);
    for _ in 0..cases {
        let s = [0.0, 1.0, 2.0][rng.gen_range(0..3)];
        let curvature = [-4.0, 0.0, 4.0][rng.gen_range(0..3)];
        let profile = TrigProfile {
            f: TrigSeries::random(&mut rng, 3),
            g: TrigSeries::random(&mut rng, 3),
        };
        let t = rng.gen_range(-1.0..1.0);
        let chart = ChartKind::for_curvature(curvature).expect("curvature drawn from the chart list");
        let point = random_base_point(&mut rng, chart, t);
        let geom = Geometry { s, curvature };
        let closed = closed_form_quad(geom, &profile, t).unwrap_or([f64::NAN; 4]);
        let fd = if perturbation == 0.0 {
            ricci_fd(geom, &profile, &point, step)
        } else {
            ricci_fd(geom, &Perturbed::new(profile.clone(), perturbation), &point, step)
        }
        .map(|r| r.eigenvalues)
        .unwrap_or([f64::NAN; 4]);
        let relative_error = relative_mismatch(&fd, &closed);
        out.push(AgreementCase {
            point,
            s,
            curvature,
            closed_form: closed,
            finite_difference: fd,
            relative_error,
        });
    }
    let max_relative_error = out.iter().map(|c| c.relative_error).fold(0.0, |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) });
    AgreementReport {
        seed,
        step,
        perturbation,
        passed: max_relative_error < AGREEMENT_TOL,
        cases: out,
        max_relative_error,
        tolerance: AGREEMENT_TOL,
    }
}

/// Chart matching the base curvature of a family member.
pub fn family_chart(spec: &FamilySpec) -> Result<ChartKind, OracleError> {
    ChartKind::for_curvature(spec.curvature)
}

/// Fraction of the t-interval trimmed at each end when sampling a family.
pub const FAMILY_MARGIN: f64 = 0.1;

fn random_family_point<R: Rng>(rng: &mut R, profile: &FamilyProfile, chart: ChartKind) -> ChartPoint {
    let (a, b) = profile.domain();
    let margin = FAMILY_MARGIN * (b - a);
    let t = rng.gen_range(a + margin..b - margin);
    random_base_point(rng, chart, t)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyAgreement {
    pub case_tag: CaseTag,
    pub cases: Vec<AgreementCase>,
    pub max_relative_error: f64,
    pub passed: bool,
}

/// Closed-form versus finite-difference spectra on a synthesized family.
pub fn family_agreement(spec: &FamilySpec, samples: usize, seed: u64, step: f64) -> Result<FamilyAgreement, OracleError> {
    let profile = FamilyProfile::new(spec)?;
    let chart = family_chart(spec)?;
    let geom = Geometry::from_spec(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::with_capacity(samples);
    for _ in 0..samples {
        let point = random_family_point(&mut rng, &profile, chart);
        let closed = closed_form_quad(geom, &profile, point.t)?;
        let fd = ricci_fd(geom, &profile, &point, step)?.eigenvalues;
        cases.push(AgreementCase {
            point,
            s: geom.s,
            curvature: geom.curvature,
            closed_form: closed,
            finite_difference: fd,
            relative_error: relative_mismatch(&fd, &closed),
        });
    }
    let max_relative_error = cases.iter().map(|c| c.relative_error).fold(0.0, f64::max);
    Ok(FamilyAgreement {
        case_tag: spec.case_tag,
        passed: max_relative_error < AGREEMENT_TOL,
        cases,
        max_relative_error,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KillingSample {
    pub point: ChartPoint,
    pub direction: [f64; 4],
    pub defect: f64,
    /// `max(1, max|eigenvalue of Ric|)` at the point.
    pub curvature_scale: f64,
    /// `defect / curvature_scale^(3/2)`, invariant under constant rescaling
    /// of the metric.
    pub scaled_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KillingReport {
    pub seed: u64,
    pub perturbation: f64,
    pub step: f64,
    pub samples: Vec<KillingSample>,
    pub max_defect: f64,
    pub max_scaled_defect: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn curvature_scale<P: SmoothProfile + ?Sized>(geom: Geometry, profile: &P, p: &ChartPoint, step: f64) -> Result<f64, OracleError> {
    let ev = ricci_fd(geom, profile, p, step)?.eigenvalues;
    Ok(ev.iter().fold(1.0f64, |acc, v| acc.max(v.abs())))
}

/// Cyclic Ricci defect at `samples` seeded (point, direction) pairs. The
/// pass criterion uses the scale-free defect, so that a small, strongly
/// curved member is held to the same relative standard as a unit-scale one.
pub fn killing_suite(
    spec: &FamilySpec,
    samples: usize,
    seed: u64,
    step: f64,
    perturbation: f64,
) -> Result<KillingReport, OracleError> {
    let profile = FamilyProfile::new(spec)?;
    let chart = family_chart(spec)?;
    let geom = Geometry::from_spec(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perturbed = Perturbed::new(profile.clone(), perturbation);
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let point = random_family_point(&mut rng, &profile, chart);
        let direction = [0; 4].map(|_| rng.gen_range(-1.0..1.0));
        let (defect, curvature_scale) = if perturbation == 0.0 {
            (
                killing_defect(geom, &profile, &point, direction, step)?,
                curvature_scale(geom, &profile, &point, step)?,
            )
        } else {
            (
                killing_defect(geom, &perturbed, &point, direction, step)?,
                curvature_scale(geom, &perturbed, &point, step)?,
            )
        };
        out.push(KillingSample {
            point,
            direction,
            defect,
            curvature_scale,
            scaled_defect: defect / curvature_scale.powf(1.5),
        });
    }
    let max_defect = out.iter().map(|s| s.defect).fold(0.0, f64::max);
    let max_scaled_defect = out.iter().map(|s| s.scaled_defect).fold(0.0, f64::max);
    Ok(KillingReport {
        seed,
        perturbation,
        step,
        samples: out,
        max_defect,
        max_scaled_defect,
        tolerance: KILLING_TOL,
        passed: max_scaled_defect < KILLING_TOL,
    })
}

/// Closed-form spectrum as a cross-check entry point for constant radii.
pub fn constant_spectrum(f: f64, g: f64, geom: Geometry) -> [f64; 4] {
    let sp = ricci_closed_form(f, 0.0, 0.0, g, 0.0, 0.0, geom.s, geom.curvature).expect("positive radii");
    let mut out = [sp.lambda0, sp.lambda1, sp.lambda2, sp.lambda2];
    out.sort_by(f64::total_cmp);
    out
}
