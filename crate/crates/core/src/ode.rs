//! Metric profiles from a profile function `z`.
//!
//! Given `z(h) = num(h)/den(h)` with simple roots `lo < hi` and `z > 0` in
//! between, the profile `H(t)` solves `H' = sqrt(z(H))` and runs from `lo` to
//! `hi`. The square root is not Lipschitz at the ends, so instead of stepping
//! the ODE we work with the arc-length map
//!
//! ```text
//! t(H) = ∫ dH / sqrt(z(H)),     H = m − w·cos φ,  m = (lo+hi)/2, w = (hi−lo)/2,
//! ```
//!
//! which turns into `dt/dφ = 1/sqrt(q(H))` with `q = z / ((H−lo)(hi−H))`
//! smooth and positive on the closed interval. The map `t(φ)` is tabulated by
//! Gauss–Kronrod quadrature and inverted with Newton's method, so every sample
//! is accurate to rounding and `F = w·sin φ·sqrt(q)` vanishes exactly at the
//! ends.
//!
//! The t-axis is centred: the profile lives on `[−L/2, L/2]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::families::{CaseTag, FamilyError, FamilySpec};
use crate::poly::{certify_positive, real_roots, PolyError, Polynomial, DEFAULT_ROOT_TOL};
use crate::quadrature;

/// Default number of grid intervals.
pub const DEFAULT_SAMPLES: usize = 2048;
/// Smallest accepted number of grid intervals.
pub const MIN_SAMPLES: usize = 16;
/// Panels of the tabulated arc-length map.
pub const TABLE_PANELS: usize = 1024;
/// Default residual tolerance for [`boundary_report`].
pub const BOUNDARY_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("invalid profile interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("z has a pole at h = {0} on the profile interval")]
    Pole(f64),
    #[error("z does not vanish at the interval end h = {at} (z = {value})")]
    NotARoot { at: f64, value: f64 },
    #[error("root of z at h = {at} is not simple (z' = {slope}); the length integral diverges")]
    NonSimpleRoot { at: f64, slope: f64 },
    #[error("z is not positive inside the profile interval (witness h = {witness})")]
    NotPositive { witness: f64 },
    #[error("base relation G^2 = {sigma}(s^2 - H^2) changes sign on the interval")]
    BranchSwitch { sigma: f64 },
    #[error("at least {MIN_SAMPLES} samples are required, got {0}")]
    TooFewSamples(usize),
    #[error("arc-length map is not invertible at t = {0}")]
    InversionFailure(f64),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `z = num / den` restricted to `[lo, hi]`, with the interior factor
/// `q = z / ((h − lo)(hi − h))` precomputed.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    num: Polynomial,
    den: Polynomial,
    lo: f64,
    hi: f64,
    /// `−num / ((h−lo)(h−hi))`, so that `q = interior / den`.
    interior: Polynomial,
}

fn poly_scale_at(p: &Polynomial, t: f64) -> f64 {
    let abs_t = t.abs();
    p.coeffs().iter().rev().fold(0.0, |acc: f64, &c| acc * abs_t + c.abs())
}

impl Potential {
    pub fn new(num: Polynomial, den: Polynomial, lo: f64, hi: f64) -> Result<Self, ProfileError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(ProfileError::InvalidInterval { lo, hi });
        }
        let (mut num, mut den) = (num, den);
        // cancel removable poles sitting on the interval ends
        for r in [lo, hi] {
            while den.degree() > 0 && den.eval(r).abs() <= 1e-10 * poly_scale_at(&den, r) {
                if num.eval(r).abs() > 1e-9 * poly_scale_at(&num, r).max(1.0) {
                    return Err(ProfileError::Pole(r));
                }
                num = num.divide_linear(r).0;
                den = den.divide_linear(r).0;
            }
        }
        if den.degree() > 0 && !real_roots(&den, lo, hi, DEFAULT_ROOT_TOL)?.is_empty() {
            let pole = real_roots(&den, lo, hi, DEFAULT_ROOT_TOL)?[0];
            return Err(ProfileError::Pole(pole));
        }
        for r in [lo, hi] {
            let value = num.eval(r) / den.eval(r);
            if value.abs() > 1e-9 * (poly_scale_at(&num, r) / den.eval(r).abs()).max(1.0) {
                return Err(ProfileError::NotARoot { at: r, value });
            }
        }
        let (after_lo, _) = num.divide_linear(lo);
        let (deflated, _) = after_lo.divide_linear(hi);
        let potential = Self {
            interior: deflated.scale(-1.0),
            num,
            den,
            lo,
            hi,
        };
        for (r, expected_sign) in [(lo, 1.0), (hi, -1.0)] {
            let slope = potential.dz(r);
            let scale = potential.q(0.5 * (lo + hi)).abs().max(1.0) * (hi - lo);
            if slope.abs() <= 1e-8 * scale {
                return Err(ProfileError::NonSimpleRoot { at: r, slope });
            }
            if slope * expected_sign < 0.0 {
                return Err(ProfileError::NotPositive { witness: r });
            }
        }
        let sign = potential.den.eval(0.5 * (lo + hi)).signum();
        let cert = certify_positive(&potential.interior.scale(sign), lo, hi)?;
        if !cert.positive {
            return Err(ProfileError::NotPositive {
                witness: cert.witness.unwrap_or(0.5 * (lo + hi)),
            });
        }
        Ok(potential)
    }

    pub fn from_spec(spec: &FamilySpec) -> Result<Self, ProfileError> {
        let (num, den) = spec.z_rational();
        let (lo, hi) = spec.h_interval();
        Self::new(num, den, lo, hi)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn z(&self, h: f64) -> f64 {
        self.num.eval(h) / self.den.eval(h)
    }

    pub fn dz(&self, h: f64) -> f64 {
        let (n, d) = (self.num.eval(h), self.den.eval(h));
        let (dn, dd) = (self.num.derivative().eval(h), self.den.derivative().eval(h));
        (dn * d - n * dd) / (d * d)
    }

    pub fn ddz(&self, h: f64) -> f64 {
        let (n, d) = (self.num.eval(h), self.den.eval(h));
        let (dn, dd) = (self.num.derivative(), self.den.derivative());
        let (dn_h, dd_h) = (dn.eval(h), dd.eval(h));
        let (ddn_h, ddd_h) = (dn.derivative().eval(h), dd.derivative().eval(h));
        ((ddn_h * d - n * ddd_h) * d - 2.0 * dd_h * (dn_h * d - n * dd_h)) / (d * d * d)
    }

    /// `z(h) / ((h − lo)(hi − h))`, positive on `[lo, hi]`.
    pub fn q(&self, h: f64) -> f64 {
        self.interior.eval(h) / self.den.eval(h)
    }
}

/// Algebraic relation `G² = σ(s² − H²)` for the base radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseRelation {
    pub s: f64,
    /// Curvature `K` of the base surface.
    pub curvature: f64,
    pub sigma: f64,
}

impl BaseRelation {
    pub fn from_spec(spec: &FamilySpec) -> Self {
        Self {
            s: spec.s,
            curvature: spec.curvature,
            sigma: spec.branch_sign(),
        }
    }

    fn g_squared(&self, h: f64) -> f64 {
        self.sigma * (self.s * self.s - h * h)
    }

    fn is_nut(&self, h: f64) -> bool {
        self.g_squared(h).abs() <= 1e-12 * self.s.powi(2).max(1.0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndKind {
    /// Fiber collapses, base radius stays positive.
    #[default]
    Bolt,
    /// Fiber and base collapse together.
    Nut,
}

/// Profile quantities at one value of `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileState {
    pub t: f64,
    pub h: f64,
    pub f: f64,
    pub g: f64,
    pub df: f64,
    pub ddf: f64,
    pub dg: f64,
    /// `NaN` at a nut, where it is not determined by the base relation alone.
    pub ddg: f64,
}

/// Solution `H(t)` of `H' = sqrt(z(H))` between two simple roots of `z`.
#[derive(Clone, Debug)]
pub struct Profile {
    potential: Potential,
    base: BaseRelation,
    spec: Option<FamilySpec>,
    ends: [EndKind; 2],
    knots_phi: Vec<f64>,
    knots_t: Vec<f64>,
    length: f64,
}

impl Profile {
    pub fn new(potential: Potential, base: BaseRelation) -> Result<Self, ProfileError> {
        let (lo, hi) = potential.interval();
        let mid = 0.5 * (lo + hi);
        if base.g_squared(mid) <= 0.0 {
            return Err(ProfileError::BranchSwitch { sigma: base.sigma });
        }
        for h in [lo, hi] {
            if base.g_squared(h) < 0.0 && !base.is_nut(h) {
                return Err(ProfileError::BranchSwitch { sigma: base.sigma });
            }
        }
        // s² − H² must not change sign strictly inside
        let crosses = |r: f64| lo < r && r < hi && !base.is_nut(lo) && !base.is_nut(hi);
        if base.is_nut(mid) || crosses(-base.s) || crosses(base.s) {
            return Err(ProfileError::BranchSwitch { sigma: base.sigma });
        }
        let ends = [lo, hi].map(|h| if base.is_nut(h) { EndKind::Nut } else { EndKind::Bolt });

        let mut profile = Self {
            potential,
            base,
            spec: None,
            ends,
            knots_phi: Vec::new(),
            knots_t: Vec::new(),
            length: 0.0,
        };
        profile.tabulate();
        Ok(profile)
    }

    pub fn from_spec(spec: &FamilySpec) -> Result<Self, ProfileError> {
        let mut profile = Self::new(Potential::from_spec(spec)?, BaseRelation::from_spec(spec))?;
        profile.spec = Some(spec.clone());
        Ok(profile)
    }

    fn h_of_phi(&self, phi: f64) -> f64 {
        self.offsets(phi).0
    }

    /// `(H, H − lo, hi − H)` with the differences from half-angle forms, so
    /// they keep full relative accuracy near the ends.
    fn offsets(&self, phi: f64) -> (f64, f64, f64) {
        let (lo, hi) = self.potential.interval();
        if phi <= 0.0 {
            return (lo, 0.0, hi - lo);
        }
        if phi >= std::f64::consts::PI {
            return (hi, hi - lo, 0.0);
        }
        let (sin_half, cos_half) = (0.5 * phi).sin_cos();
        let d_lo = (hi - lo) * sin_half * sin_half;
        let d_hi = (hi - lo) * cos_half * cos_half;
        let h = if d_lo < d_hi { lo + d_lo } else { hi - d_hi };
        (h, d_lo, d_hi)
    }

    /// `s² − H²` through whichever interval end lies nearest to `±s`.
    fn base_gap(&self, phi: f64) -> f64 {
        let (lo, hi) = self.potential.interval();
        let (h, d_lo, d_hi) = self.offsets(phi);
        let s = self.base.s;
        let minus = if (s - hi).abs() < (s - lo).abs() { (s - hi) + d_hi } else { (s - lo) - d_lo };
        let plus = if (s + lo).abs() < (s + hi).abs() { (s + lo) + d_lo } else { (s + hi) - d_hi };
        if minus.abs().min(plus.abs()) > 1e-3 * s.abs().max(1.0) {
            return s * s - h * h;
        }
        minus * plus
    }

    fn dt_dphi(&self, phi: f64) -> f64 {
        1.0 / self.potential.q(self.h_of_phi(phi)).sqrt()
    }

    fn tabulate(&mut self) {
        let width = std::f64::consts::PI / TABLE_PANELS as f64;
        let integrand = |phi: f64| self.dt_dphi(phi);
        let mut phis = Vec::with_capacity(TABLE_PANELS + 1);
        let mut ts = Vec::with_capacity(TABLE_PANELS + 1);
        let mut acc = 0.0;
        phis.push(0.0);
        ts.push(0.0);
        for i in 0..TABLE_PANELS {
            let a = width * i as f64;
            let b = if i + 1 == TABLE_PANELS { std::f64::consts::PI } else { a + width };
            acc += quadrature::gk15(&integrand, a, b).0;
            phis.push(b);
            ts.push(acc);
        }
        self.length = acc;
        let shift = 0.5 * acc;
        for t in &mut ts {
            *t -= shift;
        }
        self.knots_phi = phis;
        self.knots_t = ts;
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn base(&self) -> BaseRelation {
        self.base
    }

    pub fn spec(&self) -> Option<&FamilySpec> {
        self.spec.as_ref()
    }

    pub fn ends(&self) -> [EndKind; 2] {
        self.ends
    }

    /// Total length `L` of the t-interval.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// `[a, b] = [−L/2, L/2]`.
    pub fn interval(&self) -> (f64, f64) {
        (-0.5 * self.length, 0.5 * self.length)
    }

    fn t_of_phi_in_panel(&self, panel: usize, phi: f64) -> f64 {
        let start = self.knots_phi[panel];
        if phi == start {
            return self.knots_t[panel];
        }
        let integrand = |p: f64| self.dt_dphi(p);
        self.knots_t[panel] + quadrature::gk15(&integrand, start, phi).0
    }

    /// Inverts the arc-length map: the `φ` at which the profile reaches `t`.
    pub fn phi_at(&self, t: f64) -> Result<f64, ProfileError> {
        let (a, b) = self.interval();
        if !(t >= a - 1e-12 * self.length && t <= b + 1e-12 * self.length) {
            return Err(ProfileError::InversionFailure(t));
        }
        if t <= a {
            return Ok(0.0);
        }
        if t >= b {
            return Ok(std::f64::consts::PI);
        }
        let panel = match self.knots_t.binary_search_by(|k| k.total_cmp(&t)) {
            Ok(i) => return Ok(self.knots_phi[i]),
            Err(i) => i - 1,
        };
        let (p0, p1) = (self.knots_phi[panel], self.knots_phi[panel + 1]);
        let (t0, t1) = (self.knots_t[panel], self.knots_t[panel + 1]);
        // cubic Hermite guess for φ(t) using dφ/dt = sqrt(q)
        let ht = t1 - t0;
        let u = (t - t0) / ht;
        let (m0, m1) = (ht / self.dt_dphi(p0), ht / self.dt_dphi(p1));
        let (h00, h10) = (2.0 * u.powi(3) - 3.0 * u * u + 1.0, u.powi(3) - 2.0 * u * u + u);
        let (h01, h11) = (-2.0 * u.powi(3) + 3.0 * u * u, u.powi(3) - u * u);
        let mut phi = (h00 * p0 + h10 * m0 + h01 * p1 + h11 * m1).clamp(p0, p1);
        for _ in 0..50 {
            let residual = self.t_of_phi_in_panel(panel, phi) - t;
            let next = (phi - residual / self.dt_dphi(phi)).clamp(p0, p1);
            let step = (next - phi).abs();
            phi = next;
            if step <= 4.0 * f64::EPSILON * phi.abs().max(1.0) {
                return Ok(phi);
            }
        }
        let residual = self.t_of_phi_in_panel(panel, phi) - t;
        if residual.abs() <= 1e-13 * self.length {
            Ok(phi)
        } else {
            Err(ProfileError::InversionFailure(t))
        }
    }

    /// Profile quantities at angle `φ ∈ [0, π]`.
    pub fn state_at_phi(&self, t: f64, phi: f64) -> ProfileState {
        let (lo, hi) = self.potential.interval();
        let h = self.h_of_phi(phi);
        let half_width = 0.5 * (hi - lo);
        let f = (half_width * phi.sin()).abs() * self.potential.q(h).sqrt();
        let g2 = self.base.sigma * self.base_gap(phi);
        let f = if phi <= 0.0 || phi >= std::f64::consts::PI { 0.0 } else { f };
        let df = 0.5 * self.potential.dz(h);
        let ddf = 0.5 * self.potential.ddz(h) * f;
        let sigma = self.base.sigma;
        let at_end = phi <= 0.0 || phi >= std::f64::consts::PI;
        let (g, dg, ddg) = if at_end && self.base.is_nut(h) {
            // G² ≈ −2σh(H − h_end), F² ≈ z'(h_end)(H − h_end)
            let side = if phi <= 0.0 { 1.0 } else { -1.0 };
            let slope_sq = -h * self.potential.dz(h) / (2.0 * sigma);
            (0.0, side * slope_sq.max(0.0).sqrt(), f64::NAN)
        } else {
            let g = g2.max(0.0).sqrt();
            let dg = -sigma * h * f / g;
            let ddg = (-sigma * (f * f + h * df) - dg * dg) / g;
            (g, dg, ddg)
        };
        ProfileState { t, h, f, g, df, ddf, dg, ddg }
    }

    pub fn state_at(&self, t: f64) -> Result<ProfileState, ProfileError> {
        let phi = self.phi_at(t)?;
        Ok(self.state_at_phi(t, phi))
    }

    /// Half of the t-length, `∫ dH / sqrt(z)` from the midpoint in `t` to the
    /// upper root, computed by adaptive quadrature in the `φ` variable.
    pub fn half_length(&self) -> f64 {
        half_length_adaptive(&self.potential)
    }

    /// Samples the profile at `n + 1` equally spaced values of `t`.
    pub fn grid(&self, n: usize) -> Result<ProfileGrid, ProfileError> {
        if n < MIN_SAMPLES {
            return Err(ProfileError::TooFewSamples(n));
        }
        let (a, b) = self.interval();
        let step = (b - a) / n as f64;
        let mut grid = ProfileGrid::with_capacity(n + 1);
        for i in 0..=n {
            let t = if i == n { b } else { a + step * i as f64 };
            let phi = match i {
                0 => 0.0,
                _ if i == n => std::f64::consts::PI,
                _ => self.phi_at(t)?,
            };
            grid.push(self.state_at_phi(t, phi));
        }
        let (lo, hi) = self.potential.interval();
        grid.a = a;
        grid.b = b;
        grid.s = self.base.s;
        grid.curvature = self.base.curvature;
        grid.sigma = self.base.sigma;
        grid.ends = self.ends;
        grid.end_z = [self.potential.z(lo), self.potential.z(hi)];
        grid.spec = self.spec.clone();
        Ok(grid)
    }
}

/// `∫_0^π dφ / sqrt(q)` halved, by adaptive Gauss–Kronrod.
pub fn half_length_adaptive(potential: &Potential) -> f64 {
    let (lo, hi) = potential.interval();
    let integrand = |phi: f64| 1.0 / potential.q(0.5 * (lo + hi) - 0.5 * (hi - lo) * phi.cos()).sqrt();
    0.5 * quadrature::adaptive(&integrand, 0.0, std::f64::consts::PI, 1e-15, 1e-15, 2000).value
}

/// Same integral by the composite rule with a fixed number of panels.
pub fn half_length_composite(potential: &Potential, panels: usize) -> f64 {
    let (lo, hi) = potential.interval();
    let integrand = |phi: f64| 1.0 / potential.q(0.5 * (lo + hi) - 0.5 * (hi - lo) * phi.cos()).sqrt();
    0.5 * quadrature::composite(&integrand, 0.0, std::f64::consts::PI, panels)
}

/// Half-length of the profile built from a family member.
pub fn half_length(spec: &FamilySpec) -> Result<f64, ProfileError> {
    Ok(half_length_adaptive(&Potential::from_spec(spec)?))
}

/// Builds the profile of a family member and samples it.
pub fn synthesize_profile(spec: &FamilySpec, n: usize) -> Result<ProfileGrid, ProfileError> {
    Profile::from_spec(spec)?.grid(n)
}

/// Sampled metric profile.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProfileGrid {
    pub t: Vec<f64>,
    pub h: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub df: Vec<f64>,
    pub ddf: Vec<f64>,
    pub dg: Vec<f64>,
    pub ddg: Vec<f64>,
    pub a: f64,
    pub b: f64,
    pub s: f64,
    pub curvature: f64,
    pub sigma: f64,
    pub ends: [EndKind; 2],
    /// `z(H(a))`, `z(H(b))` evaluated from the profile function.
    pub end_z: [f64; 2],
    pub spec: Option<FamilySpec>,
}

impl ProfileGrid {
    fn with_capacity(n: usize) -> Self {
        let v = || Vec::with_capacity(n);
        Self {
            t: v(),
            h: v(),
            f: v(),
            g: v(),
            df: v(),
            ddf: v(),
            dg: v(),
            ddg: v(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, st: ProfileState) {
        self.t.push(st.t);
        self.h.push(st.h);
        self.f.push(st.f);
        self.g.push(st.g);
        self.df.push(st.df);
        self.ddf.push(st.ddf);
        self.dg.push(st.dg);
        self.ddg.push(st.ddg);
    }

    /// Grid from explicit samples; endpoint metadata is left at defaults.
    pub fn from_states(states: &[ProfileState], s: f64, curvature: f64) -> Self {
        let mut grid = Self::with_capacity(states.len());
        for st in states {
            grid.push(*st);
        }
        grid.a = states.first().map_or(0.0, |s| s.t);
        grid.b = states.last().map_or(0.0, |s| s.t);
        grid.s = s;
        grid.curvature = curvature;
        grid.sigma = 1.0;
        grid
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn state(&self, i: usize) -> ProfileState {
        ProfileState {
            t: self.t[i],
            h: self.h[i],
            f: self.f[i],
            g: self.g[i],
            df: self.df[i],
            ddf: self.ddf[i],
            dg: self.dg[i],
            ddg: self.ddg[i],
        }
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / (self.len() - 1) as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCase {
    TwoSphereEnds,
    Cp2Ends,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub case_tag: BoundaryCase,
    pub residuals: Vec<Residual>,
    pub g_ends: [f64; 2],
    pub passed: bool,
    pub tolerance: f64,
}

impl BoundaryReport {
    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|r| r.name == name).map(|r| r.value)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.value).fold(0.0, f64::max)
    }
}

/// Smooth-closure residuals at both ends of a synthesized grid.
///
/// Endpoint derivatives are exact limits: `F' = z'(H)/2` at the roots, and
/// `G'` from the base relation (zero at a bolt, `±1`-type limit at a nut).
pub fn boundary_report(grid: &ProfileGrid, tolerance: f64) -> BoundaryReport {
    let last = grid.len() - 1;
    let mut residuals = Vec::new();
    let mut push = |name: &str, value: f64| {
        residuals.push(Residual {
            name: name.to_string(),
            value,
        })
    };
    push("|F(a)|", grid.end_z[0].abs().sqrt());
    push("|F(b)|", grid.end_z[1].abs().sqrt());
    push("|F'(a)-1|", (grid.df[0] - 1.0).abs());
    push("|F'(b)+1|", (grid.df[last] + 1.0).abs());

    let case_tag = if grid.ends.contains(&EndKind::Nut) {
        BoundaryCase::Cp2Ends
    } else {
        BoundaryCase::TwoSphereEnds
    };
    for (idx, end, sign) in [(0usize, "a", 1.0), (last, "b", -1.0)] {
        let kind = if idx == 0 { grid.ends[0] } else { grid.ends[1] };
        match kind {
            EndKind::Bolt => push(&format!("|G'({end})|"), grid.dg[idx].abs()),
            EndKind::Nut => {
                push(&format!("|G({end})|"), grid.g[idx].abs());
                let label = if sign > 0.0 { format!("|G'({end})-1|") } else { format!("|G'({end})+1|") };
                push(&label, (grid.dg[idx] - sign).abs());
            }
        }
    }
    if let Some(spec) = &grid.spec {
        if spec.case_tag == CaseTag::GenusFamily {
            let expected = spec.s * (1.0 - spec.x * spec.x).sqrt();
            push("|G(a)-s*sqrt(1-x^2)|", (grid.g[0] - expected).abs());
            push("|G(b)-s*sqrt(1-x^2)|", (grid.g[last] - expected).abs());
        }
    }
    let passed = residuals.iter().all(|r| r.value <= tolerance);
    BoundaryReport {
        case_tag,
        residuals,
        g_ends: [grid.g[0], grid.g[last]],
        passed,
        tolerance,
    }
}

/// Least-squares recovery of the normalized `(C, D, E)` from the sampled
/// profile, fitting `F²·(1 − (H/s)²) = P(H/s)` with `ε` known.
pub fn fit_profile_coefficients(grid: &ProfileGrid, eps: i8) -> (f64, f64, f64) {
    let ep = f64::from(eps);
    let rows = grid.len();
    let mut design = nalgebra::DMatrix::<f64>::zeros(rows, 3);
    let mut rhs = nalgebra::DVector::<f64>::zeros(rows);
    for i in 0..rows {
        let t = grid.h[i] / grid.s;
        let t2 = t * t;
        rhs[i] = grid.f[i] * grid.f[i] * (1.0 - t2) + 4.0 * ep * (1.0 + t2);
        design[(i, 0)] = -t2 * t2 / 3.0 + 2.0 * t2 + 1.0;
        design[(i, 1)] = -t2 * t2 * t2 / 5.0 + t2 * t2 - 3.0 * t2 - 1.0;
        design[(i, 2)] = t;
    }
    // equilibrate columns, then solve by SVD: on a short H-range the basis is
    // nearly collinear and normal equations lose too many digits
    let scales: Vec<f64> = (0..3).map(|j| design.column(j).norm().max(f64::MIN_POSITIVE)).collect();
    for (j, sc) in scales.iter().enumerate() {
        design.column_mut(j).scale_mut(1.0 / sc);
    }
    let sol = design
        .svd(true, true)
        .solve(&rhs, 1e-15)
        .unwrap_or_else(|_| nalgebra::DVector::zeros(3));
    (sol[0] / scales[0], sol[1] / scales[1], sol[2] / scales[2])
}
