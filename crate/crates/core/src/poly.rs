//! Real univariate polynomials: evaluation, calculus, real-root isolation and
//! positivity certificates on intervals.
//!
//! Root isolation works by recursion on the derivative: the real critical
//! points of `p` split `[lo, hi]` into pieces on which `p` is monotone, each
//! piece holds at most one simple root, and that root is refined with a
//! bracketed Newton iteration. Critical points where `p` vanishes up to
//! rounding are reported as roots of even (or higher odd) multiplicity.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default bracket width for [`real_roots`].
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

const MAX_REFINE_ITERS: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("polynomial is identically zero on [{lo}, {hi}]")]
    IdenticallyZero { lo: f64, hi: f64 },
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
}

/// Polynomial with real coefficients in ascending degree order.
///
/// Trailing zero coefficients are trimmed on construction, so the zero
/// polynomial has an empty coefficient vector.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs = coeffs.into();
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `c * t^degree`
    pub fn monomial(c: f64, degree: usize) -> Self {
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[degree] = c;
        Self::new(coeffs)
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[f64]) -> Self {
        roots.iter().fold(Self::constant(1.0), |acc, &r| {
            &acc * &Self::new(vec![-r, 1.0])
        })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    /// Horner evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// Running error bound for Horner evaluation at `t`.
    ///
    /// A value with `|p(t)|` below this bound cannot be distinguished from
    /// zero in double precision.
    pub fn eval_error_bound(&self, t: f64) -> f64 {
        let abs_t = t.abs();
        let magnitude = self
            .coeffs
            .iter()
            .rev()
            .fold(0.0, |acc: f64, &c| acc * abs_t + c.abs());
        4.0 * (self.coeffs.len() as f64 + 1.0) * f64::EPSILON * magnitude
    }

    /// Compensated Horner evaluation: the result is as accurate as plain
    /// Horner in twice the working precision. Returns the value and an a
    /// priori error bound.
    pub fn eval_compensated(&self, t: f64) -> (f64, f64) {
        let Some((&lead, rest)) = self.coeffs.split_last() else {
            return (0.0, 0.0);
        };
        let mut s = lead;
        let mut c = 0.0;
        for &a in rest.iter().rev() {
            let (prod, prod_err) = two_prod(s, t);
            let (sum, sum_err) = two_sum(prod, a);
            s = sum;
            c = c * t + (prod_err + sum_err);
        }
        let value = s + c;
        let n = self.coeffs.len() as f64;
        let gamma = 2.0 * n * f64::EPSILON;
        let abs_t = t.abs();
        let magnitude = self
            .coeffs
            .iter()
            .rev()
            .fold(0.0, |acc: f64, &c| acc * abs_t + c.abs());
        (value, f64::EPSILON * value.abs() + 2.0 * gamma * gamma * magnitude)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect::<Vec<_>>(),
        )
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect::<Vec<_>>())
    }

    /// `q(h) = p(h / s)`.
    pub fn rescale_argument(&self, s: f64) -> Self {
        let mut power = 1.0;
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for &c in &self.coeffs {
            coeffs.push(c * power);
            power /= s;
        }
        Self::new(coeffs)
    }

    /// Synthetic division by `(t - r)`: returns quotient and remainder.
    pub fn divide_linear(&self, r: f64) -> (Self, f64) {
        if self.coeffs.len() <= 1 {
            return (Self::zero(), self.leading());
        }
        let n = self.coeffs.len();
        let mut quotient = vec![0.0; n - 1];
        let mut carry = 0.0;
        for i in (0..n).rev() {
            let value = self.coeffs[i] + carry * r;
            if i == 0 {
                return (Self::new(quotient), value);
            }
            quotient[i - 1] = value;
            carry = value;
        }
        unreachable!()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 {
                continue;
            }
            let sign = if c < 0.0 { "-" } else { "+" };
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", c.abs())?,
                1 => write!(f, "{}*t", c.abs())?,
                _ => write!(f, "{}*t^{i}", c.abs())?,
            }
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs: Vec<f64> = (0..n)
            .map(|i| {
                self.coeffs.get(i).copied().unwrap_or(0.0) + rhs.coeffs.get(i).copied().unwrap_or(0.0)
            })
            .collect();
        Polynomial::new(coeffs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Polynomial::new(coeffs)
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

fn check_interval(lo: f64, hi: f64) -> Result<(), PolyError> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(PolyError::InvalidInterval { lo, hi });
    }
    Ok(())
}

/// All real roots of `p` in `[lo, hi]`, sorted ascending.
///
/// Simple roots are bracketed to width `tol`. Roots of even multiplicity are
/// found as critical points where `p` vanishes to within the plain Horner
/// error bound; their accuracy is limited by conditioning (roughly
/// `sqrt(eps)`). The interval ends count as roots only when `p` vanishes there
/// under compensated evaluation.
pub fn real_roots(p: &Polynomial, lo: f64, hi: f64, tol: f64) -> Result<Vec<f64>, PolyError> {
    check_interval(lo, hi)?;
    if !(tol > 0.0) {
        return Err(PolyError::InvalidTolerance(tol));
    }
    if p.is_zero() {
        return Err(PolyError::IdenticallyZero { lo, hi });
    }
    let mut roots = isolate(p, lo, hi, tol);
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= tol);
    Ok(roots)
}

fn touches_zero(p: &Polynomial, t: f64) -> bool {
    p.eval(t).abs() <= p.eval_error_bound(t)
}

fn vanishes_at(p: &Polynomial, t: f64) -> bool {
    let (value, bound) = p.eval_compensated(t);
    value.abs() <= bound
}

fn isolate(p: &Polynomial, lo: f64, hi: f64, tol: f64) -> Vec<f64> {
    match p.degree() {
        0 => return Vec::new(),
        1 => {
            let c = p.coeffs();
            let r = -c[0] / c[1];
            return if (lo..=hi).contains(&r) { vec![r] } else { Vec::new() };
        }
        _ => {}
    }

    let critical = isolate(&p.derivative(), lo, hi, tol);
    let mut knots = Vec::with_capacity(critical.len() + 2);
    knots.push(lo);
    knots.extend(critical.iter().copied().filter(|&c| c > lo && c < hi));
    knots.push(hi);
    knots.dedup();

    let last = knots.len() - 1;
    let zero_at: Vec<bool> = knots
        .iter()
        .enumerate()
        .map(|(i, &k)| if i == 0 || i == last { vanishes_at(p, k) } else { touches_zero(p, k) })
        .collect();
    let mut roots: Vec<f64> = knots
        .iter()
        .zip(&zero_at)
        .filter_map(|(&k, &z)| z.then_some(k))
        .collect();

    for i in 0..knots.len() - 1 {
        if zero_at[i] || zero_at[i + 1] {
            continue;
        }
        let (u, v) = (knots[i], knots[i + 1]);
        let (pu, pv) = (p.eval_compensated(u).0, p.eval_compensated(v).0);
        if pu.signum() != pv.signum() {
            roots.push(refine_bracketed(p, u, v, pu, tol));
        }
    }
    roots
}

/// Newton iteration safeguarded by bisection on a sign-change bracket.
fn refine_bracketed(p: &Polynomial, mut u: f64, mut v: f64, pu: f64, tol: f64) -> f64 {
    let dp = p.derivative();
    let lower_negative = pu < 0.0;
    let mut x = 0.5 * (u + v);
    let mut last_step = v - u;
    for _ in 0..MAX_REFINE_ITERS {
        let px = p.eval(x);
        if px == 0.0 {
            return x;
        }
        if (px < 0.0) == lower_negative {
            u = x;
        } else {
            v = x;
        }
        if v - u <= tol {
            return 0.5 * (u + v);
        }
        let slope = dp.eval(x);
        let newton = if slope != 0.0 { x - px / slope } else { f64::NAN };
        let step = (newton - x).abs();
        if newton > u && newton < v && step < 0.5 * last_step {
            last_step = step;
            x = newton;
            if step <= 0.25 * tol {
                return x;
            }
        } else {
            last_step = v - u;
            x = 0.5 * (u + v);
        }
    }
    x
}

/// Outcome of [`certify_positive`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityCertificate {
    pub positive: bool,
    /// A point of the open interval where `p <= 0`, present iff `!positive`.
    pub witness: Option<f64>,
    /// Smallest value of `p` found at interior critical points and roots.
    pub min_value: f64,
    pub min_at: f64,
}

/// Decides whether `p > 0` on the open interval `(lo, hi)`.
///
/// Roots lying on the endpoints (up to a relative guard of `1e-10`) do not
/// count against positivity.
pub fn certify_positive(p: &Polynomial, lo: f64, hi: f64) -> Result<PositivityCertificate, PolyError> {
    check_interval(lo, hi)?;
    let mid = 0.5 * (lo + hi);
    if p.is_zero() {
        return Ok(PositivityCertificate {
            positive: false,
            witness: Some(mid),
            min_value: 0.0,
            min_at: mid,
        });
    }
    let guard = 1e-10 * lo.abs().max(hi.abs()).max(1.0);
    let inside = |r: &f64| *r > lo + guard && *r < hi - guard;

    let roots = real_roots(p, lo, hi, DEFAULT_ROOT_TOL)?;
    let mut candidates: Vec<f64> = roots.iter().copied().filter(inside).collect();
    if p.degree() >= 2 {
        candidates.extend(
            real_roots(&p.derivative(), lo, hi, DEFAULT_ROOT_TOL)?
                .into_iter()
                .filter(inside),
        );
    }
    candidates.push(mid);

    let (min_at, min_value) = candidates
        .iter()
        .map(|&t| (t, p.eval(t)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("candidate list is never empty");

    if let Some(&root) = roots.iter().find(|r| inside(r)) {
        return Ok(PositivityCertificate {
            positive: false,
            witness: Some(root),
            min_value: min_value.min(0.0),
            min_at: root,
        });
    }
    let positive = min_value > 0.0;
    Ok(PositivityCertificate {
        positive,
        witness: (!positive).then_some(min_at),
        min_value,
        min_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s_cubic() -> Polynomial {
        Polynomial::new(vec![59.0, 75.0, 5.0, 1.0])
    }

    fn q_cubic(x: f64) -> Polynomial {
        Polynomial::new(vec![8.0 + 13.0 * x + 4.0 * x * x, 5.0 + 6.0 * x, 2.0 + x, 1.0])
    }

    #[test]
    fn eval_examples() {
        assert!(s_cubic().eval(-0.8245).abs() < 2e-3);
        assert_eq!(Polynomial::zero().eval(3.7), 0.0);
        assert_eq!(Polynomial::new(vec![-1.0, 0.0, 1.0]).eval(2.0), 3.0);
    }

    #[test]
    fn trailing_zeros_are_trimmed() {
        let p = Polynomial::new(vec![1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), 1);
        assert!(Polynomial::new(vec![0.0, 0.0]).is_zero());
    }

    #[test]
    fn derivative_examples() {
        assert!(Polynomial::constant(5.0).derivative().is_zero());
        assert_eq!(Polynomial::monomial(1.0, 3).derivative(), Polynomial::monomial(3.0, 2));
        assert_eq!(s_cubic().derivative(), Polynomial::new(vec![75.0, 10.0, 3.0]));
    }

    #[test]
    fn divide_linear_recovers_factor() {
        let p = Polynomial::from_roots(&[1.0, -2.0, 0.5]);
        let (q, rem) = p.divide_linear(-2.0);
        assert!(rem.abs() < 1e-14);
        let back = &q * &Polynomial::new(vec![2.0, 1.0]);
        for (a, b) in back.coeffs().iter().zip(p.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn rescale_argument_matches_direct_evaluation() {
        let p = Polynomial::new(vec![1.0, -2.0, 0.5, 3.0]);
        let q = p.rescale_argument(2.5);
        for h in [-1.0, 0.3, 2.0] {
            assert!((q.eval(h) - p.eval(h / 2.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn s_cubic_has_single_root_near_minus_0_8245() {
        let roots = real_roots(&s_cubic(), -2.0, 0.0, 1e-9).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] + 0.8245).abs() < 5e-5);
    }

    #[test]
    fn simple_and_empty_root_sets() {
        let p = Polynomial::new(vec![-0.25, 0.0, 1.0]);
        let roots = real_roots(&p, 0.0, 1.0, 1e-12).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 0.5).abs() < 1e-12);

        let p = Polynomial::new(vec![1.0, 0.0, 1.0]);
        assert!(real_roots(&p, -10.0, 10.0, 1e-12).unwrap().is_empty());
    }

    #[test]
    fn double_root_is_detected() {
        let p = Polynomial::from_roots(&[0.3, 0.3, -0.7]);
        let roots = real_roots(&p, -1.0, 1.0, 1e-12).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0] + 0.7).abs() < 1e-12);
        assert!((roots[1] - 0.3).abs() < 1e-7);
    }

    #[test]
    fn zero_polynomial_is_an_error() {
        assert!(matches!(
            real_roots(&Polynomial::zero(), 0.0, 1.0, 1e-12),
            Err(PolyError::IdenticallyZero { .. })
        ));
        assert!(real_roots(&s_cubic(), 1.0, 0.0, 1e-12).is_err());
    }

    #[test]
    fn positivity_examples() {
        assert!(certify_positive(&q_cubic(0.5), 0.5, 1.0).unwrap().positive);

        let cert = certify_positive(&q_cubic(-0.9), -0.9, 1.0).unwrap();
        assert!(!cert.positive);
        let w = cert.witness.unwrap();
        assert!(w > -0.9 && w < 1.0 && q_cubic(-0.9).eval(w) <= 1e-12);

        let cert = certify_positive(&Polynomial::monomial(1.0, 2), -1.0, 1.0).unwrap();
        assert!(!cert.positive);
        assert!(cert.witness.unwrap().abs() < 1e-7);
    }

    #[test]
    fn endpoint_roots_do_not_break_positivity() {
        // (t^2 - 0.25) * -1 is positive strictly inside (-0.5, 0.5)
        let p = Polynomial::new(vec![0.25, 0.0, -1.0]);
        assert!(certify_positive(&p, -0.5, 0.5).unwrap().positive);
    }
}
