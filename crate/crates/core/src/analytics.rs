//! Closed-form constants: cubic roots, the threshold bounds and the c-vs-α curve.

use std::fmt::Write as _;

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::kernel::{format_rational, from_f64, int, to_f64, Rational};

pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticsError {
    #[error("leading coefficient is zero")]
    ZeroLeading,
    #[error("no sign change found for a real root")]
    NoBracket,
    #[error("expected three distinct real roots (discriminant {0})")]
    NotThreeReal(String),
    #[error("parameter out of range: {0}")]
    Parameters(String),
}

/// c3·x³ + c2·x² + c1·x + c0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cubic {
    pub c3: Rational,
    pub c2: Rational,
    pub c1: Rational,
    pub c0: Rational,
}

impl Cubic {
    pub fn new(c3: Rational, c2: Rational, c1: Rational, c0: Rational) -> Result<Self, AnalyticsError> {
        if c3.is_zero() {
            return Err(AnalyticsError::ZeroLeading);
        }
        Ok(Cubic { c3, c2, c1, c0 })
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        ((&self.c3 * x + &self.c2) * x + &self.c1) * x + &self.c0
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        ((to_f64(&self.c3) * x + to_f64(&self.c2)) * x + to_f64(&self.c1)) * x + to_f64(&self.c0)
    }

    pub fn discriminant(&self) -> Rational {
        let (a, b, c, d) = (&self.c3, &self.c2, &self.c1, &self.c0);
        int(18) * a * b * c * d - int(4) * b * b * b * d + b * b * c * c - int(4) * a * c * c * c - int(27) * a * a * d * d
    }

    /// Cauchy bound: every real root lies in [−R, R].
    fn root_bound(&self) -> Rational {
        let m = [&self.c2, &self.c1, &self.c0].iter().map(|c| (*c / &self.c3).abs()).max().unwrap_or_default();
        m + Rational::one()
    }

    /// Breakpoints −R < (critical points) < R; between consecutive ones the cubic is monotone.
    fn breakpoints(&self) -> Vec<Rational> {
        let r = self.root_bound();
        let mut pts = vec![-r.clone()];
        // p'(x) = 3c3x² + 2c2x + c1.
        let (a, b, c) = (3.0 * to_f64(&self.c3), 2.0 * to_f64(&self.c2), to_f64(&self.c1));
        let disc = b * b - 4.0 * a * c;
        if disc > 0.0 {
            let s = disc.sqrt();
            let mut cps = [(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)];
            cps.sort_by(f64::total_cmp);
            for cp in cps {
                if let Some(q) = from_f64(cp) {
                    if q > pts[pts.len() - 1] && q < r {
                        pts.push(q);
                    }
                }
            }
        }
        pts.push(r);
        pts
    }
}

/// P_α(x) = α²x³ − αx² − 2αx + 1.
pub fn p_alpha(alpha: &Rational) -> Cubic {
    Cubic { c3: alpha * alpha, c2: -alpha.clone(), c1: -(int(2) * alpha), c0: int(1) }
}

/// Root in [lo, hi] given a sign change, by bisection on exact dyadic endpoints.
fn bisect(p: &Cubic, mut lo: Rational, mut hi: Rational, tol: f64) -> f64 {
    let tol = from_f64(tol.max(f64::EPSILON)).expect("finite tolerance");
    let lo_sign = p.eval(&lo).signum();
    let two = int(2);
    while &hi - &lo > tol {
        let mid = (&lo + &hi) / &two;
        let v = p.eval(&mid);
        if v.is_zero() {
            return to_f64(&mid);
        }
        if v.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    to_f64(&((lo + hi) / two))
}

/// All real roots of a cubic that change sign, descending.
pub fn real_roots(p: &Cubic, tol: f64) -> Result<Vec<f64>, AnalyticsError> {
    if p.c3.is_zero() {
        return Err(AnalyticsError::ZeroLeading);
    }
    let pts = p.breakpoints();
    let mut roots = Vec::new();
    for w in pts.windows(2) {
        let (a, b) = (p.eval(&w[0]), p.eval(&w[1]));
        if a.is_zero() {
            roots.push(to_f64(&w[0]));
        } else if !b.is_zero() && a.signum() != b.signum() {
            roots.push(bisect(p, w[0].clone(), w[1].clone(), tol));
        }
    }
    if p.eval(&pts[pts.len() - 1]).is_zero() {
        roots.push(to_f64(&pts[pts.len() - 1]));
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    roots.dedup();
    Ok(roots)
}

pub fn largest_root_cubic(p: &Cubic, tol: f64) -> Result<f64, AnalyticsError> {
    if !(tol > 0.0) {
        return Err(AnalyticsError::Parameters("tolerance must be positive".into()));
    }
    real_roots(p, tol)?.first().copied().ok_or(AnalyticsError::NoBracket)
}

/// The three real roots r1 > r2 > r3 of P_α.
pub fn p_alpha_roots(alpha: &Rational, tol: f64) -> Result<(f64, f64, f64), AnalyticsError> {
    if !alpha.is_positive() || *alpha > Rational::one() {
        return Err(AnalyticsError::Parameters(format!("alpha={} outside (0,1]", format_rational(alpha))));
    }
    let p = p_alpha(alpha);
    let disc = p.discriminant();
    if !disc.is_positive() {
        return Err(AnalyticsError::NotThreeReal(format_rational(&disc)));
    }
    match real_roots(&p, tol)?[..] {
        [r1, r2, r3] => Ok((r1, r2, r3)),
        _ => Err(AnalyticsError::NoBracket),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdBounds {
    /// (1+α)/α, exact.
    pub ratio_bound: Rational,
    /// √(1+α)/α.
    pub annotation100_bound: f64,
    /// (1+√(1+4α))/(2α).
    pub lower_window: f64,
}

pub fn threshold_bounds(alpha: &Rational) -> Result<ThresholdBounds, AnalyticsError> {
    if !alpha.is_positive() {
        return Err(AnalyticsError::Parameters("alpha must be positive".into()));
    }
    let a = to_f64(alpha);
    Ok(ThresholdBounds {
        ratio_bound: (Rational::one() + alpha) / alpha,
        annotation100_bound: (1.0 + a).sqrt() / a,
        lower_window: (1.0 + (1.0 + 4.0 * a).sqrt()) / (2.0 * a),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub alpha: Rational,
    pub c_bound: f64,
}

/// Largest root of P_α on an evenly spaced grid from `alpha_min` to `alpha_max`.
pub fn emit_curve(alpha_min: &Rational, alpha_max: &Rational, steps: usize) -> Result<Vec<CurvePoint>, AnalyticsError> {
    if !alpha_min.is_positive() || alpha_min >= alpha_max || *alpha_max > Rational::one() || steps < 2 {
        return Err(AnalyticsError::Parameters(format!(
            "need 0 < min < max <= 1 and steps >= 2, got min={} max={} steps={steps}",
            format_rational(alpha_min),
            format_rational(alpha_max)
        )));
    }
    let span = (alpha_max - alpha_min) / int(steps as i64 - 1);
    (0..steps)
        .map(|i| {
            let alpha = alpha_min + &span * int(i as i64);
            let c_bound = largest_root_cubic(&p_alpha(&alpha), 1e-15)?;
            Ok(CurvePoint { alpha, c_bound })
        })
        .collect()
}

/// `x` with 12 significant digits in plain decimal notation.
pub fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let prec = (11 - mag).max(0) as usize;
    format!("{x:.prec$}")
}

pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("alpha,c\n");
    for p in points {
        let _ = writeln!(out, "{},{}", sig12(to_f64(&p.alpha)), sig12(p.c_bound));
    }
    out
}
