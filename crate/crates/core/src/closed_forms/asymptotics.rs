//! Limits of the crossing slope `m2(a)` at the ends of the corner curve and
//! the small-`a` expansion for the borderline growth order.

use std::fmt;

use crate::closed_forms::corner::m2_from;
use crate::error::{Error, Result};
use crate::field::CornerCurve;

/// Which end of the curve a limit refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveEnd {
    Origin,
    A0,
}

/// Predicted limit of `m2(a)`.
#[derive(Clone, Debug, PartialEq)]
pub enum M2Limit {
    Finite(f64),
    Infinite,
    Zero,
    /// On a phase boundary where the growth data alone do not decide.
    Indeterminate(String),
}

impl fmt::Display for M2Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            M2Limit::Finite(v) => write!(f, "{v}"),
            M2Limit::Infinite => f.write_str("inf"),
            M2Limit::Zero => f.write_str("0"),
            M2Limit::Indeterminate(why) => write!(f, "indeterminate ({why})"),
        }
    }
}

/// Growth of `|f'|` at the origin: `|f'(a)| ~ c_alpha a^(-alpha)`, with
/// `alpha = 0` meaning a finite slope there, and the height `f(0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EndProfile {
    pub alpha: f64,
    pub c_alpha: f64,
    pub f0: f64,
}

const BORDER_TOL: f64 = 1e-12;

/// Limit of `m2(a)` as `a -> 0` for a curve with the given profile.
pub fn classify_origin_profile(p: EndProfile, r: f64) -> M2Limit {
    if p.alpha <= 0.0 {
        return M2Limit::Infinite;
    }
    if (p.alpha - 0.5).abs() <= BORDER_TOL {
        let s = p.f0.sqrt();
        if p.c_alpha > s {
            let threshold = p.c_alpha / (p.c_alpha - s);
            if (r - threshold).abs() <= BORDER_TOL * threshold {
                return M2Limit::Indeterminate(format!(
                    "alpha = 1/2 with r at the threshold {threshold}"
                ));
            }
            if r > threshold {
                let q = r - 1.0 - r * s / p.c_alpha;
                return M2Limit::Finite(1.0 / (q * q));
            }
        }
        return M2Limit::Infinite;
    }
    if p.alpha > 0.5 && r > 1.0 {
        return M2Limit::Finite(1.0 / ((r - 1.0) * (r - 1.0)));
    }
    M2Limit::Infinite
}

/// Limit of `m2(a)` at one end of a corner curve.
///
/// The `a0` end is handled by exchanging the coordinates: the inverse
/// function `g = f^-1` has `|g'(b)| ~ c' b^(-beta/(beta+1))` near `b = 0` with
/// `c' = eta^(-1/(beta+1)) (beta+1)^(-beta/(beta+1))` and `g(0) = a0`, and
/// slopes invert under the exchange.
pub fn classify_m2_limit(curve: CornerCurve, r: f64, end: CurveEnd) -> Result<M2Limit> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("rate must be positive, got {r}")));
    }
    let e = curve.order_exponents();
    match end {
        CurveEnd::Origin => Ok(classify_origin_profile(
            EndProfile {
                alpha: e.alpha,
                c_alpha: e.c_alpha,
                f0: curve.f0(),
            },
            r,
        )),
        CurveEnd::A0 => {
            let b1 = e.beta + 1.0;
            let mirrored = EndProfile {
                alpha: e.beta / b1,
                c_alpha: e.eta_beta.powf(-1.0 / b1) * b1.powf(-e.beta / b1),
                f0: curve.a0(),
            };
            Ok(match classify_origin_profile(mirrored, r) {
                M2Limit::Finite(v) => M2Limit::Finite(1.0 / v),
                M2Limit::Infinite => M2Limit::Zero,
                M2Limit::Zero => M2Limit::Infinite,
                other => other,
            })
        }
    }
}

/// Curve with `-f'(a) = c_half a^(-1/2) + c a^(gamma - 1/2)` near the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansionParams {
    pub f0: f64,
    pub c_half: f64,
    pub c: f64,
    pub gamma: f64,
    pub r: f64,
}

impl ExpansionParams {
    /// Uses the critical coefficient `c_half = r sqrt(f0) / (r - 1)`.
    pub fn critical(f0: f64, c: f64, gamma: f64, r: f64) -> Result<Self> {
        if !(r > 1.0) {
            return Err(Error::domain(format!("expansion needs r > 1, got {r}")));
        }
        let p = ExpansionParams {
            f0,
            c_half: r * f0.sqrt() / (r - 1.0),
            c,
            gamma,
            r,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(Error::domain(format!("expansion exponent must be positive, got {}", self.gamma)));
        }
        if !(self.f0 > 0.0 && self.c_half > 0.0) {
            return Err(Error::domain("expansion needs f(0) > 0 and c_half > 0"));
        }
        Ok(())
    }

    fn f(&self, a: f64) -> f64 {
        self.f0 - 2.0 * self.c_half * a.sqrt() - self.c / (self.gamma + 0.5) * a.powf(self.gamma + 0.5)
    }

    fn f_prime(&self, a: f64) -> f64 {
        -(self.c_half / a.sqrt() + self.c * a.powf(self.gamma - 0.5))
    }

    /// Predicted leading term of `1 / sqrt(m2(a))`.
    pub fn leading(&self, a: f64) -> f64 {
        if self.gamma < 0.5 {
            a.powf(0.5 - self.gamma) / (self.c.abs() * (self.r - 1.0))
        } else {
            a.powf(0.25) / self.c_half.sqrt()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansionPoint {
    pub a: f64,
    /// `1 / sqrt(m2(a))` from the exact slope formula.
    pub lhs: f64,
    pub leading: f64,
    /// `|lhs - leading|`.
    pub remainder: f64,
}

pub fn expansion_check(p: &ExpansionParams, a: f64) -> Result<ExpansionPoint> {
    p.validate()?;
    if !(a > 0.0) {
        return Err(Error::domain(format!("a must be positive, got {a}")));
    }
    let fa = p.f(a);
    if !(fa > 0.0) {
        return Err(Error::domain(format!("a = {a} is beyond the end of the curve")));
    }
    let m2 = m2_from(p.r, a, fa, p.f_prime(a));
    let lhs = 1.0 / m2.sqrt();
    let leading = p.leading(a);
    Ok(ExpansionPoint {
        a,
        lhs,
        leading,
        remainder: (lhs - leading).abs(),
    })
}

/// Log-log slope of the remainder between `a1` and `a2`.
pub fn expansion_slope(p: &ExpansionParams, a1: f64, a2: f64) -> Result<f64> {
    let e1 = expansion_check(p, a1)?;
    let e2 = expansion_check(p, a2)?;
    Ok((e1.remainder.ln() - e2.remainder.ln()) / (a1.ln() - a2.ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::corner::corner_m2;

    #[test]
    fn origin_table() {
        let c = CornerCurve::power(0.5, 1.2, 3.0).unwrap();
        assert_eq!(classify_m2_limit(c, 3.0, CurveEnd::Origin).unwrap(), M2Limit::Finite(0.25));
        assert_eq!(classify_m2_limit(c, 0.5, CurveEnd::Origin).unwrap(), M2Limit::Infinite);
        let steep = CornerCurve::power(0.5, 2.0, 3.0).unwrap();
        assert_eq!(classify_m2_limit(steep, 3.0, CurveEnd::Origin).unwrap(), M2Limit::Infinite);
        let flat = EndProfile { alpha: 0.0, c_alpha: 2.0, f0: 1.0 };
        assert_eq!(classify_origin_profile(flat, 3.0), M2Limit::Infinite);
    }

    #[test]
    fn borderline_half() {
        let p = EndProfile { alpha: 0.5, c_alpha: 2.0, f0: 1.0 };
        // threshold c / (c - sqrt f0) = 2
        assert!(matches!(classify_origin_profile(p, 2.0), M2Limit::Indeterminate(_)));
        assert_eq!(classify_origin_profile(p, 1.5), M2Limit::Infinite);
        match classify_origin_profile(p, 4.0) {
            M2Limit::Finite(v) => assert!((v - 1.0).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        assert_eq!(classify_m2_limit(CornerCurve::Sqrt, 2.0, CurveEnd::Origin).unwrap(), M2Limit::Infinite);
    }

    #[test]
    fn a0_end_mirrors() {
        let c = CornerCurve::power(1.0, 1.0, 3.0).unwrap();
        assert_eq!(classify_m2_limit(c, 3.0, CurveEnd::A0).unwrap(), M2Limit::Finite(4.0));
        for k in [1.2, 1.6, 1.8] {
            let c = CornerCurve::power(1.0, 1.0, k).unwrap();
            assert_eq!(classify_m2_limit(c, 3.0, CurveEnd::A0).unwrap(), M2Limit::Zero, "k={k}");
        }
    }

    #[test]
    fn a0_end_matches_numerics() {
        for (k, expect_zero) in [(1.6, true), (1.8, true), (3.0, false), (4.0, false)] {
            let c = CornerCurve::power(1.0, 1.0, k).unwrap();
            let a = c.a0() * (1.0 - 1e-9);
            let m2 = corner_m2(c, 3.0, a).unwrap();
            if expect_zero {
                assert!(m2 < 0.5, "k={k}: {m2}");
            } else {
                assert!((m2 - 4.0).abs() < 0.1, "k={k}: {m2}");
            }
        }
    }

    #[test]
    fn expansion_upper_branch() {
        let p = ExpansionParams::critical(1.0, 1.0, 0.75, 2.0).unwrap();
        let e = expansion_check(&p, 1e-8).unwrap();
        assert!((e.lhs / e.leading - 1.0).abs() < 0.05);
        assert!(expansion_slope(&p, 1e-6, 1e-8).unwrap() >= 0.45);
    }

    #[test]
    fn expansion_pure_half_term() {
        let p = ExpansionParams::critical(1.0, 0.0, 0.75, 2.0).unwrap();
        let r1 = expansion_check(&p, 1e-6).unwrap();
        let r2 = expansion_check(&p, 1e-10).unwrap();
        assert!((r2.lhs / r2.leading - 1.0).abs() < (r1.lhs / r1.leading - 1.0).abs());
        assert!(ExpansionParams::critical(1.0, 1.0, 0.0, 2.0).is_err());
    }
}
