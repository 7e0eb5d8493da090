//! Freud weights W(x) = exp(-c|x|^λ) and the closed-form potential theory
//! attached to them: the constant γ_λ, Mhaskar–Rakhmanov–Saff numbers, the
//! equilibrium density and its normalized form (the Ullman distribution),
//! and the modified Robin constant of the normalized weight.
//!
//! The equilibrium density is never computed from its singular-integral
//! definition. For Freud weights the normalized density σ_n(a_n s)·a_n/n is
//! the Ullman density for every n, so σ_n is obtained by rescaling.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, AdaptiveConfig, FixedRule};
use crate::special::ln_gamma;

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("exponent lambda must be > 1, got {lambda}")))
    }
}

/// γ_λ = Γ(1/2)Γ(λ/2) / (2Γ((λ+1)/2)).
pub fn gamma_lambda(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let log = ln_gamma(0.5) + ln_gamma(0.5 * lambda) - ln_gamma(0.5 * (lambda + 1.0));
    Ok(0.5 * log.exp())
}

/// Modified Robin constant F_w = log 2 + 1/λ of w(x) = exp(-γ_λ|x|^λ).
pub fn robin_constant(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(std::f64::consts::LN_2 + 1.0 / lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreudWeight {
    c: f64,
    lambda: f64,
}

impl FreudWeight {
    pub fn new(c: f64, lambda: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Domain(format!("field strength c must be > 0, got {c}")));
        }
        check_lambda(lambda)?;
        Ok(Self { c, lambda })
    }

    /// The Hermite weight exp(-x²/2), orthogonality measure exp(-x²) dx.
    pub fn hermite() -> Self {
        Self { c: 0.5, lambda: 2.0 }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn value(&self, x: f64) -> f64 {
        (-self.field(x)).exp()
    }

    /// Q(x) = -log W(x) = c|x|^λ.
    pub fn field(&self, x: f64) -> f64 {
        self.c * x.abs().powf(self.lambda)
    }

    /// Q'(x) = cλ sign(x)|x|^{λ-1}.
    pub fn field_derivative(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        self.c * self.lambda * x.signum() * x.abs().powf(self.lambda - 1.0)
    }

    pub fn gamma_lambda(&self) -> f64 {
        gamma_lambda(self.lambda).expect("lambda validated at construction")
    }

    pub fn robin_constant(&self) -> f64 {
        std::f64::consts::LN_2 + 1.0 / self.lambda
    }

    /// ∫ W² dx = 2Γ(1 + 1/λ)(2c)^{-1/λ}.
    pub fn zeroth_moment(&self) -> f64 {
        2.0 * ln_gamma(1.0 + 1.0 / self.lambda).exp() * (2.0 * self.c).powf(-1.0 / self.lambda)
    }

    /// a_n = (γ_λ n / c)^{1/λ}, the Mhaskar–Rakhmanov–Saff number.
    pub fn mrs_number(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::Argument("MRS number needs n >= 1".into()));
        }
        Ok(self.mrs_radius(n as f64))
    }

    pub(crate) fn mrs_radius(&self, n: f64) -> f64 {
        (self.gamma_lambda() * n / self.c).powf(1.0 / self.lambda)
    }

    pub fn ullman(&self) -> UllmanDistribution {
        UllmanDistribution { lambda: self.lambda }
    }

    /// σ_n(x) = (n / a_n) · u(x / a_n), with u the Ullman density.
    pub fn equilibrium_density(&self, n: usize, x: f64) -> Result<f64> {
        let a = self.mrs_number(n)?;
        let s = x / a;
        if s.abs() > 1.0 + 4.0 * f64::EPSILON {
            return Err(Error::Domain(format!("|x| = {} exceeds a_{n} = {a}", x.abs())));
        }
        let u = self.ullman().density(s.clamp(-1.0, 1.0))?;
        Ok(n as f64 / a * u)
    }

    /// Q'(x) / σ_{n+1}(x) for |x| < a_{n+1}.
    pub fn field_ratio(&self, n: usize, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Ok(0.0);
        }
        let a = self.mrs_number(n + 1)?;
        if x.abs() >= a {
            return Err(Error::Domain(format!(
                "field ratio needs |x| < a_{} = {a}, got {x}",
                n + 1
            )));
        }
        Ok(self.field_derivative(x) / self.equilibrium_density(n + 1, x)?)
    }

    /// Uniform bound C on |Q'/σ_{n+1}| over (1-ε)[-a_{n+1}, a_{n+1}]:
    /// C = γ_λ π (λ-1)(1-ε)^{λ-1} / (1 - (1-ε)^{λ-1}).
    pub fn field_ratio_bound(&self, epsilon: f64) -> Result<f64> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Argument(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        let shrink = (1.0 - epsilon).powf(self.lambda - 1.0);
        Ok(self.gamma_lambda() * PI * (self.lambda - 1.0) * shrink / (1.0 - shrink))
    }
}

/// The Ullman distribution on [-1, 1] with density
/// u(s) = (λ/π) ∫_{|s|}^1 y^{λ-1} / sqrt(y² - s²) dy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UllmanDistribution {
    lambda: f64,
}

const DENSITY_NODES: usize = 64;

thread_local! {
    static DENSITY_RULE: FixedRule = FixedRule::gauss_legendre(DENSITY_NODES);
}

impl UllmanDistribution {
    pub fn new(lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn density(&self, s: f64) -> Result<f64> {
        let s = s.abs();
        if s > 1.0 || s.is_nan() {
            return Err(Error::Domain(format!(
                "Ullman density is supported on [-1, 1], got {s}"
            )));
        }
        let lambda = self.lambda;
        if s == 1.0 {
            return Ok(0.0);
        }
        if s == 0.0 {
            return Ok(lambda / (PI * (lambda - 1.0)));
        }
        // y = sqrt(s² + t²) turns the edge singularity into a smooth
        // integrand (s² + t²)^{(λ-2)/2} on [0, sqrt(1 - s²)]
        let len = ((1.0 - s) * (1.0 + s)).sqrt();
        let half_exp = 0.5 * (lambda - 2.0);
        let s2 = s * s;
        let integral = DENSITY_RULE.with(|rule| rule.integrate_graded(len, s, |t| (s2 + t * t).powf(half_exp)));
        Ok(lambda / PI * integral)
    }

    /// Distribution function. Uses μ([0, s]) = s^λ/2 + (λ/π)∫_s^1 y^{λ-1}
    /// arcsin(s/y) dy, which follows from exchanging the order of
    /// integration in the density, so it is independent of
    /// [`UllmanDistribution::measure`].
    pub fn cdf(&self, s: f64) -> f64 {
        if s <= -1.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        let r = s.abs();
        let half_mass = if r == 0.0 {
            0.0
        } else {
            let lambda = self.lambda;
            let len = ((1.0 - r) * (1.0 + r)).sqrt();
            let half_exp = 0.5 * (lambda - 2.0);
            let r2 = r * r;
            let integral = DENSITY_RULE
                .with(|rule| rule.integrate_graded(len, r, |t| (r2 + t * t).powf(half_exp) * t * r.atan2(t)));
            0.5 * r.powf(lambda) + lambda / PI * integral
        };
        (0.5 + s.signum() * half_mass).clamp(0.0, 1.0)
    }

    /// μ([a, b]) by integrating the density; the interval is clipped to the
    /// support [-1, 1].
    pub fn measure(&self, a: f64, b: f64) -> Result<f64> {
        if a.is_nan() || b.is_nan() {
            return Err(Error::Argument("interval endpoints must not be NaN".into()));
        }
        if a > b {
            return Err(Error::Argument(format!("interval [{a}, {b}] has a > b")));
        }
        let lo = a.clamp(-1.0, 1.0);
        let hi = b.clamp(-1.0, 1.0);
        if lo >= hi {
            return Ok(0.0);
        }
        let mut total = 0.0;
        if lo < 0.0 {
            total += self.half_line_mass(hi.min(0.0).abs(), lo.abs())?;
        }
        if hi > 0.0 {
            total += self.half_line_mass(lo.max(0.0), hi)?;
        }
        Ok(total)
    }

    /// Mass of [u, v] with 0 <= u <= v <= 1, integrated in r = sqrt(1 - s)
    /// so the square-root vanishing at s = 1 becomes smooth.
    fn half_line_mass(&self, u: f64, v: f64) -> Result<f64> {
        if u >= v {
            return Ok(0.0);
        }
        let r_lo = (1.0 - v).sqrt();
        let r_hi = (1.0 - u).sqrt();
        let cfg = AdaptiveConfig {
            abs_tol: 1e-13,
            rel_tol: 0.0,
            max_subdivisions: 2000,
        };
        let mut failure = None;
        let out = integrate_adaptive(
            |r| {
                let s = (1.0 - r * r).clamp(0.0, 1.0);
                match self.density(s) {
                    Ok(d) => 2.0 * r * d,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            },
            r_lo,
            r_hi,
            &[],
            &cfg,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(out.value)
    }
}

pub fn ullman_density(lambda: f64, s: f64) -> Result<f64> {
    UllmanDistribution::new(lambda)?.density(s)
}

pub fn ullman_measure(lambda: f64, a: f64, b: f64) -> Result<f64> {
    UllmanDistribution::new(lambda)?.measure(a, b)
}
