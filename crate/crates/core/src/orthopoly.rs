//! Orthonormal polynomials p_k for the measure W²(x) dx.
//!
//! The weight is even, so the three-term recurrence has zero diagonal:
//! a_{k+1} p_{k+1}(x) = x p_k(x) - a_k p_{k-1}(x), p_0 = mu0^{-1/2}.
//! Coefficients come from the Hermite closed form when λ = 2 and from a
//! discretized Stieltjes procedure otherwise.
//!
//! Evaluations far outside the MRS interval overflow quickly, so every
//! evaluator here carries a common power-of-ten rescaling in `log_scale`.

use std::f64::consts::{LN_10, PI};
use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::symmetric_tridiagonal_eigen;
use crate::quadrature::FixedRule;
use crate::weight::FreudWeight;

pub const TABLE_SCHEMA_VERSION: u32 = 1;

const RESCALE_AT: f64 = 1e50;
const RESCALE_BY: f64 = 1e-50;
const RESCALE_LOG: f64 = 50.0 * LN_10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecurrenceMethod {
    ClosedForm,
    Stieltjes,
}

/// How the Stieltjes grid was chosen and how well it converged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub half_width: f64,
    pub nodes: usize,
    pub refinements: usize,
    pub max_change: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct RecurrenceOptions {
    /// `None` picks the closed form for λ = 2 and Stieltjes otherwise.
    pub method: Option<RecurrenceMethod>,
    /// Grid half-width as a multiple of a_{n_max}.
    pub support_factor: f64,
    /// Accepted change under node doubling, relative to max(1, a_k).
    pub tolerance: f64,
    pub max_refinements: usize,
}

impl Default for RecurrenceOptions {
    fn default() -> Self {
        Self {
            method: None,
            support_factor: 1.5,
            tolerance: 1e-10,
            max_refinements: 8,
        }
    }
}

/// Recurrence data for p_0..p_{n_max}. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableDocument", into = "TableDocument")]
pub struct RecurrenceTable {
    weight: FreudWeight,
    mu0: f64,
    offdiag: Vec<f64>,
    log_leading: Vec<f64>,
    method: RecurrenceMethod,
    discretization: Option<Discretization>,
}

#[derive(Serialize, Deserialize)]
struct TableDocument {
    schema_version: u32,
    lambda: f64,
    c: f64,
    mu0: f64,
    n_max: usize,
    offdiag: Vec<f64>,
    method: RecurrenceMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    discretization: Option<Discretization>,
}

impl From<RecurrenceTable> for TableDocument {
    fn from(t: RecurrenceTable) -> Self {
        Self {
            schema_version: TABLE_SCHEMA_VERSION,
            lambda: t.weight.lambda(),
            c: t.weight.c(),
            mu0: t.mu0,
            n_max: t.offdiag.len(),
            offdiag: t.offdiag,
            method: t.method,
            discretization: t.discretization,
        }
    }
}

impl TryFrom<TableDocument> for RecurrenceTable {
    type Error = Error;

    fn try_from(doc: TableDocument) -> Result<Self> {
        if doc.schema_version != TABLE_SCHEMA_VERSION {
            return Err(Error::Argument(format!(
                "unsupported table schema version {} (expected {TABLE_SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        if doc.offdiag.len() != doc.n_max {
            return Err(Error::Argument(format!(
                "table declares n_max = {} but has {} coefficients",
                doc.n_max,
                doc.offdiag.len()
            )));
        }
        let weight = FreudWeight::new(doc.c, doc.lambda)?;
        RecurrenceTable::from_parts(weight, doc.mu0, doc.offdiag, doc.method, doc.discretization)
    }
}

impl RecurrenceTable {
    fn from_parts(
        weight: FreudWeight,
        mu0: f64,
        offdiag: Vec<f64>,
        method: RecurrenceMethod,
        discretization: Option<Discretization>,
    ) -> Result<Self> {
        if !(mu0.is_finite() && mu0 > 0.0) {
            return Err(Error::Argument(format!("mu0 must be positive, got {mu0}")));
        }
        if offdiag.is_empty() {
            return Err(Error::Argument("table needs n_max >= 1".into()));
        }
        if let Some(k) = offdiag.iter().position(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::Argument(format!(
                "recurrence coefficient a_{} = {} is not positive",
                k + 1,
                offdiag[k]
            )));
        }
        let mut log_leading = Vec::with_capacity(offdiag.len() + 1);
        let mut acc = -0.5 * mu0.ln();
        log_leading.push(acc);
        for a in &offdiag {
            acc -= a.ln();
            log_leading.push(acc);
        }
        Ok(Self {
            weight,
            mu0,
            offdiag,
            log_leading,
            method,
            discretization,
        })
    }

    pub fn weight(&self) -> &FreudWeight {
        &self.weight
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn n_max(&self) -> usize {
        self.offdiag.len()
    }

    pub fn method(&self) -> RecurrenceMethod {
        self.method
    }

    pub fn discretization(&self) -> Option<&Discretization> {
        self.discretization.as_ref()
    }

    /// a_1..a_{n_max}.
    pub fn offdiagonals(&self) -> &[f64] {
        &self.offdiag
    }

    /// a_k for 1 <= k <= n_max.
    pub fn offdiag(&self, k: usize) -> Result<f64> {
        if k == 0 || k > self.n_max() {
            return Err(Error::Capacity {
                requested: k,
                capacity: self.n_max(),
            });
        }
        Ok(self.offdiag[k - 1])
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        if n > self.n_max() {
            Err(Error::Capacity {
                requested: n,
                capacity: self.n_max(),
            })
        } else {
            Ok(())
        }
    }

    /// Recurrence coefficient a_k with a_0 = 0; caller guarantees k <= n_max.
    #[inline]
    fn a(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.offdiag[k - 1]
        }
    }

    /// γ_n = (mu0^{1/2} a_1 ⋯ a_n)^{-1}. Underflows to 0 for large n; see
    /// [`Self::log_leading_coefficient`].
    pub fn leading_coefficient(&self, n: usize) -> Result<f64> {
        Ok(self.log_leading_coefficient(n)?.exp())
    }

    pub fn log_leading_coefficient(&self, n: usize) -> Result<f64> {
        self.check_degree(n)?;
        Ok(self.log_leading[n])
    }

    /// (p_k(x), p_k'(x)) for k = 0..=n. Overflows for |x| far beyond a_n;
    /// use [`Self::eval_basis_scaled`] there.
    pub fn eval_basis(&self, n: usize, x: f64) -> Result<Vec<(f64, f64)>> {
        let scaled = self.eval_basis_scaled(n, x)?;
        let factor = scaled.log_scale.exp();
        Ok(scaled
            .values
            .iter()
            .zip(&scaled.derivatives)
            .map(|(p, d)| (p * factor, d * factor))
            .collect())
    }

    pub fn eval_basis_scaled(&self, n: usize, x: f64) -> Result<ScaledBasis> {
        let mut values = Vec::new();
        let mut derivatives = Vec::new();
        let log_scale = self.eval_basis_into(n, x, &mut values, &mut derivatives)?;
        Ok(ScaledBasis {
            values,
            derivatives,
            log_scale,
        })
    }

    /// Fill `values`/`derivatives` with p_k(x)e^{-s}, p_k'(x)e^{-s} for
    /// k = 0..=n and return s.
    pub fn eval_basis_into(&self, n: usize, x: f64, values: &mut Vec<f64>, derivatives: &mut Vec<f64>) -> Result<f64> {
        self.check_degree(n)?;
        values.clear();
        derivatives.clear();
        let mut log_scale = 0.0;
        values.push(self.mu0.powf(-0.5));
        derivatives.push(0.0);
        for k in 0..n {
            let inv = 1.0 / self.a(k + 1);
            let (pm, dm) = if k == 0 {
                (0.0, 0.0)
            } else {
                (values[k - 1], derivatives[k - 1])
            };
            let ak = self.a(k);
            let p = (x * values[k] - ak * pm) * inv;
            let d = (values[k] + x * derivatives[k] - ak * dm) * inv;
            values.push(p);
            derivatives.push(d);
            if p.abs().max(d.abs()) > RESCALE_AT {
                values.iter_mut().for_each(|v| *v *= RESCALE_BY);
                derivatives.iter_mut().for_each(|v| *v *= RESCALE_BY);
                log_scale += RESCALE_LOG;
            }
        }
        Ok(log_scale)
    }

    /// A = Σ p_j², B = Σ p_j p_j', C = Σ p_j'² over j < n_plus_1, summed
    /// directly from the recurrence.
    pub fn kernel_triple(&self, n_plus_1: usize, x: f64) -> Result<KernelTriple> {
        if n_plus_1 == 0 {
            return Err(Error::Argument("kernel needs at least one term".into()));
        }
        self.check_degree(n_plus_1 - 1)?;
        let mut log_scale = 0.0;
        let (mut p_prev, mut d_prev) = (0.0, 0.0);
        let (mut p, mut d) = (self.mu0.powf(-0.5), 0.0);
        let (mut a, mut b, mut c) = (p * p, 0.0, 0.0);
        for k in 0..n_plus_1 - 1 {
            let inv = 1.0 / self.a(k + 1);
            let ak = self.a(k);
            let p_next = (x * p - ak * p_prev) * inv;
            let d_next = (p + x * d - ak * d_prev) * inv;
            p_prev = p;
            d_prev = d;
            p = p_next;
            d = d_next;
            if p.abs().max(d.abs()) > RESCALE_AT {
                p *= RESCALE_BY;
                d *= RESCALE_BY;
                p_prev *= RESCALE_BY;
                d_prev *= RESCALE_BY;
                let s2 = RESCALE_BY * RESCALE_BY;
                a *= s2;
                b *= s2;
                c *= s2;
                log_scale += 2.0 * RESCALE_LOG;
            }
            a += p * p;
            b += p * d;
            c += d * d;
        }
        Ok(KernelTriple { a, b, c, log_scale })
    }

    /// Σ c_k p_k(x) and its derivative, with a common rescaling.
    pub fn combination<T: Coefficient>(&self, coeffs: &[T], x: f64) -> Result<Combination<T>> {
        if coeffs.is_empty() {
            return Err(Error::Argument("empty coefficient vector".into()));
        }
        let n = coeffs.len() - 1;
        self.check_degree(n)?;
        let mut log_scale = 0.0;
        let (mut p_prev, mut d_prev) = (0.0, 0.0);
        let (mut p, mut d) = (self.mu0.powf(-0.5), 0.0);
        let mut value = coeffs[0] * p;
        let mut derivative = T::default();
        for k in 0..n {
            let inv = 1.0 / self.a(k + 1);
            let ak = self.a(k);
            let p_next = (x * p - ak * p_prev) * inv;
            let d_next = (p + x * d - ak * d_prev) * inv;
            p_prev = p;
            d_prev = d;
            p = p_next;
            d = d_next;
            if p.abs().max(d.abs()) > RESCALE_AT {
                p *= RESCALE_BY;
                d *= RESCALE_BY;
                p_prev *= RESCALE_BY;
                d_prev *= RESCALE_BY;
                value = value * RESCALE_BY;
                derivative = derivative * RESCALE_BY;
                log_scale += RESCALE_LOG;
            }
            value = value + coeffs[k + 1] * p;
            derivative = derivative + coeffs[k + 1] * d;
        }
        Ok(Combination {
            value,
            derivative,
            log_scale,
        })
    }

    /// p_0(z)..p_n(z) at a complex point, times e^{-log_scale}.
    pub fn eval_basis_complex(&self, n: usize, z: Complex64) -> Result<(Vec<Complex64>, f64)> {
        self.check_degree(n)?;
        let mut values = Vec::with_capacity(n + 1);
        let mut log_scale = 0.0;
        values.push(Complex64::new(self.mu0.powf(-0.5), 0.0));
        for k in 0..n {
            let prev = if k == 0 { Complex64::default() } else { values[k - 1] };
            let next = (z * values[k] - prev * self.a(k)) / self.a(k + 1);
            values.push(next);
            if next.norm() > RESCALE_AT {
                values.iter_mut().for_each(|v| *v *= RESCALE_BY);
                log_scale += RESCALE_LOG;
            }
        }
        Ok((values, log_scale))
    }

    /// Σ c_k p_k(z) and its derivative at a complex point.
    pub fn combination_complex(&self, coeffs: &[Complex64], z: Complex64) -> Result<Combination<Complex64>> {
        if coeffs.is_empty() {
            return Err(Error::Argument("empty coefficient vector".into()));
        }
        let n = coeffs.len() - 1;
        self.check_degree(n)?;
        let zero = Complex64::default();
        let mut log_scale = 0.0;
        let (mut p_prev, mut d_prev) = (zero, zero);
        let (mut p, mut d) = (Complex64::new(self.mu0.powf(-0.5), 0.0), zero);
        let mut value = coeffs[0] * p;
        let mut derivative = zero;
        for k in 0..n {
            let inv = 1.0 / self.a(k + 1);
            let ak = self.a(k);
            let p_next = (z * p - p_prev * ak) * inv;
            let d_next = (p + z * d - d_prev * ak) * inv;
            p_prev = p;
            d_prev = d;
            p = p_next;
            d = d_next;
            if p.norm().max(d.norm()) > RESCALE_AT {
                p *= RESCALE_BY;
                d *= RESCALE_BY;
                p_prev *= RESCALE_BY;
                d_prev *= RESCALE_BY;
                value *= RESCALE_BY;
                derivative *= RESCALE_BY;
                log_scale += RESCALE_LOG;
            }
            value += coeffs[k + 1] * p;
            derivative += coeffs[k + 1] * d;
        }
        Ok(Combination {
            value,
            derivative,
            log_scale,
        })
    }

    /// log|Σ c_k p_k(x)|, -∞ at an exact zero.
    pub fn log_abs_combination<T: Coefficient>(&self, coeffs: &[T], x: f64) -> Result<f64> {
        let comb = self.combination(coeffs, x)?;
        Ok(comb.value.modulus().ln() + comb.log_scale)
    }

    /// Gauss rule with m nodes for W²(x) dx. Nodes are the eigenvalues of
    /// the m×m Jacobi matrix (Golub–Welsch). Weights are taken as Christoffel
    /// numbers 1/K_m(x_i, x_i), which keep full relative accuracy at the
    /// outer nodes where mu0·z_i² does not. Needs m - 1 <= n_max.
    pub fn gauss_rule(&self, m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        if m == 0 {
            return Err(Error::Argument("Gauss rule needs at least one node".into()));
        }
        self.check_degree(m - 1)?;
        let diag = vec![0.0; m];
        let (nodes, _) = symmetric_tridiagonal_eigen(&diag, &self.offdiag[..m - 1], false)?;
        let weights = nodes.iter().map(|&x| self.christoffel(m, x)).collect::<Result<_>>()?;
        Ok((nodes, weights))
    }

    /// Golub–Welsch weights mu0·z_i² from the first eigenvector components.
    pub fn gauss_rule_eigenvector_weights(&self, m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        if m == 0 {
            return Err(Error::Argument("Gauss rule needs at least one node".into()));
        }
        self.check_degree(m - 1)?;
        let diag = vec![0.0; m];
        let (nodes, first) = symmetric_tridiagonal_eigen(&diag, &self.offdiag[..m - 1], true)?;
        let weights = first.expect("requested").iter().map(|z| self.mu0 * z * z).collect();
        Ok((nodes, weights))
    }

    /// Christoffel function 1 / K_m(x, x).
    pub fn christoffel(&self, m: usize, x: f64) -> Result<f64> {
        let t = self.kernel_triple(m, x)?;
        Ok((-(t.a.ln() + t.log_scale)).exp())
    }

    /// (r00, r01, r11): W²K_{n+1}^{(r,s)}(x,x) / σ_{n+1}(x)^{r+s+1} for
    /// (r,s) = (0,0), (0,1), (1,1). Requires |x| < a_{n+1}.
    pub fn universality_ratios(&self, n: usize, x: f64) -> Result<(f64, f64, f64)> {
        let a = self.weight.mrs_number(n + 1)?;
        if !(x.abs() < a) {
            return Err(Error::Domain(format!(
                "universality needs |x| < a_{} = {a}, got {x}",
                n + 1
            )));
        }
        let t = self.kernel_triple(n + 1, x)?;
        let sigma = self.weight.equilibrium_density(n + 1, x)?;
        let factor = (t.log_scale - 2.0 * self.weight.field(x)).exp();
        Ok((
            t.a * factor / sigma,
            t.b * factor / (sigma * sigma),
            t.c * factor / (sigma * sigma * sigma),
        ))
    }

    /// Limits of [`Self::universality_ratios`]: (1, f, f² + π²/3) with
    /// f = Q'(x)/σ_{n+1}(x).
    pub fn universality_prediction(&self, n: usize, x: f64) -> Result<(f64, f64, f64)> {
        let f = self.weight.field_ratio(n, x)?;
        Ok((
            universality_limit(0, 0, f),
            universality_limit(0, 1, f),
            universality_limit(1, 1, f),
        ))
    }
}

/// Mantissas of p_k and p_k'; true values are these times e^{log_scale}.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledBasis {
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
    pub log_scale: f64,
}

/// Diagonal kernel sums; true values are a, b, c times e^{log_scale}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelTriple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub log_scale: f64,
}

impl KernelTriple {
    pub fn unscaled(&self) -> (f64, f64, f64) {
        let f = self.log_scale.exp();
        (self.a * f, self.b * f, self.c * f)
    }
}

/// P(x) and P'(x) up to the common factor e^{log_scale}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Combination<T> {
    pub value: T,
    pub derivative: T,
    pub log_scale: f64,
}

/// Scalars usable as coefficients of a combination Σ c_k p_k.
pub trait Coefficient: Copy + Default + Add<Output = Self> + Mul<f64, Output = Self> {
    fn modulus(self) -> f64;
}

impl Coefficient for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Coefficient for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// τ_{j,k}: 0 for j+k odd, (-1)^{(j-k)/2}/(j+k+1) otherwise.
pub fn tau(j: usize, k: usize) -> f64 {
    if (j + k) % 2 == 1 {
        return 0.0;
    }
    let sign = if (j as i64 - k as i64).rem_euclid(4) == 0 {
        1.0
    } else {
        -1.0
    };
    sign / (j + k + 1) as f64
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Σ_j Σ_k C(r,j) C(s,k) τ_{j,k} π^{j+k} f^{r+s-j-k}.
pub fn universality_limit(r: usize, s: usize, field_ratio: f64) -> f64 {
    let mut total = 0.0;
    for j in 0..=r {
        for k in 0..=s {
            let t = tau(j, k);
            if t != 0.0 {
                total += binomial(r, j)
                    * binomial(s, k)
                    * t
                    * PI.powi((j + k) as i32)
                    * field_ratio.powi((r + s - j - k) as i32);
            }
        }
    }
    total
}

pub fn compute_recurrence(weight: &FreudWeight, n_max: usize) -> Result<RecurrenceTable> {
    compute_recurrence_with(weight, n_max, &RecurrenceOptions::default())
}

pub fn compute_recurrence_with(
    weight: &FreudWeight,
    n_max: usize,
    options: &RecurrenceOptions,
) -> Result<RecurrenceTable> {
    if n_max == 0 {
        return Err(Error::Argument("n_max must be >= 1".into()));
    }
    let method = options.method.unwrap_or(if weight.lambda() == 2.0 {
        RecurrenceMethod::ClosedForm
    } else {
        RecurrenceMethod::Stieltjes
    });
    let mu0 = weight.zeroth_moment();
    match method {
        RecurrenceMethod::ClosedForm => {
            if weight.lambda() != 2.0 {
                return Err(Error::Argument(format!(
                    "closed-form recurrence exists only for lambda = 2, got {}",
                    weight.lambda()
                )));
            }
            // measure exp(-2c x²): a_k = sqrt(k / (4c))
            let offdiag = (1..=n_max).map(|k| (k as f64 / (4.0 * weight.c())).sqrt()).collect();
            RecurrenceTable::from_parts(*weight, mu0, offdiag, method, None)
        }
        RecurrenceMethod::Stieltjes => {
            let (offdiag, disc) = stieltjes_converged(weight, n_max, options)?;
            RecurrenceTable::from_parts(*weight, mu0, offdiag, method, Some(disc))
        }
    }
}

const PANEL_NODES: usize = 20;
const GRADED_LEVELS: usize = 24;

fn stieltjes_converged(
    weight: &FreudWeight,
    n_max: usize,
    options: &RecurrenceOptions,
) -> Result<(Vec<f64>, Discretization)> {
    if !(options.support_factor >= 1.0) {
        return Err(Error::Argument(format!(
            "support factor must be >= 1, got {}",
            options.support_factor
        )));
    }
    let a_n = weight.mrs_number(n_max)?;
    // far enough out that W² < e^{-100} even for tiny n_max
    let floor = (100.0 / (2.0 * weight.c())).powf(1.0 / weight.lambda());
    let half_width = (options.support_factor * a_n).max(floor);
    let rule = FixedRule::gauss_legendre(PANEL_NODES);
    let lambda = weight.lambda();
    let graded = !(lambda.fract() == 0.0 && (lambda as i64) % 2 == 0);

    let mut panels = (n_max / 4).max(16);
    let mut previous = stieltjes(weight, n_max, half_width, panels, graded, &rule)?;
    let mut last_change = f64::INFINITY;
    let mut worst_index = 0;
    for refinement in 1..=options.max_refinements {
        panels *= 2;
        let current = stieltjes(weight, n_max, half_width, panels, graded, &rule)?;
        let (change, worst) = previous
            .iter()
            .zip(&current)
            .enumerate()
            .map(|(k, (p, c))| ((p - c).abs() / c.max(1.0), k + 1))
            .fold((0.0, 0), |acc, (d, k)| if d > acc.0 { (d, k) } else { acc });
        last_change = change;
        worst_index = worst;
        if change <= options.tolerance {
            let nodes = PANEL_NODES * (panels + if graded { GRADED_LEVELS } else { 0 });
            return Ok((
                current,
                Discretization {
                    half_width,
                    nodes,
                    refinements: refinement,
                    max_change: change,
                },
            ));
        }
        previous = current;
    }
    Err(Error::RecurrenceNotConverged {
        refinements: options.max_refinements,
        nodes: PANEL_NODES * (panels + if graded { GRADED_LEVELS } else { 0 }),
        max_change: last_change,
        worst_index,
    })
}

/// One Stieltjes pass on the half-line grid. The discrete measure is the
/// mirror image of the half-line nodes, so vectors live on [0, L] and every
/// inner product is doubled.
fn stieltjes(
    weight: &FreudWeight,
    n_max: usize,
    half_width: f64,
    panels: usize,
    graded: bool,
    rule: &FixedRule,
) -> Result<Vec<f64>> {
    let h = half_width / panels as f64;
    let mut nodes = Vec::new();
    let mut gl = Vec::new();
    if graded {
        let mut lo = 0.0;
        for level in (0..GRADED_LEVELS).rev() {
            let hi = h * 0.5f64.powi(level as i32);
            rule.map_onto(lo, hi, &mut nodes, &mut gl);
            lo = hi;
        }
    } else {
        rule.map_onto(0.0, h, &mut nodes, &mut gl);
    }
    for j in 1..panels {
        let lo = j as f64 * h;
        let hi = if j + 1 == panels { half_width } else { lo + h };
        rule.map_onto(lo, hi, &mut nodes, &mut gl);
    }

    let sqrt_w: Vec<f64> = nodes
        .iter()
        .zip(&gl)
        .map(|(&x, &w)| (w * (-2.0 * weight.field(x)).exp()).sqrt())
        .collect();
    let mass: f64 = 2.0 * sqrt_w.iter().map(|s| s * s).sum::<f64>();
    let mut q: Vec<f64> = sqrt_w.iter().map(|s| s / mass.sqrt()).collect();
    let mut q_prev = vec![0.0; q.len()];
    let mut r = vec![0.0; q.len()];
    let mut offdiag = Vec::with_capacity(n_max);
    let mut a_k = 0.0;
    for k in 0..n_max {
        let mut norm2 = 0.0;
        for i in 0..q.len() {
            r[i] = nodes[i] * q[i] - a_k * q_prev[i];
            norm2 += r[i] * r[i];
        }
        let a_next = (2.0 * norm2).sqrt();
        if !(a_next.is_finite() && a_next > 0.0) {
            return Err(Error::RecurrenceNotConverged {
                refinements: 0,
                nodes: nodes.len(),
                max_change: f64::NAN,
                worst_index: k + 1,
            });
        }
        let inv = 1.0 / a_next;
        std::mem::swap(&mut q_prev, &mut q);
        for i in 0..q.len() {
            q[i] = r[i] * inv;
        }
        offdiag.push(a_next);
        a_k = a_next;
    }
    Ok(offdiag)
}
