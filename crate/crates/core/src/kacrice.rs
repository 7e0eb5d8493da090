//! Kac–Rice intensity of real zeros for G(x) = Σ c_j g_j(x) with i.i.d.
//! centered Gaussian c_j:
//!
//! ρ(x) = √(A C - B²) / (π A),  A = Σ g_j², B = Σ g_j g_j', C = Σ g_j'².
//!
//! The coefficient variance drops out (A, B, C all scale by it), so it is not
//! a parameter anywhere in this module.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::orthopoly::RecurrenceTable;
use crate::quadrature::{integrate_adaptive, AdaptiveConfig};

/// Below this value of 1 - B²/(AC) the discriminant is recomputed from the
/// basis vectors instead of the three sums.
const DEGENERACY: f64 = 1e-6;

/// A finite family g_0..g_n with g_0 a nonzero constant.
pub trait BasisEvaluator {
    fn degree(&self) -> usize;

    /// Fill g_j(x)e^{-s} and g_j'(x)e^{-s} for j = 0..=n; return s.
    fn eval_into(&self, x: f64, values: &mut Vec<f64>, derivatives: &mut Vec<f64>) -> f64;

    /// (A, B, C) up to a common positive factor.
    fn sums(&self, x: f64) -> (f64, f64, f64) {
        let mut v = Vec::new();
        let mut d = Vec::new();
        self.eval_into(x, &mut v, &mut d);
        let a = v.iter().map(|g| g * g).sum();
        let b = v.iter().zip(&d).map(|(g, h)| g * h).sum();
        let c = d.iter().map(|h| h * h).sum();
        (a, b, c)
    }

    /// Points where the intensity changes character; used to seed
    /// adaptive integration.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// g_j(x) = x^j.
#[derive(Debug, Clone, Copy)]
pub struct MonomialBasis {
    pub n: usize,
}

impl BasisEvaluator for MonomialBasis {
    fn degree(&self) -> usize {
        self.n
    }

    fn eval_into(&self, x: f64, values: &mut Vec<f64>, derivatives: &mut Vec<f64>) -> f64 {
        values.clear();
        derivatives.clear();
        let mut log_scale = 0.0;
        values.push(1.0);
        derivatives.push(0.0);
        for j in 1..=self.n {
            let v = values[j - 1] * x;
            let d = j as f64 * values[j - 1];
            values.push(v);
            derivatives.push(d);
            if v.abs().max(d.abs()) > 1e50 {
                values.iter_mut().for_each(|g| *g *= 1e-50);
                derivatives.iter_mut().for_each(|g| *g *= 1e-50);
                log_scale += 50.0 * std::f64::consts::LN_10;
            }
        }
        log_scale
    }
}

/// p_0..p_n from a recurrence table.
#[derive(Debug, Clone, Copy)]
pub struct OrthonormalBasis<'a> {
    table: &'a RecurrenceTable,
    n: usize,
}

impl<'a> OrthonormalBasis<'a> {
    pub fn new(table: &'a RecurrenceTable, n: usize) -> Result<Self> {
        if n > table.n_max() {
            return Err(Error::Capacity {
                requested: n,
                capacity: table.n_max(),
            });
        }
        Ok(Self { table, n })
    }
}

impl BasisEvaluator for OrthonormalBasis<'_> {
    fn degree(&self) -> usize {
        self.n
    }

    fn eval_into(&self, x: f64, values: &mut Vec<f64>, derivatives: &mut Vec<f64>) -> f64 {
        self.table
            .eval_basis_into(self.n, x, values, derivatives)
            .expect("degree checked at construction")
    }

    fn sums(&self, x: f64) -> (f64, f64, f64) {
        let k = self
            .table
            .kernel_triple(self.n + 1, x)
            .expect("degree checked at construction");
        (k.a, k.b, k.c)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let w = self.table.weight();
        let a = w.mrs_radius((self.n + 1) as f64);
        let delta = ((self.n.max(1)) as f64).powf(-2.0 / 3.0);
        let mut pts = vec![
            -a * (1.0 + delta),
            -a * (1.0 - delta),
            0.0,
            a * (1.0 - delta),
            a * (1.0 + delta),
        ];
        pts.dedup();
        pts
    }
}

/// ρ(x) for Gaussian coefficients.
pub fn intensity<B: BasisEvaluator + ?Sized>(basis: &B, x: f64) -> f64 {
    let (a, b, c) = basis.sums(x);
    if !(a > 0.0) || c == 0.0 {
        return 0.0;
    }
    let ba = b / a;
    let ca = c / a;
    let disc = ca - ba * ba;
    if disc > DEGENERACY * ca {
        return disc.sqrt() / PI;
    }
    degenerate_intensity(basis, x)
}

/// Near B² = AC the sums cancel; use the Lagrange identity in its
/// projected form AC - B² = A·|g' - (B/A) g|², summed componentwise on
/// vectors normalized by their largest entry.
fn degenerate_intensity<B: BasisEvaluator + ?Sized>(basis: &B, x: f64) -> f64 {
    let mut g = Vec::new();
    let mut d = Vec::new();
    basis.eval_into(x, &mut g, &mut d);
    let top = g.iter().chain(&d).fold(0.0f64, |m, v| m.max(v.abs()));
    if top == 0.0 {
        return 0.0;
    }
    g.iter_mut().for_each(|v| *v /= top);
    d.iter_mut().for_each(|v| *v /= top);
    let a: f64 = g.iter().map(|v| v * v).sum();
    let b: f64 = g.iter().zip(&d).map(|(u, v)| u * v).sum();
    let ratio = b / a;
    let perp: f64 = g.iter().zip(&d).map(|(u, v)| (v - ratio * u).powi(2)).sum();
    (perp / a).sqrt() / PI
}

fn kac_rice_config() -> AdaptiveConfig {
    AdaptiveConfig {
        abs_tol: 1e-8,
        rel_tol: 0.0,
        max_subdivisions: 4000,
    }
}

/// Fold floating noise back into [0, n]; anything further out is a bug.
fn checked_count(value: f64, n: usize) -> Result<f64> {
    let slack = 1e-6;
    if !(value >= -slack && value <= n as f64 + slack) {
        return Err(Error::Domain(format!("expected zero count {value} outside [0, {n}]")));
    }
    Ok(value.clamp(0.0, n as f64))
}

/// E[N(a, b)] = ∫_a^b ρ.
pub fn expected_zeros<B: BasisEvaluator + ?Sized>(basis: &B, a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::Argument(format!("need finite a < b, got [{a}, {b}]")));
    }
    let breaks: Vec<f64> = basis.breakpoints().into_iter().filter(|p| *p > a && *p < b).collect();
    let r = integrate_adaptive(|x| intensity(basis, x), a, b, &breaks, &kac_rice_config())?;
    checked_count(r.value, basis.degree())
}

/// ∫_T^∞ ρ(x) dx + ∫_{-∞}^{-T} ρ(x) dx via x = ±T/u on (0, 1].
fn tails<B: BasisEvaluator + ?Sized>(basis: &B, t: f64) -> Result<f64> {
    let cfg = kac_rice_config();
    let right = integrate_adaptive(|u| intensity(basis, t / u) * t / (u * u), 0.0, 1.0, &[], &cfg)?;
    let left = integrate_adaptive(|u| intensity(basis, -t / u) * t / (u * u), 0.0, 1.0, &[], &cfg)?;
    Ok(right.value + left.value)
}

fn full_line<B: BasisEvaluator + ?Sized>(basis: &B, t: f64) -> Result<f64> {
    let breaks: Vec<f64> = basis.breakpoints().into_iter().filter(|p| p.abs() < t).collect();
    let core = integrate_adaptive(|x| intensity(basis, x), -t, t, &breaks, &kac_rice_config())?;
    Ok(core.value + tails(basis, t)?)
}

/// E[N(ℝ)] for the orthonormal basis p_0..p_n.
///
/// The intensity decays only like 1/x² (a zero escapes to infinity when
/// c_n is small), so the line is split at ±T into a core and two tails, the
/// tails mapped onto (0, 1]. Starting from T = 2a_{n+1}, T grows by 1.5
/// until two successive totals agree to 1e-6.
pub fn expected_zeros_realline(table: &RecurrenceTable, n: usize) -> Result<f64> {
    let basis = OrthonormalBasis::new(table, n)?;
    expected_zeros_full_line(&basis, 2.0 * table.weight().mrs_radius((n + 1) as f64))
}

/// Full-line count for any basis, starting the stabilization at `t0`.
pub fn expected_zeros_full_line<B: BasisEvaluator + ?Sized>(basis: &B, t0: f64) -> Result<f64> {
    if !(t0.is_finite() && t0 > 0.0) {
        return Err(Error::Argument(format!("truncation point must be positive, got {t0}")));
    }
    const MAX_EXTENSIONS: usize = 4;
    let mut t = t0;
    let mut previous = full_line(basis, t)?;
    let mut change = f64::INFINITY;
    for _ in 0..MAX_EXTENSIONS {
        t *= 1.5;
        let current = full_line(basis, t)?;
        change = (current - previous).abs();
        if change < 1e-6 {
            return checked_count(current, basis.degree());
        }
        previous = current;
    }
    Err(Error::NotStabilized {
        extensions: MAX_EXTENSIONS,
        last_change: change,
    })
}

/// Expected zeros of the contracted polynomial P_n(a_{n+1} s) in [a, b],
/// -1 < a < b < 1.
pub fn expected_zeros_scaled(table: &RecurrenceTable, n: usize, a: f64, b: f64) -> Result<f64> {
    if !(a > -1.0 && a < b && b < 1.0) {
        return Err(Error::Argument(format!("need -1 < a < b < 1, got [{a}, {b}]")));
    }
    let basis = OrthonormalBasis::new(table, n)?;
    let r = table.weight().mrs_radius((n + 1) as f64);
    expected_zeros(&basis, r * a, r * b)
}

/// ρ sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityProfile {
    pub n: usize,
    pub grid: Vec<f64>,
    pub rho: Vec<f64>,
}

impl IntensityProfile {
    pub fn compute<B: BasisEvaluator + ?Sized>(basis: &B, grid: Vec<f64>) -> Self {
        let rho = grid.iter().map(|&x| intensity(basis, x)).collect();
        Self {
            n: basis.degree(),
            grid,
            rho,
        }
    }

    /// `x,rho` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,rho\n");
        for (x, r) in self.grid.iter().zip(&self.rho) {
            out.push_str(&format!("{x:.16e},{r:.16e}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthopoly::compute_recurrence;
    use crate::weight::FreudWeight;

    #[test]
    fn hand_values() {
        assert!((intensity(&MonomialBasis { n: 1 }, 0.0) - 1.0 / PI).abs() < 1e-15);
        let t = compute_recurrence(&FreudWeight::hermite(), 4).unwrap();
        let b = OrthonormalBasis::new(&t, 1).unwrap();
        assert!((intensity(&b, 0.0) - 2f64.sqrt() / PI).abs() < 1e-15);
        assert!(OrthonormalBasis::new(&t, 5).is_err());
    }

    #[test]
    fn degree_one_has_one_zero() {
        let t = compute_recurrence(&FreudWeight::hermite(), 4).unwrap();
        assert!((expected_zeros_realline(&t, 1).unwrap() - 1.0).abs() < 1e-6);
        let b = OrthonormalBasis::new(&t, 1).unwrap();
        // ρ = √2 / (π(1 + 2x²)), a Cauchy density with scale 1/√2
        let e = expected_zeros(&b, -50.0, 50.0).unwrap();
        let scale = (1.0 / 2.0f64).sqrt();
        let exact = 2.0 / PI * (50.0 / scale).atan();
        assert!((e - exact).abs() < 1e-8, "{e} vs {exact}");
    }

    #[test]
    fn rejects_bad_intervals() {
        let t = compute_recurrence(&FreudWeight::hermite(), 4).unwrap();
        let b = OrthonormalBasis::new(&t, 3).unwrap();
        assert!(expected_zeros(&b, 1.0, 1.0).is_err());
        assert!(expected_zeros(&b, 0.0, f64::INFINITY).is_err());
        assert!(expected_zeros_scaled(&t, 3, -1.0, 0.5).is_err());
        assert!(expected_zeros_scaled(&t, 3, 0.5, 0.2).is_err());
    }

    #[test]
    fn degenerate_branch_agrees_with_sums_where_both_work() {
        let t = compute_recurrence(&FreudWeight::hermite(), 30).unwrap();
        let b = OrthonormalBasis::new(&t, 30).unwrap();
        for &x in &[0.3, 2.0, 7.5, 9.0] {
            let fast = intensity(&b, x);
            let slow = degenerate_intensity(&b, x);
            assert!((fast - slow).abs() < 1e-11 * fast.max(1e-3), "{x}: {fast} vs {slow}");
        }
        // far outside: sums cancel completely, the projected form does not
        let far = intensity(&b, 1e6);
        assert!(far > 0.0 && far.is_finite());
    }

    #[test]
    fn profile_csv() {
        let p = IntensityProfile::compute(&MonomialBasis { n: 1 }, vec![0.0, 1.0]);
        let csv = p.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x,rho"));
        let row: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(row[1], 1.0 / PI);
    }
}
