//! Zeros of one realized P_n = Σ c_k p_k, computed in the orthonormal basis.
//!
//! All zeros come from the comrade matrix (Jacobi matrix plus a rank-one
//! last-row correction). Real zeros are found separately by a sign scan with
//! a grid tied to the equilibrium density, which is cheaper and exact in
//! count when the grid resolves every crossing.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{complex_eigenvalues, real_eigenvalues, Matrix};
use crate::orthopoly::RecurrenceTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "coeffs", rename_all = "snake_case")]
pub enum CoefficientVector {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl CoefficientVector {
    pub fn degree(&self) -> usize {
        self.len().saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Real(c) => c.len(),
            Self::Complex(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_real(&self) -> bool {
        matches!(self, Self::Real(_))
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        match self {
            Self::Real(c) => c.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            Self::Complex(c) => c.clone(),
        }
    }

    pub fn moduli(&self) -> Vec<f64> {
        match self {
            Self::Real(c) => c.iter().map(|x| x.abs()).collect(),
            Self::Complex(c) => c.iter().map(|z| z.norm()).collect(),
        }
    }

    pub fn max_modulus(&self) -> f64 {
        self.moduli().into_iter().fold(0.0, f64::max)
    }

    /// Multiply every coefficient by `k`; the zero set is unchanged.
    pub fn scaled(&self, k: f64) -> Self {
        match self {
            Self::Real(c) => Self::Real(c.iter().map(|x| x * k).collect()),
            Self::Complex(c) => Self::Complex(c.iter().map(|z| z * k).collect()),
        }
    }

    fn check_leading(&self) -> Result<usize> {
        let n = self.degree();
        if self.is_empty() || n == 0 {
            return Err(Error::Argument("need a coefficient vector of degree >= 1".into()));
        }
        let lead = match self {
            Self::Real(c) => c[n].abs(),
            Self::Complex(c) => c[n].norm(),
        };
        if lead == 0.0 {
            return Err(Error::DegreeDeficient { degree: n });
        }
        Ok(n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ComradeMatrix {
    Real(Matrix<f64>),
    Complex(Matrix<Complex64>),
}

/// J_n with its last row reduced by (a_n/c_n)(c_0, …, c_{n-1}); the
/// eigenvalues are the zeros of P_n.
pub fn comrade_matrix(coeffs: &CoefficientVector, table: &RecurrenceTable) -> Result<ComradeMatrix> {
    let n = coeffs.check_leading()?;
    if n > table.n_max() {
        return Err(Error::Capacity {
            requested: n,
            capacity: table.n_max(),
        });
    }
    let a = table.offdiagonals();
    let jacobi = |i: usize, j: usize| {
        if j == i + 1 {
            a[i]
        } else if i == j + 1 {
            a[j]
        } else {
            0.0
        }
    };
    let an = a[n - 1];
    Ok(match coeffs {
        CoefficientVector::Real(c) => {
            let f = an / c[n];
            ComradeMatrix::Real(Matrix::from_fn(n, |i, j| {
                let base = jacobi(i, j);
                if i == n - 1 {
                    base - f * c[j]
                } else {
                    base
                }
            }))
        }
        CoefficientVector::Complex(c) => {
            let f = an / c[n];
            ComradeMatrix::Complex(Matrix::from_fn(n, |i, j| {
                let base = Complex64::new(jacobi(i, j), 0.0);
                if i == n - 1 {
                    base - f * c[j]
                } else {
                    base
                }
            }))
        }
    })
}

/// Zeros z_k of P_n and the contracted zeros z_k / a_n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    pub n: usize,
    pub zeros: Vec<Complex64>,
    pub scaled: Vec<Complex64>,
}

impl ZeroSet {
    /// `re,im,re_scaled,im_scaled`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,re_scaled,im_scaled\n");
        for (z, s) in self.zeros.iter().zip(&self.scaled) {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", z.re, z.im, s.re, s.im));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroOptions {
    /// One complex Newton step per eigenvalue, kept only if it lowers |P|.
    pub polish: bool,
}

pub fn all_zeros(coeffs: &CoefficientVector, table: &RecurrenceTable) -> Result<ZeroSet> {
    all_zeros_with(coeffs, table, &ZeroOptions::default())
}

pub fn all_zeros_with(coeffs: &CoefficientVector, table: &RecurrenceTable, options: &ZeroOptions) -> Result<ZeroSet> {
    let n = coeffs.degree();
    let mut zeros = match comrade_matrix(coeffs, table)? {
        ComradeMatrix::Real(m) => real_eigenvalues(&m.transpose())?,
        ComradeMatrix::Complex(m) => complex_eigenvalues(&m.transpose())?,
    };
    if options.polish {
        let c = coeffs.to_complex();
        for z in zeros.iter_mut() {
            *z = newton_step(table, &c, *z)?;
        }
    }
    let an = table.weight().mrs_number(n)?;
    let scaled = zeros.iter().map(|z| z / an).collect();
    Ok(ZeroSet { n, zeros, scaled })
}

fn newton_step(table: &RecurrenceTable, coeffs: &[Complex64], z: Complex64) -> Result<Complex64> {
    let here = table.combination_complex(coeffs, z)?;
    if here.derivative.norm() == 0.0 {
        return Ok(z);
    }
    let next = z - here.value / here.derivative;
    if !(next.re.is_finite() && next.im.is_finite()) {
        return Ok(z);
    }
    let there = table.combination_complex(coeffs, next)?;
    let before = here.value.norm().ln() + here.log_scale;
    let after = there.value.norm().ln() + there.log_scale;
    Ok(if after < before { next } else { z })
}

/// Sign probe: (value, derivative) up to a common positive factor.
type Probe<'a> = dyn Fn(f64) -> Result<(f64, f64)> + 'a;

fn bisect_sign(probe: &Probe<'_>, mut lo: f64, mut hi: f64, sign_lo: f64, tol: f64, derivative: bool) -> Result<f64> {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (v, d) = probe(mid)?;
        let s = if derivative { d } else { v };
        if s == 0.0 {
            return Ok(mid);
        }
        if (s > 0.0) == (sign_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Zeros of the probed function between consecutive grid points. A cell
/// without a sign change but with a derivative sign change is checked at
/// its extremum for a hidden pair of crossings.
fn scan(grid: &[f64], probe: &Probe<'_>, tol: f64, roots: &mut Vec<f64>) -> Result<()> {
    let samples: Vec<(f64, f64)> = grid.iter().map(|&t| probe(t)).collect::<Result<_>>()?;
    for (i, &(v, _)) in samples.iter().enumerate() {
        if v == 0.0 {
            roots.push(grid[i]);
        }
    }
    for i in 0..grid.len().saturating_sub(1) {
        let (l, r) = (grid[i], grid[i + 1]);
        let ((fl, dl), (fr, dr)) = (samples[i], samples[i + 1]);
        if fl * fr < 0.0 {
            roots.push(bisect_sign(probe, l, r, fl, tol, false)?);
        } else if fl * fr > 0.0 && dl * dr < 0.0 {
            let m = bisect_sign(probe, l, r, dl, tol, true)?;
            let (fm, _) = probe(m)?;
            if fm == 0.0 {
                roots.push(m);
            } else if fm * fl < 0.0 {
                roots.push(bisect_sign(probe, l, m, fl, tol, false)?);
                roots.push(bisect_sign(probe, m, r, fm, tol, false)?);
            }
        }
    }
    Ok(())
}

fn real_coefficients(coeffs: &CoefficientVector) -> Result<&[f64]> {
    match coeffs {
        CoefficientVector::Real(c) if !c.is_empty() => Ok(c),
        CoefficientVector::Real(_) => Err(Error::Argument("empty coefficient vector".into())),
        CoefficientVector::Complex(_) => Err(Error::Argument("real-zero scanning needs real coefficients".into())),
    }
}

/// Scan grid on [a, b]: spacing min(0.2/σ_{n+1}(x), (b-a)/64) inside the
/// MRS interval, (b-a)/64 outside. σ is frozen at its value at
/// a_{n+1}(1 - δ), δ = n^{-2/3}, closer to the edge, where the true zero
/// spacing stops following σ, and the fine spacing is kept out to
/// a_{n+1}(1 + 2δ). Coarse steps never jump into the fine zone.
fn scan_grid(table: &RecurrenceTable, n: usize, a: f64, b: f64) -> Result<Vec<f64>> {
    let w = table.weight();
    let coarse = (b - a) / 64.0;
    let mrs = w.mrs_radius((n + 1) as f64);
    let delta = (n.max(1) as f64).powf(-2.0 / 3.0);
    let edge = mrs * (1.0 - delta).max(0.0);
    let fine_zone = mrs * (1.0 + 2.0 * delta);
    let mut grid = vec![a];
    let mut x = a;
    while x < b {
        let mut next = x + coarse;
        if x.abs() < fine_zone {
            let sigma = w.equilibrium_density(n + 1, x.abs().min(edge))?;
            if sigma > 0.0 {
                next = x + coarse.min(0.2 / sigma);
            }
        } else if x < -fine_zone && next > -fine_zone {
            next = -fine_zone;
        }
        let h = next - x;
        x = next.min(b);
        if b - x < 1e-3 * h {
            x = b;
        }
        grid.push(x);
    }
    Ok(grid)
}

/// Real zeros of P_n in [a, b], ascending, each localized to width
/// 1e-10·(b - a).
pub fn real_zeros(coeffs: &CoefficientVector, table: &RecurrenceTable, a: f64, b: f64) -> Result<Vec<f64>> {
    let c = real_coefficients(coeffs)?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::Argument(format!("need finite a < b, got [{a}, {b}]")));
    }
    let n = c.len() - 1;
    if n > table.n_max() {
        return Err(Error::Capacity {
            requested: n,
            capacity: table.n_max(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let grid = scan_grid(table, n, a, b)?;
    let probe = |x: f64| table.combination(c, x).map(|p| (p.value, p.derivative));
    let mut roots = Vec::new();
    scan(&grid, &probe, 1e-10 * (b - a), &mut roots)?;
    roots.sort_by(|x, y| x.total_cmp(y));
    Ok(roots)
}

pub fn real_zero_count(coeffs: &CoefficientVector, table: &RecurrenceTable, a: f64, b: f64) -> Result<usize> {
    Ok(real_zeros(coeffs, table, a, b)?.len())
}

/// All real zeros of P_n on the whole line: a scan of [-T, T] with
/// T = 2a_{n+1}, plus both tails mapped to u = T/|x| ∈ (0, 1] where the
/// u → 0 end is represented by the sign of the leading term.
pub fn real_zeros_realline(coeffs: &CoefficientVector, table: &RecurrenceTable) -> Result<Vec<f64>> {
    let n = coeffs.check_leading()?;
    let c = real_coefficients(coeffs)?;
    let t = 2.0 * table.weight().mrs_radius((n + 1) as f64);
    let mut roots = real_zeros(coeffs, table, -t, t)?;

    let lead = c[n].signum();
    let odd = if n % 2 == 1 { -1.0 } else { 1.0 };
    let cells = 64;
    let grid: Vec<f64> = (0..=cells).map(|j| j as f64 / cells as f64).collect();
    for side in [1.0, -1.0] {
        // P(±T/u): leading behaviour lead·(±1)^n u^{-n}
        let limit = if side > 0.0 { lead } else { lead * odd };
        let probe = |u: f64| -> Result<(f64, f64)> {
            if u == 0.0 {
                return Ok((limit, -limit));
            }
            let p = table.combination(c, side * t / u)?;
            Ok((p.value, -side * p.derivative))
        };
        let mut us = Vec::new();
        scan(&grid, &probe, 1e-10, &mut us)?;
        roots.extend(us.into_iter().filter(|&u| u > 0.0 && u < 1.0).map(|u| side * t / u));
    }
    roots.sort_by(|x, y| x.total_cmp(y));
    Ok(roots)
}

/// Uniform probability measure on a finite point set in ℂ.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmpiricalMeasure {
    points: Vec<Complex64>,
}

impl EmpiricalMeasure {
    pub fn new(points: Vec<Complex64>) -> Self {
        Self { points }
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn fraction(&self, pred: impl Fn(&Complex64) -> bool) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        self.points.iter().filter(|z| pred(z)).count() as f64 / self.points.len() as f64
    }

    pub fn total_mass(&self) -> f64 {
        self.fraction(|_| true)
    }

    /// Mass of the closed rectangle [re_lo, re_hi] × [im_lo, im_hi].
    pub fn rectangle_mass(&self, re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64) -> f64 {
        self.fraction(|z| z.re >= re_lo && z.re <= re_hi && z.im >= im_lo && z.im <= im_hi)
    }

    /// Mass of {Re z ∈ [a, b], |Im z| < im_tol}.
    pub fn interval_mass(&self, a: f64, b: f64, im_tol: f64) -> f64 {
        self.fraction(|z| z.re >= a && z.re <= b && z.im.abs() < im_tol)
    }

    /// Mass outside the closed disk of radius r about 0.
    pub fn mass_outside_disk(&self, r: f64) -> f64 {
        self.fraction(|z| z.norm() > r)
    }

    pub fn real_parts_sorted(&self) -> Vec<f64> {
        let mut re: Vec<f64> = self.points.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.total_cmp(b));
        re
    }

    /// Empirical CDF of the real parts.
    pub fn real_cdf(&self, x: f64) -> f64 {
        self.fraction(|z| z.re <= x)
    }
}

/// τ_n: the uniform measure on the contracted zeros z_k / a_n.
pub fn counting_measure(zs: &ZeroSet) -> EmpiricalMeasure {
    EmpiricalMeasure::new(zs.scaled.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthopoly::compute_recurrence;
    use crate::weight::FreudWeight;

    fn table() -> RecurrenceTable {
        compute_recurrence(&FreudWeight::hermite(), 40).unwrap()
    }

    #[test]
    fn pure_basis_element_gives_jacobi_matrix() {
        let t = table();
        let mut c = vec![0.0; 6];
        c[5] = 1.0;
        let ComradeMatrix::Real(m) = comrade_matrix(&CoefficientVector::Real(c), &t).unwrap() else {
            panic!("real input")
        };
        for i in 0..5 {
            for j in 0..5 {
                let want = if j == i + 1 || i == j + 1 {
                    t.offdiag(i.max(j)).unwrap()
                } else {
                    0.0
                };
                assert_eq!(m[(i, j)], want);
            }
        }
    }

    #[test]
    fn degree_one_root() {
        let t = table();
        let (c0, c1) = (0.8, -1.7);
        let ComradeMatrix::Real(m) = comrade_matrix(&CoefficientVector::Real(vec![c0, c1]), &t).unwrap() else {
            panic!()
        };
        let p0 = t.eval_basis(0, 0.0).unwrap()[0].0;
        let g1 = t.leading_coefficient(1).unwrap();
        assert!((m[(0, 0)] - (-c0 * p0 / (c1 * g1))).abs() < 1e-15);
    }

    #[test]
    fn leading_zero_rejected() {
        let t = table();
        let r = all_zeros(&CoefficientVector::Real(vec![1.0, 2.0, 0.0]), &t);
        assert!(matches!(r, Err(Error::DegreeDeficient { degree: 2 })));
        assert!(real_zeros(
            &CoefficientVector::Complex(vec![Complex64::new(1.0, 0.0); 3]),
            &t,
            0.0,
            1.0
        )
        .is_err());
    }

    #[test]
    fn p1_has_one_zero_at_origin() {
        let t = table();
        let c = CoefficientVector::Real(vec![0.0, 1.0]);
        let z = real_zeros(&c, &t, -1.0, 1.0).unwrap();
        assert_eq!(z.len(), 1);
        assert!(z[0].abs() < 1e-12);
    }

    #[test]
    fn hidden_pair_is_found() {
        // P = p_2 - 0.999·p_2(0): zeros at ±√0.0005, both inside one grid cell
        let t = table();
        let p0 = t.eval_basis(0, 0.0).unwrap()[0].0;
        let p2_at0 = t.eval_basis(2, 0.0).unwrap()[2].0;
        let shift = -p2_at0 * 0.999 / p0;
        let c = CoefficientVector::Real(vec![shift, 0.0, 1.0]);
        let z = real_zeros(&c, &t, -64.0, 64.0).unwrap();
        assert_eq!(z.len(), 2, "{z:?}");
        assert!((z[0] + z[1]).abs() < 3e-8);
        assert!((z[1] - 0.0005f64.sqrt()).abs() < 3e-8);
    }

    #[test]
    fn measure_queries() {
        let m = EmpiricalMeasure::new(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, 0.01),
            Complex64::new(2.0, -0.3),
            Complex64::new(-0.7, 0.2),
        ]);
        assert_eq!(m.total_mass(), 1.0);
        assert_eq!(m.interval_mass(-1.0, 1.0, 0.05), 0.5);
        assert_eq!(m.rectangle_mass(-1.1, 1.1, -0.1, 0.1), 0.5);
        assert_eq!(m.mass_outside_disk(10.0), 0.0);
        assert_eq!(m.real_cdf(0.0), 0.5);
        assert_eq!(EmpiricalMeasure::default().total_mass(), 0.0);
    }

    #[test]
    fn csv_layout() {
        let t = table();
        let zs = all_zeros(&CoefficientVector::Real(vec![0.0, 1.0]), &t).unwrap();
        let csv = zs.to_csv();
        assert!(csv.starts_with("re,im,re_scaled,im_scaled\n"));
        assert_eq!(csv.lines().count(), 2);
    }
}
