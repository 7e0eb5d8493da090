//! Dense eigenvalue routines used for Gauss rules and comrade-matrix
//! rootfinding.
//!
//! - implicit QL on symmetric tridiagonal matrices, optionally tracking the
//!   first eigenvector components (Golub–Welsch weights);
//! - balancing, Householder reduction to upper Hessenberg form and the
//!   Francis double-shift QR iteration for real matrices (EISPACK `hqr`
//!   lineage, eigenvalues only);
//! - the same pipeline with a single-shift QR for complex matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square dense matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Copy + Default> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::default(); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.n.max(1))
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

trait Entry: Copy {
    fn abs1(self) -> f64;
    fn scaled(self, f: f64) -> Self;
}

impl Entry for f64 {
    fn abs1(self) -> f64 {
        self.abs()
    }
    fn scaled(self, f: f64) -> Self {
        self * f
    }
}

impl Entry for Complex64 {
    fn abs1(self) -> f64 {
        self.re.abs() + self.im.abs()
    }
    fn scaled(self, f: f64) -> Self {
        self * f
    }
}

/// Diagonal similarity by powers of two so that row and column norms are
/// comparable. Preserves Hessenberg structure.
fn balance<T: Entry>(a: &mut Matrix<T>) {
    let n = a.n;
    let radix = 2.0;
    let radix_sq = radix * radix;
    loop {
        let mut changed = false;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs1();
                    r += a[(i, j)].abs1();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= radix_sq;
            }
            g = r * radix;
            while c >= g {
                f /= radix;
                c /= radix_sq;
            }
            if (c + r) / f < 0.95 * s {
                changed = true;
                let inv = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] = a[(i, j)].scaled(inv);
                    a[(j, i)] = a[(j, i)].scaled(f);
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// Eigenvalues (ascending) of the symmetric tridiagonal matrix with the
/// given diagonal and off-diagonal, and optionally the first component of
/// each normalized eigenvector.
pub fn symmetric_tridiagonal_eigen(
    diag: &[f64],
    offdiag: &[f64],
    want_first_components: bool,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let n = diag.len();
    if n == 0 {
        return Ok((Vec::new(), want_first_components.then(Vec::new)));
    }
    if offdiag.len() + 1 != n {
        return Err(Error::Argument(format!(
            "tridiagonal matrix of order {n} needs {} off-diagonal entries, got {}",
            n - 1,
            offdiag.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; if want_first_components { n } else { 0 }];
    if want_first_components {
        z[0] = 1.0;
    }

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Eigen {
                    lo: l,
                    hi: m,
                    iterations: iter,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if want_first_components {
                    let f = z[i + 1];
                    z[i + 1] = s * z[i] + c * f;
                    z[i] = c * z[i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let first = want_first_components.then(|| order.iter().map(|&i| z[i]).collect());
    Ok((values, first))
}

fn real_hessenberg(h: &mut Matrix<f64>) {
    let n = h.n;
    if n < 3 {
        return;
    }
    let mut ort = vec![0.0; n];
    for m in 1..n - 1 {
        let scale: f64 = (m..n).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..n).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;
        for j in m..n {
            let mut f = 0.0;
            for i in (m..n).rev() {
                f += ort[i] * h[(i, j)];
            }
            f /= hh;
            for i in m..n {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..n {
            let mut f = 0.0;
            for j in (m..n).rev() {
                f += ort[j] * h[(i, j)];
            }
            f /= hh;
            for j in m..n {
                h[(i, j)] -= f * ort[j];
            }
        }
        h[(m, m - 1)] = scale * g;
        for i in m + 1..n {
            h[(i, m - 1)] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
fn hqr(h: &mut Matrix<f64>, max_iterations: usize) -> Result<Vec<Complex64>> {
    let nn = h.n as isize;
    let mut wr = vec![0.0; h.n];
    let mut wi = vec![0.0; h.n];
    let eps = f64::EPSILON;
    let at = |h: &Matrix<f64>, i: isize, j: isize| h[(i as usize, j as usize)];

    let mut norm = 0.0;
    for i in 0..nn {
        for j in (i - 1).max(0)..nn {
            norm += at(h, i, j).abs();
        }
    }

    let mut exshift = 0.0;
    let mut n = nn - 1;
    let mut iter = 0;
    let mut total = 0usize;
    let (mut p, mut q, mut r, mut s, mut w, mut x, mut y, mut z);

    while n >= 0 {
        let mut l = n;
        while l > 0 {
            s = at(h, l - 1, l - 1).abs() + at(h, l, l).abs();
            if s == 0.0 {
                s = norm;
            }
            if at(h, l, l - 1).abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            wr[n as usize] = at(h, n, n) + exshift;
            wi[n as usize] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            w = at(h, n, n - 1) * at(h, n - 1, n);
            p = (at(h, n - 1, n - 1) - at(h, n, n)) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            x = at(h, n, n) + exshift;
            let (i0, i1) = ((n - 1) as usize, n as usize);
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                wr[i0] = x + z;
                wr[i1] = if z != 0.0 { x - w / z } else { x + z };
                wi[i0] = 0.0;
                wi[i1] = 0.0;
            } else {
                wr[i0] = x + p;
                wr[i1] = x + p;
                wi[i0] = z;
                wi[i1] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            x = at(h, n, n);
            y = at(h, n - 1, n - 1);
            w = at(h, n, n - 1) * at(h, n - 1, n);

            if iter == 10 {
                exshift += x;
                for i in 0..=n {
                    h[(i as usize, i as usize)] -= x;
                }
                s = at(h, n, n - 1).abs() + at(h, n - 1, n - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in 0..=n {
                        h[(i as usize, i as usize)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }

            iter += 1;
            total += 1;
            if total > max_iterations {
                return Err(Error::Eigen {
                    lo: l as usize,
                    hi: n as usize,
                    iterations: total,
                });
            }

            let mut m = n - 2;
            loop {
                z = at(h, m, m);
                r = x - z;
                s = y - z;
                p = (r * s - w) / at(h, m + 1, m) + at(h, m, m + 1);
                q = at(h, m + 1, m + 1) - z - r - s;
                r = at(h, m + 2, m + 1);
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let lhs = at(h, m, m - 1).abs() * (q.abs() + r.abs());
                let rhs = eps * (p.abs() * (at(h, m - 1, m - 1).abs() + z.abs() + at(h, m + 1, m + 1).abs()));
                if lhs < rhs {
                    break;
                }
                m -= 1;
            }

            for i in m + 2..=n {
                h[(i as usize, (i - 2) as usize)] = 0.0;
                if i > m + 2 {
                    h[(i as usize, (i - 3) as usize)] = 0.0;
                }
            }

            for k in m..n {
                let notlast = k != n - 1;
                if k != m {
                    p = at(h, k, k - 1);
                    q = at(h, k + 1, k - 1);
                    r = if notlast { at(h, k + 2, k - 1) } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                } else {
                    x = 0.0;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s == 0.0 {
                    continue;
                }
                let (ku, k1) = (k as usize, (k + 1) as usize);
                if k != m {
                    h[(ku, ku - 1)] = -s * x;
                } else if l != m {
                    h[(ku, ku - 1)] = -h[(ku, ku - 1)];
                }
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;

                for j in k..=n {
                    let j = j as usize;
                    let mut t = h[(ku, j)] + q * h[(k1, j)];
                    if notlast {
                        t += r * h[(ku + 2, j)];
                        h[(ku + 2, j)] -= t * z;
                    }
                    h[(ku, j)] -= t * x;
                    h[(k1, j)] -= t * y;
                }
                for i in l..=n.min(k + 3) {
                    let i = i as usize;
                    let mut t = x * h[(i, ku)] + y * h[(i, k1)];
                    if notlast {
                        t += z * h[(i, ku + 2)];
                        h[(i, ku + 2)] -= t * r;
                    }
                    h[(i, ku)] -= t;
                    h[(i, k1)] -= t * q;
                }
            }
        }
    }

    Ok(wr.into_iter().zip(wi).map(|(re, im)| Complex64::new(re, im)).collect())
}

/// Eigenvalues of a real square matrix: balancing, Hessenberg reduction and
/// Francis double-shift QR. Total QR sweeps are capped at 50·n.
pub fn real_eigenvalues(a: &Matrix<f64>) -> Result<Vec<Complex64>> {
    let mut h = a.clone();
    if h.n == 0 {
        return Ok(Vec::new());
    }
    if h.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("matrix has non-finite entries".into()));
    }
    balance(&mut h);
    real_hessenberg(&mut h);
    let cap = 50 * h.n.max(1);
    hqr(&mut h, cap)
}

fn complex_hessenberg(h: &mut Matrix<Complex64>) {
    let n = h.n;
    if n < 3 {
        return;
    }
    let mut v = vec![Complex64::default(); n];
    for k in 0..n - 2 {
        let norm: f64 = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        for i in k + 1..n {
            v[i] = h[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm2: f64 = (k + 1..n).map(|i| v[i].norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;
        for j in 0..n {
            let mut s = Complex64::default();
            for i in k + 1..n {
                s += v[i].conj() * h[(i, j)];
            }
            s *= tau;
            for i in k + 1..n {
                h[(i, j)] -= v[i] * s;
            }
        }
        for i in 0..n {
            let mut s = Complex64::default();
            for j in k + 1..n {
                s += h[(i, j)] * v[j];
            }
            s *= tau;
            for j in k + 1..n {
                h[(i, j)] -= s * v[j].conj();
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = Complex64::default();
        }
    }
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let mu1 = mid + disc;
    let mu2 = mid - disc;
    if (mu1 - d).norm() <= (mu2 - d).norm() {
        mu1
    } else {
        mu2
    }
}

/// Single-shift QR with Givens rotations on a complex upper Hessenberg
/// matrix; eigenvalues only.
fn complex_hqr(h: &mut Matrix<Complex64>, max_iterations: usize) -> Result<Vec<Complex64>> {
    let n = h.n;
    let mut eig = vec![Complex64::default(); n];
    let eps = f64::EPSILON;
    let mut norm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            norm += h[(i, j)].abs1();
        }
    }
    let mut hi = n as isize - 1;
    let mut its = 0usize;
    let mut total = 0usize;
    while hi >= 0 {
        let hu = hi as usize;
        let mut l = hu;
        while l > 0 {
            let mut tst = h[(l - 1, l - 1)].abs1() + h[(l, l)].abs1();
            if tst == 0.0 {
                tst = norm;
            }
            if h[(l, l - 1)].abs1() <= eps * tst {
                h[(l, l - 1)] = Complex64::default();
                break;
            }
            l -= 1;
        }
        if l == hu {
            eig[hu] = h[(hu, hu)];
            hi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        total += 1;
        if total > max_iterations {
            return Err(Error::Eigen {
                lo: l,
                hi: hu,
                iterations: total,
            });
        }
        let mu = if its.is_multiple_of(10) {
            h[(hu, hu)] + 0.75 * h[(hu, hu - 1)].re.abs()
        } else {
            wilkinson_shift(h[(hu - 1, hu - 1)], h[(hu - 1, hu)], h[(hu, hu - 1)], h[(hu, hu)])
        };

        let mut x = h[(l, l)] - mu;
        let mut y = h[(l + 1, l)];
        for k in l..hu {
            if k > l {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let xa = x.norm();
            let nrm = xa.hypot(y.norm());
            if nrm == 0.0 {
                continue;
            }
            let (c, s, r) = if xa == 0.0 {
                (
                    0.0,
                    Complex64::new(1.0, 0.0) * (y.conj() / y.norm()),
                    Complex64::new(y.norm(), 0.0),
                )
            } else {
                let phase = x / xa;
                (xa / nrm, phase * y.conj() / nrm, phase * nrm)
            };
            if k > l {
                h[(k, k - 1)] = r;
                h[(k + 1, k - 1)] = Complex64::default();
            }
            for j in k..=hu {
                let t1 = h[(k, j)];
                let t2 = h[(k + 1, j)];
                h[(k, j)] = t1 * c + s * t2;
                h[(k + 1, j)] = -s.conj() * t1 + t2 * c;
            }
            for i in l..=(k + 2).min(hu) {
                let t1 = h[(i, k)];
                let t2 = h[(i, k + 1)];
                h[(i, k)] = t1 * c + t2 * s.conj();
                h[(i, k + 1)] = -t1 * s + t2 * c;
            }
        }
    }
    Ok(eig)
}

/// Eigenvalues of a complex square matrix: balancing, Householder
/// reduction to Hessenberg form, then shifted QR. Sweeps capped at 50·n.
pub fn complex_eigenvalues(a: &Matrix<Complex64>) -> Result<Vec<Complex64>> {
    let mut h = a.clone();
    if h.n == 0 {
        return Ok(Vec::new());
    }
    if h.data.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Argument("matrix has non-finite entries".into()));
    }
    balance(&mut h);
    complex_hessenberg(&mut h);
    let cap = 50 * h.n.max(1);
    complex_hqr(&mut h, cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_by_re_im(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn tridiagonal_known_spectrum() {
        // second-difference matrix: eigenvalues 2 - 2cos(kπ/(n+1))
        let n = 40;
        let d = vec![2.0; n];
        let e = vec![-1.0; n - 1];
        let (vals, first) = symmetric_tridiagonal_eigen(&d, &e, true).unwrap();
        let first = first.unwrap();
        for (k, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * (k + 1) as f64 / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13);
        }
        let s: f64 = first.iter().map(|z| z * z).sum();
        assert!((s - 1.0).abs() < 1e-13);
    }

    #[test]
    fn real_eigenvalues_of_companion() {
        // (x-1)(x-2)(x-3)(x^2+1) = x^5 - 6x^4 + 12x^3 - 12x^2 + 11x - 6
        let coeffs = [-6.0, 11.0, -12.0, 12.0, -6.0];
        let n = 5;
        let a = Matrix::from_fn(n, |i, j| {
            if i == 0 {
                -coeffs[n - 1 - j]
            } else if i == j + 1 {
                1.0
            } else {
                0.0
            }
        });
        let got = sorted_by_re_im(real_eigenvalues(&a).unwrap());
        let want = [
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(3.0, 0.0),
        ];
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-10, "{g} vs {w}");
        }
    }

    #[test]
    fn real_path_matches_tridiagonal_path() {
        let n = 60;
        let d: Vec<f64> = (0..n).map(|i| ((i * 7) % 11) as f64 * 0.3 - 1.0).collect();
        let e: Vec<f64> = (0..n - 1).map(|i| 0.5 + ((i * 3) % 5) as f64 * 0.2).collect();
        let (sym, _) = symmetric_tridiagonal_eigen(&d, &e, false).unwrap();
        let a = Matrix::from_fn(n, |i, j| {
            if i == j {
                d[i]
            } else if i + 1 == j {
                e[i]
            } else if j + 1 == i {
                e[j]
            } else {
                0.0
            }
        });
        let mut gen: Vec<f64> = real_eigenvalues(&a)
            .unwrap()
            .iter()
            .map(|z| {
                assert!(z.im.abs() < 1e-12);
                z.re
            })
            .collect();
        gen.sort_by(|a, b| a.total_cmp(b));
        for (x, y) in sym.iter().zip(&gen) {
            assert!((x - y).abs() < 1e-11);
        }
    }

    #[test]
    fn complex_matches_real_on_real_input() {
        let n = 25;
        let a = Matrix::from_fn(n, |i, j| (((i * 31 + j * 17) % 13) as f64 - 6.0) / 3.0);
        let ac = Matrix::from_fn(n, |i, j| Complex64::new(a[(i, j)], 0.0));
        let r = real_eigenvalues(&a).unwrap();
        let c = complex_eigenvalues(&ac).unwrap();
        assert_eq!(r.len(), c.len());
        for x in &r {
            let nearest = c.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-9, "{x} has no partner");
        }
    }

    #[test]
    fn complex_diagonal_plus_strict_upper() {
        let n = 6;
        let diag: Vec<Complex64> = (0..n).map(|k| Complex64::new(k as f64, -(k as f64) * 0.5)).collect();
        let a = Matrix::from_fn(n, |i, j| {
            if i == j {
                diag[i]
            } else if j > i {
                Complex64::new(1.0, 1.0)
            } else {
                Complex64::default()
            }
        });
        let got = sorted_by_re_im(complex_eigenvalues(&a).unwrap());
        for (g, w) in got.iter().zip(&diag) {
            assert!((g - w).norm() < 1e-12);
        }
    }

    #[test]
    fn small_orders() {
        let a = Matrix::from_fn(1, |_, _| 3.5);
        assert_eq!(real_eigenvalues(&a).unwrap(), vec![Complex64::new(3.5, 0.0)]);
        let b = Matrix::from_fn(2, |i, j| [[0.0, -1.0], [1.0, 0.0]][i][j]);
        let ev = sorted_by_re_im(real_eigenvalues(&b).unwrap());
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }
}
