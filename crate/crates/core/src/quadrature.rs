//! Quadrature building blocks: Gauss–Legendre rules, geometrically graded
//! composite rules, and a globally adaptive Gauss–Kronrod (7/15) integrator.

use crate::error::{Error, Result};
use crate::stats::pairwise_sum;

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1], nodes
/// ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    let d = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}

/// A fixed rule on [-1, 1] that can be mapped onto arbitrary panels.
#[derive(Debug, Clone)]
pub struct FixedRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl FixedRule {
    pub fn gauss_legendre(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Push the nodes and weights mapped onto [a, b].
    pub fn map_onto(&self, a: f64, b: f64, nodes: &mut Vec<f64>, weights: &mut Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            nodes.push(mid + half * x);
            weights.push(half * w);
        }
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Integrate over [0, len] using panels [0, h], [h, 2h], [2h, 4h], ...
    /// so that an integrand varying on scale `h` near the origin is resolved.
    pub fn integrate_graded(&self, len: f64, h: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        if len <= 0.0 {
            return 0.0;
        }
        if h <= 0.0 || h >= len {
            return self.integrate(0.0, len, f);
        }
        let mut parts = Vec::new();
        let mut lo = 0.0;
        let mut hi = h;
        loop {
            let top = hi.min(len);
            parts.push(self.integrate(lo, top, &mut f));
            if top >= len {
                break;
            }
            lo = top;
            hi = 2.0 * top;
            // a last sliver would be badly scaled; fold it into this panel
            if hi < len && len - hi < 0.5 * (hi - lo) {
                hi = len;
            }
        }
        pairwise_sum(&parts)
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment { a, b, value, error }
}

/// Tolerances and limits for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            rel_tol: 0.0,
            max_subdivisions: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Globally adaptive Gauss–Kronrod integration over [a, b], with the
/// initial partition seeded by `breakpoints` (those outside (a, b) are
/// ignored). The final reduction is a pairwise sum over segments in
/// ascending order, so the result is bit-reproducible.
pub fn integrate_adaptive(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    config: &AdaptiveConfig,
) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Argument(format!(
            "integration limits must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&p| p > lo && p < hi).collect();
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(lo);
    edges.extend(cuts);
    edges.push(hi);

    let mut segments: Vec<Segment> = edges.windows(2).map(|w| gk15(&mut f, w[0], w[1])).collect();
    let mut evaluations = 15 * segments.len();

    loop {
        let total_error: f64 = segments.iter().map(|s| s.error).sum();
        let total_value: f64 = segments.iter().map(|s| s.value).sum();
        let tolerance = config.abs_tol.max(config.rel_tol * total_value.abs());
        if total_error <= tolerance {
            break;
        }
        if segments.len() >= config.max_subdivisions {
            return Err(Error::Quadrature {
                a,
                b,
                subdivisions: segments.len(),
                achieved: total_error,
                tolerance,
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // interval below floating resolution; keep it and give up on it
            return Err(Error::Quadrature {
                a,
                b,
                subdivisions: segments.len() + 1,
                achieved: total_error,
                tolerance,
            });
        }
        segments.push(gk15(&mut f, seg.a, mid));
        segments.push(gk15(&mut f, mid, seg.b));
        evaluations += 30;
    }

    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let values: Vec<f64> = segments.iter().map(|s| s.value).collect();
    let errors: Vec<f64> = segments.iter().map(|s| s.error).collect();
    Ok(Integral {
        value: sign * pairwise_sum(&values),
        error: pairwise_sum(&errors),
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        for n in [1usize, 2, 5, 16, 64, 128] {
            let rule = FixedRule::gauss_legendre(n);
            let wsum: f64 = rule.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13, "n = {n}");
            let deg = 2 * n - 1;
            // ∫_{-1}^{1} x^{deg-1} dx for even exponent
            let e = if (deg - 1) % 2 == 0 { deg - 1 } else { deg - 2 };
            let got = rule.integrate(-1.0, 1.0, |x| x.powi(e as i32));
            assert!((got - 2.0 / (e as f64 + 1.0)).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        let (x, w) = gauss_legendre(33);
        for i in 1..x.len() {
            assert!(x[i] > x[i - 1]);
        }
        for i in 0..x.len() {
            assert!((x[i] + x[x.len() - 1 - i]).abs() < 1e-15);
            assert!((w[i] - w[x.len() - 1 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn graded_rule_handles_scale_near_origin() {
        // ∫_0^1 (h² + t²)^{-1/4} dt with h = 1e-6, reference from the
        // substitution t = h sinh(v)
        let h = 1e-6_f64;
        let rule = FixedRule::gauss_legendre(32);
        let got = rule.integrate_graded(1.0, h, |t| (h * h + t * t).powf(-0.25));
        let vmax = (1.0 / h).asinh();
        let reference = h.sqrt() * FixedRule::gauss_legendre(64).integrate_graded(vmax, 1.0, |v| v.cosh().sqrt());
        assert!((got - reference).abs() < 1e-11, "{got} vs {reference}");
    }

    #[test]
    fn adaptive_smooth_and_peaked() {
        let cfg = AdaptiveConfig {
            abs_tol: 1e-12,
            ..Default::default()
        };
        let r = integrate_adaptive(|x| x.sin(), 0.0, PI, &[], &cfg).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        let rel = AdaptiveConfig {
            abs_tol: 0.0,
            rel_tol: 1e-12,
            ..Default::default()
        };
        let r = integrate_adaptive(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, &[0.0], &rel).unwrap();
        let exact = 2.0 * (1.0 / 1e-2_f64) * (1.0 / 1e-2_f64).atan();
        assert!((r.value - exact).abs() < 1e-9 * exact);
        let r = integrate_adaptive(|x| x.sqrt(), 0.0, 1.0, &[], &cfg).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_reports_failure() {
        let cfg = AdaptiveConfig {
            abs_tol: 1e-14,
            rel_tol: 0.0,
            max_subdivisions: 5,
        };
        let err = integrate_adaptive(|x| (1.0 / x).sin(), 1e-3, 1.0, &[], &cfg).unwrap_err();
        match err {
            Error::Quadrature { achieved, .. } => assert!(achieved > 1e-14),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let cfg = AdaptiveConfig::default();
        let fwd = integrate_adaptive(|x| x * x, 0.0, 2.0, &[], &cfg).unwrap();
        let back = integrate_adaptive(|x| x * x, 2.0, 0.0, &[], &cfg).unwrap();
        assert_eq!(fwd.value, -back.value);
    }
}
