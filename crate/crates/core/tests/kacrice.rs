use std::f64::consts::PI;
use std::sync::OnceLock;

use freud_zeros::kacrice::{
    expected_zeros, expected_zeros_realline, expected_zeros_scaled, intensity, BasisEvaluator, MonomialBasis,
    OrthonormalBasis,
};
use freud_zeros::orthopoly::{compute_recurrence, RecurrenceTable};
use freud_zeros::quadrature::FixedRule;
use freud_zeros::weight::FreudWeight;
use proptest::prelude::*;

fn hermite() -> &'static RecurrenceTable {
    static T: OnceLock<RecurrenceTable> = OnceLock::new();
    T.get_or_init(|| compute_recurrence(&FreudWeight::hermite(), 220).unwrap())
}

/// Kac's monomial A, B, C summed term by term.
fn kac_direct(n: usize, x: f64) -> f64 {
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for j in 0..=n {
        let jf = j as f64;
        a += x.powi(2 * j as i32);
        if j > 0 {
            b += jf * x.powi(2 * j as i32 - 1);
            c += jf * jf * x.powi(2 * j as i32 - 2);
        }
    }
    (a * c - b * b).max(0.0).sqrt() / (PI * a)
}

/// Kac's closed form, valid away from x = ±1.
fn kac_closed(n: usize, x: f64) -> f64 {
    let m = (n + 1) as f64;
    let x2 = x * x;
    let t = 1.0 / (x2 - 1.0).powi(2) - m * m * x.powi(2 * n as i32) / (x.powi(2 * n as i32 + 2) - 1.0).powi(2);
    t.max(0.0).sqrt() / PI
}

#[test]
fn monomial_matches_kac_oracle() {
    let rule = FixedRule::gauss_legendre(20);
    for &n in &[5usize, 20] {
        let basis = MonomialBasis { n };
        for i in 0..50 {
            let x = i as f64 / 50.0 * 0.95;
            let direct = kac_direct(n, x);
            assert!((intensity(&basis, x) - direct).abs() < 1e-12 * direct.max(1.0));
            assert!((kac_closed(n, x) - direct).abs() < 1e-9 * direct.max(1.0));
        }
        let panels = 200;
        let oracle: f64 = (0..panels)
            .map(|p| {
                let lo = p as f64 / panels as f64;
                rule.integrate(lo, lo + 1.0 / panels as f64, |x| kac_direct(n, x))
            })
            .sum();
        let got = expected_zeros(&basis, 0.0, 1.0).unwrap();
        assert!((got - oracle).abs() < 1e-8, "n = {n}: {got} vs {oracle}");
    }
}

#[test]
fn monomial_degree_one_is_cauchy() {
    let b = MonomialBasis { n: 1 };
    for i in -40..=40 {
        let x = i as f64 * 0.25;
        assert!((intensity(&b, x) - 1.0 / (PI * (1.0 + x * x))).abs() < 1e-12);
    }
}

struct Scaled<B>(B, f64);

impl<B: BasisEvaluator> BasisEvaluator for Scaled<B> {
    fn degree(&self) -> usize {
        self.0.degree()
    }
    fn eval_into(&self, x: f64, values: &mut Vec<f64>, derivatives: &mut Vec<f64>) -> f64 {
        let s = self.0.eval_into(x, values, derivatives);
        values.iter_mut().for_each(|v| *v *= self.1);
        derivatives.iter_mut().for_each(|v| *v *= self.1);
        s
    }
}

#[test]
fn intensity_is_scale_invariant() {
    let t = hermite();
    let base = OrthonormalBasis::new(t, 40).unwrap();
    for &k in &[1e-3, 0.7, 5.0, 1e4] {
        let scaled = Scaled(base, k);
        for i in -30..=30 {
            let x = i as f64 * 0.4;
            let r0 = intensity(&base, x);
            let r1 = intensity(&scaled, x);
            assert!((r0 - r1).abs() <= 1e-12 * r0.max(1.0), "x = {x}");
        }
    }
}

#[test]
fn hermite_realline_counts() {
    let t = hermite();
    let mut ratios = Vec::new();
    for &n in &[25usize, 50, 100, 200] {
        let e = expected_zeros_realline(t, n).unwrap();
        assert!(e >= 0.0 && e <= n as f64);
        ratios.push(e / n as f64);
    }
    // frozen from an independent double-exponential quadrature of the same
    // integrand (core plus inverted tails)
    let frozen = [0.611_25, 0.595_93, 0.587_43, 0.582_78];
    for (r, f) in ratios.iter().zip(&frozen) {
        assert!((r - f).abs() < 5e-5, "{r} vs {f}");
    }
    for w in ratios.windows(2) {
        assert!(w[1] < w[0]);
    }
    assert!((ratios[3] - 1.0 / 3f64.sqrt()).abs() <= 0.05);
}

#[test]
fn hermite_scaled_middle_count() {
    let e = expected_zeros_scaled(hermite(), 200, -0.5, 0.5).unwrap() / 200.0;
    let target = (3f64.sqrt() / (2.0 * PI) + 1.0 / 3.0) / 3f64.sqrt();
    assert!((e - target).abs() <= 0.03, "{e} vs {target}");
}

#[test]
fn quartic_realline_is_finite_and_bounded() {
    let t = compute_recurrence(&FreudWeight::new(1.0, 4.0).unwrap(), 60).unwrap();
    let e = expected_zeros_realline(&t, 60).unwrap();
    assert!(e > 0.4 * 60.0 && e < 0.8 * 60.0, "{e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn additivity(a in -15.0f64..15.0, w1 in 0.01f64..8.0, w2 in 0.01f64..8.0, n in 1usize..=60) {
        let basis = OrthonormalBasis::new(hermite(), n).unwrap();
        let (b, c) = (a + w1, a + w1 + w2);
        let whole = expected_zeros(&basis, a, c).unwrap();
        let parts = expected_zeros(&basis, a, b).unwrap() + expected_zeros(&basis, b, c).unwrap();
        prop_assert!((whole - parts).abs() <= 2e-8);
        prop_assert!(whole <= n as f64);
    }

    #[test]
    fn scaled_symmetry_and_nesting(a in -0.95f64..0.9, w in 0.01f64..0.5, shrink in 0.0f64..1.0, n in 1usize..=80) {
        let b = (a + w).min(0.95);
        let t = hermite();
        let right = expected_zeros_scaled(t, n, a, b).unwrap();
        let left = expected_zeros_scaled(t, n, -b, -a).unwrap();
        prop_assert!((right - left).abs() <= 1e-8);
        let inner_a = a + 0.5 * shrink * (b - a);
        let inner = expected_zeros_scaled(t, n, inner_a, b).unwrap();
        prop_assert!(inner <= right + 1e-8);
    }
}
