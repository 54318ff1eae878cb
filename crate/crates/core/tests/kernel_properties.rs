use fracwave_core::mlf::{kernel_antiderivative, kernel_beta, ml_integral, ml_series, MlParams};
use proptest::prelude::*;

const TAU: f64 = 0.5;

fn lower_bound(alpha: f64, s: f64) -> f64 {
    1.0 / (1.0 + libm::tgamma(1.0 - alpha) * s.powf(alpha))
}

fn upper_bound(alpha: f64, s: f64) -> f64 {
    let g = libm::tgamma(1.0 + alpha);
    g / (g + s.powf(alpha))
}

fn alpha_strategy() -> impl Strategy<Value = f64> {
    (1u32..=9).prop_map(|k| k as f64 / 10.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kernel_within_bracket(alpha in alpha_strategy(), t in 1e-4f64..=1.0) {
        let v = kernel_beta(alpha, TAU, t).unwrap();
        let s = t / TAU;
        prop_assert!(v >= lower_bound(alpha, s) - 1e-14, "alpha {} t {}: {}", alpha, t, v);
        prop_assert!(v <= upper_bound(alpha, s) + 1e-14, "alpha {} t {}: {}", alpha, t, v);
    }

    #[test]
    fn kernel_decreasing(alpha in alpha_strategy(), t in 1e-3f64..0.95) {
        let a = kernel_beta(alpha, TAU, t).unwrap();
        let b = kernel_beta(alpha, TAU, t * 1.05).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn series_and_integral_agree_on_overlap(alpha in 0.05f64..0.95, z in 0.05f64..=1.0) {
        let series = ml_series(MlParams::single(alpha).unwrap(), -z).unwrap();
        let integral = ml_integral(alpha, z.powf(1.0 / alpha)).unwrap();
        prop_assert!((series - integral).abs() < 1e-10, "{} vs {}", series, integral);
    }

    #[test]
    fn antiderivative_differentiates_to_kernel(alpha in alpha_strategy(), x in 0.02f64..1.0) {
        let h = 1e-5;
        let fd = (kernel_antiderivative(alpha, TAU, x + h).unwrap()
            - kernel_antiderivative(alpha, TAU, x - h).unwrap())
            / (2.0 * h);
        let k = kernel_beta(alpha, TAU, x).unwrap();
        prop_assert!((fd - k).abs() < 1e-6, "{} vs {}", fd, k);
    }
}

#[test]
fn bracket_on_thousand_point_grid() {
    let mut checked = 0;
    for k in 1..=9 {
        let alpha = k as f64 / 10.0;
        for i in 1..=112 {
            let t = i as f64 / 112.0;
            let v = kernel_beta(alpha, TAU, t).unwrap();
            let s = t / TAU;
            assert!(lower_bound(alpha, s) <= v + 1e-14 && v <= upper_bound(alpha, s) + 1e-14);
            checked += 1;
        }
    }
    assert!(checked >= 1000);
}

#[test]
fn slope_scaled_by_power_stays_bounded() {
    for alpha in [0.2, 0.5, 0.8] {
        let products: Vec<f64> = (0..200)
            .map(|i| {
                let t = 0.01 * (100f64).powf(i as f64 / 199.0);
                let h = 1e-4 * t;
                let slope = (kernel_beta(alpha, TAU, t + h).unwrap() - kernel_beta(alpha, TAU, t - h).unwrap()) / (2.0 * h);
                slope.abs() * t.powf(alpha + 1.0)
            })
            .collect();
        let mut sorted = products.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        let max = sorted[sorted.len() - 1];
        assert!(max <= 10.0 * median, "alpha {alpha}: max {max}, median {median}");
    }
}

#[test]
fn half_order_matches_erfc() {
    for x in [0.1f64, 0.5, 1.0, 2.0, 3.5] {
        let expect = (x * x).exp() * libm::erfc(x);
        let v = kernel_beta(0.5, 1.0, x * x).unwrap();
        assert!((v - expect).abs() < 1e-8, "x {x}: {v} vs {expect}");
    }
}
