use gsqg_patch::green::{alt_series, alt_series_derivative, GradientMethod, GreenKernel};
use gsqg_patch::special::c_gamma;
use gsqg_patch::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// 40-digit values of the disc kernel through the hypergeometric form of the
// incomplete integral, γ = 1.5.
const CASES: [([f64; 2], [f64; 2], f64, f64, f64, [f64; 2]); 4] = [
    ([0.3, 0.1], [-0.2, 0.4], 1.0, 0.9187985449107879495226, -0.1547174768800611642419, [0.0039796883175082345067, -0.060561370629972443476]),
    ([0.1, 0.0], [0.7, -0.5], 1.0, 0.4678288987493612278368, -0.2246720010129548594938, [-0.17553602303093218311, 0.13140700060851748853]),
    ([0.5, 0.5], [0.52, 0.47], 1.0, 69.41720294302923710227, -0.399639604207124249071, [-0.62453564771500770443, -0.55748687390666189595]),
    ([0.6, -0.2], [-0.6, 0.2], 2.0, 0.2862456996998911020642, -0.04974536755572007073557, [0.0012889940178035245395, -0.00042966467260117488624]),
];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn random_point(rng: &mut ChaCha8Rng, rmax: f64) -> [f64; 2] {
    loop {
        let p = [rng.gen_range(-rmax..rmax), rng.gen_range(-rmax..rmax)];
        if p[0].hypot(p[1]) < rmax {
            return p;
        }
    }
}

#[test]
fn disc_kernel_reference_values() {
    for (x, y, a, k, k0, grad) in CASES {
        let kern = GreenKernel::disc(a, 1.5).unwrap();
        assert!(rel(kern.green(x, y).unwrap(), k) < 1e-13);
        assert!(rel(kern.k0(x, y).unwrap(), k0) < 1e-12);
        let g = kern.grad_x_k0(x, y).unwrap();
        for c in 0..2 {
            assert!((g[c] - grad[c]).abs() < 1e-11 * (1.0 + grad[c].abs()), "{g:?} vs {grad:?}");
        }
    }
}

#[test]
fn diagonal_values() {
    let kern = GreenKernel::disc(1.0, 1.5).unwrap();
    assert!(rel(kern.k0([0.3, 0.1], [0.3, 0.1]).unwrap(), -0.1680071714684653305857) < 1e-13);
    assert!(rel(kern.k0([0.0, 0.0], [0.0, 0.0]).unwrap(), -0.1434470377723576860686) < 1e-13);
}

#[test]
fn k1_values_and_homogeneity() {
    let unit = GreenKernel::free_space(1.0).unwrap();
    assert!((unit.k1([0.0, 0.0], [1.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
    let kern = GreenKernel::free_space(1.5).unwrap();
    let c = c_gamma(1.5).unwrap();
    assert!(rel(kern.k1([0.0, 0.0], [0.0, 2.0]).unwrap(), c * 2f64.powf(-1.5)) < 1e-15);
    let d = 0.37;
    let near = kern.k1([0.1, 0.0], [0.1 + d, 0.0]).unwrap();
    let far = kern.k1([0.1, 0.0], [0.1 + 2.0 * d, 0.0]).unwrap();
    assert!(rel(far, near * 2f64.powf(-1.5)) < 1e-14);
    assert!(matches!(kern.k1([0.2, 0.2], [0.2, 0.2]), Err(Error::Singular(_))));
}

#[test]
fn free_space_has_no_remainder() {
    let kern = GreenKernel::free_space(1.5).unwrap();
    assert_eq!(kern.k0([0.3, -4.0], [7.0, 1.0]).unwrap(), 0.0);
    assert_eq!(kern.grad_x_k0([0.3, -4.0], [7.0, 1.0]).unwrap(), [0.0, 0.0]);
}

#[test]
fn outside_points_rejected() {
    let kern = GreenKernel::disc(1.0, 1.5).unwrap();
    assert!(matches!(kern.k0([1.0, 0.0], [0.0, 0.0]), Err(Error::OutsideDomain { .. })));
    assert!(matches!(kern.green([0.0, 0.0], [0.8, 0.8]), Err(Error::OutsideDomain { .. })));
    assert!(matches!(kern.green([0.1, 0.0], [0.1, 0.0]), Err(Error::Singular(_))));
}

#[test]
fn green_vanishes_toward_boundary_monotonically() {
    let kern = GreenKernel::disc(1.0, 1.5).unwrap();
    let x = [0.2, -0.1];
    let mut last = f64::INFINITY;
    for k in 1..40 {
        let r = 1.0 - 0.5f64.powi(k);
        let v = kern.green(x, [r * 0.6, r * 0.8]).unwrap();
        assert!(v > 0.0 && v < last);
        last = v;
    }
    // decay rate is (distance)^{1-γ/2}
    assert!(last < 5e-3);
}

#[test]
fn green_symmetric_and_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for gamma in [1.25, 1.5, 1.75] {
        let kern = GreenKernel::disc(1.0, gamma).unwrap();
        for _ in 0..2500 {
            let x = random_point(&mut rng, 0.999);
            let y = random_point(&mut rng, 0.999);
            let a = kern.green(x, y).unwrap();
            let b = kern.green(y, x).unwrap();
            assert!(a >= 0.0);
            assert!((a - b).abs() <= 1e-12 * a.abs());
            let a0 = kern.k0(x, y).unwrap();
            let b0 = kern.k0(y, x).unwrap();
            assert!((a0 - b0).abs() <= 1e-10 * (1.0 + a0.abs()));
        }
    }
}

#[test]
fn near_diagonal_limit_is_c_gamma() {
    let kern = GreenKernel::disc(1.0, 1.5).unwrap();
    let c = kern.param().c_gamma;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let x = random_point(&mut rng, 0.9);
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let d = rng.gen_range(1e-7..1e-4);
        let y = [x[0] + d * theta.cos(), x[1] + d * theta.sin()];
        if y[0].hypot(y[1]) >= 0.9 {
            continue;
        }
        let v = kern.green(x, y).unwrap() * d.powf(1.5);
        assert!((v - c).abs() <= 1e-4, "{v} vs {c}");
    }
    // extrapolated limit over distances 1e-2 .. 1e-5 pins the normalization
    let x = [0.1, 0.2];
    let vals: Vec<f64> = [1e-2, 1e-3, 1e-4, 1e-5]
        .iter()
        .map(|&d| kern.green(x, [x[0] + d, x[1]]).unwrap() * d.powf(1.5))
        .collect();
    // the correction is K⁰(x,x) d^γ, so the last value is already within 1e-7·|K⁰|
    assert!((vals[3] - c).abs() < 1e-7);
    assert!((vals[0] - c).abs() > (vals[3] - c).abs());
}

#[test]
fn k0_diagonal_by_extrapolation() {
    let kern = GreenKernel::disc(1.0, 1.5).unwrap();
    let exact = kern.k0([0.0, 0.0], [0.0, 0.0]).unwrap();
    // K - K¹ along y → 0 is K⁰(0,0) + O(|y|²); Richardson in h² on naive differences
    let naive = |h: f64| kern.green([0.0, 0.0], [h, 0.0]).unwrap() - kern.k1([0.0, 0.0], [h, 0.0]).unwrap();
    let (a, b) = (naive(0.02), naive(0.01));
    let extrapolated = (4.0 * b - a) / 3.0;
    assert!((extrapolated - exact).abs() < 1e-7, "{extrapolated} vs {exact}");
}

#[test]
fn k0_smooth_across_diagonal() {
    let kern = GreenKernel::disc(1.0, 1.5).unwrap();
    let y = [0.25, -0.3];
    let h = 1e-3;
    let f = |t: f64| kern.k0([y[0] + t, y[1] + 0.5 * t], y).unwrap();
    let mut max_second = 0.0f64;
    for k in -20..=20 {
        let t = k as f64 * h * 0.5;
        let second = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
        max_second = max_second.max(second.abs());
    }
    assert!(max_second < 10.0, "second difference {max_second}");
}

#[test]
fn gradient_at_center_vanishes() {
    for gamma in [1.25, 1.5, 1.75] {
        let kern = GreenKernel::disc(1.0, gamma).unwrap();
        let g = kern.grad_x_k0([0.0, 0.0], [0.0, 0.0]).unwrap();
        assert!(g[0].abs() <= 1e-10 && g[1].abs() <= 1e-10);
        let fd = kern.grad_x_k0_fd([0.0, 0.0], [0.0, 0.0], 1e-3).unwrap();
        assert!(fd[0].abs() <= 1e-10 && fd[1].abs() <= 1e-10);
    }
}

#[test]
fn gradient_two_stencils_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let kern = GreenKernel::disc(1.0, 1.5).unwrap();
    let fd = kern.clone().with_gradient(GradientMethod::FiniteDifference, Some(2e-3));
    for _ in 0..50 {
        let x = random_point(&mut rng, 0.85);
        let y = random_point(&mut rng, 0.85);
        let a = kern.grad_x_k0(x, y).unwrap();
        let b = fd.grad_x_k0(x, y).unwrap();
        let c = kern.grad_x_k0_fd(x, y, 5e-3).unwrap();
        for k in 0..2 {
            assert!((a[k] - b[k]).abs() <= 1e-6 * (1.0 + a[k].abs()), "{a:?} {b:?}");
            assert!((b[k] - c[k]).abs() <= 1e-6 * (1.0 + b[k].abs()), "{b:?} {c:?}");
        }
    }
}

#[test]
fn radius_scaling() {
    let unit = GreenKernel::disc(1.0, 1.5).unwrap();
    let big = GreenKernel::disc(3.0, 1.5).unwrap();
    let (x, y) = ([0.2, 0.1], [-0.4, 0.3]);
    let scaled = big.k0([3.0 * x[0], 3.0 * x[1]], [3.0 * y[0], 3.0 * y[1]]).unwrap();
    assert!(rel(scaled, 3f64.powf(-1.5) * unit.k0(x, y).unwrap()) < 1e-13);
}

#[test]
fn alternating_series_branches_agree() {
    // both summation paths at the switch point, and the derivative identity
    for a in [0.25, 0.75, 1.25] {
        let q = 0.5;
        let direct: f64 = (0..200).map(|n| (-q as f64).powi(n) / (n as f64 + a)).sum();
        assert!((alt_series(q, a) - direct).abs() < 1e-15);
        let q = 0.999;
        let h = 1e-6;
        let fd = (alt_series(q, a) - alt_series(q - h, a)) / h;
        assert!((alt_series_derivative(q - 0.5 * h, a) - fd).abs() < 1e-6);
        // F(1, 1) = ln 2
        assert!((alt_series(1.0, 1.0) - std::f64::consts::LN_2).abs() < 1e-15);
    }
}

proptest! {
    #[test]
    fn k0_symmetry_random(x0 in -0.65f64..0.65, x1 in -0.65f64..0.65, y0 in -0.65f64..0.65, y1 in -0.65f64..0.65) {
        let kern = GreenKernel::disc(1.0, 1.5).unwrap();
        let a = kern.k0([x0, x1], [y0, y1]).unwrap();
        let b = kern.k0([y0, y1], [x0, x1]).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }
}
