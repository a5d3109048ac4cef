use std::f64::consts::PI;

use gsqg_patch::contour::{FourierContour, PatchGeometry};
use gsqg_patch::functional::{FunctionalContext, G3Method, KernelParts, QuadratureConfig};
use gsqg_patch::green::GreenKernel;
use gsqg_patch::kr::{grad_w_m, KrConvention, VortexConfiguration};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GAMMA: f64 = 1.5;
const N: usize = 16;

fn ctx(kernel: GreenKernel) -> FunctionalContext {
    FunctionalContext::new(kernel, N, QuadratureConfig::default()).unwrap()
}

fn disc() -> GreenKernel {
    GreenKernel::disc(1.0, GAMMA).unwrap()
}

fn random_shape(rng: &mut ChaCha8Rng, n: usize, amp: f64) -> FourierContour {
    let mut g = FourierContour::zeros(n);
    for j in 2..=n {
        let s = amp / (j * j) as f64;
        g.set(j, rng.gen_range(-s..s), rng.gen_range(-s..s));
    }
    g
}

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn slope(eps: &[f64], err: &[f64]) -> f64 {
    let n = eps.len() as f64;
    let lx: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = err.iter().map(|e| e.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

fn pair(eps: f64, g: [&FourierContour; 2]) -> Vec<PatchGeometry> {
    vec![
        PatchGeometry::new([0.35, 0.1], 0.8, eps, GAMMA, g[0].clone()),
        PatchGeometry::new([-0.3, -0.2], 0.6, eps, GAMMA, g[1].clone()),
    ]
}

#[test]
fn kernel_parts_are_squared_distances() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = random_shape(&mut rng, N, 0.5);
    let h = random_shape(&mut rng, N, 0.5);
    let ps = pair(0.07, [&g, &h]);
    for _ in 0..50 {
        let (b, e) = (rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
        let k = KernelParts::at(&ps[0], &ps[1], b, e);
        let p = &ps[0];
        let (rb, re) = (p.radius(b), p.radius(e));
        let self_d2 = (rb * b.cos() - re * e.cos()).powi(2) + (rb * b.sin() - re * e.sin()).powi(2);
        assert!((p.rho * p.rho * k.a + p.delta() * k.b - self_d2).abs() < 1e-14);
        let (zi, zj) = (ps[0].boundary_point(b), ps[1].boundary_point(e));
        let cross_d2 = (zi[0] - zj[0]).powi(2) + (zi[1] - zj[1]).powi(2);
        assert!((k.a_ij + p.eps * k.b_ij - cross_d2).abs() < 1e-14);
    }
}

#[test]
fn g1_vanishes_on_circles() {
    let c = ctx(GreenKernel::free_space(GAMMA).unwrap());
    for eps in [0.0, 0.01, 0.2] {
        let p = vec![PatchGeometry::new([0.0, 0.0], 1.3, eps, GAMMA, FourierContour::zeros(N))];
        let g1 = c.eval_g1(&p, 0).unwrap();
        assert!(g1.iter().all(|v| v.abs() < 1e-14), "{eps}: {:?}", &g1[..4]);
    }
}

#[test]
fn g1_product_rule_matches_graded_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    // a finer grid keeps the aliased δ² products of the shape below the tolerance
    let c = FunctionalContext::new(GreenKernel::free_space(GAMMA).unwrap(), N, QuadratureConfig { grid_factor: 8, ..Default::default() }).unwrap();
    for eps in [0.0, 0.05, 0.3] {
        let g = random_shape(&mut rng, N, 2.0);
        let p = vec![PatchGeometry::new([0.0, 0.0], 0.9, eps, GAMMA, g)];
        let vals = c.eval_g1(&p, 0).unwrap();
        for q in [0, 5, 17, 40] {
            let beta = c.grid().beta(q);
            let graded = c.eval_g1_graded(&p[0], beta).unwrap();
            assert!((vals[q] - graded).abs() < 1e-11 * (1.0 + graded.abs()), "eps {eps} q {q}: {} vs {graded}", vals[q]);
        }
    }
}

#[test]
fn g1_limit_and_remainder_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let c = ctx(GreenKernel::free_space(GAMMA).unwrap());
    let g = random_shape(&mut rng, N, 1.0);
    let eps = [1e-2, 5e-3, 2.5e-3];
    let limit = c.limit_g1(1.0, &g);
    let errs: Vec<f64> = eps
        .iter()
        .map(|&e| {
            let p = vec![PatchGeometry::new([0.0, 0.0], 1.0, e, GAMMA, g.clone())];
            sup(&c.eval_g1(&p, 0).unwrap(), &limit)
        })
        .collect();
    let s = slope(&eps, &errs);
    assert!((s - (1.0 + GAMMA)).abs() < 0.2, "slope {s}, errors {errs:?}");
}

#[test]
fn gateaux_matches_central_difference_and_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let c = ctx(GreenKernel::free_space(GAMMA).unwrap());
    let g = random_shape(&mut rng, N, 2.0);
    let h = random_shape(&mut rng, N, 1.0);
    for eps in [0.0, 0.1, 0.3] {
        let at = |s: f64| vec![PatchGeometry::new([0.0, 0.0], 1.0, eps, GAMMA, g.add(&h.scaled(s)))];
        let d = c.gateaux_g1(&at(0.0), 0, &h).unwrap();
        let t = 1e-5;
        let fd: Vec<f64> = c
            .eval_g1(&at(t), 0)
            .unwrap()
            .iter()
            .zip(c.eval_g1(&at(-t), 0).unwrap())
            .map(|(a, b)| (a - b) / (2.0 * t))
            .collect();
        let scale = d.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        assert!(sup(&d, &fd) <= 1e-5 * scale, "eps {eps}: {}", sup(&d, &fd) / scale);
        let d2 = c.gateaux_g1(&at(0.0), 0, &h.scaled(2.0)).unwrap();
        for (a, b) in d.iter().zip(&d2) {
            assert!((2.0 * a - b).abs() <= 1e-13 * (1.0 + b.abs()));
        }
    }
}

#[test]
fn g1_rotational_covariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let c = ctx(GreenKernel::free_space(GAMMA).unwrap());
    let g = random_shape(&mut rng, N, 2.0);
    let shift = 7;
    let phi = c.grid().beta(shift);
    let p = vec![PatchGeometry::new([0.0, 0.0], 1.0, 0.2, GAMMA, g.clone())];
    let q = vec![PatchGeometry::new([0.0, 0.0], 1.0, 0.2, GAMMA, g.rotated(phi))];
    let a = c.eval_g1(&p, 0).unwrap();
    let b = c.eval_g1(&q, 0).unwrap();
    let m = a.len();
    for k in 0..m {
        assert!((b[(k + shift) % m] - a[k]).abs() < 1e-8);
    }
}

#[test]
fn g2_and_g3_remainders_are_first_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let c = ctx(disc());
    let g = random_shape(&mut rng, N, 1.0);
    let h = random_shape(&mut rng, N, 1.0);
    let eps = [1e-2, 5e-3, 2.5e-3];
    let base = pair(0.0, [&g, &h]);
    let l2 = c.limit_g2(&base, 0);
    let l3 = c.limit_g3(&base, 0).unwrap();
    let mut e2 = Vec::new();
    let mut e3 = Vec::new();
    for &e in &eps {
        let ps = pair(e, [&g, &h]);
        e2.push(sup(&c.eval_g2(&ps, 0).unwrap(), &l2));
        e3.push(sup(&c.eval_g3(&ps, 0).unwrap(), &l3));
    }
    let (s2, s3) = (slope(&eps, &e2), slope(&eps, &e3));
    assert!((s2 - 1.0).abs() < 0.2, "G2 slope {s2}: {e2:?}");
    assert!((s3 - 1.0).abs() < 0.2, "G3 slope {s3}: {e3:?}");
}

#[test]
fn g3_surrogate_matches_direct_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = random_shape(&mut rng, N, 1.0);
    let h = random_shape(&mut rng, N, 1.0);
    let ps = pair(0.04, [&g, &h]);
    let sur = ctx(disc());
    let direct = FunctionalContext::new(disc(), N, QuadratureConfig { g3: G3Method::Direct, ..Default::default() }).unwrap();
    for i in 0..2 {
        let a = sur.eval_g3(&ps, i).unwrap();
        let b = direct.eval_g3(&ps, i).unwrap();
        assert!(sup(&a, &b) < 1e-12, "patch {i}: {}", sup(&a, &b));
    }
}

#[test]
fn g3_trivial_cases() {
    let c = ctx(GreenKernel::free_space(GAMMA).unwrap());
    let ps = pair(0.05, [&FourierContour::single_cos(N, 3, 1.0), &FourierContour::zeros(N)]);
    assert!(c.eval_g3(&ps, 0).unwrap().iter().all(|v| *v == 0.0));
    let c = ctx(disc());
    let p = vec![PatchGeometry::new([0.0, 0.0], 1.0, 0.05, GAMMA, FourierContour::zeros(N))];
    assert!(c.eval_g3(&p, 0).unwrap().iter().all(|v| v.abs() < 1e-13));
}

#[test]
fn g2_empty_for_single_patch() {
    let c = ctx(disc());
    let p = vec![PatchGeometry::new([0.1, 0.0], 1.0, 0.05, GAMMA, FourierContour::single_sin(N, 2, 1.0))];
    assert!(c.eval_g2(&p, 0).unwrap().iter().all(|v| *v == 0.0));
}

#[test]
fn weighted_mean_of_g_vanishes() {
    // the normal velocity of a divergence-free field has zero flux through the
    // boundary: ∫ R_i G_i dβ = 0
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let c = ctx(disc());
    let g = random_shape(&mut rng, N, 1.0);
    let h = random_shape(&mut rng, N, 1.0);
    for eps in [0.0, 0.02, 0.06] {
        let ps = pair(eps, [&g, &h]);
        for i in 0..2 {
            let v = c.eval_g(&ps, i).unwrap().total();
            let m = v.len();
            let mean: f64 = (0..m).map(|q| ps[i].radius(c.grid().beta(q)) * v[q]).sum::<f64>() / m as f64;
            assert!(mean.abs() < 1e-11, "eps {eps} patch {i}: {mean}");
        }
    }
}

#[test]
fn self_convergence_under_grid_doubling() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = random_shape(&mut rng, N, 1.0);
    let h = random_shape(&mut rng, N, 1.0);
    let ps = pair(0.05, [&g, &h]);
    let coarse = ctx(disc());
    let fine = FunctionalContext::new(disc(), N, QuadratureConfig { grid_factor: 8, ..Default::default() }).unwrap();
    for i in 0..2 {
        let a = coarse.eval_g(&ps, i).unwrap().total();
        let b = fine.eval_g(&ps, i).unwrap().total();
        let scale = a.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        for (q, v) in a.iter().enumerate() {
            assert!((v - b[2 * q]).abs() <= 1e-7 * scale, "{q}: {v} vs {}", b[2 * q]);
        }
    }
}

#[test]
fn center_terms_reproduce_kr_gradient() {
    // at ε = 0, g = 0, G_i = V_i·(sin β, -cos β) and ∂W/∂x_i = 2κ_i V_i
    let c = ctx(disc());
    let ps = pair(0.0, [&FourierContour::zeros(N), &FourierContour::zeros(N)]);
    let cfg = VortexConfiguration::new(
        ps.iter().map(|p| p.center).collect(),
        ps.iter().map(|p| PI * p.rho * p.rho).collect(),
    )
    .unwrap();
    let grad = grad_w_m(c.kernel(), &cfg, KrConvention::ContourConsistent).unwrap();
    for i in 0..2 {
        let v = c.eval_g(&ps, i).unwrap().total();
        let m = v.len() as f64;
        let s: f64 = v.iter().enumerate().map(|(q, x)| x * c.grid().sin[q]).sum::<f64>() * 2.0 * PI / m;
        let co: f64 = v.iter().enumerate().map(|(q, x)| x * c.grid().cos[q]).sum::<f64>() * 2.0 * PI / m;
        let k = cfg.strengths[i];
        assert!((s - PI / (2.0 * k) * grad[2 * i]).abs() < 1e-12);
        assert!((co + PI / (2.0 * k) * grad[2 * i + 1]).abs() < 1e-12);
    }
}

#[test]
fn geometry_guards() {
    let c = ctx(disc());
    let big = FourierContour::single_cos(N, 2, 1e6);
    let p = vec![PatchGeometry::new([0.0, 0.0], 1.0, 0.5, GAMMA, big)];
    assert!(matches!(c.eval_g(&p, 0), Err(gsqg_patch::Error::Geometry { .. })));
    let ps = vec![
        PatchGeometry::new([0.0, 0.0], 1.0, 0.2, GAMMA, FourierContour::zeros(N)),
        PatchGeometry::new([0.3, 0.0], 1.0, 0.2, GAMMA, FourierContour::zeros(N)),
    ];
    assert!(matches!(c.eval_g(&ps, 0), Err(gsqg_patch::Error::Geometry { term: "separation", .. })));
    let p = vec![PatchGeometry::new([0.9, 0.0], 1.0, 0.2, GAMMA, FourierContour::zeros(N))];
    assert!(matches!(c.eval_g(&p, 0), Err(gsqg_patch::Error::Geometry { term: "boundary", .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn linear_at_eps_zero(seed in 0u64..1000, s in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = ctx(disc());
        let g = random_shape(&mut rng, N, 1.0);
        let h = random_shape(&mut rng, N, 1.0);
        let zero = FourierContour::zeros(N);
        let eval = |a: &FourierContour| c.eval_g(&pair(0.0, [a, &zero]), 0).unwrap().total();
        let base = eval(&zero);
        let lhs: Vec<f64> = eval(&g.add(&h.scaled(s))).iter().zip(&base).map(|(a, b)| a - b).collect();
        let rg = eval(&g);
        let rh = eval(&h);
        for q in 0..lhs.len() {
            let rhs = (rg[q] - base[q]) + s * (rh[q] - base[q]);
            prop_assert!((lhs[q] - rhs).abs() < 1e-8);
        }
    }
}
