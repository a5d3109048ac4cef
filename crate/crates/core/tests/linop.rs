use std::f64::consts::PI;

use gsqg_patch::contour::{project_modes, FourierContour, Grid};
use gsqg_patch::functional::{FunctionalContext, QuadratureConfig};
use gsqg_patch::green::GreenKernel;
use gsqg_patch::kr::{hess_w_m, symmetric_pair, KrConvention, VortexConfiguration};
use gsqg_patch::linop::*;
use gsqg_patch::solver::ContinuationState;
use gsqg_patch::special::sigma;
use gsqg_patch::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_shape(rng: &mut ChaCha8Rng, n: usize) -> FourierContour {
    let mut g = FourierContour::zeros(n);
    for j in 2..=n {
        g.set(j, rng.gen_range(-1.0..1.0) / j as f64, rng.gen_range(-1.0..1.0) / j as f64);
    }
    g
}

#[test]
fn single_modes() {
    let op = SpectralOperator::new(1.5, vec![1.0, 0.8], 12).unwrap();
    let s2 = sigma(2, 1.5).unwrap();
    let img = op.apply_l0(0, &FourierContour::single_cos(12, 2, 1.0));
    assert_eq!(img.b(2), 2.0 * s2);
    assert_eq!(img.a(2), 0.0);
    for j in 2..=12 {
        let img = op.apply_l0(1, &FourierContour::single_sin(12, j, 1.0));
        let want = -sigma(j as u32, 1.5).unwrap() * j as f64 / 0.8f64.powf(1.5);
        assert!((img.a(j) - want).abs() < 1e-14 * want.abs());
        assert_eq!(img.b(j), 0.0);
    }
}

#[test]
fn gateaux_quadrature_matches_closed_form() {
    let mut worst = 0.0f64;
    for gamma in [1.25, 1.5, 1.75] {
        for rho in [1.0, 0.7] {
            let op = SpectralOperator::new(gamma, vec![rho], 20).unwrap();
            for j in 2..=20 {
                let want = op.multiplier(0, j);
                // cos jβ ↦ want · sin jβ, read where sin jβ = 1
                let c = gateaux_quadrature_mode(gamma, rho, j, false, PI / (2.0 * j as f64), 1e-14).unwrap();
                // sin jβ ↦ -want · cos jβ, read at β = 0
                let s = gateaux_quadrature_mode(gamma, rho, j, true, 0.0, 1e-14).unwrap();
                worst = worst.max(((c - want) / want).abs()).max(((s + want) / want).abs());
            }
        }
    }
    assert!(worst < 1e-6, "worst relative error {worst:e}");
}

#[test]
fn translation_modes_are_annihilated() {
    for gamma in [1.25, 1.5, 1.75] {
        for beta in [0.0, 0.4, 1.3, 2.9] {
            for sine in [false, true] {
                let v = gateaux_quadrature_mode(gamma, 1.0, 1, sine, beta, 1e-14).unwrap();
                assert!(v.abs() < 1e-10, "gamma {gamma} beta {beta}: {v:e}");
            }
        }
    }
}

#[test]
fn gateaux_quadrature_of_a_combination() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = random_shape(&mut rng, 10);
    let op = SpectralOperator::new(1.5, vec![0.9], 10).unwrap();
    let img = op.apply_l0(0, &h);
    for beta in [0.0, 0.3, 2.0, 4.5] {
        let q = gateaux_quadrature(1.5, 0.9, &h, beta, 1e-14).unwrap();
        assert!((q - img.eval(beta)).abs() < 1e-9, "{q} vs {}", img.eval(beta));
    }
}

#[test]
fn sine_is_not_in_range() {
    let op = SpectralOperator::new(1.5, vec![1.0], 16).unwrap();
    let grid = Grid::new(64);
    let s: Vec<f64> = grid.betas().iter().map(|b| b.sin() + (3.0 * b).cos()).collect();
    let p = project_modes(&s, 16).unwrap();
    assert!(matches!(op.invert_projection(0, &p, 1e-12), Err(Error::NotInRange(_))));
    let s: Vec<f64> = grid.betas().iter().map(|b| (3.0 * b).cos()).collect();
    let p = project_modes(&s, 16).unwrap();
    let h = op.invert_projection(0, &p, 1e-12).unwrap();
    assert!((h.b(3) * op.multiplier(0, 3) + 1.0).abs() < 1e-13);
}

#[test]
fn injectivity_constant() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let op = SpectralOperator::new(1.5, vec![1.3], 40).unwrap();
    let min = (2..=40).map(|j| op.multiplier(0, j)).fold(f64::INFINITY, f64::min);
    assert_eq!(min, op.multiplier(0, 2));
    for _ in 0..50 {
        let g = random_shape(&mut rng, 40);
        assert!(op.apply_l0(0, &g).norm_y(0) >= min * g.norm_y(0) * (1.0 - 1e-14));
    }
}

#[test]
fn operator_norm_growth() {
    // σ_j j grows like j^γ, so the forward norm grows like N^γ and the
    // inverse norm is attained at j = 2 for every truncation
    for gamma in [1.25, 1.5, 1.75] {
        let ns = [64usize, 128, 256, 512];
        let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = ns
            .iter()
            .map(|&n| {
                let op = SpectralOperator::new(gamma, vec![1.0], n).unwrap();
                (2..=n).map(|j| op.multiplier(0, j)).fold(0.0, f64::max).ln()
            })
            .collect();
        let mx = xs.iter().sum::<f64>() / 4.0;
        let my = ys.iter().sum::<f64>() / 4.0;
        let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!((slope - gamma).abs() < 0.15, "slope {slope} at gamma {gamma}");
        let inv = |n: usize| {
            let op = SpectralOperator::new(gamma, vec![1.0], n).unwrap();
            (2..=n).map(|j| 1.0 / op.multiplier(0, j)).fold(0.0, f64::max)
        };
        assert_eq!(inv(32), inv(512));
    }
}

#[test]
fn inverse_bound_is_stable_under_refinement() {
    let gamma = 1.5;
    let k = 3;
    let maxima: Vec<f64> = [32usize, 64, 128]
        .iter()
        .map(|&n| {
            let op = SpectralOperator::new(gamma, vec![1.0], n).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(13);
            (0..100)
                .map(|_| {
                    let mut p = FourierContour::zeros(n);
                    for j in 2..=n {
                        let w = (1.0 + (j * j) as f64).powf(-0.5 * (k as f64 - 1.0)) / j as f64;
                        p.set(j, w * rng.gen_range(-1.0..1.0), w * rng.gen_range(-1.0..1.0));
                    }
                    op.inverse_ratio(0, &p, k)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let lo = maxima.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = maxima.iter().cloned().fold(0.0, f64::max);
    assert!(hi / lo < 1.1, "{maxima:?}");
}

fn disc_pair_context(n: usize) -> (FunctionalContext, ContinuationState, VortexConfiguration) {
    let kernel = GreenKernel::disc(1.0, 1.5).unwrap();
    let cfg = symmetric_pair(0.4, 1.0);
    let ctx = FunctionalContext::new(kernel, n, QuadratureConfig::default()).unwrap();
    let state = ContinuationState::from_points(&cfg, n, 1.5).unwrap();
    (ctx, state, cfg)
}

#[test]
fn jacobian_at_eps_zero_has_the_spectral_structure() {
    let n = 12;
    let (ctx, state, cfg) = disc_pair_context(n);
    let jac = assemble_jacobian(&ctx, &state, &JacobianOptions::default()).unwrap();
    let op = SpectralOperator::new(1.5, state.rhos.clone(), n).unwrap();
    let per = state.unknowns_per_patch();
    let s = per - 2;
    let mut cross: f64 = 0.0;
    let mut coupling: f64 = 0.0;
    for i in 0..2 {
        let block = jac.matrix.view((i * per, i * per), (s, s));
        assert!((block - op.shape_block(i)).amax() < 1e-6);
        for j in 0..2 {
            if i != j {
                cross = cross.max(jac.matrix.view((i * per, j * per), (per, s)).amax());
            }
            coupling = coupling.max(jac.matrix.view((i * per, j * per + s), (s, 2)).amax());
            coupling = coupling.max(jac.matrix.view((i * per + s, j * per), (2, s)).amax());
        }
    }
    assert!(cross < 1e-8, "cross-patch shape block {cross:e}");
    assert!(coupling < 1e-8, "shape-center coupling {coupling:e}");

    // center rows are (π/2κ_i)(∂_{x_i1}W, -∂_{x_i2}W)
    let h = hess_w_m(ctx.kernel(), &cfg, KrConvention::ContourConsistent, 1e-4).unwrap().matrix;
    for i in 0..2 {
        let f = PI / (2.0 * cfg.strengths[i]);
        for j in 0..2 {
            for a in 0..2 {
                let got_x1 = jac.matrix[(i * per + s, j * per + s + a)];
                let got_x2 = jac.matrix[(i * per + s + 1, j * per + s + a)];
                let want_x1 = f * h[(2 * i, 2 * j + a)];
                let want_x2 = -f * h[(2 * i + 1, 2 * j + a)];
                assert!((got_x1 - want_x1).abs() < 1e-5 * h.amax(), "{got_x1} vs {want_x1}");
                assert!((got_x2 - want_x2).abs() < 1e-5 * h.amax(), "{got_x2} vs {want_x2}");
            }
        }
    }
}

#[test]
fn central_differences_agree_with_forward() {
    let n = 8;
    let (ctx, state, _) = disc_pair_context(n);
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut u = state.unknowns();
    for (k, v) in u.iter_mut().enumerate() {
        if k % state.unknowns_per_patch() < state.unknowns_per_patch() - 2 {
            *v = 1e-2 * rng.gen_range(-1.0..1.0);
        }
    }
    let state = state.with_unknowns(&u, 1.5).unwrap().with_eps(0.05, 1.5).unwrap();
    let fwd = assemble_jacobian(&ctx, &state, &JacobianOptions::default()).unwrap();
    let ctr = assemble_jacobian(&ctx, &state, &JacobianOptions { central: true, ..Default::default() }).unwrap();
    let diff = (&fwd.matrix - &ctr.matrix).amax();
    assert!(diff < 1e-5 * ctr.matrix.amax(), "{diff:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_round_trips(seed in 0u64..100_000, rho in 0.2f64..3.0, gamma in 1.05f64..1.95) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_shape(&mut rng, 24);
        let op = SpectralOperator::new(gamma, vec![rho], 24).unwrap();
        let back = op.invert_l0(0, &op.apply_l0(0, &g));
        let fwd = op.apply_l0(0, &op.invert_l0(0, &g));
        for j in 2..=24 {
            prop_assert!((back.a(j) - g.a(j)).abs() <= 1e-14 * (1.0 + g.a(j).abs()));
            prop_assert!((back.b(j) - g.b(j)).abs() <= 1e-14 * (1.0 + g.b(j).abs()));
            prop_assert!((fwd.a(j) - g.a(j)).abs() <= 1e-14 * (1.0 + g.a(j).abs()));
            prop_assert!((fwd.b(j) - g.b(j)).abs() <= 1e-14 * (1.0 + g.b(j).abs()));
        }
    }
}
