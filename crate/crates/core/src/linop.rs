//! The linearization of the patch functional at `ε = 0, g = 0`: forward
//! application and inversion of the diagonal mode map, an independent
//! quadrature of the Gateaux integrals, and finite-difference assembly of the
//! full Newton matrix along the continuation curve.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::{FourierContour, ModeProjection};
use crate::error::{Error, Result};
use crate::functional::FunctionalContext;
use crate::quadrature::{graded_panels, integrate_panels, levels_for, GaussLegendre};
use crate::solver::{residual, ContinuationState};
use crate::special::{c_gamma, SigmaSpectrum};

/// `∂_g G(0, ρ, x, 0)`: block-diagonal over patches, and within a patch
/// `cos jβ ↦ (σ_j j/ρ^γ) sin jβ`, `sin jβ ↦ -(σ_j j/ρ^γ) cos jβ`.
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    gamma: f64,
    rho: Vec<f64>,
    spectrum: SigmaSpectrum,
    n: usize,
}

impl SpectralOperator {
    pub fn new(gamma: f64, rho: Vec<f64>, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("truncation must be at least 2, got {n}")));
        }
        if let Some(r) = rho.iter().find(|r| !(**r > 0.0)) {
            return Err(Error::Config(format!("radii must be positive, got {r}")));
        }
        Ok(Self { gamma, rho, spectrum: SigmaSpectrum::new(gamma, n)?, n })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn patches(&self) -> usize {
        self.rho.len()
    }

    pub fn rho(&self, i: usize) -> f64 {
        self.rho[i]
    }

    pub fn spectrum(&self) -> &SigmaSpectrum {
        &self.spectrum
    }

    /// `σ_j j / ρ_i^γ`; zero for `j = 1`.
    pub fn multiplier(&self, i: usize, j: usize) -> f64 {
        self.spectrum.get(j) * j as f64 * self.rho[i].powf(-self.gamma)
    }

    pub fn apply_l0(&self, i: usize, g: &FourierContour) -> FourierContour {
        assert!(g.n() <= self.n, "modes beyond the operator truncation");
        let mut out = FourierContour::zeros(g.n());
        for j in 2..=g.n() {
            let f = self.multiplier(i, j);
            out.set(j, -f * g.b(j), f * g.a(j));
        }
        out
    }

    /// Inverse on `Y₀` truncations: `c_j cos + d_j sin ↦ (ρ^γ/σ_j j)(d_j cos - c_j sin)`.
    pub fn invert_l0(&self, i: usize, p: &FourierContour) -> FourierContour {
        assert!(p.n() <= self.n, "modes beyond the operator truncation");
        let mut out = FourierContour::zeros(p.n());
        for j in 2..=p.n() {
            let f = self.multiplier(i, j);
            out.set(j, p.b(j) / f, -p.a(j) / f);
        }
        out
    }

    /// `invert_l0` on a full projection. Content in `j = 0, 1` is outside the
    /// range; more than `tol` relative to the `Y₀` part is an error.
    pub fn invert_projection(&self, i: usize, p: &ModeProjection, tol: f64) -> Result<FourierContour> {
        let low = p.c0.abs().max(p.c1_cos.abs()).max(p.c1_sin.abs());
        let scale = p.rest.norm_y(0).max(f64::MIN_POSITIVE);
        if low > tol * scale.max(1.0) {
            return Err(Error::NotInRange(low));
        }
        Ok(self.invert_l0(i, &p.rest))
    }

    /// Matrix of patch `i`'s block: columns `[a_2..a_N, b_2..b_N]`, rows
    /// `[cos_2..cos_N, sin_2..sin_N]` coefficients of the image.
    pub fn shape_block(&self, i: usize) -> DMatrix<f64> {
        let k = self.n - 1;
        let mut m = DMatrix::zeros(2 * k, 2 * k);
        for j in 2..=self.n {
            let f = self.multiplier(i, j);
            let r = j - 2;
            m[(r, k + r)] = -f;
            m[(k + r, r)] = f;
        }
        m
    }

    /// `‖invert_l0(p)‖_{X^{k+γ-1}} / ‖p‖_{Y^{k-1}}`.
    pub fn inverse_ratio(&self, i: usize, p: &FourierContour, k: u32) -> f64 {
        assert!(k >= 1);
        self.invert_l0(i, p).norm_x(k, self.gamma) / p.norm_y(k - 1)
    }
}

/// Graded-mesh quadrature of the Gateaux derivative at `ε = 0, g = 0` in the
/// direction `h`, read at `β`:
/// `C_γ ρ^{-γ} ⨍ [(1-γ/2) h(β-η) sin η - (h'(β) - h'(β-η)) cos η] (4 sin²(η/2))^{-γ/2} dη`.
///
/// Evaluates these integrals directly and shares nothing with the
/// closed-form multipliers, so it serves as their oracle.
pub fn gateaux_quadrature(gamma: f64, rho: f64, h: &FourierContour, beta: f64, tol: f64) -> Result<f64> {
    gateaux_quadrature_modes(gamma, rho, &modes_of(h), beta, tol)
}

/// As [`gateaux_quadrature`] for `h = cos jβ` (`sine = false`) or `sin jβ`,
/// any `j >= 1`. Used to check that the translation modes are annihilated.
pub fn gateaux_quadrature_mode(gamma: f64, rho: f64, j: usize, sine: bool, beta: f64, tol: f64) -> Result<f64> {
    let (a, b) = if sine { (0.0, 1.0) } else { (1.0, 0.0) };
    gateaux_quadrature_modes(gamma, rho, &[(j, a, b)], beta, tol)
}

fn modes_of(h: &FourierContour) -> Vec<(usize, f64, f64)> {
    (2..=h.n()).map(|j| (j, h.a(j), h.b(j))).filter(|&(_, a, b)| a != 0.0 || b != 0.0).collect()
}

fn gateaux_quadrature_modes(gamma: f64, rho: f64, modes: &[(usize, f64, f64)], beta: f64, tol: f64) -> Result<f64> {
    if !(gamma > 1.0 && gamma < 2.0) {
        return Err(Error::Domain { what: "gateaux_quadrature", value: gamma, detail: "requires 1 < gamma < 2" });
    }
    let jmax = modes.iter().map(|m| m.0).max().unwrap_or(1);
    // h(β-η) and h'(β) - h'(β-η), the latter in product form so that it keeps
    // its relative accuracy as η → 0
    let parts = |eta: f64| -> (f64, f64) {
        let mut hv = 0.0;
        let mut dh1 = 0.0;
        for &(j, a, b) in modes {
            let jf = j as f64;
            let (s, c) = (jf * (beta - eta)).sin_cos();
            hv += a * c + b * s;
            let (sm, cm) = (jf * (beta - 0.5 * eta)).sin_cos();
            let half = (0.5 * jf * eta).sin();
            dh1 += jf * (-a * 2.0 * cm * half - b * 2.0 * sm * half);
        }
        (hv, dh1)
    };
    let integrand = |eta: f64| -> f64 {
        let (hv, dh1) = parts(eta);
        let (s, c) = eta.sin_cos();
        let w = (4.0 * (0.5 * eta).sin().powi(2)).powf(-0.5 * gamma);
        ((1.0 - 0.5 * gamma) * hv * s - dh1 * c) * w
    };
    let rule = GaussLegendre::new(16);
    let ratio = 0.25;
    let levels = levels_for(1.0 - gamma, ratio, tol);
    let panels = graded_panels(PI, ratio, levels, (2 * jmax).max(16));
    let integral = integrate_panels(&rule, &panels, |t| integrand(t) + integrand(-t));
    Ok(c_gamma(gamma)? * rho.powf(-gamma) * integral / (2.0 * PI))
}

/// Per-variable steps for the finite-difference Jacobian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JacobianOptions {
    /// Shape coefficient `c` is perturbed by `shape_step · max(1, |c|)`.
    pub shape_step: f64,
    /// Center coordinates are perturbed by `center_step ·` domain radius.
    pub center_step: f64,
    /// Central instead of forward differences.
    pub central: bool,
}

impl Default for JacobianOptions {
    fn default() -> Self {
        Self { shape_step: 1e-6, center_step: 1e-6, central: false }
    }
}

/// Newton matrix together with the residual it was linearized at.
#[derive(Debug, Clone)]
pub struct Jacobian {
    pub matrix: DMatrix<f64>,
    pub residual: Vec<f64>,
}

/// Finite differences of [`residual`] over the unknowns of
/// [`ContinuationState::unknowns`]: per patch the shape coefficients
/// `[a_2..a_N, b_2..b_N]`, then the center `x1, x2`. `ρ` follows from the
/// flux constraint at every evaluation.
pub fn assemble_jacobian(ctx: &FunctionalContext, state: &ContinuationState, opts: &JacobianOptions) -> Result<Jacobian> {
    let r0 = residual(ctx, state)?;
    let u0 = state.unknowns();
    let n = u0.len();
    if r0.len() != n {
        return Err(Error::Config(format!("residual has {} rows for {n} unknowns", r0.len())));
    }
    let per = state.unknowns_per_patch();
    let radius = ctx.kernel().length_scale();
    let gamma = ctx.gamma();
    let columns: Vec<Result<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let h = if k % per >= per - 2 {
                opts.center_step * radius
            } else {
                opts.shape_step * u0[k].abs().max(1.0)
            };
            let eval = |step: f64| -> Result<Vec<f64>> {
                let mut u = u0.clone();
                u[k] += step;
                residual(ctx, &state.with_unknowns(&u, gamma)?)
            };
            let plus = eval(h)?;
            if opts.central {
                let minus = eval(-h)?;
                Ok(plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect())
            } else {
                Ok(plus.iter().zip(&r0).map(|(p, r)| (p - r) / h).collect())
            }
        })
        .collect();
    let mut matrix = DMatrix::zeros(n, n);
    for (k, col) in columns.into_iter().enumerate() {
        for (r, v) in col?.into_iter().enumerate() {
            matrix[(r, k)] = v;
        }
    }
    Ok(Jacobian { matrix, residual: r0 })
}
