//! The contour-dynamics functional `G_i = G_{i,1} + G_{i,2} + G_{i,3}` on the
//! uniform collocation grid, its `ε → 0` limits, and the directional
//! derivative of the self-interaction term.
//!
//! Every denominator is an exact squared distance: `ρ²A + δB = |R(β)e_β -
//! R(η)e_η|²` and `A_ij + εB_ij = |z_i(β) - z_j(η)|²` with `δ = ε|ε|^γ`.
//! Both are factored as `A(1 + u)` so that the `O(1)` piece whose integral
//! vanishes can be removed before dividing by `δ` or `ε`.

use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::contour::{FourierContour, Grid, PatchGeometry};
use crate::error::{Error, Result};
use crate::green::{GreenKernel, Point};
use crate::quadrature::{graded_panels, integrate_panels, levels_for, GaussLegendre, SingularWeights};
use crate::special::SigmaSpectrum;

/// How `∫∫ ∇ₓK⁰(z, x_j + εϑe_η) ϑ dϑ dη` is evaluated for `G_{i,3}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum G3Method {
    /// Tensor Chebyshev interpolant of `∇ₓK⁰` on a box around each pair of
    /// centers, contracted against Chebyshev moments of the patch.
    #[default]
    Surrogate,
    /// Trapezoid in `η` times Gauss–Legendre in `ϑ` at every boundary point.
    Direct,
}

/// Radial factor in the numerator of `G_{i,2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum G2Numerator {
    /// `R_j(η)` and `R_j'(η)`.
    #[default]
    Radius,
    /// The constant `ρ_j` with zero derivative; kept for comparison.
    VerbatimRho,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Collocation grid size `M = grid_factor · N`.
    pub grid_factor: usize,
    /// Gauss–Legendre nodes on `[0, R_j(η)]`.
    pub radial_nodes: usize,
    pub surrogate_degree: usize,
    /// Surrogate box half-width relative to `ε max R`.
    pub box_margin: f64,
    pub g3: G3Method,
    pub g2_numerator: G2Numerator,
    /// Graded-mesh parameters for the validation quadratures.
    pub graded_ratio: f64,
    pub graded_nodes: usize,
    pub graded_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            grid_factor: 4,
            radial_nodes: 16,
            surrogate_degree: 12,
            box_margin: 1.15,
            g3: G3Method::Surrogate,
            g2_numerator: G2Numerator::Radius,
            graded_ratio: 0.5,
            graded_nodes: 8,
            graded_tol: 1e-14,
        }
    }
}

/// `A`, `B`, `A_ij`, `B_ij` at one pair of angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParts {
    pub a: f64,
    pub b: f64,
    pub a_ij: f64,
    pub b_ij: f64,
}

impl KernelParts {
    /// Self part from patch `p`, interaction part from the pair `(p, q)`.
    pub fn at(p: &PatchGeometry, q: &PatchGeometry, beta: f64, eta: f64) -> Self {
        let d = p.delta();
        let eps = p.eps;
        let a = 4.0 * (0.5 * (beta - eta)).sin().powi(2);
        let (gb, ge) = (p.shape.eval(beta), p.shape.eval(eta));
        let b = p.rho * (gb + ge) * a + d * ((gb - ge).powi(2) + gb * ge * a);
        let w = [p.center[0] - q.center[0], p.center[1] - q.center[1]];
        let eb = [beta.cos(), beta.sin()];
        let ee = [eta.cos(), eta.sin()];
        let (gib, gje) = (p.shape.eval(beta), q.shape.eval(eta));
        let dot = |u: [f64; 2], v: [f64; 2]| u[0] * v[0] + u[1] * v[1];
        let rb = p.rho + d * gib;
        let re = q.rho + d * gje;
        let diff = [rb * eb[0] - re * ee[0], rb * eb[1] - re * ee[1]];
        let b_ij = 2.0 * (p.rho * dot(w, eb) - q.rho * dot(w, ee))
            + 2.0 * d * (gib * dot(w, eb) - gje * dot(w, ee))
            + eps * dot(diff, diff);
        Self { a, b, a_ij: dot(w, w), b_ij }
    }
}

/// Grid values of `G_{i,1}`, `G_{i,2}`, `G_{i,3}` for one patch.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalValues {
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    pub g3: Vec<f64>,
}

impl FunctionalValues {
    pub fn total(&self) -> Vec<f64> {
        self.g1.iter().zip(&self.g2).zip(&self.g3).map(|((a, b), c)| a + b + c).collect()
    }

    /// Root-mean-square over the grid of each term.
    pub fn term_norms(&self) -> [f64; 3] {
        let rms = |v: &[f64]| (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt();
        [rms(&self.g1), rms(&self.g2), rms(&self.g3)]
    }
}

/// Everything that stays fixed while the geometry changes: kernel, grid,
/// product-integration weights, multipliers and the `G_{i,3}` surrogates.
#[derive(Debug)]
pub struct FunctionalContext {
    kernel: GreenKernel,
    n: usize,
    quad: QuadratureConfig,
    grid: Grid,
    weights: SingularWeights,
    sigma: SigmaSpectrum,
    a_tab: Vec<f64>,
    radial: GaussLegendre,
    cache: Mutex<Vec<Arc<SurrogateSet>>>,
}

impl Clone for FunctionalContext {
    fn clone(&self) -> Self {
        Self {
            kernel: self.kernel.clone(),
            n: self.n,
            quad: self.quad.clone(),
            grid: self.grid.clone(),
            weights: self.weights.clone(),
            sigma: self.sigma.clone(),
            a_tab: self.a_tab.clone(),
            radial: self.radial.clone(),
            cache: Mutex::new(Vec::new()),
        }
    }
}

const CACHE_SLOTS: usize = 4;

impl FunctionalContext {
    pub fn new(kernel: GreenKernel, n: usize, quad: QuadratureConfig) -> Result<Self> {
        let gamma = kernel.gamma();
        if !(gamma > 1.0 && gamma < 2.0) {
            return Err(Error::Domain { what: "functional", value: gamma, detail: "requires 1 < gamma < 2" });
        }
        if n < 2 || quad.grid_factor < 3 {
            return Err(Error::Config("need N >= 2 and grid_factor >= 3".into()));
        }
        let m = quad.grid_factor * n;
        let grid = Grid::new(m);
        let weights = SingularWeights::new(m, gamma)?;
        let sigma = SigmaSpectrum::new(gamma, n)?;
        let a_tab = (0..m).map(|l| 4.0 * (PI * l as f64 / m as f64).sin().powi(2)).collect();
        let radial = GaussLegendre::new(quad.radial_nodes);
        Ok(Self { kernel, n, quad, grid, weights, sigma, a_tab, radial, cache: Mutex::new(Vec::new()) })
    }

    pub fn kernel(&self) -> &GreenKernel {
        &self.kernel
    }

    pub fn gamma(&self) -> f64 {
        self.kernel.gamma()
    }

    pub fn c_gamma(&self) -> f64 {
        self.kernel.param().c_gamma
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.quad
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn quad(&self) -> &QuadratureConfig {
        &self.quad
    }

    pub fn sigma(&self) -> &SigmaSpectrum {
        &self.sigma
    }

    /// Validates the geometry: common `ε >= 0`, positive radius, boundaries
    /// inside the domain and pairwise separated.
    pub fn check_geometry(&self, patches: &[PatchGeometry]) -> Result<()> {
        let eps = common_eps(patches)?;
        let mut reach = Vec::with_capacity(patches.len());
        for (i, p) in patches.iter().enumerate() {
            if p.shape.n() != self.n {
                return Err(Error::Config(format!("patch {i} has truncation {} but the context uses {}", p.shape.n(), self.n)));
            }
            if !(p.rho > 0.0) {
                return Err(geometry("radius", i, format!("rho = {}", p.rho)));
            }
            let vals = p.shape.on_grid(&self.grid);
            let d = p.delta();
            let rmin = vals.g.iter().map(|g| p.rho + d * g).fold(f64::INFINITY, f64::min);
            let rmax = vals.g.iter().map(|g| p.rho + d * g).fold(0.0, f64::max);
            if !(rmin > 0.0) {
                return Err(geometry("radius", i, format!("R(beta) reaches {rmin}")));
            }
            if !self.kernel.contains(p.center) {
                return Err(geometry("center", i, "center outside the domain".into()));
            }
            if eps * rmax >= self.kernel.boundary_distance(p.center) {
                return Err(geometry("boundary", i, format!("patch of extent {} crosses the domain boundary", eps * rmax)));
            }
            reach.push(eps * rmax);
        }
        for i in 0..patches.len() {
            for j in 0..i {
                let d = dist(patches[i].center, patches[j].center);
                if d <= reach[i] + reach[j] {
                    return Err(geometry("separation", i, format!("overlaps patch {j} (center distance {d})")));
                }
            }
        }
        Ok(())
    }

    /// All three terms for every patch.
    pub fn eval_all(&self, patches: &[PatchGeometry]) -> Result<Vec<FunctionalValues>> {
        self.check_geometry(patches)?;
        (0..patches.len())
            .map(|i| {
                Ok(FunctionalValues {
                    g1: self.g1_unchecked(patches, i)?,
                    g2: self.g2_unchecked(patches, i)?,
                    g3: self.g3_unchecked(patches, i)?,
                })
            })
            .collect()
    }

    pub fn eval_g(&self, patches: &[PatchGeometry], i: usize) -> Result<FunctionalValues> {
        self.check_geometry(patches)?;
        Ok(FunctionalValues {
            g1: self.g1_unchecked(patches, i)?,
            g2: self.g2_unchecked(patches, i)?,
            g3: self.g3_unchecked(patches, i)?,
        })
    }

    pub fn eval_g1(&self, patches: &[PatchGeometry], i: usize) -> Result<Vec<f64>> {
        self.check_geometry(patches)?;
        self.g1_unchecked(patches, i)
    }

    pub fn eval_g2(&self, patches: &[PatchGeometry], i: usize) -> Result<Vec<f64>> {
        self.check_geometry(patches)?;
        self.g2_unchecked(patches, i)
    }

    pub fn eval_g3(&self, patches: &[PatchGeometry], i: usize) -> Result<Vec<f64>> {
        self.check_geometry(patches)?;
        self.g3_unchecked(patches, i)
    }

    // ---- G_{i,1} -------------------------------------------------------

    /// `ε = 0` limit: `ρ^{-γ} Σ σ_j j (a_j sin jβ - b_j cos jβ)`.
    pub fn limit_g1(&self, rho: f64, g: &FourierContour) -> Vec<f64> {
        let image = self.apply_linear(rho, g);
        image.on_grid(&self.grid).g
    }

    /// Mode-wise image of `g` under the `ε = 0` linearization.
    pub fn apply_linear(&self, rho: f64, g: &FourierContour) -> FourierContour {
        let scale = rho.powf(-self.gamma());
        let mut out = FourierContour::zeros(g.n());
        for j in 2..=g.n() {
            let f = scale * self.sigma.get(j) * j as f64;
            out.set(j, -f * g.b(j), f * g.a(j));
        }
        out
    }

    fn g1_unchecked(&self, patches: &[PatchGeometry], i: usize) -> Result<Vec<f64>> {
        let p = &patches[i];
        if p.eps == 0.0 {
            return Ok(self.limit_g1(p.rho, &p.shape));
        }
        let gamma = self.gamma();
        let m = self.grid.m;
        let rho = p.rho;
        let d = p.delta();
        let vals = p.shape.on_grid(&self.grid);
        let pref = self.c_gamma() / (2.0 * PI) * rho.powf(-gamma);
        let mut out = vec![0.0; m];
        for (q, o) in out.iter_mut().enumerate() {
            let (gb, g1b) = (vals.g[q], vals.g1[q]);
            let mut acc = 0.0;
            for l in 1..m {
                let e = (q + m - l) % m;
                let st = self.s_tilde(rho, d, gb, g1b, vals.g[e], vals.g1[e], l).ok_or_else(|| {
                    geometry("G1", i, format!("self-distance vanishes at beta index {q}, eta index {e}"))
                })?;
                acc += self.weights.weights[l] * st;
            }
            *o = pref * acc / (rho + d * gb);
        }
        Ok(out)
    }

    /// `(N/|D|^γ - ρ²sin η'/(ρ²A)^{γ/2}) (ρ²A)^{γ/2} ρ^γ / (δ ρ^γ)`, i.e. the
    /// smooth factor in front of `A^{-γ/2}`, without the `ρ^{-γ}`.
    #[allow(clippy::too_many_arguments)]
    fn s_tilde(&self, rho: f64, d: f64, gb: f64, g1b: f64, ge: f64, g1e: f64, l: usize) -> Option<f64> {
        let gamma = self.gamma();
        let a = self.a_tab[l];
        let (s, c) = (self.grid.sin[l], self.grid.cos[l]);
        let v = (gb + ge) / rho + d * ((gb - ge).powi(2) / a + gb * ge) / (rho * rho);
        let u = d * v;
        if !(1.0 + u > 0.0) {
            return None;
        }
        let lw = -0.5 * gamma * u.ln_1p();
        let w = lw.exp();
        let e = if d == 0.0 { -0.5 * gamma * v } else { lw.exp_m1() / d };
        let n1 = (rho * (gb + ge) + d * (gb * ge + g1b * g1e)) * s + (rho * (g1e - g1b) + d * (gb * g1e - g1b * ge)) * c;
        Some(rho * rho * s * e + n1 * w)
    }

    /// Directional derivative of `G_{i,1}` in the shape direction `h` at
    /// fixed `ρ_i`; exact for the discrete product rule used by `eval_g1`.
    pub fn gateaux_g1(&self, patches: &[PatchGeometry], i: usize, h: &FourierContour) -> Result<Vec<f64>> {
        self.check_geometry(patches)?;
        let p = &patches[i];
        if p.eps == 0.0 {
            return Ok(self.limit_g1(p.rho, h));
        }
        let gamma = self.gamma();
        let m = self.grid.m;
        let rho = p.rho;
        let d = p.delta();
        let gv = p.shape.on_grid(&self.grid);
        let hv = h.on_grid(&self.grid);
        let pref = self.c_gamma() / (2.0 * PI) * rho.powf(-gamma);
        let mut out = vec![0.0; m];
        for (q, o) in out.iter_mut().enumerate() {
            let (gb, g1b, hb, h1b) = (gv.g[q], gv.g1[q], hv.g[q], hv.g1[q]);
            let mut acc = 0.0;
            let mut dacc = 0.0;
            for l in 1..m {
                let e = (q + m - l) % m;
                let (ge, g1e, he, h1e) = (gv.g[e], gv.g1[e], hv.g[e], hv.g1[e]);
                let a = self.a_tab[l];
                let (s, c) = (self.grid.sin[l], self.grid.cos[l]);
                let v = (gb + ge) / rho + d * ((gb - ge).powi(2) / a + gb * ge) / (rho * rho);
                let dv = (hb + he) / rho + d * (2.0 * (gb - ge) * (hb - he) / a + hb * ge + gb * he) / (rho * rho);
                let u = d * v;
                if !(1.0 + u > 0.0) {
                    return Err(geometry("G1", i, format!("self-distance vanishes at beta index {q}")));
                }
                let lw = -0.5 * gamma * u.ln_1p();
                let w = lw.exp();
                let e_ = lw.exp_m1() / d;
                let dw_over_d = -0.5 * gamma * w / (1.0 + u) * dv;
                let n1 = (rho * (gb + ge) + d * (gb * ge + g1b * g1e)) * s
                    + (rho * (g1e - g1b) + d * (gb * g1e - g1b * ge)) * c;
                let dn1 = (rho * (hb + he) + d * (hb * ge + gb * he + h1b * g1e + g1b * h1e)) * s
                    + (rho * (h1e - h1b) + d * (hb * g1e + gb * h1e - h1b * ge - g1b * he)) * c;
                let wt = self.weights.weights[l];
                acc += wt * (rho * rho * s * e_ + n1 * w);
                dacc += wt * (rho * rho * s * dw_over_d + dn1 * w + n1 * d * dw_over_d);
            }
            let r = rho + d * gb;
            *o = pref * (dacc / r - acc * d * hb / (r * r));
        }
        Ok(out)
    }

    /// `G_{i,1}(β)` by composite Gauss–Legendre on meshes graded toward the
    /// singular point, with the shape evaluated by direct synthesis. An
    /// independent check of the product-integration rule.
    pub fn eval_g1_graded(&self, patch: &PatchGeometry, beta: f64) -> Result<f64> {
        let gamma = self.gamma();
        let rho = patch.rho;
        let d = patch.delta();
        let (gb, g1b, _) = patch.shape.derivs(beta);
        let smooth = |t: f64| -> f64 {
            // differences in product form keep their relative accuracy as t → 0
            let (dg, dg1) = shape_differences(&patch.shape, beta, t);
            let (ge, g1e) = (gb + dg, g1b + dg1);
            let (s, c) = t.sin_cos();
            let a = 4.0 * (0.5 * t).sin().powi(2);
            let n1 = (rho * (gb + ge) + d * (gb * ge + g1b * g1e)) * s + (rho * dg1 + d * (gb * dg1 - g1b * dg)) * c;
            if d == 0.0 {
                return (rho * s * (-0.5 * gamma) * (gb + ge) + n1) * a.powf(-0.5 * gamma);
            }
            let v = (gb + ge) / rho + d * (dg * dg / a + gb * ge) / (rho * rho);
            let lw = -0.5 * gamma * (d * v).ln_1p();
            (rho * rho * s * lw.exp_m1() / d + n1 * lw.exp()) * a.powf(-0.5 * gamma)
        };
        let integral = self.graded_periodic(1.0 - gamma, smooth);
        let pref = self.c_gamma() / (2.0 * PI) * rho.powf(-gamma);
        Ok(pref * integral / (rho + d * gb))
    }

    /// `∫_{-π}^{π} f(t) dt` for a `2π`-periodic `f` with an integrable
    /// singularity of order `|t|^alpha` at `t = 0`. The negative half is
    /// sampled at `-t` rather than `2π - t` so small arguments stay exact.
    pub fn graded_periodic<F: Fn(f64) -> f64>(&self, alpha: f64, f: F) -> f64 {
        let rule = GaussLegendre::new(self.quad.graded_nodes);
        let levels = levels_for(alpha, self.quad.graded_ratio, self.quad.graded_tol);
        let panels = graded_panels(PI, self.quad.graded_ratio, levels, 16);
        integrate_panels(&rule, &panels, |t| f(t) + f(-t))
    }

    // ---- G_{i,2} -------------------------------------------------------

    /// `ε → 0` limit `(γC_γ/2) Σ_{j≠i} ρ_j² (x_i-x_j)·(sin β, -cos β)/|x_i-x_j|^{γ+2}`.
    pub fn limit_g2(&self, patches: &[PatchGeometry], i: usize) -> Vec<f64> {
        let v = self.limit_g2_vector(patches, i);
        self.tangential(v)
    }

    fn limit_g2_vector(&self, patches: &[PatchGeometry], i: usize) -> Point {
        let gamma = self.gamma();
        let k = 0.5 * gamma * self.c_gamma();
        let xi = patches[i].center;
        let mut v = [0.0; 2];
        for (j, p) in patches.iter().enumerate() {
            if j == i {
                continue;
            }
            let w = [xi[0] - p.center[0], xi[1] - p.center[1]];
            let r2 = w[0] * w[0] + w[1] * w[1];
            let f = k * p.rho * p.rho * r2.powf(-0.5 * gamma - 1.0);
            v[0] += f * w[0];
            v[1] += f * w[1];
        }
        v
    }

    /// `V·(sin β, -cos β)` on the grid.
    fn tangential(&self, v: Point) -> Vec<f64> {
        (0..self.grid.m).map(|q| v[0] * self.grid.sin[q] - v[1] * self.grid.cos[q]).collect()
    }

    fn g2_unchecked(&self, patches: &[PatchGeometry], i: usize) -> Result<Vec<f64>> {
        let m = self.grid.m;
        if patches.len() < 2 {
            return Ok(vec![0.0; m]);
        }
        let p = &patches[i];
        let eps = p.eps;
        if eps == 0.0 {
            return Ok(self.limit_g2(patches, i));
        }
        let gamma = self.gamma();
        let di = p.delta();
        let vi = p.shape.on_grid(&self.grid);
        let mut out = vec![0.0; m];
        for (j, q) in patches.iter().enumerate() {
            if j == i {
                continue;
            }
            let dj = q.delta();
            let vj = q.shape.on_grid(&self.grid);
            let w = [p.center[0] - q.center[0], p.center[1] - q.center[1]];
            let a_ij = w[0] * w[0] + w[1] * w[1];
            if a_ij == 0.0 {
                return Err(Error::Singular("G2: coincident centers"));
            }
            let base = a_ij.powf(-0.5 * gamma);
            for (b, o) in out.iter_mut().enumerate() {
                let (cb, sb) = (self.grid.cos[b], self.grid.sin[b]);
                let rb = p.rho + di * vi.g[b];
                let r1b = di * vi.g1[b];
                let mut acc = 0.0;
                for e in 0..m {
                    let (ce, se) = (self.grid.cos[e], self.grid.sin[e]);
                    let k = (b + m - e) % m;
                    let (s, c) = (self.grid.sin[k], self.grid.cos[k]);
                    let re = q.rho + dj * vj.g[e];
                    let (rn, r1n) = match self.quad.g2_numerator {
                        G2Numerator::Radius => (re, dj * vj.g1[e]),
                        G2Numerator::VerbatimRho => (q.rho, 0.0),
                    };
                    let dx = eps * (rb * cb - re * ce);
                    let dy = eps * (rb * sb - re * se);
                    let u = (2.0 * (w[0] * dx + w[1] * dy) + dx * dx + dy * dy) / a_ij;
                    if !(1.0 + u > 0.0) {
                        return Err(geometry("G2", i, format!("boundary of patch {j} touches this patch")));
                    }
                    let lw = -0.5 * gamma * u.ln_1p();
                    let num = (rb * rn + r1b * r1n) * s + (rb * r1n - r1b * rn) * c;
                    // rb ρ_j sin(β-η) integrates to zero over the period
                    let zero = rb * q.rho * s;
                    acc += (num - zero) * lw.exp() + zero * lw.exp_m1();
                }
                *o += self.c_gamma() * base * acc / (m as f64 * eps * rb);
            }
        }
        Ok(out)
    }

    // ---- G_{i,3} -------------------------------------------------------

    /// `ε → 0` limit `Σ_j πρ_j² (sin β, -cos β)·∇ₓK⁰(x_i, x_j)`.
    pub fn limit_g3(&self, patches: &[PatchGeometry], i: usize) -> Result<Vec<f64>> {
        let v = self.limit_g3_vector(patches, i)?;
        Ok(self.tangential(v))
    }

    fn limit_g3_vector(&self, patches: &[PatchGeometry], i: usize) -> Result<Point> {
        let xi = patches[i].center;
        let mut v = [0.0; 2];
        for p in patches {
            let g = self.kernel.grad_x_k0(xi, p.center)?;
            let f = PI * p.rho * p.rho;
            v[0] += f * g[0];
            v[1] += f * g[1];
        }
        Ok(v)
    }

    /// `(G_{i,2} + G_{i,3})` at `ε = 0`, `g = 0` is `V_i·(sin β, -cos β)`;
    /// this returns `V_i`.
    pub fn limit_center_vector(&self, patches: &[PatchGeometry], i: usize) -> Result<Point> {
        let a = self.limit_g2_vector(patches, i);
        let b = self.limit_g3_vector(patches, i)?;
        Ok([a[0] + b[0], a[1] + b[1]])
    }

    fn g3_unchecked(&self, patches: &[PatchGeometry], i: usize) -> Result<Vec<f64>> {
        if self.kernel.is_free_space() {
            return Ok(vec![0.0; self.grid.m]);
        }
        if patches[i].eps == 0.0 {
            return self.limit_g3(patches, i);
        }
        let phis = self.boundary_fields(patches, i)?;
        Ok(self.g3_from_fields(&patches[i], &phis))
    }

    fn g3_from_fields(&self, p: &PatchGeometry, phi: &[Point]) -> Vec<f64> {
        let vals = p.shape.on_grid(&self.grid);
        let d = p.delta();
        (0..self.grid.m)
            .map(|b| {
                let (c, s) = (self.grid.cos[b], self.grid.sin[b]);
                let r = p.rho + d * vals.g[b];
                let k = d * vals.g1[b] / r;
                let t = [-s + k * c, c + k * s];
                -(t[0] * phi[b][0] + t[1] * phi[b][1])
            })
            .collect()
    }

    /// `Σ_j ∫∫ ∇ₓK⁰(z_i(β), x_j + εϑe_η) ϑ dϑ dη` at every grid point.
    fn boundary_fields(&self, patches: &[PatchGeometry], i: usize) -> Result<Vec<Point>> {
        let p = &patches[i];
        let zs: Vec<Point> = (0..self.grid.m).map(|b| self.boundary_point_grid(p, b)).collect();
        match self.quad.g3 {
            G3Method::Direct => zs
                .iter()
                .map(|&z| {
                    let mut acc = [0.0; 2];
                    for j in 0..patches.len() {
                        let f = self.patch_field_direct(patches, j, z)?;
                        acc[0] += f[0];
                        acc[1] += f[1];
                    }
                    Ok(acc)
                })
                .collect(),
            G3Method::Surrogate => {
                let set = self.surrogates(patches)?;
                let mut out = vec![[0.0; 2]; zs.len()];
                for (j, q) in patches.iter().enumerate() {
                    let sur = &set.pairs[i * patches.len() + j];
                    let mu = sur.patch_moments(q, &self.grid, &self.radial);
                    let reduced = sur.contract(&mu);
                    for (o, z) in out.iter_mut().zip(&zs) {
                        let v = reduced.eval(*z);
                        o[0] += v[0];
                        o[1] += v[1];
                    }
                }
                Ok(out)
            }
        }
    }

    fn boundary_point_grid(&self, p: &PatchGeometry, b: usize) -> Point {
        let r = p.eps * (p.rho + p.delta() * p.shape.on_grid_point(&self.grid, b));
        [p.center[0] + r * self.grid.cos[b], p.center[1] + r * self.grid.sin[b]]
    }

    /// `∫₀^{2π}∫₀^{R_j(η)} ∇ₓK⁰(z, x_j + εϑe_η) ϑ dϑ dη` by trapezoid in `η`
    /// and Gauss–Legendre in `ϑ`.
    pub fn patch_field_direct(&self, patches: &[PatchGeometry], j: usize, z: Point) -> Result<Point> {
        let q = &patches[j];
        let vals = q.shape.on_grid(&self.grid);
        let d = q.delta();
        let m = self.grid.m;
        let mut acc = [0.0; 2];
        for e in 0..m {
            let r = q.rho + d * vals.g[e];
            let (c, s) = (self.grid.cos[e], self.grid.sin[e]);
            for (t, w) in self.radial.on(0.0, r) {
                let y = [q.center[0] + q.eps * t * c, q.center[1] + q.eps * t * s];
                let g = self.kernel.grad_x_k0(z, y)?;
                acc[0] += w * t * g[0];
                acc[1] += w * t * g[1];
            }
        }
        let h = 2.0 * PI / m as f64;
        Ok([h * acc[0], h * acc[1]])
    }

    /// Surrogates for the current centers and `ε`. The box half-width is
    /// rounded up to a power of `2^{1/8}`, and a cached set is reused only
    /// for the same centers, `ε` and rounded width, so the surrogate seen by
    /// an evaluation does not depend on what was evaluated before it.
    fn surrogates(&self, patches: &[PatchGeometry]) -> Result<Arc<SurrogateSet>> {
        let eps = patches[0].eps;
        let centers: Vec<Point> = patches.iter().map(|p| p.center).collect();
        let reach = patches
            .iter()
            .map(|p| p.eps * (p.rho + p.delta() * p.shape.on_grid(&self.grid).g.iter().fold(0.0f64, |a, g| a.max(*g))))
            .fold(0.0, f64::max);
        let half = ((8.0 * (self.quad.box_margin * reach).log2()).ceil() / 8.0).exp2();
        let mut cache = self.cache.lock().expect("surrogate cache poisoned");
        if let Some(pos) = cache.iter().position(|s| s.eps == eps && s.centers == centers && s.half_width == half) {
            let set = cache.remove(pos);
            cache.push(set.clone());
            return Ok(set);
        }
        let mut pairs = Vec::with_capacity(patches.len() * patches.len());
        for zc in &centers {
            for yc in &centers {
                pairs.push(Cheb4::build(&self.kernel, *zc, *yc, half, self.quad.surrogate_degree)?);
            }
        }
        let set = Arc::new(SurrogateSet { eps, centers, half_width: half, pairs });
        if cache.len() == CACHE_SLOTS {
            cache.remove(0);
        }
        cache.push(set.clone());
        Ok(set)
    }
}

impl FourierContour {
    /// `g(β_b)` on the grid by direct summation.
    pub fn on_grid_point(&self, grid: &Grid, b: usize) -> f64 {
        let m = grid.m;
        (2..=self.n())
            .map(|j| {
                let k = (j * b) % m;
                self.a(j) * grid.cos[k] + self.b(j) * grid.sin[k]
            })
            .sum()
    }
}

/// `(g(β-t) - g(β), g'(β-t) - g'(β))` through
/// `cos(x-t) - cos x = 2 sin(x - t/2) sin(t/2)` and
/// `sin(x-t) - sin x = -2 cos(x - t/2) sin(t/2)`.
fn shape_differences(g: &FourierContour, beta: f64, t: f64) -> (f64, f64) {
    let mut dg = 0.0;
    let mut dg1 = 0.0;
    for j in 2..=g.n() {
        let jf = j as f64;
        let half = (0.5 * jf * t).sin();
        let (sm, cm) = (jf * (beta - 0.5 * t)).sin_cos();
        let dcos = 2.0 * sm * half;
        let dsin = -2.0 * cm * half;
        let (a, b) = (g.a(j), g.b(j));
        dg += a * dcos + b * dsin;
        dg1 += jf * (b * dcos - a * dsin);
    }
    (dg, dg1)
}

fn common_eps(patches: &[PatchGeometry]) -> Result<f64> {
    let eps = patches.first().ok_or_else(|| Error::Config("no patches".into()))?.eps;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::Config(format!("eps must be finite and nonnegative, got {eps}")));
    }
    if patches.iter().any(|p| p.eps != eps) {
        return Err(Error::Config("patches carry different eps".into()));
    }
    Ok(eps)
}

fn geometry(term: &'static str, patch: usize, detail: String) -> Error {
    Error::Geometry { term, patch, detail }
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

// ---- Chebyshev surrogate of ∇ₓK⁰ -------------------------------------

#[derive(Debug, Clone)]
struct SurrogateSet {
    eps: f64,
    centers: Vec<Point>,
    half_width: f64,
    pairs: Vec<Cheb4>,
}

/// `∇ₓK⁰(z, y) ≈ Σ c_{abcd} T_a(ẑ₁)T_b(ẑ₂)T_c(ŷ₁)T_d(ŷ₂)` on
/// `z ∈ zc + [-h, h]²`, `y ∈ yc + [-h, h]²`.
#[derive(Debug, Clone)]
struct Cheb4 {
    n: usize,
    h: f64,
    zc: Point,
    yc: Point,
    coef: [Vec<f64>; 2],
}

/// The `z`-dependence left after integrating over one patch.
struct Cheb2 {
    n: usize,
    h: f64,
    zc: Point,
    coef: [Vec<f64>; 2],
}

impl Cheb4 {
    fn build(kernel: &GreenKernel, zc: Point, yc: Point, h: f64, degree: usize) -> Result<Self> {
        let n = degree + 1;
        let nodes: Vec<f64> = (0..n).map(|k| (PI * (k as f64 + 0.5) / n as f64).cos()).collect();
        let mut vals = [vec![0.0; n.pow(4)], vec![0.0; n.pow(4)]];
        for a in 0..n {
            for b in 0..n {
                let z = [zc[0] + h * nodes[a], zc[1] + h * nodes[b]];
                for c in 0..n {
                    for d in 0..n {
                        let y = [yc[0] + h * nodes[c], yc[1] + h * nodes[d]];
                        let g = kernel.grad_x_k0(z, y)?;
                        let idx = ((a * n + b) * n + c) * n + d;
                        vals[0][idx] = g[0];
                        vals[1][idx] = g[1];
                    }
                }
            }
        }
        // separable cosine transform along each axis
        let mut tmat = vec![0.0; n * n];
        for a in 0..n {
            for k in 0..n {
                let f = if a == 0 { 1.0 } else { 2.0 };
                tmat[a * n + k] = f / n as f64 * (PI * a as f64 * (k as f64 + 0.5) / n as f64).cos();
            }
        }
        for v in vals.iter_mut() {
            for axis in 0..4 {
                transform_axis(v, n, axis, &tmat);
            }
        }
        Ok(Self { n, h, zc, yc, coef: vals })
    }

    /// `μ_{cd} = ∫∫ T_c(ŷ₁)T_d(ŷ₂) ϑ dϑ dη` over patch `q`.
    fn patch_moments(&self, q: &PatchGeometry, grid: &Grid, radial: &GaussLegendre) -> Vec<f64> {
        let n = self.n;
        let vals = q.shape.on_grid(grid);
        let d = q.delta();
        let off = [(q.center[0] - self.yc[0]) / self.h, (q.center[1] - self.yc[1]) / self.h];
        let mut mu = vec![0.0; n * n];
        let mut tx = vec![0.0; n];
        let mut ty = vec![0.0; n];
        let step = 2.0 * PI / grid.m as f64;
        for e in 0..grid.m {
            let r = q.rho + d * vals.g[e];
            let (c, s) = (grid.cos[e], grid.sin[e]);
            for (t, w) in radial.on(0.0, r) {
                let sx = off[0] + q.eps * t * c / self.h;
                let sy = off[1] + q.eps * t * s / self.h;
                chebyshev_values(sx, &mut tx);
                chebyshev_values(sy, &mut ty);
                let wt = step * w * t;
                for (cc, txc) in tx.iter().enumerate() {
                    let f = wt * txc;
                    for (dd, tyd) in ty.iter().enumerate() {
                        mu[cc * n + dd] += f * tyd;
                    }
                }
            }
        }
        mu
    }

    fn contract(&self, mu: &[f64]) -> Cheb2 {
        let n2 = self.n * self.n;
        let mut coef = [vec![0.0; n2], vec![0.0; n2]];
        for k in 0..2 {
            for (ab, o) in coef[k].iter_mut().enumerate() {
                let row = &self.coef[k][ab * n2..(ab + 1) * n2];
                *o = row.iter().zip(mu).map(|(x, y)| x * y).sum();
            }
        }
        Cheb2 { n: self.n, h: self.h, zc: self.zc, coef }
    }
}

impl Cheb2 {
    fn eval(&self, z: Point) -> Point {
        let n = self.n;
        let mut tx = vec![0.0; n];
        let mut ty = vec![0.0; n];
        chebyshev_values((z[0] - self.zc[0]) / self.h, &mut tx);
        chebyshev_values((z[1] - self.zc[1]) / self.h, &mut ty);
        let mut out = [0.0; 2];
        for k in 0..2 {
            let mut acc = 0.0;
            for a in 0..n {
                let row: f64 = (0..n).map(|b| self.coef[k][a * n + b] * ty[b]).sum();
                acc += tx[a] * row;
            }
            out[k] = acc;
        }
        out
    }
}

fn chebyshev_values(x: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 2..out.len() {
        out[k] = 2.0 * x * out[k - 1] - out[k - 2];
    }
}

/// Applies the `n × n` matrix `t` along `axis` of a 4-index array.
fn transform_axis(v: &mut [f64], n: usize, axis: usize, t: &[f64]) {
    let stride = n.pow(3 - axis as u32);
    let block = stride * n;
    let mut line = vec![0.0; n];
    for outer in 0..v.len() / block {
        for inner in 0..stride {
            let base = outer * block + inner;
            for (k, l) in line.iter_mut().enumerate() {
                *l = v[base + k * stride];
            }
            for a in 0..n {
                v[base + a * stride] = (0..n).map(|k| t[a * n + k] * line[k]).sum();
            }
        }
    }
}
