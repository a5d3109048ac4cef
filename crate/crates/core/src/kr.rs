//! Kirchhoff–Routh landscape of `m` point vortices: value, gradient,
//! Hessian, and a damped-Newton critical-point search.
//!
//! Two conventions are available. [`KrConvention::AsPrinted`] is
//! `W = -Σ_{i≠j} κ_iκ_j K¹(x_i,x_j) + Σ_i κ_i² K⁰(x_i,x_i)`.
//! [`KrConvention::ContourConsistent`] is the function whose gradient the
//! contour functional reproduces at `ε = 0`:
//! `W̃ = -(1/2π) Σ_{i≠j} κ_iκ_j K¹(x_i,x_j) + Σ_{i,j} κ_iκ_j K⁰(x_i,x_j)`,
//! with `∇_{x_i} W̃ = 2κ_i V_i` and
//! `V_i = (γC_γ/2π) Σ_{j≠i} κ_j (x_i-x_j)/|x_i-x_j|^{γ+2} + Σ_j κ_j ∇ₓK⁰(x_i,x_j)`.
//! The two agree for `m = 1` only.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::{dist2, GreenKernel, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KrConvention {
    AsPrinted,
    #[default]
    ContourConsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexConfiguration {
    pub points: Vec<Point>,
    pub strengths: Vec<f64>,
}

impl VortexConfiguration {
    pub fn new(points: Vec<Point>, strengths: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != strengths.len() {
            return Err(Error::Config(format!(
                "{} points but {} strengths",
                points.len(),
                strengths.len()
            )));
        }
        if let Some(k) = strengths.iter().find(|k| !(**k > 0.0 && k.is_finite())) {
            return Err(Error::Config(format!("strengths must be positive, got {k}")));
        }
        let cfg = Self { points, strengths };
        if cfg.m() > 1 && cfg.min_separation() == 0.0 {
            return Err(Error::Singular("vortex configuration"));
        }
        Ok(cfg)
    }

    pub fn m(&self) -> usize {
        self.points.len()
    }

    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.m() {
            for j in i + 1..self.m() {
                best = best.min(dist2(self.points[i], self.points[j]).sqrt());
            }
        }
        best
    }

    pub fn flat(&self) -> Vec<f64> {
        self.points.iter().flat_map(|p| [p[0], p[1]]).collect()
    }

    pub fn with_flat(&self, flat: &[f64]) -> Self {
        Self {
            points: flat.chunks(2).map(|c| [c[0], c[1]]).collect(),
            strengths: self.strengths.clone(),
        }
    }

    fn check_in(&self, kernel: &GreenKernel) -> Result<()> {
        for p in &self.points {
            if !kernel.contains(*p) {
                return Err(Error::OutsideDomain { x: p[0], y: p[1] });
            }
        }
        if self.m() > 1 && self.min_separation() == 0.0 {
            return Err(Error::Singular("vortex configuration"));
        }
        Ok(())
    }
}

/// `W_m` under the chosen convention.
pub fn w_m(kernel: &GreenKernel, cfg: &VortexConfiguration, conv: KrConvention) -> Result<f64> {
    cfg.check_in(kernel)?;
    let (x, k) = (&cfg.points, &cfg.strengths);
    let m = cfg.m();
    // terms are summed in sorted order so that relabeling the points is exact
    let mut inter = Vec::with_capacity(m * m);
    let mut smooth = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            if i != j {
                inter.push(k[i] * k[j] * kernel.k1(x[i], x[j])?);
            }
            match conv {
                KrConvention::AsPrinted if i == j => smooth.push(k[i] * k[i] * kernel.k0(x[i], x[i])?),
                KrConvention::AsPrinted => {}
                KrConvention::ContourConsistent => smooth.push(k[i] * k[j] * kernel.k0(x[i], x[j])?),
            }
        }
    }
    let sorted_sum = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v.iter().sum::<f64>()
    };
    let (inter, smooth) = (sorted_sum(inter), sorted_sum(smooth));
    let factor = match conv {
        KrConvention::AsPrinted => 1.0,
        KrConvention::ContourConsistent => 1.0 / (2.0 * PI),
    };
    Ok(-factor * inter + smooth)
}

/// `V_i` of the module docs: the `j = 1` velocity seen by point `i`.
pub fn point_velocity(kernel: &GreenKernel, cfg: &VortexConfiguration, i: usize) -> Result<Point> {
    let p = kernel.param();
    let (x, k) = (&cfg.points, &cfg.strengths);
    let mut v = [0.0; 2];
    for j in 0..cfg.m() {
        if j != i {
            let d = [x[i][0] - x[j][0], x[i][1] - x[j][1]];
            let r2 = d[0] * d[0] + d[1] * d[1];
            if r2 == 0.0 {
                return Err(Error::Singular("point_velocity"));
            }
            let f = p.gamma * p.c_gamma / (2.0 * PI) * k[j] * r2.powf(-0.5 * p.gamma - 1.0);
            v[0] += f * d[0];
            v[1] += f * d[1];
        }
        let g = kernel.grad_x_k0(x[i], x[j])?;
        v[0] += k[j] * g[0];
        v[1] += k[j] * g[1];
    }
    Ok(v)
}

/// Gradient of `W_m` with respect to `(x_1, y_1, …, x_m, y_m)`.
pub fn grad_w_m(kernel: &GreenKernel, cfg: &VortexConfiguration, conv: KrConvention) -> Result<Vec<f64>> {
    cfg.check_in(kernel)?;
    let m = cfg.m();
    let mut out = vec![0.0; 2 * m];
    match conv {
        KrConvention::ContourConsistent => {
            for i in 0..m {
                let v = point_velocity(kernel, cfg, i)?;
                out[2 * i] = 2.0 * cfg.strengths[i] * v[0];
                out[2 * i + 1] = 2.0 * cfg.strengths[i] * v[1];
            }
        }
        KrConvention::AsPrinted => {
            let p = kernel.param();
            let (x, k) = (&cfg.points, &cfg.strengths);
            for i in 0..m {
                for j in 0..m {
                    if j == i {
                        continue;
                    }
                    let d = [x[i][0] - x[j][0], x[i][1] - x[j][1]];
                    let r2 = d[0] * d[0] + d[1] * d[1];
                    let f = 2.0 * p.gamma * p.c_gamma * k[i] * k[j] * r2.powf(-0.5 * p.gamma - 1.0);
                    out[2 * i] += f * d[0];
                    out[2 * i + 1] += f * d[1];
                }
                // d/dx K⁰(x,x) = 2 ∇ₓK⁰(x,x) by symmetry of K⁰
                let g = kernel.grad_x_k0(x[i], x[i])?;
                out[2 * i] += 2.0 * k[i] * k[i] * g[0];
                out[2 * i + 1] += 2.0 * k[i] * k[i] * g[1];
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Hessian {
    /// Symmetrized matrix `(H + Hᵀ)/2`.
    pub matrix: DMatrix<f64>,
    /// `‖H - Hᵀ‖_F / ‖H‖_F` before symmetrization.
    pub asymmetry: f64,
}

/// Hessian by central differences of [`grad_w_m`] with step `h`.
pub fn hess_w_m(kernel: &GreenKernel, cfg: &VortexConfiguration, conv: KrConvention, h: f64) -> Result<Hessian> {
    let raw = hess_raw(kernel, cfg, conv, h)?;
    Ok(symmetrize(raw))
}

/// Hessian with one Richardson step over `h` and `h/2`.
pub fn hess_w_m_refined(kernel: &GreenKernel, cfg: &VortexConfiguration, conv: KrConvention, h: f64) -> Result<Hessian> {
    let a = hess_raw(kernel, cfg, conv, h)?;
    let b = hess_raw(kernel, cfg, conv, 0.5 * h)?;
    Ok(symmetrize((b * 4.0 - a) / 3.0))
}

fn hess_raw(kernel: &GreenKernel, cfg: &VortexConfiguration, conv: KrConvention, h: f64) -> Result<DMatrix<f64>> {
    let n = 2 * cfg.m();
    let base = cfg.flat();
    let mut hm = DMatrix::zeros(n, n);
    for c in 0..n {
        let mut xp = base.clone();
        let mut xm = base.clone();
        xp[c] += h;
        xm[c] -= h;
        let gp = grad_w_m(kernel, &cfg.with_flat(&xp), conv)?;
        let gm = grad_w_m(kernel, &cfg.with_flat(&xm), conv)?;
        for r in 0..n {
            hm[(r, c)] = (gp[r] - gm[r]) / (2.0 * h);
        }
    }
    Ok(hm)
}

fn symmetrize(h: DMatrix<f64>) -> Hessian {
    let norm = h.norm();
    let asymmetry = if norm > 0.0 { (&h - h.transpose()).norm() / norm } else { 0.0 };
    let matrix = (&h + h.transpose()) * 0.5;
    Hessian { matrix, asymmetry }
}

/// Infinitesimal generators of the continuous symmetries of the domain acting
/// on a configuration, orthonormalized: the rotation about the origin for the
/// disc, and the two translations plus rotation in free space. Generators
/// that vanish (a single point at the disc center) are dropped.
pub fn symmetry_generators(kernel: &GreenKernel, cfg: &VortexConfiguration) -> Vec<DVector<f64>> {
    let n = 2 * cfg.m();
    let mut raw: Vec<DVector<f64>> = Vec::new();
    raw.push(DVector::from_iterator(n, cfg.points.iter().flat_map(|p| [-p[1], p[0]])));
    if kernel.is_free_space() {
        raw.push(DVector::from_iterator(n, (0..n).map(|k| if k % 2 == 0 { 1.0 } else { 0.0 })));
        raw.push(DVector::from_iterator(n, (0..n).map(|k| if k % 2 == 1 { 1.0 } else { 0.0 })));
    }
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for mut v in raw {
        for b in &basis {
            let c = b.dot(&v);
            v -= b * c;
        }
        let norm = v.norm();
        if norm > 1e-12 * (n as f64).sqrt() {
            basis.push(v / norm);
        }
    }
    basis
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalPoint {
    pub config: VortexConfiguration,
    pub gradient_norm: f64,
    pub hessian_eigenvalues: Vec<f64>,
    pub determinant: f64,
    /// `|det H| > 1e-10` and the smallest `|eigenvalue|` above `1e-8` of the largest.
    pub nondegenerate: bool,
    /// Nondegenerate on the complement of the domain's symmetry orbit.
    pub nondegenerate_mod_symmetry: bool,
    /// Number of negative Hessian eigenvalues.
    pub index: usize,
    /// `sign det H` on the complement of the symmetry orbit (0 if degenerate there).
    pub degree: i32,
    pub symmetry_dimension: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedFailure {
    pub seed: VortexConfiguration,
    pub reason: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CriticalSearch {
    pub points: Vec<CriticalPoint>,
    pub failures: Vec<SeedFailure>,
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_backtracks: usize,
    /// Hessian finite-difference step relative to the domain length scale.
    pub hessian_step: f64,
    pub dedup_distance: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 60,
            max_backtracks: 30,
            hessian_step: 1e-5,
            dedup_distance: 1e-6,
        }
    }
}

/// Damped Newton on `∇W_m` from each seed, with `tol` on `‖∇W_m‖₂`.
pub fn find_critical_points(
    kernel: &GreenKernel,
    seeds: &[VortexConfiguration],
    tol: f64,
    conv: KrConvention,
) -> CriticalSearch {
    let opts = NewtonOptions { tol, ..NewtonOptions::default() };
    find_critical_points_with(kernel, seeds, conv, &opts)
}

pub fn find_critical_points_with(
    kernel: &GreenKernel,
    seeds: &[VortexConfiguration],
    conv: KrConvention,
    opts: &NewtonOptions,
) -> CriticalSearch {
    let mut out = CriticalSearch::default();
    for seed in seeds {
        match newton_from(kernel, seed, conv, opts) {
            Ok((cfg, iterations)) => {
                let flat = cfg.flat();
                let dup = out.points.iter().any(|p| {
                    let q = p.config.flat();
                    q.iter().zip(&flat).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() < opts.dedup_distance
                });
                if dup {
                    continue;
                }
                match classify(kernel, cfg, conv, opts, iterations) {
                    Ok(cp) => out.points.push(cp),
                    Err(e) => out.failures.push(SeedFailure { seed: seed.clone(), reason: e.to_string() }),
                }
            }
            Err(e) => out.failures.push(SeedFailure { seed: seed.clone(), reason: e.to_string() }),
        }
    }
    out.points.sort_by(|a, b| {
        let (fa, fb) = (a.config.flat(), b.config.flat());
        fa.partial_cmp(&fb).unwrap_or(std::cmp::Ordering::Equal)
    });
    out
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn newton_from(
    kernel: &GreenKernel,
    seed: &VortexConfiguration,
    conv: KrConvention,
    opts: &NewtonOptions,
) -> Result<(VortexConfiguration, usize)> {
    let h = opts.hessian_step * kernel.length_scale();
    let mut cfg = seed.clone();
    let mut g = grad_w_m(kernel, &cfg, conv)?;
    let mut gn = norm(&g);
    for it in 0..opts.max_iter {
        if gn <= opts.tol {
            return Ok((cfg, it));
        }
        let hess = hess_w_m(kernel, &cfg, conv, h)?.matrix;
        let step = pseudo_solve(&hess, &DVector::from_vec(g.clone()), 1e-8)
            .ok_or_else(|| Error::SingularJacobian("Hessian of W_m has no usable singular values".into()))?;
        let x0 = cfg.flat();
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_backtracks {
            let trial: Vec<f64> = x0.iter().zip(step.iter()).map(|(x, s)| x - t * s).collect();
            let cand = cfg.with_flat(&trial);
            if let Ok(gc) = grad_w_m(kernel, &cand, conv) {
                let gcn = norm(&gc);
                if gcn.is_finite() && gcn < gn {
                    cfg = cand;
                    g = gc;
                    gn = gcn;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            if gn <= opts.tol {
                return Ok((cfg, it));
            }
            return Err(Error::NonConvergence(format!("line search stalled at |grad W| = {gn:.3e}")));
        }
    }
    if gn <= opts.tol {
        Ok((cfg, opts.max_iter))
    } else {
        Err(Error::NonConvergence(format!(
            "{} iterations, |grad W| = {gn:.3e}",
            opts.max_iter
        )))
    }
}

/// Minimum-norm solution of `A x = b`, discarding singular values below
/// `rcond · σ_max` (continuous symmetries make `A` exactly singular).
pub fn pseudo_solve(a: &DMatrix<f64>, b: &DVector<f64>, rcond: f64) -> Option<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) {
        return None;
    }
    let eps = rcond * smax;
    svd.solve(b, eps).ok()
}

fn classify(
    kernel: &GreenKernel,
    cfg: VortexConfiguration,
    conv: KrConvention,
    opts: &NewtonOptions,
    iterations: usize,
) -> Result<CriticalPoint> {
    let h = opts.hessian_step * kernel.length_scale();
    let hess = hess_w_m(kernel, &cfg, conv, h)?.matrix;
    let eig = SymmetricEigen::new(hess.clone());
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let determinant = eigenvalues.iter().product::<f64>();
    let index = eigenvalues.iter().filter(|e| **e < 0.0).count();
    // finite-difference noise leaves an exact zero eigenvalue at ~1e-9, which
    // can still push |det H| over 1e-10; require a relative gap as well
    let max_abs = eigenvalues.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let min_abs = eigenvalues.iter().fold(f64::INFINITY, |a, b| a.min(b.abs()));

    let gens = symmetry_generators(kernel, &cfg);
    let reduced = SymmetricEigen::new(restrict_to_complement(&hess, &gens)).eigenvalues;
    let red_det = reduced.iter().product::<f64>();
    let red_scale = reduced.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let red_min = reduced.iter().fold(f64::INFINITY, |a, b| a.min(b.abs()));
    let nondegenerate_mod_symmetry = reduced.is_empty() || (red_min > 1e-8 * red_scale && red_det.abs() > 1e-10);
    let degree = if nondegenerate_mod_symmetry { red_det.signum() as i32 } else { 0 };
    let gradient_norm = norm(&grad_w_m(kernel, &cfg, conv)?);
    Ok(CriticalPoint {
        config: cfg,
        gradient_norm,
        hessian_eigenvalues: eigenvalues,
        determinant,
        nondegenerate: determinant.abs() > 1e-10 && min_abs > 1e-8 * max_abs,
        nondegenerate_mod_symmetry,
        index,
        degree,
        symmetry_dimension: gens.len(),
        iterations,
    })
}

fn restrict_to_complement(h: &DMatrix<f64>, gens: &[DVector<f64>]) -> DMatrix<f64> {
    let n = h.nrows();
    if gens.is_empty() {
        return h.clone();
    }
    // orthonormal basis of the complement: QR of [gens | I], keep trailing columns
    let mut cols: Vec<DVector<f64>> = gens.to_vec();
    for k in 0..n {
        let mut v = DVector::zeros(n);
        v[k] = 1.0;
        for b in &cols {
            let c = b.dot(&v);
            v -= b * c;
        }
        let nv = v.norm();
        if nv > 1e-8 {
            cols.push(v / nv);
        }
        if cols.len() == n {
            break;
        }
    }
    let q = DMatrix::from_columns(&cols[gens.len()..]);
    q.transpose() * h * q
}

/// Tensor-grid seeds for `m` points over the safety-shrunk domain
/// (`|x| <= shrink · radius` for the disc), filtering collisions.
pub fn grid_seeds(kernel: &GreenKernel, strengths: &[f64], per_axis: usize, shrink: f64) -> Vec<VortexConfiguration> {
    let r = shrink * kernel.length_scale();
    let per_axis = per_axis.max(2);
    let mut nodes = Vec::new();
    for a in 0..per_axis {
        for b in 0..per_axis {
            let p = [
                -r + 2.0 * r * a as f64 / (per_axis - 1) as f64,
                -r + 2.0 * r * b as f64 / (per_axis - 1) as f64,
            ];
            if kernel.is_free_space() || p[0].hypot(p[1]) <= r {
                nodes.push(p);
            }
        }
    }
    let m = strengths.len();
    let mut out = Vec::new();
    let mut idx = vec![0usize; m];
    if nodes.is_empty() || m == 0 {
        return out;
    }
    let min_gap = 0.5 * 2.0 * r / (per_axis - 1) as f64;
    loop {
        let pts: Vec<Point> = idx.iter().map(|&k| nodes[k]).collect();
        let ok = (0..m).all(|i| (i + 1..m).all(|j| dist2(pts[i], pts[j]).sqrt() > min_gap));
        if ok {
            out.push(VortexConfiguration { points: pts, strengths: strengths.to_vec() });
        }
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < nodes.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == m {
                return out;
            }
        }
    }
}

/// Configuration with the `m = 2` equal-strength pair at `(±d, 0)`.
pub fn symmetric_pair(d: f64, kappa: f64) -> VortexConfiguration {
    VortexConfiguration { points: vec![[d, 0.0], [-d, 0.0]], strengths: vec![kappa, kappa] }
}
