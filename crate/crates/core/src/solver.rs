//! Residual assembly, Newton iteration and continuation in `ε` for the
//! coupled shape and center system, plus post-solve verification.
//!
//! Unknowns per patch are `[a_2..a_N, b_2..b_N, x1, x2]`; `ρ` is eliminated
//! through the flux constraint. Residual rows per patch are the `cos_2..cos_N`
//! and `sin_2..sin_N` coefficients of `G_i` on the collocation grid, then
//! `∫G_i sin β` and `∫G_i cos β`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::contour::{delta, flux_residual, project_modes, rho_of, FourierContour, Grid, PatchGeometry};
use crate::error::{Error, Result};
use crate::functional::FunctionalContext;
use crate::green::{GreenKernel, Point};
use crate::kr::VortexConfiguration;
use crate::linop::{assemble_jacobian, JacobianOptions};

/// A point on the continuation curve. `rhos` always equals `rho_of` of the
/// current shapes, so the flux constraints hold identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationState {
    pub eps: f64,
    pub centers: Vec<Point>,
    pub shapes: Vec<FourierContour>,
    pub rhos: Vec<f64>,
    pub kappas: Vec<f64>,
}

impl ContinuationState {
    pub fn new(eps: f64, centers: Vec<Point>, shapes: Vec<FourierContour>, kappas: Vec<f64>, gamma: f64) -> Result<Self> {
        if centers.is_empty() || centers.len() != shapes.len() || centers.len() != kappas.len() {
            return Err(Error::Config(format!(
                "{} centers, {} shapes and {} strengths do not describe one patch each",
                centers.len(),
                shapes.len(),
                kappas.len()
            )));
        }
        let n = shapes[0].n();
        if shapes.iter().any(|s| s.n() != n) {
            return Err(Error::Config("all shapes must share one truncation".into()));
        }
        if !(eps >= 0.0) {
            return Err(Error::Config(format!("eps must be nonnegative, got {eps}")));
        }
        let rhos = shapes
            .iter()
            .zip(&kappas)
            .map(|(g, &k)| rho_of(eps, g, k, gamma))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { eps, centers, shapes, rhos, kappas })
    }

    /// Circular patches of vanishing size at the points of `cfg`.
    pub fn from_points(cfg: &VortexConfiguration, n: usize, gamma: f64) -> Result<Self> {
        let shapes = vec![FourierContour::zeros(n); cfg.m()];
        Self::new(0.0, cfg.points.clone(), shapes, cfg.strengths.clone(), gamma)
    }

    pub fn m(&self) -> usize {
        self.centers.len()
    }

    pub fn n(&self) -> usize {
        self.shapes[0].n()
    }

    pub fn unknowns_per_patch(&self) -> usize {
        2 * (self.n() - 1) + 2
    }

    pub fn patches(&self, gamma: f64) -> Vec<PatchGeometry> {
        (0..self.m())
            .map(|i| PatchGeometry::new(self.centers[i], self.rhos[i], self.eps, gamma, self.shapes[i].clone()))
            .collect()
    }

    pub fn unknowns(&self) -> Vec<f64> {
        let mut u = Vec::with_capacity(self.m() * self.unknowns_per_patch());
        for (g, c) in self.shapes.iter().zip(&self.centers) {
            u.extend(g.to_vec());
            u.extend(c);
        }
        u
    }

    pub fn with_unknowns(&self, u: &[f64], gamma: f64) -> Result<Self> {
        let per = self.unknowns_per_patch();
        assert_eq!(u.len(), per * self.m(), "unknown vector length");
        let n = self.n();
        let mut shapes = Vec::with_capacity(self.m());
        let mut centers = Vec::with_capacity(self.m());
        for chunk in u.chunks(per) {
            shapes.push(FourierContour::from_slice(n, &chunk[..per - 2]));
            centers.push([chunk[per - 2], chunk[per - 1]]);
        }
        Self::new(self.eps, centers, shapes, self.kappas.clone(), gamma)
    }

    pub fn with_eps(&self, eps: f64, gamma: f64) -> Result<Self> {
        Self::new(eps, self.centers.clone(), self.shapes.clone(), self.kappas.clone(), gamma)
    }

    /// `Σ‖g_i‖_{H^k}`.
    pub fn shape_norm(&self, k: u32) -> f64 {
        self.shapes.iter().map(|g| g.norm_y(k)).sum()
    }

    pub fn configuration(&self) -> VortexConfiguration {
        VortexConfiguration { points: self.centers.clone(), strengths: self.kappas.clone() }
    }
}

/// Residual split into rows and the RMS size of each term of `G_i`.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub values: Vec<f64>,
    /// Per patch, RMS over the grid of `G_{i,1}`, `G_{i,2}`, `G_{i,3}`.
    pub term_norms: Vec<[f64; 3]>,
}

pub fn residual(ctx: &FunctionalContext, state: &ContinuationState) -> Result<Vec<f64>> {
    Ok(residual_report(ctx, state)?.values)
}

pub fn residual_report(ctx: &FunctionalContext, state: &ContinuationState) -> Result<ResidualReport> {
    if state.n() != ctx.n() {
        return Err(Error::Config(format!("state truncation {} differs from the context's {}", state.n(), ctx.n())));
    }
    let patches = state.patches(ctx.gamma());
    let all = ctx.eval_all(&patches)?;
    let mut values = Vec::with_capacity(state.m() * state.unknowns_per_patch());
    let mut term_norms = Vec::with_capacity(state.m());
    for v in &all {
        let p = project_modes(&v.total(), ctx.n())?;
        values.extend(p.rest.cos_coeffs());
        values.extend(p.rest.sin_coeffs());
        values.push(PI * p.c1_sin);
        values.push(PI * p.c1_cos);
        term_norms.push(v.term_norms());
    }
    Ok(ResidualReport { values, term_norms })
}

pub fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonOptions {
    /// Stop once the max-norm of the residual is at most `tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub jacobian: JacobianOptions,
    /// Constrain every step to be orthogonal to the orbit of the domain's
    /// continuous symmetries through the current iterate. Solutions then come
    /// in families and the bare Jacobian is singular on them.
    pub phase_conditions: bool,
    /// Step halvings allowed when a full step leaves the admissible set or
    /// increases the residual.
    pub max_backtracks: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 10, jacobian: JacobianOptions::default(), phase_conditions: false, max_backtracks: 6 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NewtonTrace {
    /// Residual max-norm at every iterate, the initial one included.
    pub residual_norms: Vec<f64>,
    pub step_norms: Vec<f64>,
    /// `σ_max/σ_min` of each Jacobian, bordered by the phase conditions
    /// when those are active.
    pub condition: Vec<f64>,
    pub backtracks: usize,
    pub converged: bool,
}

impl NewtonTrace {
    pub fn iterations(&self) -> usize {
        self.step_norms.len()
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    /// The converged iterate, or the one with the smallest residual.
    pub state: ContinuationState,
    pub trace: NewtonTrace,
}

/// Newton on [`residual`] with a finite-difference Jacobian rebuilt at every
/// iterate. Exceeding `max_iter` is reported through `trace.converged`, with
/// the best iterate returned; a singular Jacobian is an error.
pub fn newton_solve(ctx: &FunctionalContext, state: &ContinuationState, opts: &NewtonOptions) -> Result<NewtonOutcome> {
    let gamma = ctx.gamma();
    let mut trace = NewtonTrace::default();
    let mut current = state.clone();
    let mut r = residual(ctx, &current)?;
    let mut norm = max_norm(&r);
    trace.residual_norms.push(norm);
    let mut best = (norm, current.clone());
    loop {
        if norm <= opts.tol {
            trace.converged = true;
            return Ok(NewtonOutcome { state: current, trace });
        }
        if trace.iterations() >= opts.max_iter {
            return Ok(NewtonOutcome { state: best.1, trace });
        }
        let jac = assemble_jacobian(ctx, &current, &opts.jacobian)?;
        let gens = if opts.phase_conditions { orbit_generators(ctx.kernel(), &current) } else { Vec::new() };
        let (step, cond) = solve_step(&jac.matrix, &r, &gens)?;
        trace.condition.push(cond);
        let u0 = current.unknowns();
        let mut scale = 1.0;
        let mut accepted = None;
        for attempt in 0..=opts.max_backtracks {
            let u: Vec<f64> = u0.iter().zip(step.iter()).map(|(a, d)| a + scale * d).collect();
            let trial = current.with_unknowns(&u, gamma).and_then(|s| residual(ctx, &s).map(|r| (s, r)));
            match trial {
                Ok((s, rn)) if max_norm(&rn) < norm || attempt == opts.max_backtracks => {
                    accepted = Some((s, rn));
                    break;
                }
                Ok(_) | Err(Error::Geometry { .. }) | Err(Error::InfeasibleFlux(_)) => {
                    scale *= 0.5;
                    trace.backtracks += 1;
                }
                Err(e) => return Err(e),
            }
        }
        let Some((s, rn)) = accepted else {
            return Err(Error::NonConvergence(format!(
                "no admissible step after {} halvings at residual {norm:.3e}",
                opts.max_backtracks
            )));
        };
        trace.step_norms.push(scale * step.amax());
        current = s;
        r = rn;
        norm = max_norm(&r);
        trace.residual_norms.push(norm);
        if norm < best.0 {
            best = (norm, current.clone());
        }
    }
}

fn solve_step(j: &DMatrix<f64>, r: &[f64], gens: &[DVector<f64>]) -> Result<(DVector<f64>, f64)> {
    let n = j.ncols();
    let mut a = DMatrix::zeros(n + gens.len(), n);
    a.view_mut((0, 0), (n, n)).copy_from(j);
    for (k, g) in gens.iter().enumerate() {
        a.row_mut(n + k).copy_from(&g.transpose());
    }
    let mut rhs = DVector::zeros(n + gens.len());
    for (k, v) in r.iter().enumerate() {
        rhs[k] = -v;
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let cond = smax / svd.singular_values.min();
    if !(cond < 1e14) {
        return Err(Error::SingularJacobian(format!("condition estimate {cond:.3e}")));
    }
    let step = svd.solve(&rhs, 0.0).map_err(|e| Error::SingularJacobian(e.to_string()))?;
    Ok((step, cond))
}

/// Orthonormal tangents, in the layout of [`ContinuationState::unknowns`],
/// to the orbit of `state` under the continuous symmetries of the domain:
/// rotation about the origin, plus the two translations in free space.
/// Tangents that vanish (one circular patch at the disc center) are dropped.
pub fn orbit_generators(kernel: &GreenKernel, state: &ContinuationState) -> Vec<DVector<f64>> {
    let per = state.unknowns_per_patch();
    let len = per * state.m();
    let mut raw = Vec::new();
    // rotating by θ maps g to g(β - θ) and x to e^{iθ}x
    let mut rot = DVector::zeros(len);
    for (i, (g, c)) in state.shapes.iter().zip(&state.centers).enumerate() {
        let base = i * per;
        let k = g.n() - 1;
        for j in 2..=g.n() {
            rot[base + j - 2] = -(j as f64) * g.b(j);
            rot[base + k + j - 2] = j as f64 * g.a(j);
        }
        rot[base + per - 2] = -c[1];
        rot[base + per - 1] = c[0];
    }
    raw.push(rot);
    if kernel.is_free_space() {
        for axis in 0..2 {
            let mut t = DVector::zeros(len);
            for i in 0..state.m() {
                t[i * per + per - 2 + axis] = 1.0;
            }
            raw.push(t);
        }
    }
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for mut v in raw {
        for b in &basis {
            let c = b.dot(&v);
            v -= b * c;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / norm);
        }
    }
    basis
}

/// Warm start for the next `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predictor {
    /// The previous solution at the new `ε`.
    #[default]
    Trivial,
    /// Linear extrapolation in `ε` through the last two solutions.
    Secant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuationOptions {
    pub newton: NewtonOptions,
    pub predictor: Predictor,
    /// Largest admissible `ε`; `None` uses `0.1 ·` min separation `/ max ρ`.
    pub eps_max: Option<f64>,
    /// Radius of the ball around the seed centers; `None` uses `0.2 ·` the
    /// minimal separation, or for one patch `0.2 ·` its boundary distance
    /// (the domain length scale in free space).
    pub center_ball: Option<f64>,
    /// Bound on `Σ‖g_i‖_{H^k}` with `k = shape_norm_order`.
    pub shape_bound: f64,
    pub shape_norm_order: u32,
    /// Halve a failed `ε` step once before giving up.
    pub bisect: bool,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            predictor: Predictor::Trivial,
            eps_max: None,
            center_ball: None,
            shape_bound: 1.0,
            shape_norm_order: 3,
            bisect: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolvedStep {
    pub state: ContinuationState,
    pub trace: NewtonTrace,
    /// Intermediate `ε` inserted after a failed step, if any.
    pub bisected_at: Option<f64>,
}

/// What ended a curve before its last target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopCause {
    /// Newton failed, after bisection if enabled.
    NonConvergence,
    /// A solved state left the center ball or the shape-norm bound.
    Admissibility,
}

#[derive(Debug, Clone)]
pub struct ContinuationRun {
    pub seed: ContinuationState,
    pub steps: Vec<SolvedStep>,
    /// Why the curve ends before the last target.
    pub stopped: Option<String>,
    pub stop_cause: Option<StopCause>,
    pub eps_max: f64,
    pub center_ball: f64,
}

/// Minimal pairwise center distance, infinite for one point.
pub fn min_separation(centers: &[Point]) -> f64 {
    let mut d = f64::INFINITY;
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            d = d.min((centers[i][0] - centers[j][0]).hypot(centers[i][1] - centers[j][1]));
        }
    }
    d
}

pub fn default_eps_max(kernel: &GreenKernel, seed: &ContinuationState) -> f64 {
    let rmax = seed.rhos.iter().fold(0.0f64, |m, r| m.max(*r));
    let sep = if seed.m() > 1 {
        min_separation(&seed.centers)
    } else {
        2.0 * kernel.boundary_distance(seed.centers[0]).min(kernel.length_scale())
    };
    0.1 * sep / rmax
}

pub fn default_center_ball(kernel: &GreenKernel, seed: &ContinuationState) -> f64 {
    if seed.m() > 1 {
        0.2 * min_separation(&seed.centers)
    } else {
        0.2 * kernel.boundary_distance(seed.centers[0]).min(kernel.length_scale())
    }
}

/// Whether Newton steps need phase conditions: the domain acts on
/// the seed by a continuous symmetry with a nonvanishing generator.
pub fn has_continuous_symmetry(kernel: &GreenKernel, seed: &ContinuationState) -> bool {
    !orbit_generators(kernel, seed).is_empty()
}

/// Follows the solution curve from an `ε = 0` seed through the increasing
/// `targets`, warm-starting each Newton solve from the previous point.
pub fn continue_in_eps(
    ctx: &FunctionalContext,
    seed: &ContinuationState,
    targets: &[f64],
    opts: &ContinuationOptions,
) -> Result<ContinuationRun> {
    let kernel = ctx.kernel();
    if targets.is_empty() {
        return Err(Error::Config("no eps targets".into()));
    }
    if targets.windows(2).any(|w| !(w[1] > w[0])) || !(targets[0] > 0.0) {
        return Err(Error::Config("eps targets must be positive and strictly increasing".into()));
    }
    let eps_max = opts.eps_max.unwrap_or_else(|| default_eps_max(kernel, seed));
    if let Some(t) = targets.iter().find(|&&t| t > eps_max) {
        return Err(Error::Config(format!("eps target {t} exceeds eps_max = {eps_max:.4e}")));
    }
    let center_ball = opts.center_ball.unwrap_or_else(|| default_center_ball(kernel, seed));
    let mut newton = opts.newton;
    if has_continuous_symmetry(kernel, seed) {
        newton.phase_conditions = true;
    }

    let mut run = ContinuationRun { seed: seed.clone(), steps: Vec::new(), stopped: None, stop_cause: None, eps_max, center_ball };
    let mut history: Vec<ContinuationState> = vec![seed.clone()];
    for (step_index, &eps) in targets.iter().enumerate() {
        let previous = history.last().unwrap().clone();
        let mut attempt = solve_at(ctx, &history, eps, opts.predictor, &newton);
        let mut bisected_at = None;
        if opts.bisect && !matches!(&attempt, Ok(o) if o.trace.converged) {
            let mid = 0.5 * (previous.eps + eps);
            if let Ok(o) = solve_at(ctx, &history, mid, opts.predictor, &newton) {
                if o.trace.converged {
                    let mut h2 = history.clone();
                    h2.push(o.state);
                    attempt = solve_at(ctx, &h2, eps, opts.predictor, &newton);
                    bisected_at = Some(mid);
                }
            }
        }
        let failure = match attempt {
            Ok(o) if o.trace.converged => {
                if let Some(v) = admissibility_violation(seed, &o.state, center_ball, opts) {
                    Some((StopCause::Admissibility, v))
                } else {
                    history.push(o.state.clone());
                    run.steps.push(SolvedStep { state: o.state, trace: o.trace, bisected_at });
                    None
                }
            }
            Ok(o) => Some((
                StopCause::NonConvergence,
                format!(
                    "Newton did not reach {:.1e} at eps = {eps} (best residual {:.3e})",
                    newton.tol,
                    o.trace.residual_norms.iter().fold(f64::INFINITY, |m, r| m.min(*r))
                ),
            )),
            Err(e) => Some((StopCause::NonConvergence, format!("eps = {eps}: {e}"))),
        };
        if let Some((cause, msg)) = failure {
            if step_index == 0 {
                return Err(match cause {
                    StopCause::NonConvergence => Error::NonConvergence(format!("{msg}; try a smaller initial eps")),
                    StopCause::Admissibility => Error::Constraint(format!("{msg}; try a smaller initial eps")),
                });
            }
            run.stopped = Some(msg);
            run.stop_cause = Some(cause);
            break;
        }
    }
    Ok(run)
}

fn solve_at(
    ctx: &FunctionalContext,
    history: &[ContinuationState],
    eps: f64,
    predictor: Predictor,
    newton: &NewtonOptions,
) -> Result<NewtonOutcome> {
    let gamma = ctx.gamma();
    let last = history.last().unwrap();
    let start = match (predictor, history.len()) {
        (Predictor::Secant, n) if n >= 2 => {
            let prev = &history[n - 2];
            let t = (eps - last.eps) / (last.eps - prev.eps);
            let (u1, u0) = (last.unknowns(), prev.unknowns());
            let u: Vec<f64> = u1.iter().zip(&u0).map(|(a, b)| a + t * (a - b)).collect();
            last.with_unknowns(&u, gamma)?.with_eps(eps, gamma)?
        }
        _ => last.with_eps(eps, gamma)?,
    };
    newton_solve(ctx, &start, newton)
}

fn admissibility_violation(
    seed: &ContinuationState,
    state: &ContinuationState,
    ball: f64,
    opts: &ContinuationOptions,
) -> Option<String> {
    for (i, (c, c0)) in state.centers.iter().zip(&seed.centers).enumerate() {
        let d = (c[0] - c0[0]).hypot(c[1] - c0[1]);
        if !(d < ball) {
            return Some(format!("center {i} moved {d:.3e} from its seed, outside the ball of radius {ball:.3e}"));
        }
    }
    let s = state.shape_norm(opts.shape_norm_order);
    if !(s < opts.shape_bound) {
        return Some(format!(
            "sum of H^{} shape norms {s:.3e} left the bound {}",
            opts.shape_norm_order, opts.shape_bound
        ));
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatchVerification {
    /// `|Γ_i|/ε² - κ_i` from the flux constraint.
    pub flux_defect: f64,
    /// Relative error of the boundary area `½∮(x dy - y dx)` against `κ_i ε²`.
    pub area_rel_error: f64,
    /// The same for the inscribed polygon on the collocation grid.
    pub polygon_area_rel_error: f64,
    pub rho: f64,
    /// `max_β |R(β) - √(κ_i/π)|`.
    pub radius_deviation: f64,
    /// Minimum over the grid of `ε ·` signed curvature.
    pub min_scaled_curvature: f64,
    pub curvature_positive: bool,
    pub centroid: Point,
    pub centroid_distance_to_seed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub eps: f64,
    pub residual_norm: f64,
    pub term_norms: Vec<[f64; 3]>,
    pub patches: Vec<PatchVerification>,
    /// Largest coefficient-wise defect for each reflection symmetry of the
    /// seed, as `(axis angle, defect)`.
    pub reflection_defects: Vec<(f64, f64)>,
}

/// Checks and reports the properties of a solved state; never fails on a
/// violated property, only on evaluation errors.
pub fn verify_solution(ctx: &FunctionalContext, state: &ContinuationState, seed: &ContinuationState) -> Result<Verification> {
    let gamma = ctx.gamma();
    let report = residual_report(ctx, state)?;
    let grid = ctx.grid();
    let patches = state.patches(gamma);
    let eps = state.eps;
    let mut out = Vec::with_capacity(state.m());
    for (i, p) in patches.iter().enumerate() {
        let kappa = state.kappas[i];
        let target = kappa * eps * eps;
        let area = boundary_area(p, grid);
        let (poly, centroid) = p.polygon_area_centroid(grid);
        let rho0 = (kappa / PI).sqrt();
        let d = delta(eps, gamma);
        let vals = p.shape.on_grid(grid);
        let radius_deviation = vals.g.iter().fold(0.0f64, |m, g| m.max((p.rho + d * g - rho0).abs()));
        let min_scaled_curvature = (0..grid.m)
            .map(|k| if eps > 0.0 { eps * p.signed_curvature(grid.beta(k)) } else { 1.0 })
            .fold(f64::INFINITY, f64::min);
        let c0 = seed.centers[i];
        let (area_rel_error, polygon_area_rel_error) = if target > 0.0 {
            ((area - target).abs() / target, (poly - target).abs() / target)
        } else {
            (0.0, 0.0)
        };
        out.push(PatchVerification {
            flux_defect: flux_residual(p, kappa) / PI,
            area_rel_error,
            polygon_area_rel_error,
            rho: p.rho,
            radius_deviation,
            min_scaled_curvature,
            curvature_positive: min_scaled_curvature > 0.0,
            centroid,
            centroid_distance_to_seed: (centroid[0] - c0[0]).hypot(centroid[1] - c0[1]),
        });
    }
    let reflection_defects = reflection_axes(&seed.centers, &seed.kappas, 1e-9)
        .into_iter()
        .filter_map(|phi| reflection_defect(state, phi).map(|d| (phi, d)))
        .collect();
    Ok(Verification {
        eps,
        residual_norm: max_norm(&report.values),
        term_norms: report.term_norms,
        patches: out,
        reflection_defects,
    })
}

/// `½∮(x dy - y dx)` in absolute coordinates by the trapezoid rule, exact
/// for the band-limited boundary once the grid resolves `R²`.
pub fn boundary_area(p: &PatchGeometry, grid: &Grid) -> f64 {
    let mut acc = 0.0;
    for k in 0..grid.m {
        let b = grid.beta(k);
        let (r, r1, _) = p.radius_derivs(b);
        let (s, c) = b.sin_cos();
        let x = p.center[0] + p.eps * r * c;
        let y = p.center[1] + p.eps * r * s;
        let dx = p.eps * (r1 * c - r * s);
        let dy = p.eps * (r1 * s + r * c);
        acc += x * dy - y * dx;
    }
    0.5 * acc * 2.0 * PI / grid.m as f64
}

/// Angles of lines through the origin whose reflection maps the weighted
/// point set onto itself.
pub fn reflection_axes(centers: &[Point], kappas: &[f64], tol: f64) -> Vec<f64> {
    let mut candidates = vec![0.0, 0.5 * PI];
    for (i, c) in centers.iter().enumerate() {
        if c[0].hypot(c[1]) > tol {
            candidates.push(c[1].atan2(c[0]));
        }
        for d in &centers[i + 1..] {
            let s = [c[0] + d[0], c[1] + d[1]];
            if s[0].hypot(s[1]) > tol {
                candidates.push(s[1].atan2(s[0]));
            }
            candidates.push((d[1] - c[1]).atan2(d[0] - c[0]) + 0.5 * PI);
        }
    }
    let mut axes: Vec<f64> = Vec::new();
    for phi in candidates {
        let phi = phi.rem_euclid(PI);
        if axes.iter().any(|a| (a - phi).abs() < 1e-9 || (a - phi).abs() > PI - 1e-9) {
            continue;
        }
        if reflection_permutation(centers, kappas, phi, tol).is_some() {
            axes.push(phi);
        }
    }
    axes
}

fn reflect(p: Point, phi: f64) -> Point {
    let (s, c) = (2.0 * phi).sin_cos();
    [c * p[0] + s * p[1], s * p[0] - c * p[1]]
}

fn reflection_permutation(centers: &[Point], kappas: &[f64], phi: f64, tol: f64) -> Option<Vec<usize>> {
    let scale = centers.iter().fold(1.0f64, |m, c| m.max(c[0].hypot(c[1])));
    centers
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let r = reflect(*c, phi);
            centers.iter().enumerate().position(|(j, d)| {
                (r[0] - d[0]).hypot(r[1] - d[1]) <= tol * scale && (kappas[i] - kappas[j]).abs() <= tol * kappas[i]
            })
        })
        .collect()
}

/// Largest coefficient or center mismatch between the state and its mirror
/// image across the axis at angle `phi`; `None` if the centers themselves
/// are not mapped onto each other to within `1e-6`.
pub fn reflection_defect(state: &ContinuationState, phi: f64) -> Option<f64> {
    let perm = reflection_permutation(&state.centers, &state.kappas, phi, 1e-6)?;
    let theta = 2.0 * phi;
    let mut defect = 0.0f64;
    for (i, &j) in perm.iter().enumerate() {
        let r = reflect(state.centers[i], phi);
        defect = defect.max((r[0] - state.centers[j][0]).abs()).max((r[1] - state.centers[j][1]).abs());
        // mirror image of R_i(β) is R_i(2φ - β)
        let (g, h) = (&state.shapes[i], &state.shapes[j]);
        for k in 2..=g.n() {
            let (s, c) = (k as f64 * theta).sin_cos();
            let a = g.a(k) * c + g.b(k) * s;
            let b = g.a(k) * s - g.b(k) * c;
            defect = defect.max((a - h.a(k)).abs()).max((b - h.b(k)).abs());
        }
    }
    Some(defect)
}
