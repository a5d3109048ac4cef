//! Fourier representation of patch boundaries `R(β) = ρ + ε|ε|^γ g(β)` with
//! `g = Σ_{j=2}^N (a_j cos jβ + b_j sin jβ)`, the flux constraint, the
//! function-space norms, and boundary geometry.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::Point;
use crate::special::cos_diff_multiplier;

/// Shape perturbation with modes `2..=N` only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierContour {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl FourierContour {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 2, "truncation order must be at least 2");
        Self { n, a: vec![0.0; n - 1], b: vec![0.0; n - 1] }
    }

    /// Coefficients `a_2..a_N`, `b_2..b_N`.
    pub fn from_coeffs(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return Err(Error::Config("cosine and sine coefficient lists must match and be nonempty".into()));
        }
        Ok(Self { n: a.len() + 1, a, b })
    }

    pub fn single_cos(n: usize, j: usize, amp: f64) -> Self {
        let mut c = Self::zeros(n);
        c.set(j, amp, 0.0);
        c
    }

    pub fn single_sin(n: usize, j: usize, amp: f64) -> Self {
        let mut c = Self::zeros(n);
        c.set(j, 0.0, amp);
        c
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self, j: usize) -> f64 {
        self.a[j - 2]
    }

    pub fn b(&self, j: usize) -> f64 {
        self.b[j - 2]
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.a
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.b
    }

    pub fn set(&mut self, j: usize, a: f64, b: f64) {
        assert!((2..=self.n).contains(&j), "mode {j} outside 2..={}", self.n);
        self.a[j - 2] = a;
        self.b[j - 2] = b;
    }

    /// Packed `[a_2..a_N, b_2..b_N]`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.a.iter().chain(&self.b).copied().collect()
    }

    pub fn from_slice(n: usize, v: &[f64]) -> Self {
        assert_eq!(v.len(), 2 * (n - 1));
        Self { n, a: v[..n - 1].to_vec(), b: v[n - 1..].to_vec() }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            n: self.n,
            a: self.a.iter().map(|x| s * x).collect(),
            b: self.b.iter().map(|x| s * x).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
            b: self.b.iter().zip(&other.b).map(|(x, y)| x + y).collect(),
        }
    }

    /// Rotate the pattern by `φ`: `g(β) ↦ g(β - φ)`.
    pub fn rotated(&self, phi: f64) -> Self {
        let mut out = self.clone();
        for j in 2..=self.n {
            let (s, c) = (j as f64 * phi).sin_cos();
            let (a, b) = (self.a(j), self.b(j));
            out.set(j, a * c - b * s, a * s + b * c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().chain(&self.b).all(|x| *x == 0.0)
    }

    /// `Σ (a_j² + b_j²)`; `∫₀^{2π} g² = π` times this.
    pub fn sum_squares(&self) -> f64 {
        self.a.iter().chain(&self.b).map(|x| x * x).sum()
    }

    pub fn eval(&self, beta: f64) -> f64 {
        self.derivs(beta).0
    }

    /// `(g, g', g'')` at `β`.
    pub fn derivs(&self, beta: f64) -> (f64, f64, f64) {
        let mut g = 0.0;
        let mut g1 = 0.0;
        let mut g2 = 0.0;
        for j in 2..=self.n {
            let jf = j as f64;
            let (s, c) = (jf * beta).sin_cos();
            let (a, b) = (self.a(j), self.b(j));
            g += a * c + b * s;
            g1 += jf * (b * c - a * s);
            g2 -= jf * jf * (a * c + b * s);
        }
        (g, g1, g2)
    }

    /// `(g, g', g'')` on the uniform grid `β_p = 2πp/M`.
    pub fn on_grid(&self, grid: &Grid) -> GridValues {
        let m = grid.m;
        let mut out = GridValues { g: vec![0.0; m], g1: vec![0.0; m], g2: vec![0.0; m] };
        for j in 2..=self.n.min(grid.m / 2) {
            let (a, b) = (self.a(j), self.b(j));
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let jf = j as f64;
            for p in 0..m {
                let k = (j * p) % m;
                let (c, s) = (grid.cos[k], grid.sin[k]);
                let v = a * c + b * s;
                out.g[p] += v;
                out.g1[p] += jf * (b * c - a * s);
                out.g2[p] -= jf * jf * v;
            }
        }
        out
    }

    /// `(Σ (1+j²)^k (a_j² + b_j²))^{1/2}`.
    pub fn norm_y(&self, k: u32) -> f64 {
        self.weighted_norm(f64::from(k))
    }

    /// `(Σ (1+j²)^{k+γ-1} (a_j² + b_j²))^{1/2}`, equivalent to the
    /// singular-difference norm on truncations.
    pub fn norm_x(&self, k: u32, gamma: f64) -> f64 {
        self.weighted_norm(f64::from(k) + gamma - 1.0)
    }

    fn weighted_norm(&self, power: f64) -> f64 {
        (2..=self.n)
            .map(|j| (1.0 + (j * j) as f64).powf(power) * (self.a(j).powi(2) + self.b(j).powi(2)))
            .sum::<f64>()
            .sqrt()
    }

    /// The singular-difference form: `‖g‖_{H^k}` plus the `L²` norm of
    /// `∫ (∂^k g(β-η) - ∂^k g(β)) |sin(η/2)|^{-γ} dη`, which acts on mode `j`
    /// as multiplication by `-2π m_j`.
    pub fn norm_x_exact(&self, k: u32, gamma: f64) -> Result<f64> {
        let mut sing = 0.0;
        for j in 2..=self.n {
            let m = cos_diff_multiplier(j as u32, gamma)?;
            let w = 2.0 * PI * m * (j as f64).powi(k as i32);
            sing += w * w * (self.a(j).powi(2) + self.b(j).powi(2));
        }
        // L² over one period carries a factor π per mode
        Ok((PI * sing).sqrt() + (PI * self.norm_y(k).powi(2)).sqrt())
    }
}

/// Trigonometric tables for the uniform grid of size `M`.
#[derive(Debug, Clone)]
pub struct Grid {
    pub m: usize,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl Grid {
    pub fn new(m: usize) -> Self {
        assert!(m >= 4 && m % 2 == 0, "grid size must be even and at least 4");
        let (sin, cos) = (0..m).map(|k| (2.0 * PI * k as f64 / m as f64).sin_cos()).unzip();
        Self { m, cos, sin }
    }

    pub fn beta(&self, p: usize) -> f64 {
        2.0 * PI * p as f64 / self.m as f64
    }

    pub fn betas(&self) -> Vec<f64> {
        (0..self.m).map(|p| self.beta(p)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct GridValues {
    pub g: Vec<f64>,
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
}

/// Result of splitting grid samples into mean, first harmonics and the
/// `j >= 2` part.
#[derive(Debug, Clone)]
pub struct ModeProjection {
    pub c0: f64,
    pub c1_cos: f64,
    pub c1_sin: f64,
    pub rest: FourierContour,
}

/// Discrete Fourier analysis of samples on the uniform grid, truncated at `n`.
pub fn project_modes(samples: &[f64], n: usize) -> Result<ModeProjection> {
    let m = samples.len();
    if m < 2 * n + 2 || m % 2 != 0 {
        return Err(Error::Config(format!(
            "grid of {m} samples cannot resolve modes up to {n} without aliasing"
        )));
    }
    let grid = Grid::new(m);
    let coef = |j: usize| -> (f64, f64) {
        let mut c = 0.0;
        let mut s = 0.0;
        for (p, f) in samples.iter().enumerate() {
            let k = (j * p) % m;
            c += f * grid.cos[k];
            s += f * grid.sin[k];
        }
        (2.0 * c / m as f64, 2.0 * s / m as f64)
    };
    let c0 = samples.iter().sum::<f64>() / m as f64;
    let (c1_cos, c1_sin) = coef(1);
    let mut rest = FourierContour::zeros(n);
    for j in 2..=n {
        let (c, s) = coef(j);
        rest.set(j, c, s);
    }
    Ok(ModeProjection { c0, c1_cos, c1_sin, rest })
}

/// `ε|ε|^γ`.
pub fn delta(eps: f64, gamma: f64) -> f64 {
    eps * eps.abs().powf(gamma)
}

/// One patch: `z(β) = x + ε R(β)(cos β, sin β)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchGeometry {
    pub center: Point,
    pub rho: f64,
    pub eps: f64,
    pub gamma: f64,
    pub shape: FourierContour,
}

impl PatchGeometry {
    pub fn new(center: Point, rho: f64, eps: f64, gamma: f64, shape: FourierContour) -> Self {
        Self { center, rho, eps, gamma, shape }
    }

    pub fn delta(&self) -> f64 {
        delta(self.eps, self.gamma)
    }

    pub fn radius(&self, beta: f64) -> f64 {
        self.rho + self.delta() * self.shape.eval(beta)
    }

    /// `(R, R', R'')`.
    pub fn radius_derivs(&self, beta: f64) -> (f64, f64, f64) {
        let d = self.delta();
        let (g, g1, g2) = self.shape.derivs(beta);
        (self.rho + d * g, d * g1, d * g2)
    }

    pub fn boundary_point(&self, beta: f64) -> Point {
        let r = self.eps * self.radius(beta);
        [self.center[0] + r * beta.cos(), self.center[1] + r * beta.sin()]
    }

    /// Signed curvature `C(β)` from
    /// `ε C = (R² + 2R'² - R R'') / (R² + R'²)^{3/2}`.
    pub fn signed_curvature(&self, beta: f64) -> f64 {
        let (r, r1, r2) = self.radius_derivs(beta);
        (r * r + 2.0 * r1 * r1 - r * r2) / (r * r + r1 * r1).powf(1.5) / self.eps
    }

    /// Minimum of `R` over the grid; the radius function must stay positive.
    pub fn min_radius(&self, grid: &Grid) -> f64 {
        let v = self.shape.on_grid(grid);
        let d = self.delta();
        v.g.iter().map(|g| self.rho + d * g).fold(f64::INFINITY, f64::min)
    }

    /// Area and centroid of the boundary polygon sampled on `grid`.
    pub fn polygon_area_centroid(&self, grid: &Grid) -> (f64, Point) {
        let pts: Vec<Point> = (0..grid.m).map(|p| self.boundary_point(grid.beta(p))).collect();
        polygon_area_centroid(&pts)
    }

    /// Exact area `(ε²/2)∫R² = ε²(πρ² + δ²π Σ(a²+b²)/2)` of the smooth curve.
    pub fn area(&self) -> f64 {
        let d = self.delta();
        self.eps * self.eps * (PI * self.rho * self.rho + 0.5 * d * d * PI * self.shape.sum_squares())
    }
}

pub fn polygon_area_centroid(pts: &[Point]) -> (f64, Point) {
    // shoelace on coordinates relative to the first vertex
    let o = pts[0];
    let mut a2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for k in 0..pts.len() {
        let p = [pts[k][0] - o[0], pts[k][1] - o[1]];
        let q = pts[(k + 1) % pts.len()];
        let q = [q[0] - o[0], q[1] - o[1]];
        let cross = p[0] * q[1] - q[0] * p[1];
        a2 += cross;
        cx += (p[0] + q[0]) * cross;
        cy += (p[1] + q[1]) * cross;
    }
    let area = 0.5 * a2;
    (area, [o[0] + cx / (3.0 * a2), o[1] + cy / (3.0 * a2)])
}

/// `πρ² + (ε^{2+2γ}/2)∫₀^{2π} g² - κ`, with the integral from Parseval.
pub fn flux_residual(geom: &PatchGeometry, kappa: f64) -> f64 {
    let d = geom.delta();
    PI * geom.rho * geom.rho + 0.5 * d * d * PI * geom.shape.sum_squares() - kappa
}

/// `ρ = (κ/π - (ε^{2+2γ}/2π)∫g²)^{1/2}`, the root of the flux constraint.
pub fn rho_of(eps: f64, g: &FourierContour, kappa: f64, gamma: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::Config(format!("kappa must be positive, got {kappa}")));
    }
    let d = delta(eps, gamma);
    let arg = kappa / PI - 0.5 * d * d * g.sum_squares();
    if !(arg > 0.0) {
        return Err(Error::InfeasibleFlux(arg));
    }
    Ok(arg.sqrt())
}
