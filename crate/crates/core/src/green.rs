//! Green kernels of the fractional Laplacian `(-Δ)^{1-γ/2}`: the singular
//! part `K¹ = C_γ |x-y|^{-γ}`, the smooth remainder `K⁰` and its gradient in
//! the first argument.
//!
//! The disc kernel is the explicit Riesz / Blumenthal–Getoor–Ray formula
//! `K(x,y) = κ_s |x-y|^{-γ} ∫₀^{r₀} t^{s-1}/(1+t) dt`,
//! `r₀ = (a²-|x|²)(a²-|y|²)/(a²|x-y|²)`, `s = 1-γ/2`, with
//! `κ_s = C_γ sin(πs)/π` so that `K - K¹ → finite` on the diagonal.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::GammaParam;

pub type Point = [f64; 2];

/// Built-in domains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Disc { radius: f64 },
    FreeSpace,
}

/// How `∇ₓK⁰` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    /// Differentiated series (default).
    #[default]
    Analytic,
    /// Central differences with one Richardson level.
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreenKernel {
    domain: Domain,
    param: GammaParam,
    kappa_s: f64,
    gradient: GradientMethod,
    fd_step: f64,
}

impl GreenKernel {
    pub fn new(domain: Domain, param: GammaParam) -> Result<Self> {
        if let Domain::Disc { radius } = domain {
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(Error::Config(format!("disc radius must be positive, got {radius}")));
            }
        }
        let kappa_s = param.c_gamma * (PI * param.s).sin() / PI;
        let scale = match domain {
            Domain::Disc { radius } => radius,
            Domain::FreeSpace => 1.0,
        };
        Ok(Self {
            domain,
            param,
            kappa_s,
            gradient: GradientMethod::Analytic,
            fd_step: 1e-3 * scale,
        })
    }

    pub fn disc(radius: f64, gamma: f64) -> Result<Self> {
        Self::new(Domain::Disc { radius }, GammaParam::for_evaluation(gamma)?)
    }

    pub fn free_space(gamma: f64) -> Result<Self> {
        Self::new(Domain::FreeSpace, GammaParam::for_evaluation(gamma)?)
    }

    pub fn with_gradient(mut self, method: GradientMethod, fd_step: Option<f64>) -> Self {
        self.gradient = method;
        if let Some(h) = fd_step {
            self.fd_step = h;
        }
        self
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn param(&self) -> &GammaParam {
        &self.param
    }

    pub fn gamma(&self) -> f64 {
        self.param.gamma
    }

    pub fn kappa_s(&self) -> f64 {
        self.kappa_s
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn is_free_space(&self) -> bool {
        matches!(self.domain, Domain::FreeSpace)
    }

    /// Characteristic length (disc radius, or 1 in free space).
    pub fn length_scale(&self) -> f64 {
        match self.domain {
            Domain::Disc { radius } => radius,
            Domain::FreeSpace => 1.0,
        }
    }

    /// Distance from `x` to the boundary (infinite in free space).
    pub fn boundary_distance(&self, x: Point) -> f64 {
        match self.domain {
            Domain::Disc { radius } => radius - x[0].hypot(x[1]),
            Domain::FreeSpace => f64::INFINITY,
        }
    }

    pub fn contains(&self, x: Point) -> bool {
        self.boundary_distance(x) > 0.0
    }

    fn check(&self, x: Point) -> Result<()> {
        if x[0].is_finite() && x[1].is_finite() && self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain { x: x[0], y: x[1] })
        }
    }

    /// `K¹(x,y) = C_γ |x-y|^{-γ}`.
    pub fn k1(&self, x: Point, y: Point) -> Result<f64> {
        let d2 = dist2(x, y);
        if d2 == 0.0 {
            return Err(Error::Singular("k1"));
        }
        Ok(self.param.c_gamma * d2.powf(-0.5 * self.param.gamma))
    }

    /// Full Green function `K = K¹ + K⁰`.
    pub fn green(&self, x: Point, y: Point) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        let d2 = dist2(x, y);
        if d2 == 0.0 {
            return Err(Error::Singular("green"));
        }
        match self.domain {
            Domain::FreeSpace => self.k1(x, y),
            Domain::Disc { radius } => {
                let (xs, ys) = (scale(x, radius), scale(y, radius));
                Ok(radius.powf(-self.param.gamma) * self.unit_green(xs, ys))
            }
        }
    }

    /// Smooth remainder `K⁰ = K - K¹`, including the diagonal value.
    pub fn k0(&self, x: Point, y: Point) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        match self.domain {
            Domain::FreeSpace => Ok(0.0),
            Domain::Disc { radius } => {
                let (xs, ys) = (scale(x, radius), scale(y, radius));
                Ok(radius.powf(-self.param.gamma) * self.unit_k0(xs, ys))
            }
        }
    }

    /// `∇ₓK⁰(x,y)`.
    pub fn grad_x_k0(&self, x: Point, y: Point) -> Result<Point> {
        match self.gradient {
            GradientMethod::Analytic => self.grad_x_k0_analytic(x, y),
            GradientMethod::FiniteDifference => self.grad_x_k0_fd(x, y, self.fd_step),
        }
    }

    pub fn grad_x_k0_analytic(&self, x: Point, y: Point) -> Result<Point> {
        self.check(x)?;
        self.check(y)?;
        match self.domain {
            Domain::FreeSpace => Ok([0.0, 0.0]),
            Domain::Disc { radius } => {
                let (xs, ys) = (scale(x, radius), scale(y, radius));
                let g = self.unit_grad_k0(xs, ys);
                let f = radius.powf(-self.param.gamma - 1.0);
                Ok([f * g[0], f * g[1]])
            }
        }
    }

    /// Central differences with step `h` and `h/2`, combined by one
    /// Richardson step (error `O(h⁴)`).
    pub fn grad_x_k0_fd(&self, x: Point, y: Point, h: f64) -> Result<Point> {
        self.check(x)?;
        self.check(y)?;
        // keep the stencil inside the domain
        let h = h.min(0.5 * self.boundary_distance(x));
        let mut out = [0.0; 2];
        for (k, o) in out.iter_mut().enumerate() {
            let central = |h: f64| -> Result<f64> {
                let mut xp = x;
                let mut xm = x;
                xp[k] += h;
                xm[k] -= h;
                Ok((self.k0(xp, y)? - self.k0(xm, y)?) / (2.0 * h))
            };
            let d1 = central(h)?;
            let d2 = central(0.5 * h)?;
            *o = (4.0 * d2 - d1) / 3.0;
        }
        Ok(out)
    }

    // Unit-disc formulas; arguments already scaled by the radius.

    fn unit_green(&self, x: Point, y: Point) -> f64 {
        let s = self.param.s;
        let d2 = dist2(x, y);
        let p = (1.0 - norm2(x)) * (1.0 - norm2(y));
        let r = p / d2;
        if r < 1.0 {
            self.kappa_s * d2.powf(-0.5 * self.param.gamma) * r.powf(s) * alt_series(r, s)
        } else {
            self.param.c_gamma * d2.powf(-0.5 * self.param.gamma) + self.near_k0(p, d2 / p)
        }
    }

    fn near_k0(&self, p: f64, q: f64) -> f64 {
        let s = self.param.s;
        -self.kappa_s * p.powf(s - 1.0) * alt_series(q, 1.0 - s)
    }

    fn unit_k0(&self, x: Point, y: Point) -> f64 {
        let s = self.param.s;
        let d2 = dist2(x, y);
        let p = (1.0 - norm2(x)) * (1.0 - norm2(y));
        if d2 <= p {
            self.near_k0(p, d2 / p)
        } else {
            let r = p / d2;
            d2.powf(-0.5 * self.param.gamma) * (self.kappa_s * r.powf(s) * alt_series(r, s) - self.param.c_gamma)
        }
    }

    fn unit_grad_k0(&self, x: Point, y: Point) -> Point {
        let s = self.param.s;
        let g = self.param.gamma;
        let d2 = dist2(x, y);
        let ny = 1.0 - norm2(y);
        let p = (1.0 - norm2(x)) * ny;
        let dp = [-2.0 * x[0] * ny, -2.0 * x[1] * ny];
        let dx = [x[0] - y[0], x[1] - y[1]];
        if d2 <= p {
            let q = d2 / p;
            let f = alt_series(q, 1.0 - s);
            let fp = alt_series_derivative(q, 1.0 - s);
            let ps1 = p.powf(s - 1.0);
            let mut out = [0.0; 2];
            for k in 0..2 {
                let dq = (2.0 * dx[k] * p - d2 * dp[k]) / (p * p);
                out[k] = -self.kappa_s * ((s - 1.0) * ps1 / p * f * dp[k] + ps1 * fp * dq);
            }
            out
        } else {
            let r = p / d2;
            let integral = r.powf(s) * alt_series(r, s);
            let di = r.powf(s - 1.0) / (1.0 + r);
            let dg = d2.powf(-0.5 * g);
            let mut out = [0.0; 2];
            for k in 0..2 {
                let dr = dp[k] / d2 - 2.0 * p * dx[k] / (d2 * d2);
                out[k] = -g * dg / d2 * dx[k] * (self.kappa_s * integral - self.param.c_gamma)
                    + dg * self.kappa_s * di * dr;
            }
            out
        }
    }
}

fn scale(x: Point, a: f64) -> Point {
    [x[0] / a, x[1] / a]
}

pub fn dist2(x: Point, y: Point) -> f64 {
    let dx = x[0] - y[0];
    let dy = x[1] - y[1];
    dx * dx + dy * dy
}

fn norm2(x: Point) -> f64 {
    x[0] * x[0] + x[1] * x[1]
}

/// `F(q, a) = Σ_{n≥0} (-1)ⁿ qⁿ/(n+a)` for `0 <= q <= 1`, `a > 0`.
/// Direct summation for small `q`; Cohen–Villegas–Zagier acceleration near 1
/// (the terms form a moment sequence on `[0, q]`, so the rate is `5.8^{-n}`).
pub fn alt_series(q: f64, a: f64) -> f64 {
    debug_assert!((0.0..=1.0 + 1e-12).contains(&q));
    if q <= 0.5 {
        let mut sum = 0.0;
        let mut term = 1.0;
        let mut n = 0.0;
        loop {
            let t = term / (n + a);
            sum += t;
            if t.abs() < 1e-18 * sum.abs() {
                break;
            }
            term *= -q;
            n += 1.0;
            if n > 200.0 {
                break;
            }
        }
        sum
    } else {
        const TERMS: usize = 26;
        let n = TERMS as f64;
        let mut d = (3.0 + 8f64.sqrt()).powf(n);
        d = 0.5 * (d + 1.0 / d);
        let mut b = -1.0;
        let mut c = -d;
        let mut sum = 0.0;
        let mut qk = 1.0;
        for k in 0..TERMS {
            let kf = k as f64;
            c = b - c;
            sum += c * qk / (kf + a);
            b *= (kf + n) * (kf - n) / ((kf + 0.5) * (kf + 1.0));
            qk *= q;
        }
        sum / d
    }
}

/// `dF/dq = -1/(1+q) + a F(q, a+1)`.
pub fn alt_series_derivative(q: f64, a: f64) -> f64 {
    -1.0 / (1.0 + q) + a * alt_series(q, a + 1.0)
}
