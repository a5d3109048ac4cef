//! Quadrature rules: Gauss–Legendre, tanh-sinh, geometrically graded panels,
//! and product-integration weights for the periodic kernel `|2 sin(η/2)|^{-γ}`.

use std::f64::consts::PI;

use crate::error::Result;
use crate::special::cos_diff_multiplier;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (c + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

/// Panels `[a_k, b_k]` on `[0, len]`, geometrically refined toward 0: the
/// innermost `levels` panels shrink by `ratio` each, the rest of the interval
/// is split into `uniform` equal panels.
pub fn graded_panels(len: f64, ratio: f64, levels: usize, uniform: usize) -> Vec<(f64, f64)> {
    assert!(ratio > 0.0 && ratio < 1.0);
    let uniform = uniform.max(1);
    let h = len / uniform as f64;
    let mut panels = Vec::with_capacity(levels + uniform);
    // graded part lives inside the first uniform panel
    let mut right = h;
    for _ in 0..levels {
        let left = right * ratio;
        panels.push((left, right));
        right = left;
    }
    panels.push((0.0, right));
    panels.reverse();
    for k in 1..uniform {
        panels.push((k as f64 * h, (k + 1) as f64 * h));
    }
    panels
}

/// Composite Gauss–Legendre over `panels`.
pub fn integrate_panels<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    panels: &[(f64, f64)],
    mut f: F,
) -> f64 {
    panels
        .iter()
        .map(|&(a, b)| rule.integrate(a, b, &mut f))
        .sum()
}

/// Number of geometric levels with ratio `ratio` needed so that an
/// integrand behaving like `t^{alpha}` near 0 leaves an innermost panel
/// contribution below `tol` (relative to an O(1) integral).
pub fn levels_for(alpha: f64, ratio: f64, tol: f64) -> usize {
    let power = alpha + 1.0;
    assert!(power > 0.0, "integrand not integrable at the graded end");
    ((tol.ln() / (power * ratio.ln())).ceil() as usize).max(1)
}

/// Tanh-sinh quadrature on `[a, b]`, refining the step until two successive
/// levels agree to `tol` (relative). Integrable endpoint singularities are
/// handled; `f` receives the node together with its distances to `a` and `b`
/// so that singular factors can be evaluated without cancellation.
pub fn tanh_sinh<F: FnMut(f64, f64, f64) -> f64>(a: f64, b: f64, tol: f64, mut f: F) -> f64 {
    let half = 0.5 * (b - a);
    let tmax = 4.0;
    let mut eval = |t: f64| -> f64 {
        let s = 0.5 * PI * t.sinh();
        let ch = s.cosh();
        let dw = 0.5 * PI * t.cosh() / (ch * ch);
        // distance to the nearer endpoint is half * (1 - tanh|s|) = 2 half / (e^{2|s|} + 1)
        let near = 2.0 * half / ((2.0 * s.abs()).exp() + 1.0);
        if near <= 0.0 {
            return 0.0;
        }
        let (x, da, db) = if s >= 0.0 {
            (b - near, b - a - near, near)
        } else {
            (a + near, near, b - a - near)
        };
        half * dw * f(x, da, db)
    };
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while (k as f64) * h <= tmax {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut estimate = h * sum;
    for _ in 0..12 {
        h *= 0.5;
        let mut add = 0.0;
        let mut k = 1;
        while (k as f64) * h <= tmax {
            let t = k as f64 * h;
            add += eval(t) + eval(-t);
            k += 2;
        }
        sum += add;
        let next = h * sum;
        let done = (next - estimate).abs() <= tol * next.abs().max(1e-300);
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}

/// Product-integration weights on the uniform periodic grid
/// `η_l = 2πl/M`: `Σ_l w_l S(η_l)` equals `∫₀^{2π} S(η) |2 sin(η/2)|^{-γ} dη`
/// exactly when `S` is a trigonometric polynomial of degree `< M/2` (plus the
/// Nyquist cosine) with `S(0) = 0`.
#[derive(Debug, Clone)]
pub struct SingularWeights {
    pub gamma: f64,
    pub weights: Vec<f64>,
}

impl SingularWeights {
    pub fn new(m: usize, gamma: f64) -> Result<Self> {
        assert!(m >= 4 && m % 2 == 0, "grid size must be even and >= 4");
        let half = m / 2;
        let mult = (1..=half as u32)
            .map(|k| cos_diff_multiplier(k, gamma))
            .collect::<Result<Vec<_>>>()?;
        let scale = -2.0 * PI * (-gamma).exp2();
        let mf = m as f64;
        let weights = (0..m)
            .map(|l| {
                let mut acc = 0.0;
                for k in 1..half {
                    // cos(2π k l / M) through an exact integer reduction of k·l
                    let phase = ((k * l) % m) as f64 / mf;
                    acc += mult[k - 1] * (2.0 * PI * phase).cos();
                }
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                scale * (2.0 / mf * acc + mult[half - 1] * sign / mf)
            })
            .collect();
        Ok(Self { gamma, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}
