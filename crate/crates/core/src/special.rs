//! Gamma-function machinery and the closed-form constants built on it: the
//! kernel constant `C_γ`, the linearization multipliers `σ_j`, the singular
//! trigonometric moments and the difference multipliers `m_j`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

// Lanczos approximation, g = 607/128, 15 terms (Godfrey). Relative error is
// close to machine precision for real arguments >= 1/2.
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_COEF: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_923_517,
    -59.597_960_355_475_491_248,
    14.136_097_974_741_747_174,
    -0.491_913_816_097_620_199_78,
    0.339_946_499_848_118_886_99e-4,
    0.465_236_289_270_485_756_65e-4,
    -0.983_744_753_048_795_646_77e-4,
    0.158_088_703_224_912_488_84e-3,
    -0.210_264_441_724_104_883_19e-3,
    0.217_439_618_115_212_643_20e-3,
    -0.164_318_106_536_763_890_22e-3,
    0.844_182_239_838_527_432_93e-4,
    -0.261_908_384_015_814_086_70e-4,
    0.368_991_826_595_316_227_04e-5,
];

// Bernoulli-number coefficients B_{2k} / (2k (2k-1)) of the Stirling series.
const STIRLING: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
];

/// `sin(πx)` with exact argument reduction, so that zeros at the integers are
/// exact and relative accuracy survives near them.
pub fn sin_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    // reduce to r in [-1, 1]
    let r = x - 2.0 * (x / 2.0).round();
    let (r, sign) = if r < 0.0 { (-r, -1.0) } else { (r, 1.0) };
    // sin(π r) = sin(π (1 - r))
    let r = if r > 0.5 { 1.0 - r } else { r };
    sign * (PI * r).sin()
}

fn is_nonpositive_integer(z: f64) -> bool {
    z <= 0.0 && z == z.floor()
}

fn lanczos(x: f64) -> f64 {
    // Γ(x) for x >= 1/2
    let z = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    for (k, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    // split the power so that t^(z+1/2) does not overflow before e^(-t) pulls it back
    let half = 0.5 * (z + 0.5);
    let p = t.powf(half);
    (2.0 * PI).sqrt() * p * (-t).exp() * p * a
}

/// Euler Gamma function. Fails at the poles `0, -1, -2, …`.
pub fn gamma_fn(z: f64) -> Result<f64> {
    if z.is_nan() {
        return Err(Error::Domain {
            what: "gamma",
            value: z,
            detail: "NaN argument",
        });
    }
    if is_nonpositive_integer(z) {
        return Err(Error::Pole(z));
    }
    if z > 171.6 {
        return Err(Error::Domain {
            what: "gamma",
            value: z,
            detail: "overflows f64",
        });
    }
    if z == z.floor() && z <= 30.0 {
        // exact factorials (rounded once) at the positive integers
        let mut f = 1.0;
        let mut k = 2.0;
        while k < z {
            f *= k;
            k += 1.0;
        }
        return Ok(f);
    }
    if z >= 0.5 {
        Ok(lanczos(z))
    } else {
        // reflection: Γ(z) Γ(1-z) = π / sin(πz)
        Ok(PI / (sin_pi(z) * lanczos(1.0 - z)))
    }
}

/// Reciprocal Gamma function `1/Γ(z)`, an entire function: exactly zero at the
/// poles of Γ.
pub fn rgamma(z: f64) -> f64 {
    if is_nonpositive_integer(z) {
        return 0.0;
    }
    if z >= 0.5 {
        if z > 171.6 {
            return 0.0;
        }
        1.0 / lanczos(z)
    } else {
        sin_pi(z) * lanczos(1.0 - z) / PI
    }
}

fn stirling_tail(x: f64) -> f64 {
    let x2 = x * x;
    let mut p = 1.0 / x;
    let mut s = 0.0;
    for c in STIRLING {
        s += c * p;
        p /= x2;
    }
    s
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain {
            what: "ln_gamma",
            value: x,
            detail: "requires x > 0",
        });
    }
    if x < 15.0 {
        return Ok(lanczos_or_reflect(x).ln());
    }
    Ok((x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + stirling_tail(x))
}

fn lanczos_or_reflect(x: f64) -> f64 {
    if x >= 0.5 {
        lanczos(x)
    } else {
        PI / (sin_pi(x) * lanczos(1.0 - x))
    }
}

/// `Γ(a)/Γ(b)` for positive arguments, stable when both are large (the
/// `σ_j` tail needs `j` in the hundreds).
pub fn gamma_ratio(a: f64, b: f64) -> Result<f64> {
    if a <= 0.0 || b <= 0.0 {
        return Ok(gamma_fn(a)? / gamma_fn(b)?);
    }
    let lo = a.min(b);
    if lo < 15.0 {
        if a.max(b) < 100.0 {
            return Ok(lanczos_or_reflect(a) / lanczos_or_reflect(b));
        }
        // shift both arguments up by the same integer n:
        // Γ(a)/Γ(b) = Γ(a+n)/Γ(b+n) · Π (b+k)/(a+k)
        let n = (15.0 - lo).ceil() as usize;
        let mut f = 1.0;
        for k in 0..n {
            f *= (b + k as f64) / (a + k as f64);
        }
        return Ok(f * gamma_ratio(a + n as f64, b + n as f64)?);
    }
    // Stirling difference written so that the large logarithms cancel analytically
    let d = a - b;
    let l = (d / b).ln_1p();
    let log_ratio = (a - 0.5) * l + d * (b.ln() - 1.0) + stirling_tail(a) - stirling_tail(b);
    Ok(log_ratio.exp())
}

/// Exponent and derived constants of the fractional kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParam {
    pub gamma: f64,
    pub c_gamma: f64,
    pub s: f64,
}

impl GammaParam {
    /// The construction range `1 < γ < 2`.
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0 && gamma < 2.0) {
            return Err(Error::Domain {
                what: "GammaParam",
                value: gamma,
                detail: "requires 1 < gamma < 2",
            });
        }
        Self::for_evaluation(gamma)
    }

    /// Evaluation-only range `0 < γ < 2` (kernel and constant checks).
    pub fn for_evaluation(gamma: f64) -> Result<Self> {
        Ok(Self {
            gamma,
            c_gamma: c_gamma(gamma)?,
            s: 1.0 - 0.5 * gamma,
        })
    }
}

/// `C_γ = 2^{γ-1} Γ(γ/2) / Γ(1-γ/2)` on `0 < γ < 2`.
pub fn c_gamma(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 2.0) {
        return Err(Error::Domain {
            what: "c_gamma",
            value: gamma,
            detail: "requires 0 < gamma < 2",
        });
    }
    Ok((gamma - 1.0).exp2() * gamma_ratio(0.5 * gamma, 1.0 - 0.5 * gamma)?)
}

fn check_sigma_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 1.0 && gamma < 2.0) {
        return Err(Error::Domain {
            what: "sigma",
            value: gamma,
            detail: "requires 1 < gamma < 2",
        });
    }
    Ok(())
}

/// Multiplier `σ_j` of the linearized self-interaction: `σ_1 = 0` and, for
/// `j >= 2`,
/// `σ_j = 2^{γ-1} Γ(1-γ)/Γ(1-γ/2)² (Γ(1+γ/2)/Γ(2-γ/2) - Γ(j+γ/2)/Γ(1+j-γ/2))`.
pub fn sigma(j: u32, gamma: f64) -> Result<f64> {
    check_sigma_gamma(gamma)?;
    if j == 0 {
        return Err(Error::Domain {
            what: "sigma",
            value: 0.0,
            detail: "mode index starts at 1",
        });
    }
    if j == 1 {
        return Ok(0.0);
    }
    let h = 0.5 * gamma;
    let pre = (gamma - 1.0).exp2() * gamma_fn(1.0 - gamma)? / gamma_fn(1.0 - h)?.powi(2);
    let first = gamma_ratio(1.0 + h, 2.0 - h)?;
    let jf = f64::from(j);
    let second = gamma_ratio(jf + h, 1.0 + jf - h)?;
    Ok(pre * (first - second))
}

/// Cached table of `σ_1 … σ_N` for one exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaSpectrum {
    gamma: f64,
    values: Vec<f64>,
}

impl SigmaSpectrum {
    pub fn new(gamma: f64, n: usize) -> Result<Self> {
        let values = (1..=n as u32)
            .map(|j| sigma(j, gamma))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { gamma, values })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `σ_j` for `1 <= j <= N`.
    pub fn get(&self, j: usize) -> f64 {
        self.values[j - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `∫₀^π (sin η)^{2-γ} e^{ijη} dη` for real `j` and `γ < 3`, through
/// `π e^{ijπ/2} Γ(3-γ) / (2^{2-γ} Γ(2+j/2-γ/2) Γ(2-j/2-γ/2))`.
///
/// Written with the reciprocal Gamma function, so parameter points where one
/// of the denominator Gammas has a pole give the (correct) value zero.
pub fn trig_moment(j: f64, gamma: f64) -> Result<Complex64> {
    if !(gamma < 3.0) || !j.is_finite() {
        return Err(Error::Domain {
            what: "trig_moment",
            value: gamma,
            detail: "requires gamma < 3 and finite j",
        });
    }
    let h = 0.5 * gamma;
    let modulus =
        PI * gamma_fn(3.0 - gamma)? / (2.0 - gamma).exp2() * rgamma(2.0 + 0.5 * j - h) * rgamma(2.0 - 0.5 * j - h);
    let phase = Complex64::from_polar(1.0, 0.5 * PI * j);
    Ok(phase * modulus)
}

/// Mean over η of `(1 - cos jη) |sin(η/2)|^{-γ}`, i.e. the multiplier of the
/// singular difference convolution `h ↦ ⨍ (h(β) - h(β-η)) |sin(η/2)|^{-γ} dη`
/// on `cos jβ` and `sin jβ`:
/// `m_j = 2^γ Γ(1-γ)/(Γ(γ/2)Γ(1-γ/2)) (Γ(γ/2)/Γ(1-γ/2) - Γ(j+γ/2)/Γ(1+j-γ/2))`.
pub fn cos_diff_multiplier(j: u32, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 2.0) {
        return Err(Error::Domain {
            what: "cos_diff_multiplier",
            value: gamma,
            detail: "requires 0 < gamma < 2",
        });
    }
    if j == 0 {
        return Ok(0.0);
    }
    let h = 0.5 * gamma;
    let g1 = gamma_fn(1.0 - gamma)?;
    let pre = gamma.exp2() * g1 * rgamma(h) * rgamma(1.0 - h);
    let jf = f64::from(j);
    Ok(pre * (gamma_ratio(h, 1.0 - h)? - gamma_ratio(jf + h, 1.0 + jf - h)?))
}
