//! The three eigenvalue problems: spectra, normalized eigenfunctions and
//! the weighted inner products they are orthonormal in.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::special_functions::{cached_rule, eval_unchecked, ln_gamma, PolyFamily};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ModelSpec {
    Cw,
    Ch { mu1: u32, mu2: u32 },
    Ym,
}

impl ModelSpec {
    pub fn ch(mu: u32) -> Self {
        ModelSpec::Ch { mu1: mu, mu2: mu }
    }

    /// ω_n as an exact integer; all resonance bookkeeping goes through this.
    pub fn omega_int(&self, n: usize) -> i64 {
        let n = n as i64;
        match *self {
            ModelSpec::Cw => n + 1,
            ModelSpec::Ch { mu1, mu2 } => 2 * n + 1 + mu1 as i64 + mu2 as i64,
            ModelSpec::Ym => n + 2,
        }
    }

    pub fn omega(&self, n: usize) -> f64 {
        self.omega_int(n) as f64
    }

    /// Spacing of the arithmetic progression ω_0, ω_1, ...
    pub fn gap(&self) -> i64 {
        match self {
            ModelSpec::Ch { .. } => 2,
            _ => 1,
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        match self {
            ModelSpec::Ch { .. } => (0.0, FRAC_PI_2),
            _ => (0.0, PI),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Cw => "cw",
            ModelSpec::Ch { .. } => "ch",
            ModelSpec::Ym => "ym",
        }
    }

    /// Polynomial part of e_n in the variable y (cos x, or cos 2x for CH).
    pub(crate) fn family(&self) -> PolyFamily {
        match *self {
            ModelSpec::Cw => PolyFamily::ChebyshevU,
            ModelSpec::Ch { mu1, mu2 } => PolyFamily::Jacobi { a: mu1 as f64, b: mu2 as f64 },
            ModelSpec::Ym => PolyFamily::Jacobi { a: 1.5, b: 1.5 },
        }
    }

    /// Constant in front of the polynomial part of e_n.
    pub fn normalization(&self, n: usize) -> f64 {
        match *self {
            ModelSpec::Cw => 1.0,
            ModelSpec::Ch { mu1, mu2 } => ch_normalization(n, mu1, mu2),
            ModelSpec::Ym => ym_normalization(n),
        }
    }

    /// Weighted integral of a product of `k` eigenfunctions, expressed as
    /// `prefactor * ∫ poly(y) (1-y)^a (1+y)^b dy`; returns (prefactor, a, b).
    /// `extra` adds powers of (1-y²), used for the sin²x in the YM quartic.
    pub(crate) fn product_weight(&self, k: usize, extra: u32) -> (f64, f64, f64) {
        let e = extra as f64;
        match *self {
            ModelSpec::Cw => (2.0 / PI, 0.5 + e, 0.5 + e),
            ModelSpec::Ch { mu1, mu2 } => {
                let kf = k as f64;
                (0.5, 0.5 * kf * mu1 as f64 + e, 0.5 * kf * mu2 as f64 + e)
            }
            ModelSpec::Ym => (1.0, 1.5 + e, 1.5 + e),
        }
    }
}

pub fn eigenvalue(model: ModelSpec, n: usize) -> f64 {
    model.omega(n)
}

/// 𝖭_n^{(μ1,μ2)}.
pub fn ch_normalization(n: usize, mu1: u32, mu2: u32) -> f64 {
    let (m1, m2, nf) = (mu1 as f64, mu2 as f64, n as f64);
    let omega = 2.0 * nf + 1.0 + m1 + m2;
    let lg = ln_gamma(nf + 1.0).0 + ln_gamma(nf + m1 + m2 + 1.0).0
        - ln_gamma(nf + m1 + 1.0).0
        - ln_gamma(nf + m2 + 1.0).0;
    (0.5 * (omega.ln() - (m1 + m2) * std::f64::consts::LN_2 + lg)).exp()
}

/// 𝔑_n.
pub fn ym_normalization(n: usize) -> f64 {
    let nf = n as f64;
    let lg = 0.5 * ((nf + 2.0).ln() + ln_gamma(1.0 + nf).0 + ln_gamma(4.0 + nf).0) - ln_gamma(2.5 + nf).0;
    lg.exp() / (2.0 * std::f64::consts::SQRT_2)
}

fn to_y(model: ModelSpec, x: f64) -> f64 {
    match model {
        ModelSpec::Ch { .. } => (2.0 * x).cos(),
        _ => x.cos(),
    }
}

pub fn eigenfunction(model: ModelSpec, n: usize, x: f64) -> Result<f64> {
    let (lo, hi) = model.interval();
    if !(x >= lo && x <= hi) {
        return Err(Error::Domain(format!("x = {x} outside [{lo}, {hi}] for {}", model.name())));
    }
    let y = to_y(model, x).clamp(-1.0, 1.0);
    let p = model.normalization(n) * eval_unchecked(model.family(), n, y);
    Ok(match model {
        ModelSpec::Ch { mu1, mu2 } => p * (1.0 - y).powf(0.5 * mu1 as f64) * (1.0 + y).powf(0.5 * mu2 as f64),
        _ => p,
    })
}

pub const DEFAULT_NPTS: usize = 64;

/// (f|g) for the model, with f and g given as functions of x.
pub fn inner_product(model: ModelSpec, f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64) -> Result<f64> {
    inner_product_with(model, f, g, DEFAULT_NPTS)
}

pub fn inner_product_with(
    model: ModelSpec,
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    npts: usize,
) -> Result<f64> {
    // y = cos x turns sin²x dx into √(1-y²) dy and sin⁴x dx into (1-y²)^{3/2} dy;
    // y = cos 2x turns sin 2x dx into dy/2
    let (pre, a, b, half_angle) = match model {
        ModelSpec::Cw => (2.0 / PI, 0.5, 0.5, false),
        ModelSpec::Ch { .. } => (0.5, 0.0, 0.0, true),
        ModelSpec::Ym => (1.0, 1.5, 1.5, false),
    };
    let rule = cached_rule(npts, a, b)?;
    Ok(pre
        * rule.integrate(|y| {
            let x = if half_angle { 0.5 * y.acos() } else { y.acos() };
            f(x) * g(x)
        }))
}

/// The model's linear operator applied to u at x by central differences.
pub fn apply_linear_operator(model: ModelSpec, u: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let (um, u0, up) = (u(x - h), u(x), u(x + h));
    let d1 = (up - um) / (2.0 * h);
    let d2 = (up - 2.0 * u0 + um) / (h * h);
    let (s, c) = x.sin_cos();
    match model {
        ModelSpec::Cw => -d2 - 2.0 * c / s * d1 + u0,
        ModelSpec::Ch { mu1, mu2 } => {
            let (m1, m2) = (mu1 as f64, mu2 as f64);
            -d2 - (c / s - s / c) * d1 + (m1 * m1 / (s * s) + m2 * m2 / (c * c) + 1.0) * u0
        }
        ModelSpec::Ym => -d2 - 4.0 * c / s * d1 + 4.0 * u0,
    }
}

/// A finitely supported sequence of mode amplitudes ξ^0, ξ^1, ...
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ModeVector(pub Vec<f64>);

impl ModeVector {
    pub fn zeros(len: usize) -> Self {
        ModeVector(vec![0.0; len])
    }

    pub fn unit(len: usize, mode: usize, amplitude: f64) -> Self {
        let mut v = Self::zeros(len.max(mode + 1));
        v.0[mode] = amplitude;
        v
    }

    pub fn get(&self, m: usize) -> f64 {
        self.0.get(m).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// One past the largest index carrying a nonzero amplitude.
    pub fn support_end(&self) -> usize {
        self.0.iter().rposition(|&v| v != 0.0).map_or(0, |i| i + 1)
    }

    pub fn resized(&self, len: usize) -> Self {
        let mut v = self.0.clone();
        v.resize(len, 0.0);
        ModeVector(v)
    }

    /// |ξ|_s with weights j^{2s}; mode 0 is weighted as if j = 1.
    pub fn norm_s(&self, s: f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(j, v)| (j.max(1) as f64).powf(2.0 * s) * v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, t: f64) -> Self {
        ModeVector(self.0.iter().map(|v| v * t).collect())
    }

    pub fn axpy(&self, t: f64, other: &ModeVector) -> Self {
        let n = self.len().max(other.len());
        ModeVector((0..n).map(|m| self.get(m) + t * other.get(m)).collect())
    }
}
