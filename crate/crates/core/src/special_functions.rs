//! Orthogonal polynomials, Gauss-Jacobi quadrature and the Gegenbauer
//! expansion coefficients the closed formulas are assembled from.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::{Error, Result};

const X_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolyFamily {
    ChebyshevU,
    Jacobi { a: f64, b: f64 },
    Gegenbauer { lambda: f64 },
}

impl PolyFamily {
    fn validate(&self) -> Result<()> {
        match *self {
            PolyFamily::ChebyshevU => Ok(()),
            PolyFamily::Jacobi { a, b } if a > -1.0 && b > -1.0 => Ok(()),
            PolyFamily::Gegenbauer { lambda } if lambda > -0.5 => Ok(()),
            other => Err(Error::Domain(format!("invalid family parameters {other:?}"))),
        }
    }
}

/// Returns `(ln|Γ(x)|, sign Γ(x))`.
pub fn ln_gamma(x: f64) -> (f64, f64) {
    let (v, s) = libm::lgamma_r(x);
    (v, if s < 0 { -1.0 } else { 1.0 })
}

/// Γ(x) for moderate arguments.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// 1/Γ(x), which is entire: zero at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    let (v, s) = ln_gamma(x);
    s * (-v).exp()
}

/// Π Γ(num) / Π Γ(den) through log-Gamma differences with sign tracking.
/// A denominator pole makes the ratio vanish; a numerator pole is a domain error.
pub fn gamma_ratio(num: &[f64], den: &[f64]) -> Result<f64> {
    if let Some(x) = num.iter().find(|&&x| is_nonpositive_integer(x)) {
        return Err(Error::Domain(format!("Gamma pole at {x} in numerator")));
    }
    if den.iter().any(|&x| is_nonpositive_integer(x)) {
        return Ok(0.0);
    }
    let mut log = 0.0;
    let mut sign = 1.0;
    for &x in num {
        let (v, s) = ln_gamma(x);
        log += v;
        sign *= s;
    }
    for &x in den {
        let (v, s) = ln_gamma(x);
        log -= v;
        sign *= s;
    }
    Ok(sign * log.exp())
}

/// Rising factorial (a)_n = a(a+1)...(a+n-1), evaluated as a product.
pub fn pochhammer(a: f64, n: usize) -> Result<f64> {
    let mut p = 1.0;
    for k in 0..n {
        let f = a + k as f64;
        if f == 0.0 {
            return Ok(0.0);
        }
        p *= f;
    }
    if !p.is_finite() {
        return Err(Error::Domain(format!("pochhammer({a}, {n}) overflows")));
    }
    Ok(p)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Degree-n polynomial of the family at x, by three-term recurrence.
pub fn eval_poly(family: PolyFamily, n: usize, x: f64) -> Result<f64> {
    family.validate()?;
    if !(x.abs() <= 1.0 + X_SLACK) {
        return Err(Error::Domain(format!("x = {x} outside [-1, 1]")));
    }
    Ok(eval_unchecked(family, n, x))
}

/// Recurrence without the argument checks; used in inner loops.
pub(crate) fn eval_unchecked(family: PolyFamily, n: usize, x: f64) -> f64 {
    match family {
        PolyFamily::ChebyshevU => {
            let (mut p0, mut p1) = (1.0, 2.0 * x);
            if n == 0 {
                return p0;
            }
            for _ in 1..n {
                let p2 = 2.0 * x * p1 - p0;
                p0 = p1;
                p1 = p2;
            }
            p1
        }
        PolyFamily::Gegenbauer { lambda } => {
            let (mut p0, mut p1) = (1.0, 2.0 * lambda * x);
            if n == 0 {
                return p0;
            }
            for k in 2..=n {
                let kf = k as f64;
                let p2 = (2.0 * x * (kf + lambda - 1.0) * p1 - (kf + 2.0 * lambda - 2.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            p1
        }
        PolyFamily::Jacobi { a, b } => jacobi_pair(n, a, b, x).0,
    }
}

/// (P_n, P_{n-1}) for the Jacobi family; P_{-1} is reported as 0.
fn jacobi_pair(n: usize, a: f64, b: f64, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    if n == 0 {
        return (p0, 0.0);
    }
    let mut p1 = 0.5 * (a - b) + 0.5 * (a + b + 2.0) * x;
    let ab = a + b;
    for k in 2..=n {
        let kf = k as f64;
        let c = 2.0 * kf + ab;
        let a1 = 2.0 * kf * (kf + ab) * (c - 2.0);
        let a2 = (c - 1.0) * (a * a - b * b);
        let a3 = (c - 2.0) * (c - 1.0) * c;
        let a4 = 2.0 * (kf + a - 1.0) * (kf + b - 1.0) * c;
        let p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Gauss rule for the weight (1-y)^a (1+y)^b on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub exactness_degree: usize,
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&y, &w)| w * f(y)).sum()
    }
}

const NEWTON_CAP: usize = 100;

pub fn gauss_jacobi_rule(npts: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if npts == 0 {
        return Err(Error::Domain("npts must be positive".into()));
    }
    PolyFamily::Jacobi { a, b }.validate()?;
    let n = npts;
    let nf = n as f64;
    let ab = a + b;

    // P_n and P_n' from the recurrence and the standard derivative identity
    let value_and_slope = |x: f64| {
        let (p, q) = jacobi_pair(n, a, b, x);
        let c = 2.0 * nf + ab;
        let dp = (nf * (a - b - c * x) * p + 2.0 * (nf + a) * (nf + b) * q) / (c * (1.0 - x * x));
        (p, dp)
    };

    let mut roots: Vec<f64> = Vec::with_capacity(n);
    for k in 0..n {
        // Chebyshev-type angle, shifted by the endpoint exponents
        let rho = nf + 0.5 * (ab + 1.0);
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75 + 0.5 * a) / rho).cos();
        let mut converged = false;
        for _ in 0..NEWTON_CAP {
            let (p, dp) = value_and_slope(x);
            let deflate: f64 = roots.iter().map(|r| 1.0 / (x - r)).sum();
            let dx = p / (dp - p * deflate);
            let next = x - dx;
            // a step out of the interval is replaced by halving towards the edge
            x = if next <= -1.0 {
                0.5 * (x - 1.0)
            } else if next >= 1.0 {
                0.5 * (x + 1.0)
            } else {
                next
            };
            if dx.abs() <= 1e-10 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence(format!("node {k} of {n} for (a, b) = ({a}, {b})")));
        }
        // polish against P_n itself so later deflation divides by accurate roots
        for _ in 0..3 {
            let (p, dp) = value_and_slope(x);
            x -= p / dp;
        }
        roots.push(x);
    }
    roots.sort_by(|p, q| p.partial_cmp(q).unwrap());
    if roots.windows(2).any(|w| w[1] <= w[0]) || roots[0] <= -1.0 || roots[n - 1] >= 1.0 {
        return Err(Error::Convergence(format!("nodes not distinct for n = {n}, (a, b) = ({a}, {b})")));
    }

    // Γ(n+a+1)Γ(n+b+1)/(Γ(n+a+b+1)Γ(n+1)) by upward recursion from n = 0,
    // which avoids differencing large log-Gamma values
    let mut ratio = gamma_ratio(&[a + 1.0, b + 1.0], &[ab + 1.0])?;
    for k in 1..=n {
        let kf = k as f64;
        ratio *= (kf + a) * (kf + b) / ((kf + ab) * kf);
    }
    let log_c = ratio.ln() + (ab + 1.0) * std::f64::consts::LN_2;

    // at a node P_n = 0, so (1-x²)P_n'(x) = 2(n+a)(n+b)P_{n-1}(x)/(2n+a+b)
    let c = 2.0 * nf + ab;
    let k2 = (2.0 * (nf + a) * (nf + b) / c).ln();
    let weights = roots
        .iter()
        .map(|&x| {
            let (_, q) = jacobi_pair(n, a, b, x);
            (log_c + (1.0 - x * x).ln() - 2.0 * (k2 + q.abs().ln())).exp()
        })
        .collect();

    Ok(QuadratureRule { nodes: roots, weights, exactness_degree: 2 * n - 1 })
}

type RuleKey = (usize, u64, u64);

/// Memoized [`gauss_jacobi_rule`]; rules are immutable once built.
pub fn cached_rule(npts: usize, a: f64, b: f64) -> Result<Arc<QuadratureRule>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<QuadratureRule>>>> = OnceLock::new();
    let key = (npts, a.to_bits(), b.to_bits());
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&key) {
        return Ok(r.clone());
    }
    let rule = Arc::new(gauss_jacobi_rule(npts, a, b)?);
    cache.lock().unwrap().insert(key, rule.clone());
    Ok(rule)
}

/// α_{nμλ}(ℓ): C^{(μ)}_n = Σ_ℓ α(ℓ) C^{(λ)}_{n-2ℓ}.
pub fn gegenbauer_connection_coeff(n: usize, mu: f64, lambda: f64, ell: usize) -> Result<f64> {
    if ell > n / 2 {
        return Err(Error::Index(format!("ell = {ell} exceeds floor({n}/2)")));
    }
    let nl = n - ell;
    let lead = (lambda + (n - 2 * ell) as f64) / lambda;
    Ok(lead * pochhammer(mu, nl)? / pochhammer(lambda + 1.0, nl)? * pochhammer(mu - lambda, ell)?
        / factorial(ell))
}

/// β_{nλ}(ℓ): (C^{(λ)}_n)² = Σ_ℓ β(ℓ) C^{(λ)}_{2ℓ}.
pub fn gegenbauer_square_coeff(n: usize, lambda: f64, ell: usize) -> Result<f64> {
    if ell > n {
        return Err(Error::Index(format!("ell = {ell} exceeds n = {n}")));
    }
    let l = ell as f64;
    let nl = n - ell;
    let num = factorial(2 * ell)
        * pochhammer(lambda, ell)?
        * pochhammer(lambda, nl)?
        * pochhammer(2.0 * l + 2.0 * lambda, nl)?;
    let den = factorial(ell) * pochhammer(l + lambda, ell)? * pochhammer(2.0 * l + lambda + 1.0, nl)?;
    Ok(binomial(n, ell) / factorial(n) * num / den)
}

/// ζ_{mnλ}(ℓ): C^{(λ)}_m C^{(λ)}_n = Σ_ℓ ζ(ℓ) C^{(λ)}_{m+n-2ℓ}.
pub fn gegenbauer_linearization(m: usize, n: usize, lambda: f64, ell: usize) -> Result<f64> {
    if ell > m.min(n) {
        return Err(Error::Index(format!("ell = {ell} exceeds min({m}, {n})")));
    }
    let s = m + n;
    let head = (s as f64 + lambda - 2.0 * ell as f64) * factorial(s - 2 * ell)
        / ((s as f64 + lambda - ell as f64) * factorial(ell) * factorial(m - ell) * factorial(n - ell));
    let num = pochhammer(lambda, ell)?
        * pochhammer(lambda, m - ell)?
        * pochhammer(lambda, n - ell)?
        * pochhammer(2.0 * lambda, s - ell)?;
    let den = pochhammer(lambda, s - ell)? * pochhammer(2.0 * lambda, s - 2 * ell)?;
    Ok(head * num / den)
}

/// ∫₀¹ x^{z-1} C^{(λ)}_n(x) (1-x²)^{λ-1/2} dx in closed form.
pub fn mellin_gegenbauer(z: f64, lambda: u32, n: usize) -> Result<f64> {
    if !(z > 0.0) || lambda == 0 {
        return Err(Error::Domain(format!("mellin_gegenbauer needs z > 0, lambda >= 1 (z = {z}, lambda = {lambda})")));
    }
    let lam = lambda as f64;
    let nf = n as f64;
    let ratio = gamma_ratio(
        &[nf + 2.0 * lam, z],
        &[nf + 1.0, lam, 0.5 + 0.5 * nf + lam + 0.5 * z, 0.5 + 0.5 * z - 0.5 * nf],
    )?;
    Ok(std::f64::consts::PI * 2f64.powf(1.0 - 2.0 * lam - z) * ratio)
}
