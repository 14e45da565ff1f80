//! Mode-coupling coefficients: closed formulas on resonant index sets,
//! resonance bookkeeping, and a quadrature oracle for the defining integrals.

use std::f64::consts::PI;

use serde::Serialize;

use crate::models::ModelSpec;
use crate::special_functions::{cached_rule, eval_unchecked, gamma, gamma_ratio};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CoeffMethod {
    ClosedFormula,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoeffValue {
    pub value: f64,
    pub method: CoeffMethod,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResonanceClass {
    pub signs: Vec<i8>,
    pub satisfied: bool,
}

/// Classifies Σ signs_k ω_{indices_k} = 0 in exact integer arithmetic.
pub fn resonance(model: ModelSpec, indices: &[usize], signs: &[i8]) -> Result<ResonanceClass> {
    if indices.len() != signs.len() || signs.iter().any(|s| s.abs() != 1) {
        return Err(Error::Precondition(format!("bad sign pattern {signs:?} for {indices:?}")));
    }
    let sum: i64 = indices.iter().zip(signs).map(|(&n, &s)| s as i64 * model.omega_int(n)).sum();
    Ok(ResonanceClass { signs: signs.to_vec(), satisfied: sum == 0 })
}

fn minus_count(signs: &[i8]) -> usize {
    signs.iter().filter(|&&s| s < 0).count()
}

/// True iff the pattern has exactly one minus sign and the resonance holds;
/// such coefficients vanish by degree counting.
pub fn vanishing_class(model: ModelSpec, indices: &[usize], signs: &[i8]) -> bool {
    minus_count(signs) == 1 && resonance(model, indices, signs).map(|r| r.satisfied).unwrap_or(false)
}

/// C_{ijkm} for CW: number of common values of the two step-2 progressions
/// |i-j|..i+j and |k-m|..k+m.
pub fn cw_coeff(i: usize, j: usize, k: usize, m: usize) -> u64 {
    if (i + j) % 2 != (k + m) % 2 {
        return 0;
    }
    let lo = i.abs_diff(j).max(k.abs_diff(m));
    let hi = (i + j).min(k + m);
    if lo > hi {
        0
    } else {
        ((hi - lo) / 2 + 1) as u64
    }
}

/// ω_min on a two-minus-sign resonant quadruple.
pub fn cw_resonant_value(i: usize, j: usize, k: usize, m: usize, signs: [i8; 4]) -> Result<u64> {
    let idx = [i, j, k, m];
    if minus_count(&signs) != 2 || !resonance(ModelSpec::Cw, &idx, &signs)?.satisfied {
        return Err(Error::Precondition(format!("{idx:?} is not a two-minus-sign resonance for {signs:?}")));
    }
    Ok(ModelSpec::Cw.omega_int(*idx.iter().min().unwrap()) as u64)
}

/// ξ_λ(μ): squared norm of the Gegenbauer factor in the CH closed formula.
pub fn ch_xi(lam: usize, mu: u32) -> f64 {
    let (l, u) = (lam as f64, mu as f64);
    let g = gamma_ratio(&[2.0 * l + 4.0 * u + 1.0], &[2.0 * l + 1.0, 2.0 * u + 0.5, 2.0 * u + 0.5]).unwrap();
    PI * 2f64.powf(1.0 - 4.0 * u) * g / (4.0 * l + 4.0 * u + 1.0)
}

/// 𝖬_m^{(μ)}(λ).
pub fn ch_m_coeff(m: usize, mu: u32, lam: usize) -> Result<f64> {
    if lam > m {
        return Err(Error::Precondition(format!("lambda = {lam} exceeds m = {m}")));
    }
    let (l, u, mf) = (lam as f64, mu as f64, m as f64);
    let g = gamma_ratio(
        &[l + 0.5, 2.0 * u + 0.5, l + u + 0.5, mf - l + 0.5, mf + l + 2.0 * u + 1.0],
        &[l + u + 1.0, l + 2.0 * u + 1.0, mf - l + 1.0, mf + l + 2.0 * u + 1.5],
    )?;
    Ok((4.0 * l + 4.0 * u + 1.0) * (2.0 * u + 2.0 * mf + 1.0) * g / (2.0 * PI.powf(1.5)))
}

/// 𝖬_{m+1}^{(μ)}(λ) - 𝖬_m^{(μ)}(λ) in closed form; vanishes at λ = μ = 0.
pub fn ch_m_difference(m: usize, mu: u32, lam: usize) -> Result<f64> {
    if lam > m {
        return Err(Error::Precondition(format!("lambda = {lam} exceeds m = {m}")));
    }
    let (l, u, mf) = (lam as f64, mu as f64, m as f64);
    let g = gamma_ratio(
        &[l + 0.5, 2.0 * u + 0.5, l + u + 1.5, mf - l + 0.5, mf + l + 2.0 * u + 1.0],
        &[l + u, l + 2.0 * u + 1.0, mf - l + 2.0, mf + l + 2.0 * u + 2.5],
    )?;
    Ok(-(4.0 * l + 4.0 * u + 1.0) * g / PI.powf(1.5))
}

/// 𝖢^{(μ,μ)}_{γγmm} = ½ Σ_λ 𝖬_γ(λ) 𝖬_m(λ) ξ_λ(μ).
pub fn ch_coeff_ggmm(gamma: usize, m: usize, mu: u32) -> Result<f64> {
    if m < gamma {
        return Err(Error::Precondition(format!("m = {m} < gamma = {gamma}")));
    }
    let mut s = 0.0;
    for lam in 0..=gamma {
        s += ch_m_coeff(gamma, mu, lam)? * ch_m_coeff(m, mu, lam)? * ch_xi(lam, mu);
    }
    Ok(0.5 * s)
}

/// 𝖢^{(μ,μ)}_{00mm} in the fully summed Gamma-ratio form.
pub fn ch_c00mm_closed(m: usize, mu: u32) -> f64 {
    let (u, mf) = (mu as f64, m as f64);
    let a = gamma_ratio(&[u + 0.5], &[u + 1.0]).unwrap();
    let b = gamma_ratio(&[mf + 0.5, mf + 2.0 * u + 1.0], &[mf + 1.0, mf + 2.0 * u + 1.5]).unwrap();
    (2.0 * u + 1.0) * a * a * (2.0 * u + 2.0 * mf + 1.0) * b / (2.0 * PI)
}

/// 𝖢^{(μ,μ)}_{11mm} in the fully summed Gamma-ratio form.
pub fn ch_c11mm_closed(m: usize, mu: u32) -> f64 {
    let (u, mf) = (mu as f64, m as f64);
    let a = gamma_ratio(&[u + 0.5], &[u + 2.0]).unwrap();
    let b = gamma_ratio(&[mf - 0.5, mf + 2.0 * u + 1.0], &[mf + 1.0, mf + 2.0 * u + 2.5]).unwrap();
    (u + 1.0) * (2.0 * u + 1.0) * (2.0 * u + 3.0) * a * a * (2.0 * u + 2.0 * mf + 1.0)
        * (-u + 2.0 * mf * (2.0 * u + mf + 1.0) - 1.0)
        * b
        / (8.0 * PI)
}

/// Triangle and parity conditions for the YM quadratic coefficient.
pub fn ym_cbar_admissible(i: usize, j: usize, m: usize) -> bool {
    let (i, j, m) = (i as i64, j as i64, m as i64);
    let s = i + j + m;
    s % 2 == 0 && i + j >= m && i + m >= j && j + m >= i
}

/// 𝔠̄_{ijm}.
pub fn ym_cbar(i: usize, j: usize, m: usize) -> f64 {
    if !ym_cbar_admissible(i, j, m) {
        return 0.0;
    }
    let (a, b, c) = (i as f64, j as f64, m as f64);
    let num = (a + b - c + 2.0) * (a - b + c + 2.0) * (-a + b + c + 2.0) * (a + b + c + 6.0);
    let den = 4.0 * (2.0 * PI * (a + 1.0) * (a + 3.0) * (b + 1.0) * (b + 3.0) * (c + 1.0) * (c + 3.0)).sqrt();
    num / den
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CbarFamily {
    /// 𝔠̄_{γ,γ,2τ}
    GammaGamma2Tau,
    /// 𝔠̄_{m,2τ,m}
    M2TauM,
    /// 𝔠̄_{γ,2τ+m-γ,m}
    Cross,
}

pub fn ym_cbar_family(which: CbarFamily, gamma: usize, tau: usize, m: usize) -> Result<f64> {
    if tau > gamma {
        return Err(Error::Precondition(format!("tau = {tau} exceeds gamma = {gamma}")));
    }
    if which != CbarFamily::GammaGamma2Tau && m < 2 * gamma + 1 {
        return Err(Error::Precondition(format!("m = {m} < 2 gamma + 1")));
    }
    let c = 2.0 * (2.0 / PI).sqrt();
    let t = tau as f64;
    let diag = |g: f64| {
        c * (t + 1.0).powi(2) * (g - t + 1.0) * (g + t + 3.0)
            / ((g + 1.0) * (g + 3.0) * (4.0 * t * (t + 2.0) + 3.0).sqrt())
    };
    Ok(match which {
        CbarFamily::GammaGamma2Tau => diag(gamma as f64),
        CbarFamily::M2TauM => diag(m as f64),
        CbarFamily::Cross => {
            let (g, mf) = (gamma as f64, m as f64);
            c * (t + 1.0) * (g - t + 1.0) * (mf + t + 3.0) * (-g + mf + t + 1.0)
                / ((g + 1.0)
                    * (g + 3.0)
                    * (mf + 1.0)
                    * (mf + 3.0)
                    * (-g + mf + 2.0 * t + 1.0)
                    * (-g + mf + 2.0 * t + 3.0))
                    .sqrt()
        }
    })
}

/// 𝔴_n, the factor with 𝔑_n P_n^{(3/2,3/2)} = 𝔴_n C_n^{(2)}.
pub fn ym_w(n: usize) -> f64 {
    let nf = n as f64;
    (8.0 / PI).sqrt() / ((nf + 1.0) * (nf + 3.0)).sqrt()
}

fn ym_delta(gamma_idx: usize, l2: usize, n2: usize) -> f64 {
    let (g, l, n) = (gamma_idx as f64, l2 as f64, n2 as f64);
    let sign = if n2 % 2 == 0 { 1.0 } else { -1.0 };
    (l + 1.0).powi(2) * sign * (g - l + 1.0) * (g + l + 3.0) * 4f64.powi((l2 - n2) as i32)
        * gamma(2.0 * l - n + 2.0)
        / ((4.0 * l * (l + 2.0) + 3.0) * gamma(n + 1.0) * gamma(2.0 * l - 2.0 * n + 1.0))
}

fn ym_j(m: usize, l2: usize, n2: usize) -> f64 {
    let (mf, l, n) = (m as f64, l2 as f64, n2 as f64);
    let d = l2 - n2;
    let df = d as f64;
    let mm = mf * (mf + 4.0);
    let mut s = 3.0 * PI.sqrt() * (5.0 * l * (3.0 * mm + 1.0) + mm * (4.0 - 15.0 * n) - 5.0 * (n - 4.0))
        * gamma(df + 0.5)
        / (8.0 * gamma(df + 5.0));
    let scale = 4f64.powi(-(d as i32) - 2) * gamma(2.0 * df + 1.0);
    for l1 in 2..=d + 1 {
        let a = l1 as f64;
        s += PI * a * (a + 1.0).powi(2) * (2.0 * a - 1.0) * scale * (a - mf - 1.0) * (a + mf + 3.0)
            / (gamma(-a + df + 2.0) * gamma(a + df + 3.0));
    }
    for l1 in 2..=d {
        let a = l1 as f64;
        s -= PI * (a + 1.0).powi(2) * (a + 2.0) * (2.0 * a + 5.0) * scale * (a - mf - 1.0) * (a + mf + 3.0)
            / (gamma(-a + df + 1.0) * gamma(a + df + 4.0));
    }
    s
}

/// 𝔠_{γγmm} for m ≥ 2γ+1 by the δ·J double sum.
pub fn ym_c_ggmm(gamma_idx: usize, m: usize) -> Result<f64> {
    if m < 2 * gamma_idx + 1 {
        return Err(Error::Precondition(format!("m = {m} < 2 gamma + 1 = {}", 2 * gamma_idx + 1)));
    }
    let mut s = 0.0;
    for l2 in 0..=gamma_idx {
        for n2 in 0..=l2 {
            s += ym_delta(gamma_idx, l2, n2) * ym_j(m, l2, n2);
        }
    }
    Ok(ym_w(gamma_idx).powi(2) * ym_w(m).powi(2) * s)
}

/// The rational-over-π expressions for 𝔠_{γγmm}, γ ≤ 5, m ≥ 2γ+1.
pub fn ym_c_ggmm_rational(gamma_idx: usize, m: usize) -> Result<f64> {
    if m < 2 * gamma_idx + 1 {
        return Err(Error::Precondition(format!("m = {m} < 2 gamma + 1")));
    }
    let mf = m as f64;
    let q = mf * (mf + 4.0);
    let num = match gamma_idx {
        0 => 4.0 * (q + 5.0) / 3.0,
        1 => 2.0 * (q + 7.0),
        2 => 8.0 * (5.0 * q + 49.0) / 15.0,
        3 => 2.0 * (5.0 * q + 67.0) / 3.0,
        4 => 4.0 * (5.0 * q + 89.0) / 5.0,
        5 => 14.0 * (q + 23.0) / 3.0,
        _ => return Err(Error::Precondition(format!("no rational form for gamma = {gamma_idx}"))),
    };
    Ok(num / (PI * (mf + 1.0) * (mf + 3.0)))
}

fn npts_for(degree: usize) -> usize {
    crate::models::DEFAULT_NPTS.max(degree / 2 + 8)
}

/// Direct quadrature of the defining integral. A 3-tuple is 𝔠̄ (YM only);
/// a 4-tuple is C, 𝖢 or 𝔠 (the latter with the extra sin²x).
pub fn oracle_coeff(model: ModelSpec, indices: &[usize]) -> Result<f64> {
    let k = indices.len();
    let extra = match (model, k) {
        (ModelSpec::Ym, 3) => 0,
        (ModelSpec::Ym, 4) => 1,
        (_, 4) => 0,
        _ => return Err(Error::Precondition(format!("{indices:?} is not a valid index tuple for {}", model.name()))),
    };
    let (pre, a, b) = model.product_weight(k, extra);
    let rule = cached_rule(npts_for(indices.iter().sum()), a, b)?;
    let fam = model.family();
    let norm: f64 = indices.iter().map(|&n| model.normalization(n)).product();
    Ok(pre * norm * rule.integrate(|y| indices.iter().map(|&n| eval_unchecked(fam, n, y)).product::<f64>()))
}

/// Coefficients through a shared node table: the k-fold product integral
/// for all index tuples below `nmodes`, as Σ_q w_q Π E_n(y_q).
#[derive(Debug, Clone)]
pub struct NodalTable {
    pub nmodes: usize,
    pub weights: Vec<f64>,
    /// values[n][q] = normalized polynomial part of e_n at node q
    pub values: Vec<Vec<f64>>,
}

impl NodalTable {
    /// Table exact for products of up to `arity` eigenfunctions with the
    /// given weight exponents; `extra` as in [`oracle_coeff`].
    pub fn new(model: ModelSpec, nmodes: usize, arity: usize, extra: u32) -> Result<Self> {
        let (pre, a, b) = model.product_weight(arity, extra);
        let rule = cached_rule(npts_for(arity * nmodes.saturating_sub(1) + 2), a, b)?;
        let fam = model.family();
        let values = (0..nmodes)
            .map(|n| {
                let c = model.normalization(n);
                rule.nodes.iter().map(|&y| c * eval_unchecked(fam, n, y)).collect()
            })
            .collect();
        Ok(NodalTable { nmodes, weights: rule.weights.iter().map(|w| pre * w).collect(), values })
    }

    /// C (CW/CH) or 𝔠 (YM) for indices < nmodes.
    pub fn quartic(model: ModelSpec, nmodes: usize) -> Result<Self> {
        Self::new(model, nmodes, 4, u32::from(model == ModelSpec::Ym))
    }

    /// 𝔠̄ for indices < nmodes.
    pub fn ym_cubic(nmodes: usize) -> Result<Self> {
        Self::new(ModelSpec::Ym, nmodes, 3, 0)
    }

    pub fn coeff(&self, idx: &[usize]) -> f64 {
        (0..self.weights.len())
            .map(|q| self.weights[q] * idx.iter().map(|&n| self.values[n][q]).product::<f64>())
            .sum()
    }
}

/// Node-factorized coupling tensors for modes 0..nmodes, used for forces,
/// potentials and coefficient lookups in the inner loops.
#[derive(Debug, Clone)]
pub struct Couplings {
    pub model: ModelSpec,
    pub nmodes: usize,
    quartic: NodalTable,
    cubic: Option<NodalTable>,
}

impl Couplings {
    pub fn new(model: ModelSpec, nmodes: usize) -> Result<Self> {
        let quartic = NodalTable::quartic(model, nmodes)?;
        let cubic = if model == ModelSpec::Ym { Some(NodalTable::ym_cubic(nmodes)?) } else { None };
        Ok(Couplings { model, nmodes, quartic, cubic })
    }

    /// C_{ijkm}, 𝖢_{ijkm} or 𝔠_{ijkm}; CW uses the exact count.
    pub fn c4(&self, i: usize, j: usize, k: usize, m: usize) -> f64 {
        match self.model {
            ModelSpec::Cw => cw_coeff(i, j, k, m) as f64,
            _ => self.quartic.coeff(&[i, j, k, m]),
        }
    }

    /// 𝔠̄_{ijm} (zero for CW/CH).
    pub fn c3(&self, i: usize, j: usize, m: usize) -> f64 {
        if self.cubic.is_some() {
            ym_cbar(i, j, m)
        } else {
            0.0
        }
    }

    fn nodal(table: &NodalTable, u: &[f64]) -> Vec<f64> {
        let nq = table.weights.len();
        let mut uq = vec![0.0; nq];
        for (n, &a) in u.iter().enumerate().take(table.nmodes) {
            if a != 0.0 {
                for (x, e) in uq.iter_mut().zip(&table.values[n]) {
                    *x += a * e;
                }
            }
        }
        uq
    }

    fn project(table: &NodalTable, g: &[f64], out: &mut [f64], scale: f64) {
        for (m, o) in out.iter_mut().enumerate().take(table.nmodes) {
            *o += scale * table.values[m].iter().zip(g).map(|(e, x)| e * x).sum::<f64>();
        }
    }

    /// Cubic part: -Σ C_{ijkm} u^i u^j u^k (CW/CH) or -Σ 𝔠_{ijkm} u^i u^j u^k (YM).
    pub fn force_cubic(&self, u: &[f64]) -> Vec<f64> {
        let t = &self.quartic;
        let g: Vec<f64> = Self::nodal(t, u).iter().zip(&t.weights).map(|(x, w)| w * x * x * x).collect();
        let mut out = vec![0.0; self.nmodes];
        Self::project(t, &g, &mut out, -1.0);
        out
    }

    /// Quadratic part -3 Σ 𝔠̄_{ijm} u^i u^j (YM; zero otherwise).
    pub fn force_quadratic(&self, u: &[f64]) -> Vec<f64> {
        self.bilinear(u, u).into_iter().map(|x| 3.0 * x).collect()
    }

    /// -Σ 𝔠̄_{ijm} a^i b^j.
    pub fn bilinear(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nmodes];
        if let Some(t) = &self.cubic {
            let (ua, ub) = (Self::nodal(t, a), Self::nodal(t, b));
            let g: Vec<f64> = ua.iter().zip(&ub).zip(&t.weights).map(|((x, y), w)| w * x * y).collect();
            Self::project(t, &g, &mut out, -1.0);
        }
        out
    }

    pub fn force(&self, u: &[f64]) -> Vec<f64> {
        let mut f = self.force_cubic(u);
        if self.cubic.is_some() {
            for (x, y) in f.iter_mut().zip(self.force_quadratic(u)) {
                *x += y;
            }
        }
        f
    }

    /// V with f = -grad V.
    pub fn potential(&self, u: &[f64]) -> f64 {
        let t = &self.quartic;
        let mut v: f64 = Self::nodal(t, u).iter().zip(&t.weights).map(|(x, w)| 0.25 * w * x.powi(4)).sum();
        if let Some(t3) = &self.cubic {
            v += Self::nodal(t3, u).iter().zip(&t3.weights).map(|(x, w)| w * x.powi(3)).sum::<f64>();
        }
        v
    }
}

/// Relative error, or absolute error when the reference is exactly zero.
pub fn rel_err(reference: f64, other: f64) -> f64 {
    if reference == 0.0 {
        other.abs()
    } else {
        ((reference - other) / reference).abs()
    }
}
