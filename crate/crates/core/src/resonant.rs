//! Averages of the nonlinearities along the linear flow, the resonant
//! operators, the YM backreaction term, 1-mode zeros and the differentials
//! of the operators at those zeros.

use rayon::prelude::*;
use serde::Serialize;

use crate::fourier::{ch_coeff_ggmm, cw_coeff, oracle_coeff, ym_c_ggmm, ym_cbar, Couplings};
use crate::models::{ModeVector, ModelSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OneModeData {
    pub model: ModelSpec,
    pub gamma: usize,
    /// K_γ, 𝖪_γ or 𝔎_γ including the sign
    pub amplitude: f64,
    pub sign: i8,
    /// C_{γγγγ}, 𝖢_{γγγγ} or 𝔠_{γγγγ}
    pub c_gggg: f64,
    /// 𝔮_γ (YM only)
    pub q: Option<f64>,
}

impl OneModeData {
    pub fn xi(&self, len: usize) -> ModeVector {
        ModeVector::unit(len, self.gamma, self.amplitude)
    }
}

/// Extra output modes allowed by the vanishing rules beyond 3·(largest input mode).
pub fn support_offset(model: ModelSpec) -> usize {
    match model {
        ModelSpec::Cw => 0,
        ModelSpec::Ch { mu1, mu2 } => (mu1 + mu2) as usize,
        ModelSpec::Ym => 2,
    }
}

/// Number of output modes that can be nonzero for the cubic average of an
/// input supported below `support_end`.
pub fn cubic_output_len(model: ModelSpec, support_end: usize) -> usize {
    if support_end == 0 {
        0
    } else {
        3 * (support_end - 1) + support_offset(model) + 1
    }
}

fn check_input(xi: &ModeVector, trunc: usize) -> Result<usize> {
    let s = xi.support_end();
    if s > trunc {
        return Err(Error::Precondition(format!("input supported up to mode {} beyond truncation {trunc}", s - 1)));
    }
    if xi.0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite amplitude".into()));
    }
    Ok(s)
}

fn check_output(needed: usize, trunc: usize) -> Result<()> {
    if needed > trunc {
        Err(Error::Truncation(format!("analytic support needs {needed} modes, truncation is {trunc}")))
    } else {
        Ok(())
    }
}

fn sign_count3(w: [i64; 4]) -> usize {
    let mut c = 0;
    for s1 in [-1, 1] {
        for s2 in [-1, 1] {
            for s3 in [-1, 1] {
                c += usize::from(w[0] + s1 * w[1] + s2 * w[2] + s3 * w[3] == 0);
            }
        }
    }
    c
}

fn sign_count2(w: [i64; 3]) -> usize {
    let mut c = 0;
    for s1 in [-1, 1] {
        for s2 in [-1, 1] {
            c += usize::from(w[0] + s1 * w[1] + s2 * w[2] == 0);
        }
    }
    c
}

fn nonzero(xi: &ModeVector) -> Vec<(usize, f64)> {
    xi.0.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, v)| (i, *v)).collect()
}

/// ⟨f⟩(ξ) for CW/CH, ⟨𝔣⁽³⁾⟩(ξ) for YM, through the sign-pattern identity.
pub fn average_cubic(model: ModelSpec, xi: &ModeVector, trunc: usize) -> Result<ModeVector> {
    let s = check_input(xi, trunc)?;
    let out = cubic_output_len(model, s);
    check_output(out, trunc)?;
    let mut res = ModeVector::zeros(trunc);
    if s == 0 {
        return Ok(res);
    }
    let cp = Couplings::new(model, out)?;
    let nz = nonzero(xi);
    let w = |n: usize| model.omega_int(n);
    let vals: Vec<f64> = (0..out)
        .into_par_iter()
        .map(|m| {
            let mut acc = 0.0;
            for &(i, a) in &nz {
                for &(j, b) in &nz {
                    for &(k, c) in &nz {
                        let cnt = sign_count3([w(i), w(j), w(k), w(m)]);
                        if cnt > 0 {
                            acc += cp.c4(i, j, k, m) * a * b * c * cnt as f64;
                        }
                    }
                }
            }
            -acc / 8.0
        })
        .collect();
    res.0[..out].copy_from_slice(&vals);
    Ok(res)
}

/// ⟨𝔣⁽²⁾⟩(ξ) for YM by the indicator sum; vanishes identically.
pub fn average_quadratic_ym(xi: &ModeVector) -> Result<ModeVector> {
    let s = check_input(xi, xi.len())?;
    let out = if s == 0 { 0 } else { 2 * s - 1 };
    let mut res = ModeVector::zeros(out.max(xi.len()));
    let nz = nonzero(xi);
    let w = |n: usize| ModelSpec::Ym.omega_int(n);
    for m in 0..out {
        let mut acc = 0.0;
        for &(i, a) in &nz {
            for &(j, b) in &nz {
                let cnt = sign_count2([w(i), w(j), w(m)]);
                if cnt > 0 {
                    acc += ym_cbar(i, j, m) * a * b * cnt as f64;
                }
            }
        }
        res.0[m] = -3.0 * acc / 4.0;
    }
    Ok(res)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcePart {
    Cubic,
    Quadratic,
}

/// (1/2π)∫ cos(ω_m t) f^m(Φ^t ξ) dt by the trapezoid rule with `steps` nodes,
/// f evaluated from the nodal coupling tables.
pub fn time_average_oracle(model: ModelSpec, xi: &ModeVector, out: usize, part: ForcePart, steps: usize) -> Result<ModeVector> {
    let cp = Couplings::new(model, out.max(xi.len()))?;
    let n = cp.nmodes;
    let mut acc = vec![0.0; n];
    for s in 0..steps {
        let t = 2.0 * std::f64::consts::PI * s as f64 / steps as f64;
        let u: Vec<f64> = (0..n).map(|k| xi.get(k) * (model.omega(k) * t).cos()).collect();
        let f = match part {
            ForcePart::Cubic => cp.force_cubic(&u),
            ForcePart::Quadratic => cp.force_quadratic(&u),
        };
        for m in 0..n {
            acc[m] += (model.omega(m) * t).cos() * f[m];
        }
    }
    Ok(ModeVector(acc.into_iter().take(out).map(|x| x / steps as f64).collect()))
}

/// 𝓜(ξ) = 𝔄ξ + ⟨f⟩(ξ) for CW and CH.
pub fn operator_m(model: ModelSpec, xi: &ModeVector, trunc: usize) -> Result<ModeVector> {
    if model == ModelSpec::Ym {
        return Err(Error::Precondition("use operator_m_pm_ym for YM".into()));
    }
    let mut r = average_cubic(model, xi, trunc)?;
    for (m, v) in r.0.iter_mut().enumerate() {
        *v += model.omega(m).powi(2) * xi.get(m);
    }
    Ok(r)
}

/// Cosine coefficients of L_1^{-1} P 𝔣⁽²⁾(Φ^t ξ): g[ν][l] multiplies cos(l t) in mode ν.
fn l1_inverse_pf2(xi: &ModeVector) -> Vec<Vec<f64>> {
    let s = xi.support_end();
    if s == 0 {
        return Vec::new();
    }
    let w = |n: usize| ModelSpec::Ym.omega_int(n);
    let nz = nonzero(xi);
    let nu_len = 2 * (s - 1) + 1;
    let lmax = 2 * w(s - 1) as usize;
    let mut g = vec![vec![0.0; lmax + 1]; nu_len];
    for (nu, row) in g.iter_mut().enumerate() {
        let wn = w(nu);
        for &(i, a) in &nz {
            for &(j, b) in &nz {
                let c = ym_cbar(i, j, nu);
                if c == 0.0 {
                    continue;
                }
                for l in [(w(i) - w(j)).abs(), w(i) + w(j)] {
                    if l == wn {
                        continue;
                    }
                    row[l as usize] += -1.5 * c * a * b / ((wn * wn - l * l) as f64);
                }
            }
        }
    }
    g
}

/// 𝔉₀(ξ), the cubic backreaction of the non-resonant quadratic terms (YM).
pub fn frak_f0(xi: &ModeVector, trunc: usize) -> Result<ModeVector> {
    let s = check_input(xi, trunc)?;
    let out = if s == 0 { 0 } else { 3 * (s - 1) + 1 };
    check_output(out, trunc)?;
    let mut res = ModeVector::zeros(trunc);
    if s == 0 {
        return Ok(res);
    }
    let g = l1_inverse_pf2(xi);
    let nz = nonzero(xi);
    let w = |n: usize| ModelSpec::Ym.omega_int(n);
    let vals: Vec<f64> = (0..out)
        .into_par_iter()
        .map(|m| {
            let mut acc = 0.0;
            for &(k, a) in &nz {
                for (nu, row) in g.iter().enumerate() {
                    let c = ym_cbar(k, nu, m);
                    if c == 0.0 {
                        continue;
                    }
                    for (l, &gl) in row.iter().enumerate() {
                        if gl != 0.0 {
                            let cnt = sign_count2([l as i64, w(k), w(m)]);
                            acc += c * a * gl * cnt as f64;
                        }
                    }
                }
            }
            -6.0 * acc / 4.0
        })
        .collect();
    res.0[..out].copy_from_slice(&vals);
    Ok(res)
}

/// 𝔐±(ξ) = ±𝔄ξ + ⟨𝔣⁽³⁾⟩(ξ) + 𝔉₀(ξ).
pub fn operator_m_pm_ym(xi: &ModeVector, sign: i8, trunc: usize) -> Result<ModeVector> {
    if sign.abs() != 1 {
        return Err(Error::Precondition(format!("sign must be +1 or -1, got {sign}")));
    }
    let a = average_cubic(ModelSpec::Ym, xi, trunc)?;
    let f = frak_f0(xi, trunc)?;
    Ok(ModeVector(
        (0..trunc)
            .map(|m| sign as f64 * ModelSpec::Ym.omega(m).powi(2) * xi.get(m) + a.get(m) + f.get(m))
            .collect(),
    ))
}

/// 𝔮_γ = (9/4) Σ_ν (𝔠̄_{γγν})² (2/ω_ν² + 1/(ω_ν² - 4ω_γ²)).
pub fn ym_q(gamma: usize) -> f64 {
    let w = |n: usize| ModelSpec::Ym.omega(n);
    let wg = w(gamma);
    2.25 * (0..=2 * gamma)
        .map(|nu| ym_cbar(gamma, gamma, nu).powi(2) * (2.0 / w(nu).powi(2) + 1.0 / (w(nu).powi(2) - 4.0 * wg * wg)))
        .sum::<f64>()
}

/// The self-coupling C_{γγγγ} / 𝖢_{γγγγ} / 𝔠_{γγγγ}.
pub fn self_coupling(model: ModelSpec, gamma: usize) -> Result<f64> {
    match model {
        ModelSpec::Cw => Ok(cw_coeff(gamma, gamma, gamma, gamma) as f64),
        ModelSpec::Ch { mu1, mu2 } if mu1 == mu2 => ch_coeff_ggmm(gamma, gamma, mu1),
        _ => oracle_coeff(model, &[gamma; 4]),
    }
}

/// C_{γγmm} family, closed where available.
pub fn ggmm_coupling(model: ModelSpec, gamma: usize, m: usize) -> Result<f64> {
    match model {
        ModelSpec::Cw => Ok(cw_coeff(gamma, gamma, m, m) as f64),
        ModelSpec::Ch { mu1, mu2 } if mu1 == mu2 && m >= gamma => ch_coeff_ggmm(gamma, m, mu1),
        ModelSpec::Ym if m > 2 * gamma => ym_c_ggmm(gamma, m),
        _ => oracle_coeff(model, &[gamma, gamma, m, m]),
    }
}

/// The rescaled 1-mode zero of 𝓜 (CW/CH) or 𝔐₋ (YM).
pub fn one_mode(model: ModelSpec, gamma: usize, sign: i8) -> Result<OneModeData> {
    if sign.abs() != 1 {
        return Err(Error::Precondition(format!("sign must be +1 or -1, got {sign}")));
    }
    let c = self_coupling(model, gamma)?;
    let wg = model.omega(gamma);
    let (k2, q) = match model {
        ModelSpec::Ym => {
            let q = ym_q(gamma);
            let d = 8.0 * q - 3.0 * c;
            if d <= 0.0 {
                return Err(Error::Positivity(format!("8q - 3c = {d:e} <= 0 at gamma = {gamma}")));
            }
            (8.0 * wg * wg / d, Some(q))
        }
        _ => {
            if c <= 0.0 {
                return Err(Error::Positivity(format!("self-coupling {c:e} <= 0 at gamma = {gamma}")));
            }
            (8.0 * wg * wg / (3.0 * c), None)
        }
    };
    Ok(OneModeData { model, gamma, amplitude: sign as f64 * k2.sqrt(), sign, c_gggg: c, q })
}

/// Weight of the Σ_ν 𝔠̄_{mνm}𝔠̄_{γγν}/ω_ν² sum in 𝔞_{γm}. The value 9/2 is
/// what differentiating 𝔉₀ produces (the l = 0 frequency meets two sign
/// patterns). The 9/4 variant is kept because the closed tail polynomials
/// are built from it.
pub const A_THIRD_SUM_WEIGHT: f64 = 4.5;
pub const A_THIRD_SUM_WEIGHT_PRINTED: f64 = 2.25;

/// (𝔞_{γm}, 𝔟_{γm}); 𝔟 is present only for m ≤ 2γ.
pub fn frak_ab(gamma: usize, m: usize) -> (f64, Option<f64>) {
    frak_ab_weighted(gamma, m, A_THIRD_SUM_WEIGHT)
}

/// [`frak_ab`] with an explicit weight on the third 𝔞-sum.
pub fn frak_ab_weighted(gamma: usize, m: usize, third: f64) -> (f64, Option<f64>) {
    let w = |n: usize| ModelSpec::Ym.omega(n);
    let wi = |n: usize| ModelSpec::Ym.omega_int(n);
    let excluded = |nu: usize| {
        let d = m as i64 - gamma as i64;
        nu as i64 == d - 2 || nu as i64 == -d - 2
    };
    let (wg, wm) = (w(gamma), w(m));
    let mut a = 0.0;
    for nu in 0..=m + gamma {
        let wn2 = w(nu).powi(2);
        a += 4.5 * ym_cbar(gamma, nu, m).powi(2) / (wn2 - (wm + wg).powi(2));
        if !excluded(nu) {
            a += 4.5 * ym_cbar(m, gamma, nu).powi(2) / (wn2 - (wm - wg).powi(2));
        }
    }
    for nu in 0..=2 * gamma {
        a += third * ym_cbar(m, nu, m) * ym_cbar(gamma, gamma, nu) / w(nu).powi(2);
    }
    if m > 2 * gamma {
        return (a, None);
    }
    let k = 2 * gamma - m;
    let mut b = 0.0;
    for nu in 0..=2 * gamma {
        b += 2.25 * ym_cbar(k, nu, m) * ym_cbar(gamma, gamma, nu) / (w(nu).powi(2) - 4.0 * wg * wg);
    }
    for nu in 0..=m + gamma {
        if !excluded(nu) {
            let den = (wi(nu).pow(2) - (wi(k) - wi(gamma)).pow(2)) as f64;
            b += 4.5 * ym_cbar(gamma, nu, m) * ym_cbar(k, gamma, nu) / den;
        }
    }
    (a, Some(b))
}

/// Differential at a 1-mode: row m reads diag[m]·h^m + cross[m]·h^{2γ-m},
/// with the m = γ coupling folded into diag[γ].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneModeDifferential {
    pub model: ModelSpec,
    pub gamma: usize,
    pub diag: Vec<f64>,
    /// entries for m ≤ 2γ, zero at m = γ
    pub cross: Vec<f64>,
}

impl OneModeDifferential {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, h: &ModeVector) -> ModeVector {
        ModeVector(
            (0..self.dim())
                .map(|m| {
                    let mut v = self.diag[m] * h.get(m);
                    if m < self.cross.len() {
                        v += self.cross[m] * h.get(2 * self.gamma - m);
                    }
                    v
                })
                .collect(),
        )
    }

    pub fn dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut a = vec![vec![0.0; n]; n];
        for m in 0..n {
            a[m][m] = self.diag[m];
            if m < self.cross.len() && m != self.gamma {
                a[m][2 * self.gamma - m] = self.cross[m];
            }
        }
        a
    }
}

/// d𝓜 (CW/CH) or d𝔐₋ (YM) at the 1-mode, on modes 0..=m_max.
pub fn dm_one_mode(model: ModelSpec, gamma: usize, m_max: usize) -> Result<OneModeDifferential> {
    if m_max < 2 * gamma + 1 {
        return Err(Error::Precondition(format!("m_max = {m_max} < 2 gamma + 1 = {}", 2 * gamma + 1)));
    }
    let om = one_mode(model, gamma, -1)?;
    let wg2 = model.omega(gamma).powi(2);
    let mut diag = vec![0.0; m_max + 1];
    let mut cross = vec![0.0; 2 * gamma + 1];
    match model {
        ModelSpec::Ym => {
            let k2 = om.amplitude.powi(2);
            for (m, d) in diag.iter_mut().enumerate() {
                let (u, v) = ym_uv_with(gamma, m, k2)?;
                *d = -k2 * (u + if m == gamma { v.unwrap() } else { 0.0 });
                if m <= 2 * gamma && m != gamma {
                    cross[m] = -k2 * v.unwrap();
                }
            }
        }
        _ => {
            let c = om.c_gggg;
            for (m, d) in diag.iter_mut().enumerate() {
                *d = if m == gamma {
                    -2.0 * wg2
                } else {
                    model.omega(m).powi(2) - 2.0 * wg2 * ggmm_coupling(model, gamma, m)? / c
                };
            }
            for (m, x) in cross.iter_mut().enumerate() {
                if m != gamma {
                    let cc = match model {
                        ModelSpec::Cw => cw_coeff(gamma, 2 * gamma - m, gamma, m) as f64,
                        _ => oracle_coeff(model, &[gamma, 2 * gamma - m, gamma, m])?,
                    };
                    *x = -wg2 * cc / c;
                }
            }
        }
    }
    Ok(OneModeDifferential { model, gamma, diag, cross })
}

/// (𝔲_{γm}, 𝔳_{γm}) at a given 𝔎_γ²; 𝔳 only for m ≤ 2γ.
pub(crate) fn ym_uv_with(gamma: usize, m: usize, k2: f64) -> Result<(f64, Option<f64>)> {
    let (a, b) = frak_ab(gamma, m);
    let u = ModelSpec::Ym.omega(m).powi(2) / k2 + 0.75 * ggmm_coupling(ModelSpec::Ym, gamma, m)? - a;
    let v = match b {
        Some(b) => Some(0.375 * oracle_coeff(ModelSpec::Ym, &[gamma, 2 * gamma - m, gamma, m])? - b),
        None => None,
    };
    Ok((u, v))
}
