//! Non-degeneracy certificates for the 1-modes: diagonal terms, 2×2
//! determinants and tail lower bounds for CW, CH and YM.

use std::f64::consts::PI;

use serde::Serialize;

use crate::fourier::{ch_m_coeff, ch_xi, cw_coeff, oracle_coeff, ym_cbar};
use crate::models::ModelSpec;
use crate::resonant::{
    frak_ab_weighted, ggmm_coupling, one_mode, self_coupling, A_THIRD_SUM_WEIGHT, A_THIRD_SUM_WEIGHT_PRINTED,
};
use crate::special_functions::{gamma_ratio, ln_gamma};
use crate::{Error, Result};

pub const DEFAULT_M_SCAN: usize = 200;

/// Parameter ranges covered by the closed formulas and the certificates.
pub fn check_validated_range(model: ModelSpec, gamma: usize) -> Result<()> {
    match model {
        ModelSpec::Cw => Ok(()),
        ModelSpec::Ch { mu1, mu2 } if gamma <= 5 && mu1 <= 5 && mu2 <= 5 => Ok(()),
        ModelSpec::Ym if gamma <= 5 => Ok(()),
        _ => Err(Error::Domain(format!(
            "{} with gamma = {gamma} is outside the validated range (pass --unchecked to override)",
            describe(model)
        ))),
    }
}

fn describe(model: ModelSpec) -> String {
    match model {
        ModelSpec::Ch { mu1, mu2 } => format!("ch(mu1={mu1}, mu2={mu2})"),
        _ => model.name().to_string(),
    }
}

fn need_det_range(gamma: usize, n: usize) -> Result<()> {
    if n >= gamma {
        Err(Error::Precondition(format!("determinant index n = {n} must be below gamma = {gamma}")))
    } else {
        Ok(())
    }
}

fn need_tail_range(gamma: usize, m: usize) -> Result<()> {
    if m < 2 * gamma + 1 {
        Err(Error::Precondition(format!("m = {m} < 2 gamma + 1 = {}", 2 * gamma + 1)))
    } else {
        Ok(())
    }
}

/// ω_m²C_{γγγγ} - 2ω_γ²C_{γγmm} = ω_γ(ω_m² - 2ω_γ²) for m ≥ 2γ+1.
pub fn cw_diag(gamma: usize, m: usize) -> Result<f64> {
    need_tail_range(gamma, m)?;
    let (wg, wm) = (ModelSpec::Cw.omega_int(gamma), ModelSpec::Cw.omega_int(m));
    Ok((wg * (wm * wm - 2 * wg * wg)) as f64)
}

fn cw_entry(gamma: usize, m: usize) -> i64 {
    let w = |n: usize| ModelSpec::Cw.omega_int(n);
    w(m).pow(2) * cw_coeff(gamma, gamma, gamma, gamma) as i64 - 2 * w(gamma).pow(2) * cw_coeff(gamma, gamma, m, m) as i64
}

/// D_{γn} = ω_n ω_γ² (n-3-4γ)(n-γ)².
pub fn cw_det(gamma: usize, n: usize) -> Result<f64> {
    need_det_range(gamma, n)?;
    let (g, nn) = (gamma as i64, n as i64);
    Ok(((nn + 1) * (g + 1).pow(2) * (nn - 3 - 4 * g) * (nn - g).pow(2)) as f64)
}

/// The same determinant assembled from the coupling counts.
pub fn cw_det_assembled(gamma: usize, n: usize) -> Result<f64> {
    need_det_range(gamma, n)?;
    let k = 2 * gamma - n;
    let wg2 = ModelSpec::Cw.omega_int(gamma).pow(2);
    let off = wg2 * cw_coeff(gamma, k, gamma, n) as i64;
    Ok((cw_entry(gamma, n) * cw_entry(gamma, k) - off * off) as f64)
}

fn ch_mu(model: ModelSpec) -> Result<(u32, u32)> {
    match model {
        ModelSpec::Ch { mu1, mu2 } => Ok((mu1, mu2)),
        _ => Err(Error::Precondition(format!("{} is not a CH model", model.name()))),
    }
}

fn ch_entry(model: ModelSpec, gamma: usize, m: usize) -> Result<f64> {
    let c = self_coupling(model, gamma)?;
    Ok(model.omega(m).powi(2) * c - 2.0 * model.omega(gamma).powi(2) * ggmm_coupling(model, gamma, m)?)
}

/// ω_m²𝖢_{γγγγ} - 2ω_γ²𝖢_{γγmm} for m ≥ 2γ+1.
pub fn ch_diag(model: ModelSpec, gamma: usize, m: usize) -> Result<f64> {
    ch_mu(model)?;
    need_tail_range(gamma, m)?;
    ch_entry(model, gamma, m)
}

/// 𝖲_γ^{(μ)}, the lower bound for ch_diag/ω_m² over m ≥ 2γ+1.
pub fn ch_s(gamma: usize, mu: u32) -> Result<f64> {
    let model = ModelSpec::ch(mu);
    let w2 = |n: usize| model.omega(n).powi(2);
    let mut s = 0.0;
    for lam in 0..=gamma {
        let mg = ch_m_coeff(gamma, mu, lam)?;
        let p = |m: usize| ch_m_coeff(m, mu, lam).map(|v| v / w2(m));
        s += mg * (p(gamma)? - 2.0 * p(2 * gamma + 1)?) * ch_xi(lam, mu);
    }
    Ok(0.5 * w2(gamma) * s)
}

/// 𝖲_0^{(μ)} in Gamma-function form.
pub fn ch_s0_closed(mu: u32) -> f64 {
    let u = mu as f64;
    let g = gamma_ratio(&[u + 0.5, u + 0.5, u + 2.5], &[u + 1.0, 2.0 * u + 2.5]).unwrap();
    4f64.powf(u) * (2.0 * u + 1.0) * (10.0 * u + 7.0) * g / (PI * (2.0 * u + 3.0).powi(2))
}

/// 𝖣_{γn}, the 2×2 determinant of the (h^n, h^{2γ-n}) block.
pub fn ch_det(model: ModelSpec, gamma: usize, n: usize) -> Result<f64> {
    ch_mu(model)?;
    need_det_range(gamma, n)?;
    let k = 2 * gamma - n;
    let off = model.omega(gamma).powi(2) * oracle_coeff(model, &[gamma, k, gamma, n])?;
    Ok(ch_entry(model, gamma, n)? * ch_entry(model, gamma, k)? - off * off)
}

/// 𝖣_{10}^{(μ,μ)} in closed form.
pub fn ch_d10_closed(mu: u32) -> f64 {
    let u = mu as f64;
    let poly = 20.0 * u.powi(4) + 328.0 * u.powi(3) + 1029.0 * u * u + 1155.0 * u + 435.0;
    let lg = 2.0 * ln_gamma(u + 0.5).0 + 4.0 * ln_gamma(u + 1.5).0 - 2.0 * ln_gamma(u + 2.0).0 - 2.0 * ln_gamma(2.0 * u + 4.5).0
        + (u - 1.0) * 16f64.ln();
    -(3.0 / (PI * PI)) * (u + 1.0) * (2.0 * u + 3.0).powi(4) * (2.0 * u + 5.0) * (4.0 * u + 7.0) * poly * lg.exp()
}

fn ym_k2(gamma: usize) -> Result<f64> {
    Ok(one_mode(ModelSpec::Ym, gamma, -1)?.amplitude.powi(2))
}

fn ym_uv_weighted(gamma: usize, m: usize, third: f64) -> Result<(f64, Option<f64>)> {
    let k2 = ym_k2(gamma)?;
    let (a, b) = frak_ab_weighted(gamma, m, third);
    let u = ModelSpec::Ym.omega(m).powi(2) / k2 + 0.75 * ggmm_coupling(ModelSpec::Ym, gamma, m)? - a;
    let v = match b {
        Some(b) => Some(0.375 * oracle_coeff(ModelSpec::Ym, &[gamma, 2 * gamma - m, gamma, m])? - b),
        None => None,
    };
    Ok((u, v))
}

/// 𝔲_{γm} (any m) and 𝔳_{γm} (m ≤ 2γ), the blocks of -𝔎_γ^{-2} d𝔐₋.
pub fn ym_uv(gamma: usize, m: usize) -> Result<(f64, Option<f64>)> {
    ym_uv_weighted(gamma, m, A_THIRD_SUM_WEIGHT)
}

pub fn ym_v(gamma: usize, m: usize) -> Result<f64> {
    if m > 2 * gamma {
        return Err(Error::Index(format!("v is defined for m <= 2 gamma = {}, got {m}", 2 * gamma)));
    }
    Ok(ym_uv(gamma, m)?.1.unwrap())
}

/// 𝔇_{γn} = 𝔲_{γn}𝔲_{γ,2γ-n} - 𝔳_{γn}𝔳_{γ,2γ-n}.
pub fn ym_det(gamma: usize, n: usize) -> Result<f64> {
    need_det_range(gamma, n)?;
    let (un, vn) = ym_uv(gamma, n)?;
    let (uk, vk) = ym_uv(gamma, 2 * gamma - n)?;
    Ok(un * uk - vn.unwrap() * vk.unwrap())
}

/// The explicitly summable part 𝔦_{γm} of 𝔲_{γm}/ω_m², with the given
/// weight on the 𝔠̄_{m,2τ,m}𝔠̄_{γ,γ,2τ} sum.
pub fn ym_frak_i(gamma: usize, m: usize, third: f64) -> Result<f64> {
    need_tail_range(gamma, m)?;
    let w2 = |n: usize| ModelSpec::Ym.omega(n).powi(2);
    let (wg2, wm2) = (w2(gamma), w2(m));
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut s3 = 0.0;
    for t in 0..=gamma {
        let c = ym_cbar(gamma, gamma, 2 * t);
        s1 += c * c / w2(2 * t);
        s2 += c * c / (w2(2 * t) - 4.0 * wg2);
        s3 += ym_cbar(m, 2 * t, m) * c / w2(2 * t);
    }
    Ok(-3.0 / (8.0 * wg2) * self_coupling(ModelSpec::Ym, gamma)? + 4.5 / wg2 * s1 + 2.25 / wg2 * s2
        + 0.75 / wm2 * ggmm_coupling(ModelSpec::Ym, gamma, m)?
        - third / wm2 * s3)
}

/// Σ_τ (𝔠̄_{γγ,2τ})²/ω_{2τ}² in closed form.
pub fn ym_sum_gg_closed(gamma: usize) -> f64 {
    let g = gamma as f64;
    (g + 2.0) * (2.0 * g + 3.0) * (2.0 * g + 5.0) / (15.0 * PI * (g + 1.0) * (g + 3.0))
}

/// Σ_τ 𝔠̄_{m,2τ,m}𝔠̄_{γγ,2τ}/ω_{2τ}² in closed form.
pub fn ym_sum_mg_closed(gamma: usize, m: usize) -> f64 {
    let (g, mf) = (gamma as f64, m as f64);
    (g + 2.0) * (-g * (g + 4.0) + 5.0 * mf * (mf + 4.0) + 15.0) / (15.0 * PI * (mf + 1.0) * (mf + 3.0))
}

/// Majorant 𝔓_{γm} of the non-summable part, as the τ-sum.
pub fn ym_frak_p(gamma: usize, m: usize) -> Result<f64> {
    need_tail_range(gamma, m)?;
    let mf = m as f64;
    let s: f64 = (0..=gamma).map(|t| ym_cbar(gamma, 2 * t + m - gamma, m).powi(2)).sum();
    Ok(4.5 / ModelSpec::Ym.omega(m).powi(2) * (0.25 / (mf + 3.0) + 0.5 / (mf + 3.0)) * s)
}

/// 𝔓_{γm} as a rational function.
pub fn ym_frak_p_closed(gamma: usize, m: usize) -> f64 {
    let (g, mf) = (gamma as f64, m as f64);
    let poly = -3.0 * g.powi(4) - 24.0 * g.powi(3) - 40.0 * g * g + 32.0 * g + 7.0 * g * g * mf * mf + 28.0 * g * mf * mf
        + 35.0 * mf * mf
        + 28.0 * g * g * mf
        + 112.0 * g * mf
        + 140.0 * mf
        + 105.0;
    9.0 * (g + 2.0) * poly / (70.0 * PI * (mf + 1.0) * (mf + 2.0).powi(2) * (mf + 3.0).powi(2))
}

/// 𝔒_{γm} = 𝔦_{γm} - 𝔓_{γm} with the third-sum weight 9/4.
pub fn ym_tail_o(gamma: usize, m: usize) -> Result<f64> {
    Ok(ym_frak_i(gamma, m, A_THIRD_SUM_WEIGHT_PRINTED)? - ym_frak_p(gamma, m)?)
}

/// 𝔒_{γm} built with the weight that matches d𝔐₋; bounds [`ym_uv`] from below.
pub fn ym_tail_o_consistent(gamma: usize, m: usize) -> Result<f64> {
    Ok(ym_frak_i(gamma, m, A_THIRD_SUM_WEIGHT)? - ym_frak_p(gamma, m)?)
}

/// Closed rational functions for 𝔒_{γm}, γ ≤ 5.
pub fn ym_tail_o_closed(gamma: usize, m: usize) -> Result<f64> {
    let x = m as f64;
    let d = PI * (x + 1.0) * (x + 2.0).powi(2) * (x + 3.0).powi(2);
    let p = |c: [f64; 6], den: f64| (c[0] * x.powi(5) + c[1] * x.powi(4) + c[2] * x.powi(3) + c[3] * x * x + c[4] * x + c[5]) / (den * d);
    Ok(match gamma {
        0 => (5.0 * x.powi(4) + 40.0 * x.powi(3) + 109.0 * x * x + 8.0 * x - 42.0) / (12.0 * PI * (x + 1.0) * (x + 2.0).powi(2) * (x + 3.0)),
        1 => x * (x.powi(4) + 11.0 * x.powi(3) + 44.0 * x * x - 32.0 * x - 348.0) / (4.0 * d),
        2 => p([109.0, 1199.0, 4523.0, -30347.0, -132936.0, 107244.0], 600.0),
        3 => p([43.0, 473.0, 1646.0, -33554.0, -129372.0, 238248.0], 300.0),
        4 => p([83.0, 913.0, 2851.0, -139159.0, -515982.0, 1611198.0], 700.0),
        5 => p([17.0, 187.0, 505.0, -53329.0, -194760.0, 905292.0], 168.0),
        _ => return Err(Error::Precondition(format!("no closed tail bound for gamma = {gamma}"))),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailBound {
    AnalyticCw,
    SCh,
    OYm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NondegeneracyReport {
    pub model: String,
    pub gamma: usize,
    pub mu1: u32,
    pub mu2: u32,
    pub m_scan: usize,
    /// the m = γ scalar of the differential (CW/CH: -2ω_γ²; YM: 𝔲_γγ + 𝔳_γγ)
    pub gamma_entry: f64,
    /// minimum diagonal entry over 2γ+1 ≤ m ≤ m_scan (YM: 𝔲_{γm}) and where it occurs
    pub diagonal_min: f64,
    pub diagonal_min_at: usize,
    pub determinants: Vec<(usize, f64)>,
    pub tail_bound_name: TailBound,
    /// tail bound value at the start of its validity range
    pub tail_bound: f64,
    /// first m from which the tail bound alone certifies the diagonal
    pub tail_from: usize,
    /// scanned m where diag/ω_m² fell below the tail bound by more than 1e-12
    pub tail_violations: Vec<usize>,
    /// direct diagonal checks below tail_from
    pub direct_checks: Vec<(usize, f64)>,
    pub verdict: bool,
}

/// Scans diagonals up to `m_scan`, evaluates every determinant and the
/// tail bound, and combines them into a verdict.
pub fn certify(model: ModelSpec, gamma: usize, m_scan: usize, unchecked: bool) -> Result<NondegeneracyReport> {
    if !unchecked {
        check_validated_range(model, gamma)?;
    }
    if m_scan < 2 * gamma + 1 {
        return Err(Error::Precondition(format!("m_scan = {m_scan} < 2 gamma + 1")));
    }
    let (mu1, mu2) = match model {
        ModelSpec::Ch { mu1, mu2 } => (mu1, mu2),
        _ => (0, 0),
    };
    let w2 = |n: usize| model.omega(n).powi(2);
    let mut diag = Vec::new();
    let mut determinants = Vec::new();
    let mut direct_checks = Vec::new();
    let gamma_entry;
    let tail_bound_name;
    let bound_at: Box<dyn Fn(usize) -> Result<f64>>;
    let mut tail_from = 2 * gamma + 1;
    match model {
        ModelSpec::Cw => {
            gamma_entry = -2.0 * w2(gamma);
            for m in 2 * gamma + 1..=m_scan {
                diag.push((m, cw_diag(gamma, m)?));
            }
            for n in 0..gamma {
                determinants.push((n, cw_det(gamma, n)?));
            }
            tail_bound_name = TailBound::AnalyticCw;
            // ω_γ(1 - 2ω_γ²/ω_m²) ≥ ω_γ/2 since ω_{2γ+1} = 2ω_γ
            let wg = model.omega(gamma);
            bound_at = Box::new(move |_| Ok(wg / 2.0));
        }
        ModelSpec::Ch { mu1, mu2 } => {
            if mu1 != mu2 {
                return Err(Error::Precondition("the CH tail bound is available for mu1 = mu2 only".into()));
            }
            gamma_entry = -2.0 * w2(gamma);
            for m in 2 * gamma + 1..=m_scan {
                diag.push((m, ch_diag(model, gamma, m)?));
            }
            for n in 0..gamma {
                determinants.push((n, ch_det(model, gamma, n)?));
            }
            tail_bound_name = TailBound::SCh;
            let s = ch_s(gamma, mu1)?;
            bound_at = Box::new(move |_| Ok(s));
        }
        ModelSpec::Ym => {
            let (u, v) = ym_uv(gamma, gamma)?;
            gamma_entry = u + v.unwrap();
            for m in 2 * gamma + 1..=m_scan {
                diag.push((m, ym_uv(gamma, m)?.0));
            }
            for n in 0..gamma {
                determinants.push((n, ym_det(gamma, n)?));
            }
            tail_bound_name = TailBound::OYm;
            // first m from which the bound stays positive through the scan
            let mut from = m_scan + 1;
            for m in (2 * gamma + 1..=m_scan).rev() {
                if ym_tail_o_consistent(gamma, m)? > 0.0 {
                    from = m;
                } else {
                    break;
                }
            }
            tail_from = from.min(m_scan);
            bound_at = Box::new(move |m| ym_tail_o_consistent(gamma, m));
        }
    }
    for &(m, d) in &diag {
        if m < tail_from {
            direct_checks.push((m, d));
        }
    }
    let mut tail_violations = Vec::new();
    for &(m, d) in &diag {
        if d / w2(m) < bound_at(m)? - 1e-12 {
            tail_violations.push(m);
        }
    }
    let tail_bound = bound_at(tail_from)?;
    // the YM bound is a rational function with a positive limit; sample far beyond the scan
    let tail_positive = match model {
        ModelSpec::Ym => {
            let mut ok = tail_bound > 0.0;
            let mut m = m_scan;
            while ok && m < 1_000_000 {
                ok = ym_tail_o_consistent(gamma, m)? > 0.0;
                m *= 2;
            }
            ok
        }
        _ => tail_bound > 0.0,
    };
    let (diagonal_min_at, diagonal_min) = diag.iter().copied().fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let verdict = gamma_entry != 0.0
        && diag.iter().all(|&(_, d)| d != 0.0 && d.is_finite())
        && direct_checks.iter().all(|&(_, d)| d > 0.0)
        && determinants.iter().all(|&(_, d)| d != 0.0 && d.is_finite())
        && tail_positive
        && tail_violations.is_empty();
    Ok(NondegeneracyReport {
        model: model.name().to_string(),
        gamma,
        mu1,
        mu2,
        m_scan,
        gamma_entry,
        diagonal_min,
        diagonal_min_at,
        determinants,
        tail_bound_name,
        tail_bound,
        tail_from,
        tail_violations,
        direct_checks,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{ch_coeff_ggmm, rel_err};
    use crate::resonant::ym_q;

    #[test]
    fn cw_examples() {
        assert_eq!(cw_diag(1, 3).unwrap(), 16.0);
        for g in 0..10 {
            let w = (g + 1) as f64;
            assert_eq!(cw_diag(g, 2 * g + 1).unwrap(), 2.0 * w * w * w);
        }
        assert_eq!(cw_det(1, 0).unwrap(), -28.0);
        assert!(cw_det(2, 2).is_err());
        assert!(cw_diag(2, 4).is_err());
        for g in 1..=20 {
            assert!(cw_det(g, g - 1).unwrap() != 0.0);
        }
    }

    #[test]
    fn cw_closed_equals_assembled() {
        for g in 0..=12 {
            for n in 0..g {
                assert_eq!(cw_det(g, n).unwrap(), cw_det_assembled(g, n).unwrap());
            }
            for m in 2 * g + 1..60 {
                assert_eq!(cw_diag(g, m).unwrap(), cw_entry(g, m) as f64);
            }
        }
    }

    #[test]
    fn ch_s_examples() {
        for mu in 0..=5 {
            let s = ch_s(0, mu).unwrap();
            assert!(s > 0.0);
            assert!(rel_err(ch_s0_closed(mu), s) < 1e-13);
        }
        assert!((ch_s(0, 0).unwrap() - 7.0 / 9.0).abs() < 1e-14);
        let one_term = {
            let p = |m: usize| ch_m_coeff(m, 0, 0).unwrap() / ModelSpec::ch(0).omega(m).powi(2);
            0.5 * ch_m_coeff(0, 0, 0).unwrap() * (p(0) - 2.0 * p(1)) * ch_xi(0, 0)
        };
        assert!((ch_s(0, 0).unwrap() - one_term).abs() < 1e-15);
        for g in 0..=5 {
            for mu in 0..=5 {
                for lam in 0..=g {
                    for m in g..60 {
                        let p = |m: usize| ch_m_coeff(m, mu, lam).unwrap() / ModelSpec::ch(mu).omega(m).powi(2);
                        assert!(p(m + 1) < p(m));
                    }
                }
            }
        }
    }

    #[test]
    fn ch_d10() {
        for mu in 0..=5 {
            let d = ch_det(ModelSpec::ch(mu), 1, 0).unwrap();
            assert!(d < 0.0);
            assert!(rel_err(ch_d10_closed(mu), d) < 1e-10, "mu={mu}");
        }
        assert!((ch_d10_closed(0) + 335.571).abs() < 1e-3);
    }

    #[test]
    fn ch_mu0_reduces_to_cw_structure() {
        // same 2×2 structure as CW with ω_n = 2n+1, entries from the closed 𝖢 family
        for g in 1..=4 {
            for n in 0..g {
                let k = 2 * g - n;
                let m = ModelSpec::ch(0);
                let w2 = |j: usize| m.omega(j).powi(2);
                let c = ch_coeff_ggmm(g, g, 0).unwrap();
                let e_n = w2(n) * c - 2.0 * w2(g) * ch_coeff_ggmm(n, g, 0).unwrap();
                let e_k = w2(k) * c - 2.0 * w2(g) * ch_coeff_ggmm(g, k, 0).unwrap();
                let off = w2(g) * oracle_coeff(m, &[g, k, g, n]).unwrap();
                let d = ch_det(m, g, n).unwrap();
                assert!(rel_err(e_n * e_k - off * off, d) < 1e-11);
                assert_eq!(d.signum(), cw_det(g, n).unwrap().signum());
            }
        }
    }

    #[test]
    fn ch_tail_soundness() {
        for g in 0..=5 {
            for mu in 0..=5 {
                let s = ch_s(g, mu).unwrap();
                assert!(s > 0.0);
                let model = ModelSpec::ch(mu);
                for m in 2 * g + 1..80 {
                    assert!(ch_diag(model, g, m).unwrap() / model.omega(m).powi(2) >= s - 1e-12);
                }
            }
        }
    }

    #[test]
    fn ym_o_examples() {
        for m in 1..60 {
            let want = (5.0 * (m as f64).powi(4) + 40.0 * (m as f64).powi(3) + 109.0 * (m * m) as f64 + 8.0 * m as f64 - 42.0)
                / (12.0 * PI * (m + 1) as f64 * ((m + 2) * (m + 2)) as f64 * (m + 3) as f64);
            assert!((ym_tail_o(0, m).unwrap() - want).abs() < 1e-14);
        }
        assert!((ym_tail_o(0, 1).unwrap() - 5.0 / (36.0 * PI)).abs() < 1e-14);
        for m in 3..200 {
            assert!(ym_tail_o(1, m).unwrap() > 1e-3);
        }
        for m in 11..200 {
            assert!(ym_tail_o(4, m).unwrap() > 1e-3);
        }
        assert!(ym_tail_o(4, 9).unwrap() < 0.0);
        for g in 0..=5 {
            for m in 2 * g + 1..120 {
                assert!(rel_err(ym_tail_o_closed(g, m).unwrap(), ym_tail_o(g, m).unwrap()) < 1e-11);
                assert!(rel_err(ym_frak_p_closed(g, m), ym_frak_p(g, m).unwrap()) < 1e-12);
            }
        }
    }

    #[test]
    fn ym_tau_sum_identities() {
        let w2 = |n: usize| ModelSpec::Ym.omega(n).powi(2);
        for g in 0..=8 {
            let s: f64 = (0..=g).map(|t| ym_cbar(g, g, 2 * t).powi(2) / w2(2 * t)).sum();
            assert!(rel_err(ym_sum_gg_closed(g), s) < 1e-13);
            for m in 2 * g + 1..40 {
                let s: f64 = (0..=g).map(|t| ym_cbar(m, 2 * t, m) * ym_cbar(g, g, 2 * t) / w2(2 * t)).sum();
                assert!(rel_err(ym_sum_mg_closed(g, m), s) < 1e-13);
            }
        }
    }

    #[test]
    fn ym_tail_soundness() {
        for g in 0..=5 {
            for m in 2 * g + 1..=120 {
                let w2 = ModelSpec::Ym.omega(m).powi(2);
                let u = ym_uv(g, m).unwrap().0 / w2;
                assert!(u >= ym_tail_o_consistent(g, m).unwrap() - 1e-12);
                let up = ym_uv_weighted(g, m, A_THIRD_SUM_WEIGHT_PRINTED).unwrap().0 / w2;
                assert!(up >= ym_tail_o(g, m).unwrap() - 1e-12);
                assert!(u > 0.0);
            }
        }
    }

    #[test]
    fn ym_uv_examples() {
        assert!(ym_v(1, 3).is_err());
        for g in 0..=5 {
            let (u, v) = ym_uv(g, g).unwrap();
            let k2 = one_mode(ModelSpec::Ym, g, -1).unwrap().amplitude.powi(2);
            let want = -2.0 * ModelSpec::Ym.omega(g).powi(2) / k2;
            assert!((u + v.unwrap() - want).abs() < 1e-12);
            assert!(u + v.unwrap() != 0.0);
            assert!(8.0 * ym_q(g) > 3.0 * self_coupling(ModelSpec::Ym, g).unwrap());
        }
        let u01 = ym_uv(0, 1).unwrap().0 / 9.0;
        assert!(u01 >= 5.0 / (36.0 * PI) - 1e-12);
    }

    #[test]
    fn determinant_sign_stability() {
        for g in 1..=5 {
            let d: Vec<f64> = (0..g).map(|n| ym_det(g, n).unwrap()).collect();
            assert!(d.iter().all(|&x| x < 0.0), "ym g={g} {d:?}");
            for mu in 0..=5 {
                let d: Vec<f64> = (0..g).map(|n| ch_det(ModelSpec::ch(mu), g, n).unwrap()).collect();
                assert!(d.iter().all(|&x| x < 0.0) || d.iter().all(|&x| x > 0.0), "ch g={g} mu={mu} {d:?}");
            }
        }
    }

    #[test]
    fn certify_examples() {
        let r = certify(ModelSpec::Cw, 3, 200, false).unwrap();
        assert!(r.verdict);
        assert_eq!(r.diagonal_min, 128.0);
        assert!(r.determinants.iter().all(|&(_, d)| d < 0.0));
        let r = certify(ModelSpec::Ym, 0, 50, false).unwrap();
        assert!(r.verdict && r.determinants.is_empty());
        let r = certify(ModelSpec::ch(2), 1, 50, false).unwrap();
        assert!(r.verdict && r.tail_bound > 0.0 && r.determinants[0].1 < 0.0);
        let r = certify(ModelSpec::Ym, 5, 100, false).unwrap();
        assert!(r.verdict);
        assert!(r.direct_checks.iter().any(|&(m, d)| m == 11 && d > 0.0));
        assert!(certify(ModelSpec::Ym, 6, 100, false).is_err());
        assert!(certify(ModelSpec::Ym, 6, 100, true).is_ok());
        assert!(certify(ModelSpec::Ch { mu1: 1, mu2: 2 }, 1, 50, false).is_err());
    }
}
