//! Galerkin-truncated dynamics of the Fourier-space systems, the Diophantine
//! frequency test and the truncated P-equation contraction.

use std::f64::consts::PI;

use serde::Serialize;

use crate::fourier::Couplings;
use crate::models::ModelSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
}

impl SpectralState {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::Precondition(format!("u has {} modes, v has {}", u.len(), v.len())));
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite state entry".into()));
        }
        Ok(SpectralState { u, v, t: 0.0 })
    }

    pub fn at_rest(u: Vec<f64>) -> Result<Self> {
        let n = u.len();
        Self::new(u, vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    /// Euclidean distance in (u, v).
    pub fn distance(&self, other: &SpectralState) -> f64 {
        self.u
            .iter()
            .zip(&other.u)
            .chain(self.v.iter().zip(&other.v))
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// The truncated system ü^m + ω_m²u^m = f^m(u) on modes 0..n.
#[derive(Debug, Clone)]
pub struct Galerkin {
    pub model: ModelSpec,
    pub omega: Vec<f64>,
    pub nonlinear: bool,
    couplings: Couplings,
}

impl Galerkin {
    pub fn new(model: ModelSpec, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("at least one mode is required".into()));
        }
        Ok(Galerkin { model, omega: (0..n).map(|k| model.omega(k)).collect(), nonlinear: true, couplings: Couplings::new(model, n)? })
    }

    pub fn linear(model: ModelSpec, n: usize) -> Result<Self> {
        let mut g = Self::new(model, n)?;
        g.nonlinear = false;
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    pub fn force(&self, u: &[f64]) -> Vec<f64> {
        if self.nonlinear {
            self.couplings.force(u)
        } else {
            vec![0.0; self.dim()]
        }
    }

    /// a^m = -ω_m²u^m + f^m(u).
    pub fn rhs(&self, state: &SpectralState) -> Vec<f64> {
        let f = self.force(&state.u);
        (0..self.dim()).map(|m| -self.omega[m].powi(2) * state.u[m] + f[m]).collect()
    }

    pub fn energy(&self, state: &SpectralState) -> f64 {
        let quad: f64 = (0..self.dim()).map(|m| 0.5 * (state.v[m].powi(2) + (self.omega[m] * state.u[m]).powi(2))).sum();
        quad + if self.nonlinear { self.couplings.potential(&state.u) } else { 0.0 }
    }

    fn check(&self, s: &SpectralState) -> Result<()> {
        if s.dim() != self.dim() {
            Err(Error::Precondition(format!("state has {} modes, system has {}", s.dim(), self.dim())))
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// kick-drift-kick leapfrog on the full force
    StormerVerlet,
    /// Strang splitting: exact harmonic flow for half a step, nonlinear
    /// kick, exact harmonic flow for half a step
    RotatingVerlet,
    /// fourth-order triple-jump composition of `RotatingVerlet`
    TripleJump,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub final_state: SpectralState,
    pub energy_initial: f64,
    pub energy_final: f64,
    /// max_t |H(t) - H(0)| / |H(0)| over the step grid
    pub max_relative_drift: f64,
    /// (state, energy) every `sample_every` steps, including t = 0
    pub samples: Vec<(SpectralState, f64)>,
}

fn rotate(g: &Galerkin, s: &mut SpectralState, h: f64) {
    for m in 0..g.dim() {
        let w = g.omega[m];
        let (c, sn) = ((w * h).cos(), (w * h).sin());
        let (u, v) = (s.u[m], s.v[m]);
        s.u[m] = c * u + sn / w * v;
        s.v[m] = -w * sn * u + c * v;
    }
}

fn step(g: &Galerkin, s: &mut SpectralState, dt: f64, scheme: Scheme) {
    match scheme {
        Scheme::TripleJump => {
            let c = 2f64.powf(1.0 / 3.0);
            let w1 = 1.0 / (2.0 - c);
            let w0 = -c * w1;
            let t0 = s.t;
            for w in [w1, w0, w1] {
                step(g, s, w * dt, Scheme::RotatingVerlet);
            }
            s.t = t0 + dt;
            return;
        }
        Scheme::StormerVerlet => {
            let a = g.rhs(s);
            for m in 0..g.dim() {
                s.v[m] += 0.5 * dt * a[m];
                s.u[m] += dt * s.v[m];
            }
            let a = g.rhs(s);
            for m in 0..g.dim() {
                s.v[m] += 0.5 * dt * a[m];
            }
        }
        Scheme::RotatingVerlet => {
            rotate(g, s, 0.5 * dt);
            if g.nonlinear {
                let f = g.force(&s.u);
                for m in 0..g.dim() {
                    s.v[m] += dt * f[m];
                }
            }
            rotate(g, s, 0.5 * dt);
        }
    }
    s.t += dt;
}

/// Advances `steps` steps of size `dt` (negative dt integrates backwards).
pub fn integrate(
    g: &Galerkin,
    state0: &SpectralState,
    dt: f64,
    steps: usize,
    scheme: Scheme,
    sample_every: Option<usize>,
) -> Result<Trajectory> {
    g.check(state0)?;
    if dt == 0.0 || !dt.is_finite() {
        return Err(Error::Domain(format!("time step {dt} must be finite and nonzero")));
    }
    let e0 = g.energy(state0);
    let scale = if e0 != 0.0 { e0.abs() } else { 1.0 };
    let mut s = state0.clone();
    let mut drift: f64 = 0.0;
    let mut samples = Vec::new();
    if sample_every.is_some() {
        samples.push((s.clone(), e0));
    }
    for k in 1..=steps {
        step(g, &mut s, dt, scheme);
        let e = g.energy(&s);
        drift = drift.max((e - e0).abs() / scale);
        if let Some(every) = sample_every {
            if every > 0 && k % every == 0 {
                samples.push((s.clone(), e));
            }
        }
    }
    let e1 = g.energy(&s);
    Ok(Trajectory { final_state: s, energy_initial: e0, energy_final: e1, max_relative_drift: drift, samples })
}

/// Forward `steps` steps, then the same number backwards; distance to the start.
pub fn time_reversal_error(g: &Galerkin, state0: &SpectralState, dt: f64, steps: usize, scheme: Scheme) -> Result<f64> {
    let fwd = integrate(g, state0, dt, steps, scheme, None)?;
    let back = integrate(g, &fwd.final_state, -dt, steps, scheme, None)?;
    Ok(back.final_state.distance(state0))
}

#[derive(Debug, Clone, Serialize)]
pub struct ReturnMeasurement {
    pub eps: f64,
    /// ‖z(2π) - z(0)‖
    pub return_distance: f64,
    /// sup_t ‖u(t) - Φ^{ω_ε t}(u(0))‖ over one period, ω_ε² = 1 + 2σε²
    pub sup_distance_rescaled: f64,
    /// ‖z(2π/ω_ε) - z(0)‖
    pub return_distance_rescaled: f64,
}

/// Evolves the rest state ε·amplitude·e_mode and measures its return.
/// `sigma` is +1 for 𝓜 zeros (CW/CH) and -1 for 𝔐₋ zeros (YM).
pub fn measure_return(
    g: &Galerkin,
    mode: usize,
    amplitude: f64,
    eps: f64,
    sigma: f64,
    steps_per_period: usize,
) -> Result<ReturnMeasurement> {
    let n = g.dim();
    if mode >= n {
        return Err(Error::Index(format!("mode {mode} outside truncation {n}")));
    }
    let mut u0 = vec![0.0; n];
    u0[mode] = eps * amplitude;
    let z0 = SpectralState::at_rest(u0.clone())?;
    let w_eps = (1.0 + 2.0 * sigma * eps * eps).sqrt();
    let t_eps = 2.0 * PI / w_eps;
    let t_end = (2.0 * PI).max(t_eps);
    let dt = 2.0 * PI / steps_per_period as f64;
    let mut s = z0.clone();
    let mut sup: f64 = 0.0;
    let mut at_2pi = None;
    let mut at_teps = None;
    let mut k = 0usize;
    loop {
        let lin: f64 = (0..n)
            .map(|m| (s.u[m] - u0[m] * (g.omega[m] * w_eps * s.t).cos()).powi(2))
            .sum::<f64>()
            .sqrt();
        sup = sup.max(lin);
        if at_2pi.is_none() && k == steps_per_period {
            at_2pi = Some(s.distance(&z0));
        }
        if at_teps.is_none() && s.t + dt > t_eps {
            // final partial step onto t_eps
            let mut e = s.clone();
            step(g, &mut e, t_eps - s.t, Scheme::RotatingVerlet);
            at_teps = Some(e.distance(&z0));
        }
        if at_2pi.is_some() && at_teps.is_some() && s.t >= t_end - 1e-12 {
            break;
        }
        step(g, &mut s, dt, Scheme::RotatingVerlet);
        k += 1;
        if k > 2 * steps_per_period + 2 {
            break;
        }
    }
    Ok(ReturnMeasurement {
        eps,
        return_distance: at_2pi.unwrap_or(f64::NAN),
        sup_distance_rescaled: sup,
        return_distance_rescaled: at_teps.unwrap_or(f64::NAN),
    })
}

/// Least-squares slope of log y against log x.
pub fn fitted_exponent(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiophantineResult {
    pub member: bool,
    /// min over l of l·|ωl - ω_j| across the admitted eigenvalues
    pub margin: f64,
    pub worst_l: usize,
    pub worst_j: usize,
}

/// Strong Diophantine test |ωl - ω_j| ≥ α/l for 1 ≤ l ≤ l_max and ω_j ≠ l.
pub fn diophantine_member(omega: f64, alpha: f64, model: ModelSpec, l_max: usize) -> Result<DiophantineResult> {
    if !(alpha > 0.0 && alpha < 1.0 / 3.0) {
        return Err(Error::Domain(format!("alpha = {alpha} must lie in (0, 1/3)")));
    }
    if l_max == 0 || !omega.is_finite() || omega <= 0.0 {
        return Err(Error::Domain(format!("need l_max >= 1 and a positive finite omega, got {l_max}, {omega}")));
    }
    let a = model.omega_int(0);
    let gap = model.gap();
    let mut best = (f64::INFINITY, 0, 0);
    for l in 1..=l_max {
        let x = omega * l as f64;
        let j0 = ((x - a as f64) / gap as f64).floor() as i64;
        for j in j0 - 1..=j0 + 2 {
            if j < 0 {
                continue;
            }
            let wj = a + gap * j;
            if wj == l as i64 {
                continue;
            }
            let d = l as f64 * (x - wj as f64).abs();
            if d < best.0 {
                best = (d, l, j as usize);
            }
        }
    }
    Ok(DiophantineResult { member: best.0 >= alpha, margin: best.0, worst_l: best.1, worst_j: best.2 })
}

/// q(τ) = Σ_j Σ_{l ≤ L} q^{lj} cos(lτ) e_j.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeFourierField {
    pub n_modes: usize,
    pub l_max: usize,
    /// coeffs[l][j]
    pub coeffs: Vec<Vec<f64>>,
}

impl TimeFourierField {
    pub fn zeros(n_modes: usize, l_max: usize) -> Self {
        TimeFourierField { n_modes, l_max, coeffs: vec![vec![0.0; n_modes]; l_max + 1] }
    }

    /// a·cos(ω_j τ)·e_j, an element of ker L_1.
    pub fn kernel_mode(model: ModelSpec, n_modes: usize, l_max: usize, j: usize, a: f64) -> Result<Self> {
        let l = model.omega_int(j) as usize;
        if j >= n_modes || l > l_max {
            return Err(Error::Truncation(format!("mode {j} with frequency {l} does not fit N = {n_modes}, L = {l_max}")));
        }
        let mut f = Self::zeros(n_modes, l_max);
        f.coeffs[l][j] = a;
        Ok(f)
    }

    pub fn get(&self, l: usize, j: usize) -> f64 {
        self.coeffs[l][j]
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut r = self.clone();
        for (a, b) in r.coeffs.iter_mut().zip(&other.coeffs) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        r
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1.0))
    }

    pub fn scaled(&self, t: f64) -> Self {
        let mut r = self.clone();
        r.coeffs.iter_mut().flatten().for_each(|x| *x *= t);
        r
    }

    /// Σ_j max(j,1)^{2s} (2|q^{0j}|² + Σ_{l≥1} (1+l²)|q^{lj}|²), square-rooted.
    pub fn norm_h1s(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.n_modes {
            let wj = (j.max(1) as f64).powf(2.0 * s);
            let mut inner = 2.0 * self.coeffs[0][j].powi(2);
            for l in 1..=self.l_max {
                inner += (1.0 + (l * l) as f64) * self.coeffs[l][j].powi(2);
            }
            acc += wj * inner;
        }
        acc.sqrt()
    }

    pub fn sup_coeff(&self) -> f64 {
        self.coeffs.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()))
    }

    /// Values q(τ_k) on `samples` equispaced points of [0, 2π).
    pub fn synthesize(&self, samples: usize) -> Vec<Vec<f64>> {
        (0..samples)
            .map(|k| {
                let tau = 2.0 * PI * k as f64 / samples as f64;
                let c: Vec<f64> = (0..=self.l_max).map(|l| (l as f64 * tau).cos()).collect();
                (0..self.n_modes).map(|j| (0..=self.l_max).map(|l| self.coeffs[l][j] * c[l]).sum()).collect()
            })
            .collect()
    }

    /// Cosine analysis of sampled values, truncated at l_max.
    pub fn analyze(values: &[Vec<f64>], n_modes: usize, l_max: usize) -> Self {
        let ns = values.len();
        let mut f = Self::zeros(n_modes, l_max);
        for l in 0..=l_max {
            let c: Vec<f64> = (0..ns).map(|k| (2.0 * PI * (l * k) as f64 / ns as f64).cos()).collect();
            let scale = if l == 0 { 1.0 } else { 2.0 } / ns as f64;
            for j in 0..n_modes {
                f.coeffs[l][j] = scale * (0..ns).map(|k| values[k][j] * c[k]).sum::<f64>();
            }
        }
        f
    }
}

/// Default Sobolev index of the P-equation norm: 2 for CW/CH, 3 for YM.
pub fn default_sobolev_index(model: ModelSpec) -> f64 {
    if model == ModelSpec::Ym {
        3.0
    } else {
        2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForceSelect {
    Full,
    /// YM 𝔣⁽²⁾ only
    Quadratic,
}

/// The truncated operators of the P-equation at frequency ω.
#[derive(Debug, Clone)]
pub struct PEquation {
    pub model: ModelSpec,
    pub omega: f64,
    pub n_modes: usize,
    pub l_max: usize,
    couplings: Couplings,
}

#[derive(Debug, Clone, Serialize)]
pub struct PSolution {
    pub q: TimeFourierField,
    pub iterations: usize,
    pub increment: f64,
    /// sup-norm of L_ω q - P f(v+q) over the truncation
    pub residual: f64,
    pub norm_q: f64,
    pub norm_v: f64,
    pub smallest_divisor: f64,
}

impl PEquation {
    pub fn new(model: ModelSpec, omega: f64, n_modes: usize, l_max: usize) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) || n_modes == 0 || l_max == 0 {
            return Err(Error::Domain(format!("invalid P-equation setup omega = {omega}, N = {n_modes}, L = {l_max}")));
        }
        Ok(PEquation { model, omega, n_modes, l_max, couplings: Couplings::new(model, n_modes)? })
    }

    /// Kernel pairs of L_1 removed by P.
    pub fn is_kernel(&self, l: usize, j: usize) -> bool {
        self.model.omega_int(j) == l as i64
    }

    pub fn eigenvalue(&self, l: usize, j: usize) -> f64 {
        self.model.omega(j).powi(2) - (l as f64 * self.omega).powi(2)
    }

    /// (|λ|, j, l) with the smallest modulus over the range of P.
    pub fn smallest_divisor(&self) -> (f64, usize, usize) {
        let mut best = (f64::INFINITY, 0, 0);
        for l in 0..=self.l_max {
            for j in 0..self.n_modes {
                if !self.is_kernel(l, j) {
                    let d = self.eigenvalue(l, j).abs();
                    if d < best.0 {
                        best = (d, j, l);
                    }
                }
            }
        }
        best
    }

    pub fn samples(&self) -> usize {
        4 * (self.l_max + 1)
    }

    /// P f(q) by pseudo-spectral evaluation in time.
    pub fn projected_force(&self, q: &TimeFourierField, which: ForceSelect) -> TimeFourierField {
        let vals: Vec<Vec<f64>> = q
            .synthesize(self.samples())
            .iter()
            .map(|u| match which {
                ForceSelect::Full => self.couplings.force(u),
                ForceSelect::Quadratic => self.couplings.force_quadratic(u),
            })
            .collect();
        let mut f = TimeFourierField::analyze(&vals, self.n_modes, self.l_max);
        for l in 0..=self.l_max {
            for j in 0..self.n_modes {
                if self.is_kernel(l, j) {
                    f.coeffs[l][j] = 0.0;
                }
            }
        }
        f
    }

    /// L_ω^{-1} on the range of P.
    pub fn invert(&self, f: &TimeFourierField) -> TimeFourierField {
        let mut q = TimeFourierField::zeros(self.n_modes, self.l_max);
        for l in 0..=self.l_max {
            for j in 0..self.n_modes {
                if !self.is_kernel(l, j) {
                    q.coeffs[l][j] = f.coeffs[l][j] / self.eigenvalue(l, j);
                }
            }
        }
        q
    }

    pub fn apply_l(&self, q: &TimeFourierField) -> TimeFourierField {
        let mut r = q.clone();
        for l in 0..=self.l_max {
            for j in 0..self.n_modes {
                r.coeffs[l][j] *= self.eigenvalue(l, j);
            }
        }
        r
    }

    fn check_kernel(&self, v: &TimeFourierField) -> Result<()> {
        if v.n_modes != self.n_modes || v.l_max != self.l_max {
            return Err(Error::Precondition("v has a different truncation".into()));
        }
        for l in 0..=self.l_max {
            for j in 0..self.n_modes {
                if v.coeffs[l][j] != 0.0 && !self.is_kernel(l, j) {
                    return Err(Error::Precondition(format!("v has a component at (l={l}, j={j}) outside ker L_1")));
                }
            }
        }
        Ok(())
    }

    /// Fixed point of q ↦ L_ω^{-1} P f(v + q).
    pub fn solve(&self, v: &TimeFourierField, tol: f64, max_iter: usize) -> Result<PSolution> {
        self.check_kernel(v)?;
        let s = default_sobolev_index(self.model);
        let (div, dj, dl) = self.smallest_divisor();
        let mut q = TimeFourierField::zeros(self.n_modes, self.l_max);
        let mut prev_inc = f64::INFINITY;
        let mut growth = 0;
        let mut iterations = 0;
        let mut inc = 0.0;
        for it in 1..=max_iter {
            iterations = it;
            let next = self.invert(&self.projected_force(&v.add(&q), ForceSelect::Full));
            inc = next.sub(&q).sup_coeff();
            q = next;
            if !inc.is_finite() || q.sup_coeff() > 1e6 {
                return Err(Error::NonContraction { divisor: div, j: dj, l: dl });
            }
            if inc <= tol {
                break;
            }
            growth = if inc >= prev_inc { growth + 1 } else { 0 };
            if growth >= 5 {
                return Err(Error::NonContraction { divisor: div, j: dj, l: dl });
            }
            prev_inc = inc;
        }
        if inc > tol {
            return Err(Error::Convergence(format!("P-equation increment {inc:e} after {iterations} iterations")));
        }
        let residual = self.apply_l(&q).sub(&self.projected_force(&v.add(&q), ForceSelect::Full)).sup_coeff();
        Ok(PSolution { norm_q: q.norm_h1s(s), norm_v: v.norm_h1s(s), q, iterations, increment: inc, residual, smallest_divisor: div })
    }

    /// L_ω^{-1} P 𝔣⁽²⁾(v), the leading YM term.
    pub fn quadratic_leading_term(&self, v: &TimeFourierField) -> TimeFourierField {
        self.invert(&self.projected_force(v, ForceSelect::Quadratic))
    }
}

pub const DEFAULT_N: usize = 16;
pub const DEFAULT_L: usize = 64;

/// Convenience wrapper: v = vamp·cos(ω_vmode τ)e_vmode on the default truncation.
pub fn solve_p_equation(
    model: ModelSpec,
    v: &TimeFourierField,
    omega: f64,
    tol: f64,
    max_iter: usize,
) -> Result<PSolution> {
    PEquation::new(model, omega, v.n_modes, v.l_max)?.solve(v, tol, max_iter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(rng: &mut ChaCha8Rng, n: usize, size: f64) -> SpectralState {
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        SpectralState::new(u.iter().map(|x| x * size / nu).collect(), v.iter().map(|x| x * size / nu).collect()).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let g = Galerkin::new(ModelSpec::Cw, 4).unwrap();
        let z = SpectralState::at_rest(vec![0.0; 4]).unwrap();
        assert!(g.rhs(&z).iter().all(|&a| a == 0.0));
        let e = 0.1;
        let s = SpectralState::at_rest(vec![e, 0.0, 0.0, 0.0]).unwrap();
        assert!((g.rhs(&s)[0] - (-e - e * e * e)).abs() < 1e-15);
        assert!(SpectralState::new(vec![0.0], vec![]).is_err());
    }

    #[test]
    fn linear_flow_returns() {
        for model in [ModelSpec::Cw, ModelSpec::ch(1), ModelSpec::Ym] {
            let g = Galerkin::linear(model, 6).unwrap();
            for n in 0..6 {
                let t = 2.0 * PI / model.omega(n);
                let steps = 1 << 14;
                let mut u = vec![0.0; 6];
                u[n] = 0.3;
                let s0 = SpectralState::at_rest(u).unwrap();
                for scheme in [Scheme::StormerVerlet, Scheme::RotatingVerlet, Scheme::TripleJump] {
                    let tr = integrate(&g, &s0, t / steps as f64, steps, scheme, Some(1 << 12)).unwrap();
                    let d: f64 = tr.final_state.u.iter().zip(&s0.u).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                    assert!(d <= 1e-6, "{model:?} n={n} {scheme:?} {d}");
                    let (mid, _) = &tr.samples[2];
                    assert!((mid.u[n] - 0.3 * (model.omega(n) * mid.t).cos()).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn energy_and_reversal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for model in [ModelSpec::Cw, ModelSpec::ch(1), ModelSpec::Ym] {
            let g = Galerkin::new(model, 8).unwrap();
            let s0 = random_state(&mut rng, 8, 0.1);
            let tr = integrate(&g, &s0, 1e-3, 5000, Scheme::TripleJump, None).unwrap();
            assert!(tr.max_relative_drift < 1e-7, "{model:?} {}", tr.max_relative_drift);
            for scheme in [Scheme::StormerVerlet, Scheme::RotatingVerlet, Scheme::TripleJump] {
                assert!(time_reversal_error(&g, &s0, 1e-3, 2000, scheme).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn diophantine_examples() {
        for model in [ModelSpec::Cw, ModelSpec::ch(0), ModelSpec::ch(2), ModelSpec::Ym] {
            assert!(diophantine_member(1.0, 0.1, model, 1000).unwrap().member);
        }
        let r = diophantine_member(1.05, 0.1, ModelSpec::Cw, 100).unwrap();
        assert!(!r.member && r.worst_l == 20 && r.margin == 0.0);
        assert!(diophantine_member(1.05, 0.1, ModelSpec::Cw, 19).unwrap().member);
        assert!(diophantine_member(1.013, 0.1, ModelSpec::Cw, 64).unwrap().member);
        assert!(!diophantine_member(1.013, 0.1, ModelSpec::Cw, 100).unwrap().member);
        assert!(diophantine_member(1.0, 0.4, ModelSpec::Cw, 10).is_err());
        let t = std::time::Instant::now();
        diophantine_member(1.0 + (5f64.sqrt() - 1.0) / 2.0 * 1e-2, 0.1, ModelSpec::Cw, 10_000).unwrap();
        assert!(t.elapsed().as_secs_f64() < 0.05);
    }

    #[test]
    fn diophantine_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for model in [ModelSpec::Cw, ModelSpec::ch(1), ModelSpec::Ym] {
            for _ in 0..50 {
                let omega = rng.gen_range(0.9..1.1);
                let r = diophantine_member(omega, 0.1, model, 60).unwrap();
                let mut best = f64::INFINITY;
                for l in 1..=60usize {
                    for j in 0..200 {
                        let wj = model.omega_int(j);
                        if wj != l as i64 {
                            best = best.min(l as f64 * (omega * l as f64 - wj as f64).abs());
                        }
                    }
                }
                assert_eq!(r.margin, best);
            }
        }
    }

    #[test]
    fn fourier_field_roundtrip() {
        let mut f = TimeFourierField::zeros(3, 8);
        f.coeffs[0][1] = 0.5;
        f.coeffs[3][2] = -0.25;
        f.coeffs[8][0] = 1.0;
        let g = TimeFourierField::analyze(&f.synthesize(36), 3, 8);
        assert!(g.sub(&f).sup_coeff() < 1e-14);
    }

    #[test]
    fn p_equation_zero_and_residual() {
        let pe = PEquation::new(ModelSpec::Cw, 1.013, 8, 24).unwrap();
        let v0 = TimeFourierField::zeros(8, 24);
        let s = pe.solve(&v0, 1e-14, 50).unwrap();
        assert_eq!(s.q.sup_coeff(), 0.0);
        let v = TimeFourierField::kernel_mode(ModelSpec::Cw, 8, 24, 0, 0.01).unwrap();
        let s = pe.solve(&v, 1e-14, 100).unwrap();
        assert!(s.residual <= 2e-14);
        for l in 0..=24 {
            for j in 0..8 {
                if pe.is_kernel(l, j) {
                    assert_eq!(s.q.get(l, j), 0.0);
                }
            }
        }
        let bad = TimeFourierField { coeffs: { let mut c = vec![vec![0.0; 8]; 25]; c[2][0] = 1.0; c }, ..v0 };
        assert!(pe.solve(&bad, 1e-12, 10).is_err());
    }

    #[test]
    fn p_equation_non_contraction() {
        let pe = PEquation::new(ModelSpec::Cw, 1.013, 8, 24).unwrap();
        let v = TimeFourierField::kernel_mode(ModelSpec::Cw, 8, 24, 0, 20.0).unwrap();
        assert!(matches!(pe.solve(&v, 1e-12, 200), Err(Error::NonContraction { .. }) | Err(Error::Convergence(_))));
    }
}
