//! Lyapunov functionals and decay-rate extraction
//!
//! With ρ(τ) = min(τ/β, 1):
//!
//! ```text
//! E  = ½‖(u, v, ξ)‖²_𝔄
//! Φ₁ = −∫ρ⟨v, ξ⟩,   Φ₂ = ⟨v, u⟩,   Φ = 3Φ₁/M(β) + Φ₂,   Ψ = E + εΦ
//! ```
//!
//! Constants, writing m₀ = M(0), m = M(β):
//!
//! ```text
//! c₀ = max(√m₀, 1)/√λ₁          |Φ₁| ≤ ‖v‖·√m₀‖ξ‖/√λ₁ and |Φ₂| ≤ ‖v‖‖u‖_V/√λ₁, each ≤ c₀E
//! c₁ = [m₀(1 + 3/m) + m₀/(2β²λ₁m)] / m
//! c₂ = 3c₁ + m₀ + ½
//! c₃ = c₀(3/m + 1)
//! ε  = min(δ/(2c₂), 1/(2c₃)),   ω = ε/3,   K = √3
//! ```
//!
//! c₀ and c₂ are assembled here; the others follow the displayed chain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::spectral::ModalOperator;
use crate::state::{state_norm_sq, ExtendedStateVector, StateDiagnostics};
use crate::tolerances::{C_FD, DECAY_FIT_FLOOR, FIT_SKIP_FRACTION};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityConstants {
    pub beta: f64,
    pub delta: f64,
    pub m0: f64,
    pub m_beta: f64,
    pub lambda1: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub epsilon: f64,
    pub omega_proof: f64,
    pub k_proof: f64,
}

pub fn stability_constants(k: &Kernel, op: &ModalOperator, beta: f64, delta: f64) -> Result<StabilityConstants> {
    if !(beta > 0.0 && beta < k.ell_eff()) {
        return Err(Error::Input(format!("beta = {beta} must lie in (0, {})", k.ell_eff())));
    }
    let m_beta = k.tail(beta);
    if !(m_beta > 0.0) {
        return Err(Error::Input(format!("M(beta) = {m_beta} is not positive")));
    }
    if !(delta > 0.0) {
        return Err(Error::Input(format!("delta = {delta} must be positive")));
    }
    let m0 = k.m0();
    let l1 = op.lambda_min();
    let c0 = m0.sqrt().max(1.0) / l1.sqrt();
    let c1 = (m0 * (1.0 + 3.0 / m_beta) + m0 / (2.0 * beta * beta * l1 * m_beta)) / m_beta;
    let c2 = 3.0 * c1 + m0 + 0.5;
    let c3 = c0 * (3.0 / m_beta + 1.0);
    let epsilon = (delta / (2.0 * c2)).min(1.0 / (2.0 * c3));
    Ok(StabilityConstants {
        beta,
        delta,
        m0,
        m_beta,
        lambda1: l1,
        c0,
        c1,
        c2,
        c3,
        epsilon,
        omega_proof: epsilon / 3.0,
        k_proof: 3f64.sqrt(),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Functionals {
    pub e: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub phi: f64,
    pub psi: f64,
}

pub fn functionals(z: &ExtendedStateVector, op: &ModalOperator, k: &Kernel, c: &StabilityConstants) -> Functionals {
    let g = z.xi.grid;
    let rho: Vec<f64> = g.mids().iter().map(|t| (t / c.beta).min(1.0)).collect();
    let phi1 =
        -z.v.iter().zip(&z.xi.values).map(|(v, row)| v * g.width * row.iter().zip(&rho).map(|(x, r)| r * x).sum::<f64>()).sum::<f64>();
    let phi2 = z.v.iter().zip(&z.u).map(|(v, u)| v * u).sum();
    let e = 0.5 * state_norm_sq(z, op, k);
    let phi = 3.0 / c.m_beta * phi1 + phi2;
    Functionals { e, phi1, phi2, phi, psi: e + c.epsilon * phi }
}

/// Margin series for one inequality; ≥ −tol means it holds at that step.
#[derive(Clone, Debug, Serialize)]
pub struct Margin {
    pub name: &'static str,
    pub tol: f64,
    pub values: Vec<f64>,
}

impl Margin {
    pub fn fraction_ok(&self) -> f64 {
        if self.values.is_empty() {
            return 1.0;
        }
        self.values.iter().filter(|m| **m >= -self.tol).count() as f64 / self.values.len() as f64
    }

    /// Most negative margin beyond the tolerance, 0 if none.
    pub fn worst_violation(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, m| a.min(m + self.tol))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MarginReport {
    pub dt: f64,
    /// Step index of `values[0]` in every margin.
    pub first_step: usize,
    pub margins: Vec<Margin>,
}

impl MarginReport {
    pub fn min_fraction_ok(&self) -> f64 {
        self.margins.iter().map(Margin::fraction_ok).fold(1.0, f64::min)
    }
}

fn centered(x: &[f64], dt: f64) -> Vec<f64> {
    x.windows(3).map(|w| (w[2] - w[0]) / (2.0 * dt)).collect()
}

/// C_fd·Δt·max|x''| with x'' from second differences.
fn fd_tolerance(x: &[f64], dt: f64) -> f64 {
    C_FD * dt * x.windows(3).map(|w| ((w[2] - 2.0 * w[1] + w[0]) / (dt * dt)).abs()).fold(0.0, f64::max)
}

/// Margins of the five inequalities at steps 1..N−1 of a state run.
pub fn verify_inequalities(d: &StateDiagnostics, dt: f64, c: &StabilityConstants) -> Result<MarginReport> {
    let n = d.energy.len();
    let complete = [&d.xi_norm_sq, &d.u_norm_sq, &d.v_norm_sq, &d.phi1, &d.phi2].iter().all(|s| s.len() == n);
    if n < 3 || !complete {
        return Err(Error::MissingSamples("need at least three complete diagnostic samples".into()));
    }
    if (d.beta - c.beta).abs() > 1e-12 * c.beta {
        return Err(Error::Input(format!("run used beta = {}, constants use {}", d.beta, c.beta)));
    }
    let phi: Vec<f64> = d.phi1.iter().zip(&d.phi2).map(|(a, b)| 3.0 / c.m_beta * a + b).collect();
    let de = centered(&d.energy, dt);
    let dp1 = centered(&d.phi1, dt);
    let dp2 = centered(&d.phi2, dt);
    let dp = centered(&phi, dt);
    let inner = 1..n - 1;
    let xi = &d.xi_norm_sq[inner.clone()];
    let uu = &d.u_norm_sq[inner.clone()];
    let vv = &d.v_norm_sq[inner.clone()];
    let e = &d.energy[inner.clone()];
    let ph = &phi[inner];
    let m = c.m_beta;
    let uno = (0..n - 2).map(|i| -0.5 * c.delta * xi[i] - de[i]).collect();
    let due = (0..n - 2).map(|i| m * (uu[i] / 12.0 - 0.5 * vv[i] + c.c1 * xi[i]) - dp1[i]).collect();
    let tre = (0..n - 2).map(|i| -0.75 * uu[i] + vv[i] + c.m0 * xi[i] - dp2[i]).collect();
    let quattro = (0..n - 2).map(|i| c.c2 * xi[i] - dp[i] - e[i]).collect();
    let ctrlphi = (0..n - 2).map(|i| c.c3 * e[i] - ph[i].abs()).collect();
    Ok(MarginReport {
        dt,
        first_step: 1,
        margins: vec![
            Margin { name: "uno", tol: fd_tolerance(&d.energy, dt), values: uno },
            Margin { name: "due", tol: fd_tolerance(&d.phi1, dt), values: due },
            Margin { name: "tre", tol: fd_tolerance(&d.phi2, dt), values: tre },
            Margin { name: "quattro", tol: fd_tolerance(&phi, dt), values: quattro },
            Margin { name: "ctrlphi", tol: 0.0, values: ctrlphi },
        ],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub omega_fit: f64,
    pub k_fit: f64,
    pub r_squared: f64,
    /// RMS of the log-energy residual over the fit window.
    pub residual: f64,
    pub decaying: bool,
}

/// Least-squares line through log E over the samples after the first 10%,
/// stopping at the first non-positive value. ω = −slope/2 and
/// K = max_t √(E(t)/E(0))·e^{ωt}.
pub fn fit_decay_rate(times: &[f64], energy: &[f64]) -> Result<DecayFit> {
    if times.len() != energy.len() {
        return Err(Error::Input("times and energy differ in length".into()));
    }
    if energy.first().is_none_or(|e| !(*e > 0.0)) {
        return Err(Error::Input("E(0) must be positive".into()));
    }
    let end = energy.iter().position(|e| !(*e > 0.0 && e.is_finite())).unwrap_or(energy.len());
    let start = (FIT_SKIP_FRACTION * end as f64).floor() as usize;
    if end - start < 3 {
        return Err(Error::Input(format!("only {} usable samples in the fit window", end - start)));
    }
    let t = &times[start..end];
    let y: Vec<f64> = energy[start..end].iter().map(|e| e.ln()).collect();
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|x| (x - tm).powi(2)).sum();
    let sty: f64 = t.iter().zip(&y).map(|(x, y)| (x - tm) * (y - ym)).sum();
    let syy: f64 = y.iter().map(|y| (y - ym).powi(2)).sum();
    let slope = sty / stt;
    let sse: f64 = t.iter().zip(&y).map(|(x, y)| (y - ym - slope * (x - tm)).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let omega = -0.5 * slope;
    let e0 = energy[0];
    let k_fit = times[..end].iter().zip(&energy[..end]).map(|(t, e)| (e / e0).sqrt() * (omega * (t - times[0])).exp()).fold(1.0, f64::max);
    let span = t[t.len() - 1] - t[0];
    Ok(DecayFit { omega_fit: omega, k_fit, r_squared, residual: (sse / n).sqrt(), decaying: omega * span > DECAY_FIT_FLOOR })
}

/// Decay summary as written to JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub omega_fit: f64,
    #[serde(rename = "K_fit")]
    pub k_fit: f64,
    pub omega_proof: f64,
    #[serde(rename = "K_proof")]
    pub k_proof: f64,
    pub residual: f64,
    pub r_squared: f64,
    pub decaying: bool,
    pub suf: bool,
    pub mu_cond: bool,
    pub margins_csv_path: Option<String>,
}

impl DecayReport {
    pub fn new(fit: &DecayFit, c: &StabilityConstants, suf: bool, mu_cond: bool, margins_csv_path: Option<String>) -> Self {
        Self {
            omega_fit: fit.omega_fit,
            k_fit: fit.k_fit,
            omega_proof: c.omega_proof,
            k_proof: c.k_proof,
            residual: fit.residual,
            r_squared: fit.r_squared,
            decaying: fit.decaying,
            suf,
            mu_cond,
            margins_csv_path,
        }
    }
}

/// ½E ≤ Ψ ≤ (3/2)E, which holds whenever ε ≤ 1/(2c₃) and |Φ| ≤ c₃E.
pub fn psi_sandwich(f: &Functionals) -> bool {
    0.5 * f.e <= f.psi * (1.0 + 1e-12) && f.psi <= 1.5 * f.e * (1.0 + 1e-12)
}
