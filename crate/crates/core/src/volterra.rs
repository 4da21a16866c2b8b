//! Direct formulation
//!
//! ```text
//! u_k'' + λ_k [α u_k − ∫₀ᵗ μ(s) u_k(t − s) ds − F₀ₖ(t)] = 0
//! ```
//!
//! The memory integral on the step grid uses μ at cell midpoints and the
//! average of the two bounding samples of u:
//! `C_n = Σ_{i<n} Δt μ((i+½)Δt) (u_{n−i} + u_{n−i−1})/2`. Time stepping is
//! Störmer–Verlet with the bracket evaluated at the current step.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::maps::StateFunction;
use crate::spectral::{norm, ModalOperator, ModalVector, Space};

/// (u₀, v₀, F₀) with F₀ sampled on the step grid.
#[derive(Clone, Debug)]
pub struct InitialState {
    pub u0: ModalVector,
    pub v0: ModalVector,
    pub f0: StateFunction,
}

/// Samples u(t_j), v(t_j), t_j = jΔt.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub u: Vec<ModalVector>,
    pub v: Vec<ModalVector>,
}

impl Trajectory {
    /// Assembles a trajectory from per-mode series.
    pub fn from_modes(dt: f64, u_modes: Vec<Vec<f64>>, v_modes: Vec<Vec<f64>>) -> Self {
        let steps = u_modes.first().map_or(0, |r| r.len());
        let times = (0..steps).map(|j| j as f64 * dt).collect();
        let u = (0..steps).map(|j| u_modes.iter().map(|r| r[j]).collect()).collect();
        let v = (0..steps).map(|j| v_modes.iter().map(|r| r[j]).collect()).collect();
        Self { times, u, v }
    }

    pub fn steps(&self) -> usize {
        self.times.len()
    }

    pub fn modes(&self) -> usize {
        self.u.first().map_or(0, |u| u.len())
    }

    pub fn u_mode(&self, k: usize) -> Vec<f64> {
        self.u.iter().map(|u| u[k]).collect()
    }

    /// max |u − u_ref| / max |u_ref| over all steps and modes.
    pub fn relative_linf_gap(&self, reference: &Trajectory) -> f64 {
        relative_linf_gap(&self.u, &reference.u)
    }

    /// (‖u‖_H, ‖u‖_V, ‖v‖_H) per step.
    pub fn norms(&self, op: &ModalOperator) -> Vec<[f64; 3]> {
        self.u.iter().zip(&self.v).map(|(u, v)| [norm(u, op, Space::H), norm(u, op, Space::V), norm(v, op, Space::H)]).collect()
    }

    /// Drops every sample whose index is not a multiple of `stride`.
    pub fn subsample(&self, stride: usize) -> Self {
        let pick = |xs: &Vec<ModalVector>| xs.iter().step_by(stride).cloned().collect();
        Self { times: self.times.iter().step_by(stride).copied().collect(), u: pick(&self.u), v: pick(&self.v) }
    }
}

pub fn relative_linf_gap(a: &[ModalVector], reference: &[ModalVector]) -> f64 {
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for (x, y) in a.iter().zip(reference) {
        for (p, q) in x.iter().zip(y) {
            num = num.max((p - q).abs());
            den = den.max(q.abs());
        }
    }
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Rejects steps with Δt²·λ_N·α ≥ 4.
pub fn check_cfl(op: &ModalOperator, alpha: f64, dt: f64) -> Result<()> {
    let c = dt * dt * op.lambda_max() * alpha;
    if c >= 4.0 {
        return Err(Error::Cfl(c));
    }
    Ok(())
}

/// Number of steps J with T = JΔt.
pub fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::Input(format!("need dt > 0 and T >= 0, got dt = {dt}, T = {t_end}")));
    }
    let j = (t_end / dt).round();
    if (j * dt - t_end).abs() > 1e-9 * t_end.max(dt) {
        return Err(Error::Input(format!("dt = {dt} does not divide T = {t_end}")));
    }
    Ok(j as usize)
}

/// ∫μ over [iΔt, (i+1)Δt] = M(iΔt) − M((i+1)Δt) for i below min(len, cells in (0, min(ℓ, L_trunc))).
///
/// Exact cell masses keep Σw = M(0) and stay accurate when μ is singular at 0,
/// where Δt·μ((i+½)Δt) would be off by O(√Δt) in the first cell.
pub fn convolution_weights(k: &Kernel, dt: f64, len: usize) -> Vec<f64> {
    let cells = ((k.ell_eff() / dt) + 1e-9).floor() as usize;
    (0..len.min(cells.max(1))).map(|i| k.tail(i as f64 * dt) - k.tail((i + 1) as f64 * dt)).collect()
}

/// C_n = Σ_{i<n} w_i (u_{n−i} + u_{n−i−1})/2.
pub fn memory_integral(weights: &[f64], u: &[f64], n: usize) -> f64 {
    let m = n.min(weights.len());
    let mut acc = 0.0;
    for i in 0..m {
        acc += weights[i] * (u[n - i] + u[n - i - 1]);
    }
    0.5 * acc
}

fn check_samples(f0: &StateFunction, modes: usize, steps: usize, dt: f64) -> Result<()> {
    if f0.modes() != modes {
        return Err(Error::MissingSamples(format!("F0 has {} modes, expected {modes}", f0.modes())));
    }
    if f0.times.len() < steps + 1 {
        return Err(Error::MissingSamples(format!("F0 has {} samples, need {} on [0, T]", f0.times.len(), steps + 1)));
    }
    for (j, t) in f0.times.iter().take(steps + 1).enumerate() {
        let ok = (t - j as f64 * dt).abs() <= 1e-9 * dt.max(1.0) || (j == 0 && (t - 0.5 * dt).abs() <= 1e-9 * dt);
        if !ok {
            return Err(Error::MissingSamples(format!("F0 sample {j} at t = {t}, expected {}", j as f64 * dt)));
        }
    }
    Ok(())
}

/// Integrates the direct formulation on [0, T].
///
/// F₀ must be sampled at t_j = jΔt; the first sample may sit at Δt/2 when
/// F₀ has no finite value at 0.
pub fn solve_direct(state: &InitialState, op: &ModalOperator, k: &Kernel, t_end: f64, dt: f64) -> Result<Trajectory> {
    let steps = step_count(t_end, dt)?;
    let n = op.n();
    if state.u0.len() != n || state.v0.len() != n {
        return Err(Error::Input("initial vectors do not match the operator".into()));
    }
    check_cfl(op, k.alpha, dt)?;
    check_samples(&state.f0, n, steps, dt)?;
    let w = convolution_weights(k, dt, steps);
    let per_mode: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..n)
        .into_par_iter()
        .map(|m| march_mode(op.lambdas[m], k.alpha, &w, state.u0[m], state.v0[m], &state.f0.values[m], steps, dt))
        .collect();
    let mut us = Vec::with_capacity(n);
    let mut vs = Vec::with_capacity(n);
    for r in per_mode {
        let (u, v) = r?;
        us.push(u);
        vs.push(v);
    }
    Ok(Trajectory::from_modes(dt, us, vs))
}

#[allow(clippy::too_many_arguments)]
fn march_mode(lambda: f64, alpha: f64, w: &[f64], u0: f64, v0: f64, f: &[f64], steps: usize, dt: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut u = Vec::with_capacity(steps + 1);
    let mut v = Vec::with_capacity(steps + 1);
    u.push(u0);
    v.push(v0);
    let accel = |u: &[f64], n: usize| -lambda * (alpha * u[n] - memory_integral(w, u, n) - f[n]);
    let mut a = accel(&u, 0);
    for n in 0..steps {
        let vh = v[n] + 0.5 * dt * a;
        u.push(u[n] + dt * vh);
        a = accel(&u, n + 1);
        let vn = vh + 0.5 * dt * a;
        if !(vn.is_finite() && u[n + 1].is_finite()) {
            return Err(Error::NonFinite { step: n + 1, t: (n + 1) as f64 * dt });
        }
        v.push(vn);
    }
    Ok((u, v))
}

/// Forcing that restarts the direct solver at step `at` of `traj`:
/// F_T(t_m) = Σ_{p<at} w_{m+p}(u_{at−p} + u_{at−p−1})/2 + F₀(T + t_m),
/// for m = 0..=horizon.
pub fn restart_forcing(traj: &Trajectory, f0: &StateFunction, k: &Kernel, dt: f64, at: usize, horizon: usize) -> Result<StateFunction> {
    if at >= traj.steps() || f0.times.len() < at + horizon + 1 {
        return Err(Error::MissingSamples("restart needs the trajectory up to T and F0 up to T + horizon".into()));
    }
    let w = convolution_weights(k, dt, at + horizon + 1);
    let values = (0..traj.modes())
        .map(|mode| {
            let u = traj.u_mode(mode);
            (0..=horizon)
                .map(|m| {
                    let mut old = 0.0;
                    for p in 0..at {
                        if m + p >= w.len() {
                            break;
                        }
                        old += w[m + p] * 0.5 * (u[at - p] + u[at - p - 1]);
                    }
                    old + f0.values[mode][at + m]
                })
                .collect()
        })
        .collect();
    Ok(StateFunction::new((0..=horizon).map(|m| m as f64 * dt).collect(), values))
}
