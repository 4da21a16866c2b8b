//! Maps between histories, states and state functions.
//!
//! ```text
//! Λφ(t) = ∫₀^ℓ μ(t + s) φ(s) ds
//! Γξ(t) = −∫_t^ℓ ξ(τ) dτ
//! Πη(τ) = −∫₀^ℓ μ′(τ + s) η(s) ds
//! ξ₀    = μ u₀ + DF₀
//! ```
//!
//! Π is evaluated by product integration against the piecewise constant
//! history: each cell contributes η_i [μ(τ + iΔ) − μ(τ + (i+1)Δ)], so that
//! constants map to μu up to the truncation tail and ‖Πη‖ ≤ ‖η‖ holds
//! exactly for the discrete norms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::quad::{GaussLegendre, Grid};
use crate::spectral::{weight_samples, weighted_norm, ModalOperator, ModalVector, Weight, WeightedField};
use crate::tolerances::{LIMIT_CAUCHY_REL, OVERFLOW_GUARD, UNBOUNDED_GROWTH};

/// Behaviour of a state function as t → 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateClass {
    /// A limit at 0 exists.
    S0,
    BoundedNoLimit,
    Unbounded,
}

/// Samples F(t_j) per mode: `values[k][j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateFunction {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub class_tag: Option<StateClass>,
    pub notes: Vec<String>,
}

impl StateFunction {
    pub fn new(times: Vec<f64>, values: Vec<Vec<f64>>) -> Self {
        Self { times, values, class_tag: None, notes: Vec::new() }
    }

    pub fn modes(&self) -> usize {
        self.values.len()
    }

    pub fn at(&self, j: usize) -> ModalVector {
        self.values.iter().map(|r| r[j]).collect()
    }

    /// Largest per-sample gap to another function on the same times.
    pub fn max_gap(&self, other: &StateFunction) -> f64 {
        self.values.iter().zip(&other.values).flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs())).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrability {
    /// φ ∈ L¹_μ.
    L1Mu,
    /// Only Λφ is known to exist.
    General,
}

/// Past history φ sampled at cell midpoints of `grid`.
#[derive(Clone, Debug, PartialEq)]
pub struct PastHistory {
    pub values: Vec<Vec<f64>>,
    pub grid: Grid,
    pub integrability: Integrability,
}

impl PastHistory {
    pub fn from_profile<F: Fn(f64) -> f64>(w: &[f64], grid: Grid, g: F) -> Self {
        let f = WeightedField::from_profile(w, grid, Weight::Mu, g);
        Self { values: f.values, grid, integrability: Integrability::L1Mu }
    }
}

/// A state ξ together with the state function F = Γξ it certifies.
#[derive(Clone, Debug)]
pub struct ProperState {
    pub xi: WeightedField,
    pub f: StateFunction,
}

fn aligned_index(t: f64, width: f64) -> Option<usize> {
    let r = t / width;
    let i = r.round();
    ((r - i).abs() < 1e-9 && i >= 0.0).then_some(i as usize)
}

/// Λφ at the given times by midpoint quadrature in s.
///
/// The returned function carries a class tag from evaluating the same
/// quadrature on log-spaced times in [10⁻⁴Δs, 10Δs]. Below the sample
/// spacing the quadrature sees a regularized history, so the tag is evidence
/// at grid resolution only.
pub fn lambda_map(phi: &PastHistory, k: &Kernel, t_grid: &[f64]) -> StateFunction {
    let g = phi.grid;
    let aligned: Option<Vec<usize>> = t_grid.iter().map(|&t| aligned_index(t, g.width)).collect();
    let values: Vec<Vec<f64>> = match aligned {
        Some(idx) => {
            let top = idx.iter().copied().max().unwrap_or(0) + g.cells;
            let mu: Vec<f64> = (0..top).map(|p| g.width * k.mu(g.mid(p))).collect();
            phi.values
                .par_iter()
                .map(|row| idx.iter().map(|&j| row.iter().zip(&mu[j..j + g.cells]).map(|(p, m)| p * m).sum()).collect())
                .collect()
        }
        None => phi.values.par_iter().map(|row| t_grid.iter().map(|&t| lambda_at(row, &g, k, t)).collect()).collect(),
    };
    let mut f = StateFunction::new(t_grid.to_vec(), values);
    let t_lo = 1e-4 * g.width;
    let t_hi = (10.0 * g.width).min(0.5 * k.ell_eff());
    if t_hi > 10.0 * t_lo {
        let probe = |t: f64| phi.values.iter().map(|row| lambda_at(row, &g, k, t).powi(2)).sum::<f64>().sqrt();
        let (class, note) = classify_near_zero(probe, t_lo, t_hi);
        f.class_tag = Some(class);
        if let Some(n) = note {
            f.notes.push(n);
        }
    }
    f
}

fn lambda_at(row: &[f64], g: &Grid, k: &Kernel, t: f64) -> f64 {
    row.iter().enumerate().map(|(i, p)| p * k.mu(t + g.mid(i))).sum::<f64>() * g.width
}

/// Sorts a magnitude series sampled toward t → 0 into the three classes.
///
/// Samples `y(t)` at 12 log-spaced points per decade from `t_hi` down to
/// `t_lo`. A limit is declared when the spread over the last decade is below
/// `LIMIT_CAUCHY_REL` times the largest magnitude. Unbounded is declared when
/// values grow monotonically toward 0 and either the total growth exceeds
/// `UNBOUNDED_GROWTH` or the growth per decade does not shrink (last decade at
/// least half the first). Otherwise the function is bounded without limit.
pub fn classify_near_zero<F: Fn(f64) -> f64>(y: F, t_lo: f64, t_hi: f64) -> (StateClass, Option<String>) {
    let decades = (t_hi / t_lo).log10();
    let n = (12.0 * decades).ceil().max(12.0) as usize;
    let ts: Vec<f64> = (0..=n).map(|i| t_hi * (t_lo / t_hi).powf(i as f64 / n as f64)).collect();
    let ys: Vec<f64> = ts.iter().map(|&t| y(t)).collect();
    if ys.iter().any(|v| !v.is_finite() || v.abs() > OVERFLOW_GUARD) {
        return (StateClass::Unbounded, Some("quadrature exceeded the overflow guard".into()));
    }
    let scale = ys.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let last: Vec<f64> = ts.iter().zip(&ys).filter(|(t, _)| **t <= 10.0 * t_lo * (1.0 + 1e-12)).map(|(_, v)| *v).collect();
    let spread = last.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - last.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread < LIMIT_CAUCHY_REL * scale {
        return (StateClass::S0, None);
    }
    let monotone = ys.windows(2).all(|w| w[1] >= w[0]);
    if monotone {
        let per = n / decades.ceil().max(1.0) as usize;
        let first = ys[per.min(n)] - ys[0];
        let final_ = ys[n] - ys[n.saturating_sub(per)];
        let growth = ys[n] / ys[0].abs().max(f64::MIN_POSITIVE);
        if growth > UNBOUNDED_GROWTH || final_ >= 0.5 * first {
            return (StateClass::Unbounded, None);
        }
    }
    (StateClass::BoundedNoLimit, None)
}

/// Γξ(t) = −∫_t ξ on the field's grid, exact for piecewise constant ξ.
pub fn gamma_map(xi: &WeightedField, t_grid: &[f64]) -> StateFunction {
    let g = xi.grid;
    let values = xi
        .values
        .iter()
        .map(|row| {
            // tails[j] = ∫ from face j to the end
            let mut tails = vec![0.0; g.cells + 1];
            for j in (0..g.cells).rev() {
                tails[j] = tails[j + 1] + g.width * row[j];
            }
            t_grid
                .iter()
                .map(|&t| {
                    if t >= g.length() {
                        return 0.0;
                    }
                    let t = t.max(0.0);
                    let j = ((t / g.width).floor() as usize).min(g.cells - 1);
                    -(tails[j + 1] + (g.face(j + 1) - t) * row[j])
                })
                .collect()
        })
        .collect();
    StateFunction::new(t_grid.to_vec(), values)
}

/// ∫_{τ₀} ξ on the field's grid.
pub fn zeta_from_xi(xi: &WeightedField, tau0: f64) -> Result<ModalVector> {
    if !(tau0 >= 0.0 && tau0 < xi.grid.length()) {
        return Err(Error::Input(format!("tau0 = {tau0} outside [0, {})", xi.grid.length())));
    }
    Ok(gamma_map(xi, &[tau0]).values.iter().map(|r| -r[0]).collect())
}

/// Πη on the τ-grid with the same cell width, restricted to (0, min(ℓ, L_trunc)).
pub fn pi_map(eta: &WeightedField, k: &Kernel) -> Result<ProperState> {
    let g = eta.grid;
    let tau_cells = (((k.ell_eff() / g.width) + 1e-9).floor() as usize).max(1);
    let tau = Grid::new(g.width, tau_cells)?;
    let top = tau_cells + g.cells + 1;
    let m: Vec<f64> = (0..=top).map(|p| k.mu(g.mid(p))).collect();
    let d: Vec<f64> = (0..top).map(|p| m[p] - m[p + 1]).collect();
    let values: Vec<Vec<f64>> = eta
        .values
        .iter()
        .map(|row| (0..tau_cells).into_par_iter().map(|j| row.iter().zip(&d[j..j + g.cells]).map(|(e, w)| e * w).sum()).collect())
        .collect();
    let xi = WeightedField { values, grid: tau, weight: Weight::Nu };
    let faces: Vec<f64> = (0..=tau_cells).map(|j| tau.face(j)).collect();
    let f = gamma_map(&xi, &faces);
    Ok(ProperState { xi, f })
}

/// (‖Πη‖_𝒱, ‖η‖_𝓜) on the discrete grids.
pub fn pi_contraction(eta: &WeightedField, op: &ModalOperator, k: &Kernel) -> Result<(f64, f64)> {
    let p = pi_map(eta, k)?;
    let eta = WeightedField { weight: Weight::Mu, ..eta.clone() };
    Ok((weighted_norm(&p.xi, op, k)?, weighted_norm(&eta, op, k)?))
}

/// ξ₀ = μu₀ + DF₀ on `grid`, with DF₀ at each midpoint from the two
/// neighbouring face samples of F₀. F₀ must be sampled at the faces
/// t_j = jΔ for all j up to the grid length.
pub fn proper_initial_state(u0: &[f64], f0: &StateFunction, k: &Kernel, grid: Grid) -> Result<WeightedField> {
    if f0.modes() != u0.len() {
        return Err(Error::Input("F0 and u0 have different mode counts".into()));
    }
    if f0.times.len() < grid.cells + 1 {
        return Err(Error::MissingSamples(format!("F0 must cover {} faces", grid.cells + 1)));
    }
    for j in 1..=grid.cells {
        if (f0.times[j] - grid.face(j)).abs() > 1e-9 * grid.width.max(1.0) {
            return Err(Error::Grid(format!("F0 sample {j} at {} is not on a cell face", f0.times[j])));
        }
    }
    let mu = weight_samples(&grid, Weight::Mu, k);
    let values: Vec<Vec<f64>> = f0
        .values
        .iter()
        .zip(u0)
        .map(|(row, u)| (0..grid.cells).map(|j| mu[j] * u + (row[j + 1] - row[j]) / grid.width).collect())
        .collect();
    if values.iter().any(|r| r.iter().any(|x| !x.is_finite())) {
        return Err(Error::Input("non-finite derivative samples in F0".into()));
    }
    Ok(WeightedField { values, grid, weight: Weight::Nu })
}

/// ξ₀ = μu₀ + DF₀ with DF₀ given in closed form.
pub fn proper_initial_state_with<D: Fn(f64) -> ModalVector>(u0: &[f64], df0: D, k: &Kernel, grid: Grid) -> Result<WeightedField> {
    let mut values = vec![vec![0.0; grid.cells]; u0.len()];
    for j in 0..grid.cells {
        let t = grid.mid(j);
        let d = df0(t);
        for (m, row) in values.iter_mut().enumerate() {
            row[j] = k.mu(t) * u0[m] + d[m];
        }
    }
    if values.iter().any(|r| r.iter().any(|x| !x.is_finite())) {
        return Err(Error::Input("non-finite derivative samples in F0".into()));
    }
    Ok(WeightedField { values, grid, weight: Weight::Nu })
}

/// Share of ‖ξ‖²_𝒱 carried by the last tenth of the grid; values near 1
/// suggest the quadrature does not converge as the grid is refined.
pub fn tail_energy_share(xi: &WeightedField, op: &ModalOperator, k: &Kernel) -> f64 {
    let w = weight_samples(&xi.grid, Weight::Nu, k);
    let start = xi.grid.cells - xi.grid.cells / 10;
    let mut all = 0.0;
    let mut tail = 0.0;
    for (row, l) in xi.values.iter().zip(&op.lambdas) {
        for (j, (x, w)) in row.iter().zip(&w).enumerate() {
            let c = l * w * x * x;
            all += c;
            if j >= start {
                tail += c;
            }
        }
    }
    if all == 0.0 {
        0.0
    } else {
        tail / all
    }
}

/// Λφ(t) = ∫ μ(t + s) φ(s) ds by the midpoint rule on `grid` (scalar φ).
pub fn lambda_midpoint<P: Fn(f64) -> f64>(k: &Kernel, phi: P, grid: &Grid, t: f64) -> f64 {
    (0..grid.cells).map(|i| k.mu(t + grid.mid(i)) * phi(grid.mid(i))).sum::<f64>() * grid.width
}

/// −∫_t^ℓ (∫₀^{ℓ−τ} μ′(τ + s) φ(s) ds) dτ by nested Gauss–Legendre panels.
pub fn lambda_via_derivative<P: Fn(f64) -> f64>(k: &Kernel, phi: P, t: f64, panels: usize) -> f64 {
    let gl = GaussLegendre::new(16);
    let end = k.ell_eff();
    if t >= end {
        return 0.0;
    }
    let inner = |tau: f64| {
        let top = end - tau;
        let breaks: Vec<f64> = (0..=panels).map(|i| top * i as f64 / panels as f64).collect();
        gl.integrate_panels(|s| k.dmu(tau + s) * phi(s), &breaks)
    };
    let breaks: Vec<f64> = (0..=panels).map(|i| t + (end - t) * i as f64 / panels as f64).collect();
    -gl.integrate_panels(inner, &breaks)
}
