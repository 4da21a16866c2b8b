//! Minimal-state formulation
//!
//! ```text
//! u'' + A[u + ∫₀^ℓ ξ(τ) dτ] = 0,   ∂_t ξ = ∂_τ ξ + μ(τ) ∂_t u,   ξ(ℓ) = 0
//! ```
//!
//! Each step shifts ξ one cell to the left (zero inflow at the ℓ end) and adds
//! μ(τ_{j+1})·(u_{n+1} − u_n) to cell j, where τ_{j+1} = (j+1)Δτ is the point the
//! characteristic through the cell midpoint crosses at mid-step. The per-step
//! diagnostics needed by the stability module are accumulated in the same pass.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::quad::Grid;
use crate::spectral::{norm_sq, ModalOperator, ModalVector, Space, Weight, WeightedField};
use crate::tolerances::{MINIMALITY_ZERO, ROUGH_JUMP};
use crate::volterra::{check_cfl, step_count, Trajectory};

/// (u, v, ξ), a point of V × H × L²_ν(Ω;V).
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedStateVector {
    pub u: ModalVector,
    pub v: ModalVector,
    pub xi: WeightedField,
}

/// Grid on (0, min(ℓ, L_trunc)) with cell width Δt.
pub fn state_grid(k: &Kernel, dt: f64) -> Result<Grid> {
    Grid::covering(k.ell_eff(), dt)
}

#[derive(Clone, Debug, Default)]
pub struct StateOptions {
    pub freeze_wave: bool,
    pub snapshot_steps: Vec<usize>,
    /// Cutoff for ρ in Φ₁; defaults to `Kernel::default_beta`.
    pub beta: Option<f64>,
}

/// Series sampled at every step, summed over modes.
#[derive(Clone, Debug, Default)]
pub struct StateDiagnostics {
    /// ½‖(u, v, ξ)‖²_𝔄
    pub energy: Vec<f64>,
    /// ‖ξ‖²_𝒱
    pub xi_norm_sq: Vec<f64>,
    /// −ν(0)‖ξ(0)‖²_V − ∫ν′‖ξ‖²_V
    pub rate: Vec<f64>,
    /// ‖u‖²_V
    pub u_norm_sq: Vec<f64>,
    /// ‖v‖²_H
    pub v_norm_sq: Vec<f64>,
    /// −∫ρ⟨v, ξ⟩
    pub phi1: Vec<f64>,
    /// ⟨v, u⟩
    pub phi2: Vec<f64>,
    /// ∫ξ per mode, `bracket[step][mode]`.
    pub bracket: Vec<ModalVector>,
    pub beta: f64,
    /// The initial ξ looks outside the generator's domain (see [`is_rough`]);
    /// the rate is then a quadrature value without the energy-equality guarantee.
    pub rough_initial_state: bool,
}

#[derive(Clone, Debug)]
pub struct StateRun {
    pub traj: Trajectory,
    pub final_state: ExtendedStateVector,
    pub diag: StateDiagnostics,
    pub snapshots: Vec<(usize, WeightedField)>,
}

/// Per-cell samples shared by all modes.
struct Weights {
    width: f64,
    nu: Vec<f64>,
    dnu: Vec<f64>,
    rho: Vec<f64>,
    nu0: f64,
}

impl Weights {
    fn new(k: &Kernel, g: &Grid, beta: f64) -> Self {
        let mids = g.mids();
        Self {
            width: g.width,
            nu: mids.iter().map(|&t| k.nu(t)).collect(),
            dnu: mids.iter().map(|&t| k.dnu(t)).collect(),
            rho: mids.iter().map(|&t| (t / beta).min(1.0)).collect(),
            nu0: nu_at_zero(k, g),
        }
    }

    /// (∫ν ξ², ∫ν′ ξ², ∫ρ ξ, ∫ξ) for one row.
    fn sums(&self, xi: &[f64]) -> [f64; 4] {
        let mut s = [0.0; 4];
        for (j, &x) in xi.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            s[0] += self.nu[j] * x * x;
            s[1] += self.dnu[j] * x * x;
            s[2] += self.rho[j] * x;
            s[3] += x;
        }
        s.map(|v| v * self.width)
    }
}

/// ν(0): ν at the first midpoint if μ(0⁺) is finite, 0 if μ blows up.
fn nu_at_zero(k: &Kernel, g: &Grid) -> f64 {
    match k.mu_at_zero() {
        Some(_) if g.cells > 0 => k.nu(g.mid(0)),
        _ => 0.0,
    }
}

fn check_state(z: &ExtendedStateVector, op: &ModalOperator) -> Result<()> {
    if z.xi.modes() != op.n() || z.u.len() != op.n() || z.v.len() != op.n() {
        return Err(Error::Grid("state does not match the operator".into()));
    }
    if z.xi.values.iter().any(|r| r.len() != z.xi.grid.cells) {
        return Err(Error::Grid("field rows do not match the grid".into()));
    }
    Ok(())
}

struct ModeRun {
    u: Vec<f64>,
    v: Vec<f64>,
    xi: Vec<f64>,
    /// [∫νξ², ∫ν′ξ², ∫ρξ, ∫ξ, ξ(first cell)] per step
    sums: Vec<[f64; 5]>,
    snaps: Vec<Vec<f64>>,
}

pub fn evolve_state(z: &ExtendedStateVector, op: &ModalOperator, k: &Kernel, t_end: f64, dt: f64, opts: &StateOptions) -> Result<StateRun> {
    let steps = step_count(t_end, dt)?;
    let g = z.xi.grid;
    if !g.aligned_with(dt) {
        return Err(Error::Grid(format!("state grid width {} differs from dt = {dt}", g.width)));
    }
    check_state(z, op)?;
    check_cfl(op, k.alpha, dt)?;
    k.require_normalized()?;
    let beta = opts.beta.unwrap_or_else(|| k.default_beta());
    let wts = Weights::new(k, &g, beta);
    let src: Vec<f64> = (0..g.cells).map(|j| k.mu(g.face(j + 1))).collect();
    let runs: Vec<Result<ModeRun>> = (0..op.n())
        .into_par_iter()
        .map(|m| march_mode(op.lambdas[m], &wts, &src, z.u[m], z.v[m], &z.xi.values[m], steps, dt, opts))
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;

    let mut d = StateDiagnostics { beta, rough_initial_state: is_rough(&z.xi), ..Default::default() };
    for n in 0..=steps {
        let (mut uu, mut vv, mut xx, mut rate, mut p1, mut p2) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for (r, &l) in runs.iter().zip(&op.lambdas) {
            let [w, q, rr, _, x0] = r.sums[n];
            uu += l * r.u[n] * r.u[n];
            vv += r.v[n] * r.v[n];
            xx += l * w;
            rate -= l * (wts.nu0 * x0 * x0 + q);
            p1 -= r.v[n] * rr;
            p2 += r.v[n] * r.u[n];
        }
        d.energy.push(0.5 * (uu + vv + xx));
        d.xi_norm_sq.push(xx);
        d.rate.push(rate);
        d.u_norm_sq.push(uu);
        d.v_norm_sq.push(vv);
        d.phi1.push(p1);
        d.phi2.push(p2);
        d.bracket.push(runs.iter().map(|r| r.sums[n][3]).collect());
    }
    let snapshots = opts
        .snapshot_steps
        .iter()
        .filter(|&&s| s <= steps)
        .enumerate()
        .map(|(i, &s)| (s, WeightedField { values: runs.iter().map(|r| r.snaps[i].clone()).collect(), grid: g, weight: Weight::Nu }))
        .collect();
    let final_state = ExtendedStateVector {
        u: runs.iter().map(|r| r.u[steps]).collect(),
        v: runs.iter().map(|r| r.v[steps]).collect(),
        xi: WeightedField { values: runs.iter().map(|r| r.xi.clone()).collect(), grid: g, weight: Weight::Nu },
    };
    let (us, vs): (Vec<_>, Vec<_>) = runs.into_iter().map(|r| (r.u, r.v)).unzip();
    Ok(StateRun { traj: Trajectory::from_modes(dt, us, vs), final_state, diag: d, snapshots })
}

#[allow(clippy::too_many_arguments)]
fn march_mode(
    lambda: f64,
    wts: &Weights,
    src: &[f64],
    u0: f64,
    v0: f64,
    xi0: &[f64],
    steps: usize,
    dt: f64,
    opts: &StateOptions,
) -> Result<ModeRun> {
    let mut xi = xi0.to_vec();
    let mut u = Vec::with_capacity(steps + 1);
    let mut v = Vec::with_capacity(steps + 1);
    let mut sums = Vec::with_capacity(steps + 1);
    let mut snaps = Vec::new();
    let record = |xi: &[f64], sums: &mut Vec<[f64; 5]>| {
        let [a, b, c, d] = wts.sums(xi);
        sums.push([a, b, c, d, xi.first().copied().unwrap_or(0.0)]);
        d
    };
    let snap = |n: usize, xi: &[f64], snaps: &mut Vec<Vec<f64>>| {
        for &s in &opts.snapshot_steps {
            if s == n {
                snaps.push(xi.to_vec());
            }
        }
    };
    u.push(u0);
    v.push(v0);
    let mut b = record(&xi, &mut sums);
    snap(0, &xi, &mut snaps);
    let mut a = -lambda * (u0 + b);
    for n in 0..steps {
        let (un, vh) = if opts.freeze_wave {
            (u0, v0)
        } else {
            let vh = v[n] + 0.5 * dt * a;
            (u[n] + dt * vh, vh)
        };
        let du = un - u[n];
        if let Some(last) = xi.len().checked_sub(1) {
            xi.rotate_left(1);
            xi[last] = 0.0;
            if du != 0.0 {
                for (x, s) in xi.iter_mut().zip(src) {
                    *x += s * du;
                }
            }
        }
        b = record(&xi, &mut sums);
        let vn = if opts.freeze_wave {
            vh
        } else {
            a = -lambda * (un + b);
            vh + 0.5 * dt * a
        };
        if !(un.is_finite() && vn.is_finite() && b.is_finite()) {
            return Err(Error::NonFinite { step: n + 1, t: (n + 1) as f64 * dt });
        }
        u.push(un);
        v.push(vn);
        snap(n + 1, &xi, &mut snaps);
    }
    Ok(ModeRun { u, v, xi, sums, snaps })
}

/// −ν(0)‖ξ(0)‖²_V − ∫ν′‖ξ‖²_V by midpoint quadrature; ξ(0) is the first cell.
///
/// This is d/dt ‖S(t)z‖²_𝔄, i.e. twice dE/dt.
pub fn energy_rate(z: &ExtendedStateVector, op: &ModalOperator, k: &Kernel) -> Result<f64> {
    check_state(z, op)?;
    let g = z.xi.grid;
    let wts = Weights::new(k, &g, k.default_beta());
    Ok(z.xi
        .values
        .iter()
        .zip(&op.lambdas)
        .map(|(r, l)| {
            let x0 = r.first().copied().unwrap_or(0.0);
            -l * (wts.nu0 * x0 * x0 + wts.sums(r)[1])
        })
        .sum())
}

/// Whether some mode of ξ jumps between adjacent cells, or from the last cell
/// to ξ(ℓ) = 0, by more than ROUGH_JUMP·√Δτ·max|ξ|. Smooth fields jump by O(Δτ).
pub fn is_rough(xi: &WeightedField) -> bool {
    let bound = ROUGH_JUMP * xi.grid.width.sqrt();
    xi.values.iter().any(|r| {
        let top = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        top > 0.0 && r.iter().chain([&0.0]).zip(r.iter().skip(1).chain([&0.0])).any(|(a, b)| (b - a).abs() > bound * top)
    })
}

/// Right-tail sums Σ_{i ≥ j} Δτ·ξ(mid_i), per mode and start cell.
pub fn tail_sums(xi: &WeightedField) -> Vec<Vec<f64>> {
    xi.values
        .iter()
        .map(|r| {
            let mut t = vec![0.0; r.len()];
            let mut acc = 0.0;
            for j in (0..r.len()).rev() {
                acc += xi.grid.width * r[j];
                t[j] = acc;
            }
            t
        })
        .collect()
}

/// Whether "all tails vanish" coincides with "ξ₀ is zero".
pub fn minimality_check(xi: &WeightedField, op: &ModalOperator) -> bool {
    let tails_vanish = tail_sums(xi).iter().zip(&op.lambdas).all(|(t, l)| t.iter().all(|x| l.sqrt() * x.abs() <= MINIMALITY_ZERO));
    tails_vanish == xi.is_zero()
}

/// ‖(u, v, ξ)‖²_𝔄 without the ℓ check on the grid.
pub fn state_norm_sq(z: &ExtendedStateVector, op: &ModalOperator, k: &Kernel) -> f64 {
    let wts = Weights::new(k, &z.xi.grid, k.default_beta());
    norm_sq(&z.u, op, Space::V)
        + norm_sq(&z.v, op, Space::H)
        + z.xi.values.iter().zip(&op.lambdas).map(|(r, l)| l * wts.sums(r)[0]).sum::<f64>()
}
