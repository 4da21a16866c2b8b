//! History formulation
//!
//! ```text
//! u'' + A[u + ∫₀^ℓ μ(s) η(s) ds] = 0,   ∂_t η = −∂_s η + ∂_t u,   η(0) = 0
//! ```
//!
//! On a grid with Δs = Δt each step shifts η one cell to the right, drops the
//! last cell and adds the increment u_{n+1} − u_n = Δt·v_{n+½}. The cell that
//! enters at s = 0 receives half the increment: its midpoint Δs/2 has only been
//! inside the domain for half a step, and this keeps η at the midpoints second
//! order accurate. The pair (u, v) advances by Störmer–Verlet.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::maps::PastHistory;
use crate::quad::Grid;
use crate::spectral::{ModalOperator, ModalVector, Weight, WeightedField};
use crate::volterra::{check_cfl, step_count, Trajectory};

/// (u, v, η), a point of V × H × L²_μ(Ω;V).
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedHistoryVector {
    pub u: ModalVector,
    pub v: ModalVector,
    pub eta: WeightedField,
}

/// Grid on (0, min(ℓ, L_trunc + T)) with cell width Δt.
pub fn history_grid(k: &Kernel, t_end: f64, dt: f64) -> Result<Grid> {
    Grid::covering(k.ell.min(k.l_trunc + t_end), dt)
}

/// η₀ = u₀ − φ₀ cellwise.
pub fn init_history(u0: &[f64], phi0: &PastHistory) -> Result<WeightedField> {
    if phi0.values.len() != u0.len() {
        return Err(Error::Grid(format!("history has {} modes, u0 has {}", phi0.values.len(), u0.len())));
    }
    if phi0.values.iter().any(|r| r.len() != phi0.grid.cells) {
        return Err(Error::Grid("history rows do not match the grid".into()));
    }
    let values = phi0.values.iter().zip(u0).map(|(r, u)| r.iter().map(|p| u - p).collect()).collect();
    Ok(WeightedField { values, grid: phi0.grid, weight: Weight::Mu })
}

#[derive(Clone, Debug, Default)]
pub struct HistoryOptions {
    /// Keeps u ≡ u₀ and v ≡ v₀, leaving pure transport.
    pub freeze_wave: bool,
    /// Steps at which η is copied out.
    pub snapshot_steps: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct HistoryRun {
    pub traj: Trajectory,
    pub final_state: ExtendedHistoryVector,
    /// ½‖(u, v, η)‖²_𝔐 per step.
    pub energy: Vec<f64>,
    pub snapshots: Vec<(usize, WeightedField)>,
}

struct ModeRun {
    u: Vec<f64>,
    v: Vec<f64>,
    eta: Vec<f64>,
    energy: Vec<f64>,
    snaps: Vec<Vec<f64>>,
}

pub fn evolve_history(
    z: &ExtendedHistoryVector,
    op: &ModalOperator,
    k: &Kernel,
    t_end: f64,
    dt: f64,
    opts: &HistoryOptions,
) -> Result<HistoryRun> {
    let steps = step_count(t_end, dt)?;
    let g = z.eta.grid;
    if !g.aligned_with(dt) {
        return Err(Error::Grid(format!("history grid width {} differs from dt = {dt}", g.width)));
    }
    if z.eta.modes() != op.n() || z.u.len() != op.n() || z.v.len() != op.n() {
        return Err(Error::Grid("state does not match the operator".into()));
    }
    check_cfl(op, k.alpha, dt)?;
    k.require_normalized()?;
    let w: Vec<f64> = (0..g.cells).map(|j| g.width * k.mu(g.mid(j))).collect();
    let runs: Vec<Result<ModeRun>> =
        (0..op.n()).into_par_iter().map(|m| march_mode(op.lambdas[m], &w, z.u[m], z.v[m], &z.eta.values[m], steps, dt, opts)).collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let energy = (0..=steps).map(|n| runs.iter().map(|r| r.energy[n]).sum()).collect();
    let snapshots = opts
        .snapshot_steps
        .iter()
        .filter(|&&s| s <= steps)
        .enumerate()
        .map(|(i, &s)| (s, WeightedField { values: runs.iter().map(|r| r.snaps[i].clone()).collect(), grid: g, weight: Weight::Mu }))
        .collect();
    let final_state = ExtendedHistoryVector {
        u: runs.iter().map(|r| r.u[steps]).collect(),
        v: runs.iter().map(|r| r.v[steps]).collect(),
        eta: WeightedField { values: runs.iter().map(|r| r.eta.clone()).collect(), grid: g, weight: Weight::Mu },
    };
    let (us, vs): (Vec<_>, Vec<_>) = runs.into_iter().map(|r| (r.u, r.v)).unzip();
    Ok(HistoryRun { traj: Trajectory::from_modes(dt, us, vs), final_state, energy, snapshots })
}

#[allow(clippy::too_many_arguments)]
fn march_mode(lambda: f64, w: &[f64], u0: f64, v0: f64, eta0: &[f64], steps: usize, dt: f64, opts: &HistoryOptions) -> Result<ModeRun> {
    let mut eta = eta0.to_vec();
    let mut u = Vec::with_capacity(steps + 1);
    let mut v = Vec::with_capacity(steps + 1);
    let mut energy = Vec::with_capacity(steps + 1);
    let mut snaps = Vec::new();
    u.push(u0);
    v.push(v0);
    let weighted = |eta: &[f64]| -> (f64, f64) {
        let mut b = 0.0;
        let mut e = 0.0;
        for (x, w) in eta.iter().zip(w) {
            b += w * x;
            e += w * x * x;
        }
        (b, e)
    };
    let (mut b, mut e) = weighted(&eta);
    energy.push(0.5 * (lambda * u0 * u0 + v0 * v0 + lambda * e));
    let snap = |n: usize, eta: &[f64], snaps: &mut Vec<Vec<f64>>| {
        for &s in &opts.snapshot_steps {
            if s == n {
                snaps.push(eta.to_vec());
            }
        }
    };
    snap(0, &eta, &mut snaps);
    let mut a = -lambda * (u0 + b);
    for n in 0..steps {
        let (un, vn) = if opts.freeze_wave {
            (u0, v0)
        } else {
            let vh = v[n] + 0.5 * dt * a;
            let un = u[n] + dt * vh;
            (un, vh)
        };
        let du = un - u[n];
        if !eta.is_empty() {
            eta.rotate_right(1);
            eta[0] = 0.5 * du;
            for x in eta.iter_mut().skip(1) {
                *x += du;
            }
        }
        (b, e) = weighted(&eta);
        let vn = if opts.freeze_wave {
            vn
        } else {
            a = -lambda * (un + b);
            vn + 0.5 * dt * a
        };
        if !(un.is_finite() && vn.is_finite() && b.is_finite()) {
            return Err(Error::NonFinite { step: n + 1, t: (n + 1) as f64 * dt });
        }
        u.push(un);
        v.push(vn);
        energy.push(0.5 * (lambda * un * un + vn * vn + lambda * e));
        snap(n + 1, &eta, &mut snaps);
    }
    Ok(ModeRun { u, v, eta, energy, snaps })
}
