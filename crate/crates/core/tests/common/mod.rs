#![allow(dead_code)]

use memevo::history::{evolve_history, history_grid, init_history, ExtendedHistoryVector, HistoryOptions, HistoryRun};
use memevo::kernel::{build_kernel, Family, Kernel, KernelSpec};
use memevo::maps::{proper_initial_state_with, PastHistory, StateFunction};
use memevo::spectral::{build_operator, ModalOperator, OperatorSpec, WeightedField};
use memevo::state::{evolve_state, state_grid, ExtendedStateVector, StateOptions, StateRun};
use memevo::tolerances::EPS_TAIL;
use memevo::volterra::{solve_direct, InitialState, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Exponential kernel a = κ = 1 (α = 2), λ = 1, 4, 9, 16, φ₀(s) = e^{−s}u₀.
pub struct Scenario {
    pub k: Kernel,
    pub op: ModalOperator,
    pub u0: Vec<f64>,
    pub v0: Vec<f64>,
}

impl Scenario {
    pub fn new(seed: u64) -> Self {
        let k = build_kernel(&KernelSpec::normalized(Family::Exponential { a: 1.0, kappa: 1.0 }), EPS_TAIL).unwrap();
        let op = build_operator(&OperatorSpec::DirichletLaplacianInterval { n: 4 }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u0 = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v0 = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Self { k, op, u0, v0 }
    }

    /// F₀(t) = ½e^{−t}u₀.
    pub fn f0(&self, t_end: f64, dt: f64) -> StateFunction {
        let n = (t_end / dt).round() as usize;
        let times: Vec<f64> = (0..=n).map(|j| j as f64 * dt).collect();
        let values = self.u0.iter().map(|u| times.iter().map(|t| 0.5 * (-t).exp() * u).collect()).collect();
        StateFunction::new(times, values)
    }

    pub fn direct(&self, t_end: f64, dt: f64) -> Trajectory {
        let s = InitialState { u0: self.u0.clone(), v0: self.v0.clone(), f0: self.f0(t_end, dt) };
        solve_direct(&s, &self.op, &self.k, t_end, dt).unwrap()
    }

    pub fn history_initial(&self, t_end: f64, dt: f64) -> ExtendedHistoryVector {
        let g = history_grid(&self.k, t_end, dt).unwrap();
        let phi = PastHistory::from_profile(&self.u0, g, |s| (-s).exp());
        ExtendedHistoryVector { u: self.u0.clone(), v: self.v0.clone(), eta: init_history(&self.u0, &phi).unwrap() }
    }

    pub fn history(&self, t_end: f64, dt: f64, opts: &HistoryOptions) -> HistoryRun {
        evolve_history(&self.history_initial(t_end, dt), &self.op, &self.k, t_end, dt, opts).unwrap()
    }

    /// ξ₀ = μu₀ + DF₀ = ½e^{−τ}u₀.
    pub fn state_initial(&self, dt: f64) -> ExtendedStateVector {
        let g = state_grid(&self.k, dt).unwrap();
        let u0 = self.u0.clone();
        let xi = proper_initial_state_with(&self.u0, |t| u0.iter().map(|u| -0.5 * (-t).exp() * u).collect(), &self.k, g).unwrap();
        ExtendedStateVector { u: self.u0.clone(), v: self.v0.clone(), xi }
    }

    pub fn state(&self, t_end: f64, dt: f64, opts: &StateOptions) -> StateRun {
        evolve_state(&self.state_initial(dt), &self.op, &self.k, t_end, dt, opts).unwrap()
    }

    /// RK4 on u' = v, v' = −λ(2u − w − F), w' = u − w, F' = −F, with
    /// w = ∫₀ᵗ e^{−s}u(t−s)ds and F = F₀. `sub` substeps per output step.
    pub fn ode_reference(&self, t_end: f64, dt: f64, sub: usize) -> Trajectory {
        let steps = (t_end / dt).round() as usize;
        let h = dt / sub as f64;
        let (us, vs): (Vec<_>, Vec<_>) = self
            .op
            .lambdas
            .par_iter()
            .zip(&self.u0)
            .zip(&self.v0)
            .map(|((&l, &u0), &v0)| {
                let rhs = |y: [f64; 4]| [y[1], -l * (2.0 * y[0] - y[2] - y[3]), y[0] - y[2], -y[3]];
                let mut y = [u0, v0, 0.0, 0.5 * u0];
                let mut u = vec![u0];
                let mut v = vec![v0];
                for _ in 0..steps {
                    for _ in 0..sub {
                        let k1 = rhs(y);
                        let k2 = rhs(std::array::from_fn(|i| y[i] + 0.5 * h * k1[i]));
                        let k3 = rhs(std::array::from_fn(|i| y[i] + 0.5 * h * k2[i]));
                        let k4 = rhs(std::array::from_fn(|i| y[i] + h * k3[i]));
                        y = std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
                    }
                    u.push(y[0]);
                    v.push(y[1]);
                }
                (u, v)
            })
            .unzip();
        Trajectory::from_modes(dt, us, vs)
    }
}

/// η at step n from the stored u-trajectory:
/// η_j = u_n − ½(u_{n−j} + u_{n−j−1}) for j < n, η₀_{j−n} + u_n − u₀ otherwise.
pub fn repeta(traj: &Trajectory, eta0: &WeightedField, n: usize) -> WeightedField {
    let mut out = eta0.clone();
    for (m, row) in out.values.iter_mut().enumerate() {
        let u = traj.u_mode(m);
        for (j, x) in row.iter_mut().enumerate() {
            *x = if j < n { u[n] - 0.5 * (u[n - j] + u[n - j - 1]) } else { eta0.values[m][j - n] + u[n] - u[0] };
        }
    }
    out
}

/// ξ^t(τ) = ξ₀(t+τ) + μ(τ)u(t) − μ(t+τ)u₀ + ∫₀ᵗ μ′(τ+s)u(t−s)ds at step n,
/// trapezoid in s on the step grid; ξ₀ given in closed form.
pub fn rep<X: Fn(usize, f64) -> f64 + Sync>(traj: &Trajectory, k: &Kernel, xi0: X, grid: &memevo::quad::Grid, n: usize) -> Vec<Vec<f64>> {
    let dt = traj.times[1] - traj.times[0];
    let t = n as f64 * dt;
    (0..traj.modes())
        .map(|m| {
            let u = traj.u_mode(m);
            (0..grid.cells)
                .into_par_iter()
                .map(|j| {
                    let tau = grid.mid(j);
                    let mut conv = 0.0;
                    for i in 0..=n {
                        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                        conv += w * k.dmu(tau + i as f64 * dt) * u[n - i];
                    }
                    xi0(m, t + tau) + k.mu(tau) * u[n] - k.mu(t + tau) * u[0] + dt * conv
                })
                .collect()
        })
        .collect()
}

/// ‖a − b‖_𝒱 / ‖b‖_𝒱 on a common grid.
pub fn relative_nu_gap(a: &[Vec<f64>], b: &[Vec<f64>], op: &ModalOperator, k: &Kernel, grid: &memevo::quad::Grid) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((ra, rb), l) in a.iter().zip(b).zip(&op.lambdas) {
        for j in 0..grid.cells {
            let nu = k.nu(grid.mid(j));
            num += l * nu * (ra[j] - rb[j]).powi(2);
            den += l * nu * rb[j].powi(2);
        }
    }
    (num / den).sqrt()
}
