//! Grids and quadrature rules.
//!
//! Every weighted integral in the crate is a cell-midpoint sum on a uniform
//! grid of `cells` cells of width `width` starting at 0. Oscillatory integrals
//! are split into half periods and the resulting alternating series is summed
//! with repeated averaging of partial sums (Euler's transform).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform cell grid on (0, cells·width).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub width: f64,
    pub cells: usize,
}

impl Grid {
    pub fn new(width: f64, cells: usize) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::Grid(format!("cell width must be positive, got {width}")));
        }
        Ok(Self { width, cells })
    }

    /// Largest grid of cells of width `width` fitting in (0, length).
    pub fn covering(length: f64, width: f64) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::Grid(format!("grid length must be positive, got {length}")));
        }
        let cells = (length / width + 1e-9).floor() as usize;
        if cells == 0 {
            return Err(Error::Grid(format!("cell width {width} exceeds length {length}")));
        }
        Self::new(width, cells)
    }

    #[inline]
    pub fn mid(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.width
    }

    #[inline]
    pub fn face(&self, j: usize) -> f64 {
        j as f64 * self.width
    }

    pub fn length(&self) -> f64 {
        self.cells as f64 * self.width
    }

    pub fn mids(&self) -> Vec<f64> {
        (0..self.cells).map(|j| self.mid(j)).collect()
    }

    /// True when the cell width equals the time step (to rounding).
    pub fn aligned_with(&self, dt: f64) -> bool {
        (self.width - dt).abs() <= 1e-12 * dt.abs().max(self.width)
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Fixed-order Gauss–Legendre rule, reusable across panels.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        Self { x, w }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        h * self.x.iter().zip(&self.w).map(|(x, w)| w * f(c + h * x)).sum::<f64>()
    }

    /// Composite rule over the given breakpoints.
    pub fn integrate_panels<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64]) -> f64 {
        breaks.windows(2).map(|p| self.integrate(&f, p[0], p[1])).sum()
    }
}

/// Euler's transform of an alternating series given its partial sums:
/// averages adjacent partial sums repeatedly and returns the deepest value
/// together with the change between the two deepest levels.
pub fn euler_accelerate(partials: &[f64]) -> (f64, f64) {
    if partials.is_empty() {
        return (0.0, f64::INFINITY);
    }
    let mut level = partials.to_vec();
    let mut prev = *level.last().unwrap();
    let mut err = f64::INFINITY;
    while level.len() > 1 {
        level = level.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        let cur = *level.last().unwrap();
        err = (cur - prev).abs();
        prev = cur;
    }
    (prev, err)
}

/// ∫_{x0}^∞ f over panels [x0 + kP, x0 + (k+1)P] where f changes sign once per
/// panel, summed with Euler's transform until two successive estimates agree
/// to `tol`.
pub fn alternating_tail<F: Fn(f64) -> f64>(f: F, x0: f64, period: f64, tol: f64, max_panels: usize) -> Result<f64> {
    let gl = GaussLegendre::new(24);
    let mut partials = Vec::new();
    let mut s = 0.0;
    let mut last: Option<f64> = None;
    for k in 0..max_panels {
        let a = x0 + k as f64 * period;
        s += gl.integrate(&f, a, a + period);
        partials.push(s);
        if partials.len() >= 16 && partials.len() % 4 == 0 {
            // Only the most recent partial sums enter the transform: early
            // terms carry the non-asymptotic part of the amplitude.
            let start = partials.len().saturating_sub(40);
            let (est, err) = euler_accelerate(&partials[start..]);
            if let Some(prev) = last {
                if (est - prev).abs() < tol && err < tol {
                    return Ok(est);
                }
            }
            last = Some(est);
        }
    }
    Err(Error::NoConvergence(format!("alternating tail not converged to {tol} within {max_panels} panels")))
}

/// Midpoint rule on the grid.
pub fn midpoint_sum<F: Fn(f64) -> f64>(grid: &Grid, f: F) -> f64 {
    (0..grid.cells).map(|j| f(grid.mid(j))).sum::<f64>() * grid.width
}
