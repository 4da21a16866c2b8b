//! Spectral representation of A and the norms built on it.
//!
//! ‖u‖²_H = Σ u_k², ‖u‖²_V = Σ λ_k u_k², ‖w‖²_{V*} = Σ w_k²/λ_k, and for a
//! field f on the cell grid ‖f‖² = Σ_g width · ω(mid_g) · Σ_k λ_k f_{k,g}².

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::quad::Grid;

/// Coefficients against the eigenbasis of A.
pub type ModalVector = Vec<f64>;

/// Eigenvalues λ₁ ≤ … ≤ λ_N of A.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModalOperator {
    pub lambdas: Vec<f64>,
    pub domain_tag: String,
}

/// Spectrum source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "kebab-case")]
pub enum OperatorSpec {
    /// −d²/dx² on (0, π) with Dirichlet conditions: λ_k = k².
    DirichletLaplacianInterval {
        n: usize,
    },
    ExplicitList {
        lambdas: Vec<f64>,
    },
}

pub fn build_operator(spec: &OperatorSpec) -> Result<ModalOperator> {
    let (lambdas, tag) = match spec {
        OperatorSpec::DirichletLaplacianInterval { n } => {
            if *n == 0 {
                return Err(Error::Operator("need at least one mode".into()));
            }
            ((1..=*n).map(|k| (k * k) as f64).collect::<Vec<_>>(), "dirichlet-laplacian-interval")
        }
        OperatorSpec::ExplicitList { lambdas } => (lambdas.clone(), "explicit-list"),
    };
    if lambdas.is_empty() {
        return Err(Error::Operator("need at least one mode".into()));
    }
    if lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(Error::Operator("eigenvalues must be positive".into()));
    }
    if lambdas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Operator("eigenvalues must be nondecreasing".into()));
    }
    Ok(ModalOperator { lambdas, domain_tag: tag.to_string() })
}

impl ModalOperator {
    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambdas[0]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.lambdas.last().unwrap()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    H,
    V,
    Vstar,
}

pub fn norm(u: &[f64], op: &ModalOperator, space: Space) -> f64 {
    norm_sq(u, op, space).sqrt()
}

pub fn norm_sq(u: &[f64], op: &ModalOperator, space: Space) -> f64 {
    debug_assert_eq!(u.len(), op.n());
    u.iter()
        .zip(&op.lambdas)
        .map(|(x, l)| match space {
            Space::H => x * x,
            Space::V => l * x * x,
            Space::Vstar => x * x / l,
        })
        .sum()
}

/// ⟨u, v⟩_H.
pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Weight attached to a field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weight {
    /// μ, for histories η.
    Mu,
    /// ν = 1/μ, for states ξ.
    Nu,
}

/// Per-mode cell values `values[k][g]` on a midpoint grid.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedField {
    pub values: Vec<Vec<f64>>,
    pub grid: Grid,
    pub weight: Weight,
}

impl WeightedField {
    pub fn zeros(modes: usize, grid: Grid, weight: Weight) -> Self {
        Self { values: vec![vec![0.0; grid.cells]; modes], grid, weight }
    }

    /// f(s) = g(s)·w per mode.
    pub fn from_profile<F: Fn(f64) -> f64>(w: &[f64], grid: Grid, weight: Weight, g: F) -> Self {
        let prof: Vec<f64> = grid.mids().into_iter().map(g).collect();
        let values = w.iter().map(|wk| prof.iter().map(|p| p * wk).collect()).collect();
        Self { values, grid, weight }
    }

    pub fn modes(&self) -> usize {
        self.values.len()
    }

    pub fn scaled(&self, c: f64) -> Self {
        let values = self.values.iter().map(|r| r.iter().map(|x| c * x).collect()).collect();
        Self { values, grid: self.grid, weight: self.weight }
    }

    /// Value at cell g as a modal vector.
    pub fn column(&self, g: usize) -> ModalVector {
        self.values.iter().map(|r| r[g]).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|r| r.iter().all(|x| *x == 0.0))
    }
}

fn check_field(f: &WeightedField, op: &ModalOperator, k: &Kernel) -> Result<()> {
    if f.modes() != op.n() {
        return Err(Error::Grid(format!("field has {} modes, operator {}", f.modes(), op.n())));
    }
    if f.values.iter().any(|r| r.len() != f.grid.cells) {
        return Err(Error::Grid("field rows do not match the grid".into()));
    }
    if f.grid.length() > k.ell * (1.0 + 1e-12) {
        return Err(Error::Grid(format!("grid length {} exceeds ell = {}", f.grid.length(), k.ell)));
    }
    Ok(())
}

/// Weight samples ω(mid_g) for the field's weight.
pub fn weight_samples(grid: &Grid, weight: Weight, k: &Kernel) -> Vec<f64> {
    (0..grid.cells)
        .map(|g| match weight {
            Weight::Mu => k.mu(grid.mid(g)),
            Weight::Nu => k.nu(grid.mid(g)),
        })
        .collect()
}

/// Squared weighted norm of a single mode row with eigenvalue λ.
pub fn row_norm_sq(row: &[f64], w: &[f64], width: f64, lambda: f64) -> f64 {
    lambda * width * row.iter().zip(w).map(|(x, w)| w * x * x).sum::<f64>()
}

pub fn weighted_norm_sq(f: &WeightedField, op: &ModalOperator, k: &Kernel) -> Result<f64> {
    check_field(f, op, k)?;
    let w = weight_samples(&f.grid, f.weight, k);
    Ok(f.values.iter().zip(&op.lambdas).map(|(r, l)| row_norm_sq(r, &w, f.grid.width, *l)).sum())
}

/// ‖f‖ in L²_μ(Ω;V) or L²_ν(Ω;V) by midpoint quadrature.
pub fn weighted_norm(f: &WeightedField, op: &ModalOperator, k: &Kernel) -> Result<f64> {
    weighted_norm_sq(f, op, k).map(f64::sqrt)
}

/// ‖(u, v, f)‖² = ‖u‖²_V + ‖v‖²_H + ‖f‖², the norm of 𝔐 or 𝔄.
pub fn extended_norm_sq(u: &[f64], v: &[f64], f: &WeightedField, op: &ModalOperator, k: &Kernel) -> Result<f64> {
    Ok(norm_sq(u, op, Space::V) + norm_sq(v, op, Space::H) + weighted_norm_sq(f, op, k)?)
}

/// (∫‖ξ(τ)‖_V dτ, √M(0)·‖ξ‖) for a ν-weighted field, both on its grid.
pub fn integral_bound(xi: &WeightedField, op: &ModalOperator, k: &Kernel) -> Result<(f64, f64)> {
    let lhs = (0..xi.grid.cells).map(|g| norm(&xi.column(g), op, Space::V)).sum::<f64>() * xi.grid.width;
    let nu_field = WeightedField { weight: Weight::Nu, ..xi.clone() };
    Ok((lhs, k.m0().sqrt() * weighted_norm(&nu_field, op, k)?))
}
