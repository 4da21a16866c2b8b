//! Memory kernels μ and the derived scalar functions.
//!
//! M(s) = ∫ₛ^ℓ μ, ν = 1/μ, ν′ = −μ′/μ². Outside Ω = (0, ℓ) the kernel and all
//! derived functions vanish. Kernels on (0, ∞) are truncated at the length
//! `l_trunc` where M(l_trunc) ≤ ε_tail·M(0).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::Grid;
use crate::tolerances::{DECAY_CONDITION_SLACK, NORMALIZATION_GAP};

/// Kernel family with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    /// μ(s) = a e^{−κs} on (0, ∞).
    Exponential { a: f64, kappa: f64 },
    /// μ(s) = Σ aₙ e^{−κₙs} on (0, ∞), κₙ strictly increasing.
    Prony { a: Vec<f64>, kappa: Vec<f64> },
    /// μ(s) = 1 − s on (0, 1).
    Linear,
    /// μ(s) = √((1 − s)/s) on (0, 1).
    SqrtSingular,
    /// Piecewise linear through (sᵢ, μᵢ), ℓ = last abscissa.
    Tabulated { s: Vec<f64>, mu: Vec<f64> },
}

/// How α is fixed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaMode {
    /// α = 1 + M(0).
    #[default]
    Normalized,
    Explicit(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: Family,
    pub alpha: AlphaMode,
}

impl KernelSpec {
    pub fn normalized(family: Family) -> Self {
        Self { family, alpha: AlphaMode::Normalized }
    }
}

#[derive(Clone, Debug)]
struct Table {
    s: Vec<f64>,
    mu: Vec<f64>,
    dmu: Vec<f64>,
    tail: Vec<f64>,
}

impl Table {
    fn segment(&self, x: f64) -> usize {
        match self.s.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.s.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.s.len() - 2),
        }
    }

    fn lerp(&self, ys: &[f64], x: f64) -> f64 {
        let i = self.segment(x);
        let t = (x - self.s[i]) / (self.s[i + 1] - self.s[i]);
        ys[i] + t * (ys[i + 1] - ys[i])
    }

    fn mu(&self, x: f64) -> f64 {
        if x <= self.s[0] {
            self.mu[0]
        } else {
            self.lerp(&self.mu, x)
        }
    }

    fn dmu(&self, x: f64) -> f64 {
        if x <= self.s[0] {
            self.dmu[0]
        } else {
            self.lerp(&self.dmu, x)
        }
    }

    fn tail(&self, x: f64) -> f64 {
        if x <= self.s[0] {
            return self.tail[0] + (self.s[0] - x) * self.mu[0];
        }
        let i = self.segment(x);
        let (s1, m1) = (self.s[i + 1], self.mu[i + 1]);
        let mx = self.lerp(&self.mu, x);
        self.tail[i + 1] + 0.5 * (s1 - x) * (mx + m1)
    }
}

/// A validated kernel with its derived functions.
#[derive(Clone, Debug)]
pub struct Kernel {
    family: Family,
    pub alpha: f64,
    /// Length of Ω; `f64::INFINITY` for kernels on (0, ∞).
    pub ell: f64,
    /// Effective truncation length, equal to ℓ when ℓ is finite.
    pub l_trunc: f64,
    pub eps_tail: f64,
    m0: f64,
    table: Option<Table>,
}

/// Builds a kernel, computing M(0), α and the truncation length.
pub fn build_kernel(spec: &KernelSpec, eps_tail: f64) -> Result<Kernel> {
    if !(eps_tail > 0.0 && eps_tail < 1.0) {
        return Err(Error::Kernel(format!("eps_tail must lie in (0, 1), got {eps_tail}")));
    }
    let mut table = None;
    let (ell, m0) = match &spec.family {
        Family::Exponential { a, kappa } => {
            positive("a", *a)?;
            positive("kappa", *kappa)?;
            (f64::INFINITY, a / kappa)
        }
        Family::Prony { a, kappa } => {
            if a.is_empty() || a.len() != kappa.len() {
                return Err(Error::Kernel("prony needs equally many amplitudes and rates".into()));
            }
            for (x, k) in a.iter().zip(kappa) {
                positive("a", *x)?;
                positive("kappa", *k)?;
            }
            if kappa.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Kernel("prony rates must be strictly increasing".into()));
            }
            (f64::INFINITY, a.iter().zip(kappa).map(|(x, k)| x / k).sum())
        }
        Family::Linear => (1.0, 0.5),
        Family::SqrtSingular => (1.0, std::f64::consts::FRAC_PI_2),
        Family::Tabulated { s, mu } => {
            let t = build_table(s, mu)?;
            let out = (*s.last().unwrap(), t.tail(0.0));
            table = Some(t);
            out
        }
    };
    let alpha = match spec.alpha {
        AlphaMode::Normalized => 1.0 + m0,
        AlphaMode::Explicit(a) => {
            if !(m0 < a) {
                return Err(Error::Kernel(format!("total mass M(0) = {m0} must be below alpha = {a}")));
            }
            a
        }
    };
    let mut k = Kernel { family: spec.family.clone(), alpha, ell, l_trunc: ell, eps_tail, m0, table };
    if ell.is_infinite() {
        k.l_trunc = k.truncation_length();
    }
    Ok(k)
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Kernel(format!("{name} must be positive and finite, got {x}")))
    }
}

fn build_table(s: &[f64], mu: &[f64]) -> Result<Table> {
    if s.len() < 2 || s.len() != mu.len() {
        return Err(Error::Kernel("tabulated kernel needs at least two (s, mu) pairs".into()));
    }
    if s[0] < 0.0 || s.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Kernel("tabulated abscissae must be nonnegative and strictly increasing".into()));
    }
    if mu.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
        return Err(Error::Kernel("tabulated values must be strictly positive".into()));
    }
    if let Some(i) = mu.windows(2).position(|w| w[1] > w[0]) {
        return Err(Error::Kernel(format!("tabulated values increase at s = {}", s[i + 1])));
    }
    let n = s.len();
    let mut dmu = vec![0.0; n];
    dmu[0] = (mu[1] - mu[0]) / (s[1] - s[0]);
    dmu[n - 1] = (mu[n - 1] - mu[n - 2]) / (s[n - 1] - s[n - 2]);
    for i in 1..n - 1 {
        dmu[i] = (mu[i + 1] - mu[i - 1]) / (s[i + 1] - s[i - 1]);
    }
    let mut tail = vec![0.0; n];
    for i in (0..n - 1).rev() {
        tail[i] = tail[i + 1] + 0.5 * (s[i + 1] - s[i]) * (mu[i] + mu[i + 1]);
    }
    Ok(Table { s: s.to_vec(), mu: mu.to_vec(), dmu, tail })
}

impl Kernel {
    pub fn family(&self) -> &Family {
        &self.family
    }

    /// M(0) = ∫₀^ℓ μ.
    pub fn m0(&self) -> f64 {
        self.m0
    }

    /// min(ℓ, L_trunc).
    pub fn ell_eff(&self) -> f64 {
        self.ell.min(self.l_trunc)
    }

    fn inside(&self, s: f64) -> bool {
        s < self.ell
    }

    pub fn mu(&self, s: f64) -> f64 {
        if !self.inside(s) {
            return 0.0;
        }
        match &self.family {
            Family::Exponential { a, kappa } => a * (-kappa * s).exp(),
            Family::Prony { a, kappa } => a.iter().zip(kappa).map(|(a, k)| a * (-k * s).exp()).sum(),
            Family::Linear => 1.0 - s.max(0.0),
            Family::SqrtSingular => ((1.0 - s) / s).sqrt(),
            Family::Tabulated { .. } => self.table.as_ref().unwrap().mu(s),
        }
    }

    pub fn dmu(&self, s: f64) -> f64 {
        if !self.inside(s) {
            return 0.0;
        }
        match &self.family {
            Family::Exponential { a, kappa } => -kappa * a * (-kappa * s).exp(),
            Family::Prony { a, kappa } => a.iter().zip(kappa).map(|(a, k)| -k * a * (-k * s).exp()).sum(),
            Family::Linear => -1.0,
            Family::SqrtSingular => -0.5 / (s.powf(1.5) * (1.0 - s).sqrt()),
            Family::Tabulated { .. } => self.table.as_ref().unwrap().dmu(s),
        }
    }

    /// M(s) = ∫ₛ^ℓ μ.
    pub fn tail(&self, s: f64) -> f64 {
        if !self.inside(s) {
            return 0.0;
        }
        match &self.family {
            Family::Exponential { a, kappa } => a / kappa * (-kappa * s).exp(),
            Family::Prony { a, kappa } => a.iter().zip(kappa).map(|(a, k)| a / k * (-k * s).exp()).sum(),
            Family::Linear => 0.5 * (1.0 - s).powi(2),
            Family::SqrtSingular => {
                let s = s.max(0.0);
                std::f64::consts::FRAC_PI_2 - s.sqrt().asin() - (s * (1.0 - s)).sqrt()
            }
            Family::Tabulated { .. } => self.table.as_ref().unwrap().tail(s),
        }
    }

    /// ν = 1/μ (infinite outside Ω).
    pub fn nu(&self, s: f64) -> f64 {
        1.0 / self.mu(s)
    }

    /// ν′ = −μ′/μ².
    pub fn dnu(&self, s: f64) -> f64 {
        let m = self.mu(s);
        -self.dmu(s) / (m * m)
    }

    /// μ(0⁺) when finite.
    pub fn mu_at_zero(&self) -> Option<f64> {
        match &self.family {
            Family::SqrtSingular => None,
            _ => Some(self.mu(0.0)),
        }
    }

    fn truncation_length(&self) -> f64 {
        let target = self.eps_tail * self.m0;
        let mut hi = match &self.family {
            Family::Exponential { kappa, .. } => return (1.0 / self.eps_tail).ln() / kappa,
            Family::Prony { kappa, .. } => (1.0 / self.eps_tail).ln() / kappa[0],
            _ => return self.ell,
        };
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.tail(mid) <= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// ν at the last cell midpoint divided by ν at the first.
    pub fn nu_growth(&self, grid: &Grid) -> f64 {
        self.nu(grid.mid(grid.cells - 1)) / self.nu(grid.mid(0))
    }

    /// Whether α − M(0) = 1; the history and state formulations are built on it.
    pub fn require_normalized(&self) -> Result<()> {
        if (self.alpha - self.m0 - 1.0).abs() <= NORMALIZATION_GAP * self.alpha {
            Ok(())
        } else {
            Err(Error::Kernel(format!("history and state formulations need alpha - M(0) = 1, got {}", self.alpha - self.m0)))
        }
    }

    /// β default: half of (0, min(ℓ, L_trunc)).
    pub fn default_beta(&self) -> f64 {
        0.5 * self.ell_eff()
    }
}

/// Outcome of the pointwise sweeps of μ′ + δμ ≤ 0 (`suf`) and μ(σ+s) ≤ Ce^{−δσ}μ(s) (`mu`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayConditions {
    pub suf_holds: bool,
    pub mu_holds: bool,
    /// First s with μ′(s) + δμ(s) > slack.
    pub suf_witness: Option<f64>,
    /// First (σ, s) with μ(σ + s) > C e^{−δσ} μ(s) + slack.
    pub mu_witness: Option<(f64, f64)>,
}

/// Checks μ′ + δμ ≤ 0 on `s_grid` and μ(σ+s) ≤ C e^{−δσ} μ(s) on
/// `sigma_grid × s_grid`.
pub fn check_decay_conditions(k: &Kernel, delta: f64, c: f64, s_grid: &[f64], sigma_grid: &[f64]) -> Result<DecayConditions> {
    if !(delta > 0.0) || !(c >= 1.0) {
        return Err(Error::Input(format!("need delta > 0 and C >= 1, got delta = {delta}, C = {c}")));
    }
    if s_grid.iter().any(|s| !(*s > 0.0 && *s < k.ell)) {
        return Err(Error::Input("decay-condition grid must lie inside (0, ell)".into()));
    }
    if sigma_grid.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::Input("shifts must be nonnegative".into()));
    }
    let suf_witness = s_grid.iter().copied().find(|&s| k.dmu(s) + delta * k.mu(s) > DECAY_CONDITION_SLACK);
    let mut mu_witness = None;
    'outer: for &sigma in sigma_grid {
        let bound = c * (-delta * sigma).exp();
        for &s in s_grid {
            if k.mu(sigma + s) > bound * k.mu(s) + DECAY_CONDITION_SLACK {
                mu_witness = Some((sigma, s));
                break 'outer;
            }
        }
    }
    Ok(DecayConditions { suf_holds: suf_witness.is_none(), mu_holds: mu_witness.is_none(), suf_witness, mu_witness })
}

/// Midpoints of `n` equal cells on (0, min(ℓ, L_trunc)).
pub fn sample_grid(k: &Kernel, n: usize) -> Vec<f64> {
    let h = k.ell_eff() / n as f64;
    (0..n).map(|j| (j as f64 + 0.5) * h).collect()
}
