//! Worked examples and counterexamples as self-checking scenarios.
//!
//! Every scenario returns the computed witnesses together with a `pass` flag
//! and serializes to JSON.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::history::{evolve_history, ExtendedHistoryVector, HistoryOptions};
use crate::kernel::{build_kernel, Family, Kernel, KernelSpec};
use crate::maps::{classify_near_zero, gamma_map, pi_map, StateClass};
use crate::quad::{alternating_tail, GaussLegendre, Grid};
use crate::spectral::{weighted_norm, ModalOperator, Weight, WeightedField};
use crate::tolerances::{COND_WARN, DET_GAP, EPS_TAIL};

// ---------------------------------------------------------------------------
// Prony kernels with coinciding proper states

#[derive(Clone, Debug, Serialize)]
pub struct ExnnScenario {
    pub n: usize,
    pub a: Vec<f64>,
    pub kappa: Vec<f64>,
    /// b_nm = m!/κ_nᵐ, row n.
    pub b: Vec<Vec<f64>>,
    pub det_product: f64,
    pub det_lu: f64,
    pub det_gap: f64,
    /// Solution of Bx = (1, …, 1); η_N(s) = Σ x_m sᵐ u.
    pub x: Vec<f64>,
    /// max_n |Σ_m b_nm x_m − 1|
    pub residual: f64,
    pub condition: f64,
    pub warning: Option<String>,
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

pub fn exnn_build(a: &[f64], kappa: &[f64]) -> Result<ExnnScenario> {
    let n = kappa.len();
    if n < 2 || a.len() != n {
        return Err(Error::Input(format!("need N >= 2 rates and amplitudes, got {} and {}", n, a.len())));
    }
    if kappa[0] <= 0.0 || kappa.windows(2).any(|w| w[1] <= w[0]) || a.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::Input("rates must be positive and strictly increasing, amplitudes positive".into()));
    }
    let bm = DMatrix::from_fn(n, n, |r, c| factorial(c + 1) / kappa[r].powi(c as i32 + 1));
    let mut det_product: f64 = (1..=n).map(factorial).product::<f64>() / kappa.iter().product::<f64>();
    for i in 0..n {
        for j in 0..i {
            det_product *= 1.0 / kappa[i] - 1.0 / kappa[j];
        }
    }
    let lu = bm.clone().lu();
    let det_lu = lu.determinant();
    let det_gap = (det_lu - det_product).abs() / det_product.abs();
    let sv = bm.clone().svd(false, false).singular_values;
    let condition = sv.max() / sv.min();
    let x = lu.solve(&DVector::from_element(n, 1.0)).ok_or_else(|| Error::Input("B is singular".into()))?;
    let residual = (&bm * &x).iter().map(|j| (j - 1.0).abs()).fold(0.0, f64::max);
    let warning =
        (condition > COND_WARN || det_gap > DET_GAP).then(|| format!("B is ill-conditioned (cond = {condition:.3e}); rates are too close"));
    Ok(ExnnScenario {
        n,
        a: a.to_vec(),
        kappa: kappa.to_vec(),
        b: (0..n).map(|r| bm.row(r).iter().copied().collect()).collect(),
        det_product,
        det_lu,
        det_gap,
        x: x.iter().copied().collect(),
        residual,
        condition,
        warning,
    })
}

impl ExnnScenario {
    pub fn kernel(&self) -> Result<Kernel> {
        build_kernel(&KernelSpec::normalized(Family::Prony { a: self.a.clone(), kappa: self.kappa.clone() }), EPS_TAIL)
    }

    /// Σ x_m sᵐ
    pub fn profile(&self, s: f64) -> f64 {
        self.x.iter().enumerate().map(|(m, x)| x * s.powi(m as i32 + 1)).sum()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExnnVerdict {
    pub scenario: ExnnScenario,
    /// ‖Πη₀ − Πη_N‖_𝒱 / ‖Πη₀‖_𝒱
    pub pi_gap: f64,
    /// Relative L∞ gap between the u-trajectories started from η₀ and η_N.
    pub trajectory_gap: f64,
    pub pass: bool,
}

/// Compares Πη₀ with Πη_N and evolves the history system from both.
pub fn exnn_check(scn: &ExnnScenario, op: &ModalOperator, u: &[f64], v0: &[f64], t_end: f64, dt: f64) -> Result<ExnnVerdict> {
    let k = scn.kernel()?;
    // Π integrates over s beyond the τ-range; twice L_trunc keeps the cut tail negligible.
    let long = Grid::covering(2.0 * k.l_trunc, dt)?;
    let eta0 = WeightedField::from_profile(u, long, Weight::Mu, |_| 1.0);
    let eta_n = WeightedField::from_profile(u, long, Weight::Mu, |s| scn.profile(s));
    let p0 = pi_map(&eta0, &k)?.xi;
    let pn = pi_map(&eta_n, &k)?.xi;
    let diff = WeightedField {
        values: p0.values.iter().zip(&pn.values).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect()).collect(),
        ..p0.clone()
    };
    let pi_gap = weighted_norm(&diff, op, &k)? / weighted_norm(&p0, op, &k)?;

    let hg = Grid::covering(k.ell.min(k.l_trunc + t_end), dt)?;
    let run = |profile: &dyn Fn(f64) -> f64| {
        let eta = WeightedField::from_profile(u, hg, Weight::Mu, profile);
        let z = ExtendedHistoryVector { u: u.to_vec(), v: v0.to_vec(), eta };
        evolve_history(&z, op, &k, t_end, dt, &HistoryOptions::default())
    };
    let a = run(&|_| 1.0)?;
    let b = run(&|s| scn.profile(s))?;
    let trajectory_gap = b.traj.relative_linf_gap(&a.traj);
    let pass = scn.det_gap <= DET_GAP && scn.residual <= 1e-10 && pi_gap <= 1e-6 && trajectory_gap <= 1e-3;
    Ok(ExnnVerdict { scenario: scn.clone(), pi_gap, trajectory_gap, pass })
}

// ---------------------------------------------------------------------------
// ϰ = lim ∫₁^N (1/x)√((x−1)/x) sin x dx

/// ϰ to within `tol`.
///
/// On [1, π] the substitution x = 1 + w² removes the square-root behaviour at
/// x = 1; from π on the integrand changes sign once per period π and the
/// panel sums are Euler-accelerated.
pub fn kappa_constant(tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Input(format!("tol = {tol} must be positive")));
    }
    let gl = GaussLegendre::new(24);
    let head = gl.integrate(
        |w| {
            let x = 1.0 + w * w;
            2.0 * w * w / (x * x.sqrt()) * x.sin()
        },
        0.0,
        (PI - 1.0).sqrt(),
    );
    let tail = alternating_tail(|x| ((x - 1.0) / x).sqrt() / x * x.sin(), PI, PI, tol.min(1e-6) * 0.1, 200_000)?;
    Ok(head + tail)
}

// ---------------------------------------------------------------------------
// Cantor approximants for the linear kernel

/// n-th piecewise linear approximant of the Cantor function, ℭ₀(x) = x.
pub fn cantor(n: usize, x: f64) -> f64 {
    let mut x = x.clamp(0.0, 1.0);
    let mut scale = 1.0;
    let mut acc = 0.0;
    for _ in 0..n {
        if x <= 1.0 / 3.0 {
            x *= 3.0;
        } else if x < 2.0 / 3.0 {
            return acc + 0.5 * scale;
        } else {
            acc += 0.5 * scale;
            x = 3.0 * x - 2.0;
        }
        scale *= 0.5;
    }
    acc + scale * x
}

/// ∫₀ˣ ℭ_n.
pub fn cantor_integral(n: usize, x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    if n == 0 {
        return 0.5 * x * x;
    }
    let whole = cantor_integral(n - 1, 1.0) / 6.0;
    if x <= 1.0 / 3.0 {
        cantor_integral(n - 1, 3.0 * x) / 6.0
    } else if x <= 2.0 / 3.0 {
        whole + 0.5 * (x - 1.0 / 3.0)
    } else {
        whole + 1.0 / 6.0 + 0.5 * (x - 2.0 / 3.0) + cantor_integral(n - 1, 3.0 * x - 2.0) / 6.0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CantorRecord {
    pub n_max: usize,
    /// ‖ξ_n − ξ_m‖_𝒱 for unit ‖u‖_V.
    pub distances: Vec<Vec<f64>>,
    /// ‖ξ_{n+1} − ξ_{n+2}‖ / ‖ξ_n − ξ_{n+1}‖
    pub ratios: Vec<f64>,
    /// max_t |Γξ_n(t) − ∫₀^{1−t} ℭ_n| on the cell faces.
    pub certificate_gaps: Vec<f64>,
    /// Measure of the set where ℭ'_n ≠ 0, (2/3)ⁿ.
    pub derivative_support: Vec<f64>,
    /// sup_t |F(t) − Λφ(t)| for the limit with φ = D²F(1 − ·) = 0 a.e.
    pub limit_certificate_gap: f64,
    pub note: String,
    pub pass: bool,
}

/// ∫₀¹ (f(x))²/x on the 3^{−level} partition, exact enough for piecewise
/// linear f vanishing at 0.
fn nu_distance_sq<F: Fn(f64) -> f64>(f: F, level: u32) -> f64 {
    let gl = GaussLegendre::new(8);
    let h = 3f64.powi(-(level as i32));
    let cells = 3usize.pow(level);
    (0..cells).map(|i| gl.integrate(|x| f(x).powi(2) / x, i as f64 * h, (i + 1) as f64 * h)).sum()
}

/// ξ_n(τ) = −ℭ_n(1−τ)u for the kernel μ(s) = 1 − s on (0, 1).
pub fn cantor_sequence(n_max: usize) -> Result<CantorRecord> {
    if n_max < 4 {
        return Err(Error::Input("n_max must be at least 4".into()));
    }
    let level = n_max as u32 + 1;
    let mut distances = vec![vec![0.0; n_max + 1]; n_max + 1];
    #[allow(clippy::needless_range_loop)]
    for i in 0..=n_max {
        for j in i + 1..=n_max {
            // ∫ν(ξ_i − ξ_j)² = ∫₀¹ (ℭ_i − ℭ_j)²(x)/x dx with x = 1 − τ
            let d = nu_distance_sq(|x| cantor(i, x) - cantor(j, x), level).sqrt();
            distances[i][j] = d;
            distances[j][i] = d;
        }
    }
    let step: Vec<f64> = (0..n_max).map(|n| distances[n][n + 1]).collect();
    let ratios: Vec<f64> = step.windows(2).map(|w| w[1] / w[0]).collect();

    let g = Grid::covering(1.0, 3f64.powi(-(level as i32)))?;
    let faces: Vec<f64> = (0..=g.cells).map(|j| g.face(j)).collect();
    let certificate_gaps = (0..=n_max)
        .map(|n| {
            let xi = WeightedField::from_profile(&[1.0], g, Weight::Nu, |t| -cantor(n, 1.0 - t));
            let f = gamma_map(&xi, &faces);
            faces.iter().zip(&f.values[0]).map(|(t, v)| (v - cantor_integral(n, 1.0 - t)).abs()).fold(0.0, f64::max)
        })
        .collect::<Vec<f64>>();
    let derivative_support = (0..=n_max).map(|n| (2.0f64 / 3.0).powi(n as i32)).collect();
    let limit_certificate_gap = cantor_integral(n_max, 1.0);
    let pass = ratios.iter().skip(2).all(|r| *r <= 0.8) && step.iter().all(|d| *d > 0.0) && certificate_gaps.iter().all(|g| *g <= 1e-8);
    Ok(CantorRecord {
        n_max,
        distances,
        ratios,
        certificate_gaps,
        derivative_support,
        limit_certificate_gap,
        note: "each approximant is certified by Γ; for the limit the a.e. derivative of ℭ vanishes, so the \
               candidate history reproduces 0 instead of F, and the search fails. That the limit is not a \
               proper state is an analytic fact, not established by this computation."
            .into(),
        pass,
    })
}

// ---------------------------------------------------------------------------
// Behaviour of F = Λφ as t → 0

#[derive(Clone, Debug, Serialize)]
pub struct ClassRecord {
    pub name: String,
    pub expected: StateClass,
    pub observed: StateClass,
    /// (t, F(t)) toward 0.
    pub samples: Vec<[f64; 2]>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExinjReport {
    pub exinj: ClassRecord,
    /// F(t) at the smallest sampled t.
    pub exinj_last: f64,
    /// sin 1 − ∫₀¹ sin(1/x) dx by half-period summation.
    pub exinj_limit: f64,
    pub case_ii: ClassRecord,
    pub case_ii_sup: f64,
    /// max − min of F over the last sampled decade.
    pub case_ii_oscillation: f64,
    pub l1strict: ClassRecord,
    /// ∫₀¹ F by graded quadrature.
    pub l1strict_integral: f64,
    /// ∫₀¹ s^{−1/2} M(s) ds, equal to ∫₀¹ F by Fubini.
    pub l1strict_fubini: f64,
    pub pass: bool,
}

fn half_period_breaks(a: f64, b: f64) -> Vec<f64> {
    let mut br = vec![a];
    let mut x = (a / PI).floor() * PI + PI;
    while x < b {
        br.push(x);
        x += PI;
    }
    br.push(b);
    br
}

/// Λφ for μ = 1 − s and φ(s) = −(1−s)^{−2} cos(1/(1−s)); with y = 1/(1−s)
/// this is −∫₁^{1/t} (1/y − t) cos y dy.
pub fn exinj_f(t: f64) -> f64 {
    if t >= 1.0 {
        return 0.0;
    }
    let gl = GaussLegendre::new(16);
    -gl.integrate_panels(|y| (1.0 / y - t) * y.cos(), &half_period_breaks(1.0, 1.0 / t))
}

/// Λφ for μ = 1 − s and φ(s) = 2(1−s)^{−3} cos(1/(1−s)) − (1−s)^{−4} sin(1/(1−s)).
pub fn case_ii_f(t: f64) -> f64 {
    if t >= 1.0 {
        return 0.0;
    }
    let gl = GaussLegendre::new(16);
    gl.integrate_panels(|y| (1.0 / y - t) * (2.0 * y * y.cos() - y * y * y.sin()), &half_period_breaks(1.0, 1.0 / t))
}

/// Λφ for μ = √((1−s)/s) and φ = s^{−1/2}; with s = (1−t) sin²θ this is
/// 2(1−t) ∫₀^{π/2} cos²θ / √(t + (1−t) sin²θ) dθ.
pub fn l1strict_f(t: f64) -> f64 {
    if t >= 1.0 {
        return 0.0;
    }
    let gl = GaussLegendre::new(16);
    let mut br = vec![0.0];
    let mut x = t.sqrt();
    while x < FRAC_PI_2 {
        br.push(x);
        x *= 4.0;
    }
    br.push(FRAC_PI_2);
    2.0 * (1.0 - t) * gl.integrate_panels(|th| th.cos().powi(2) / (t + (1.0 - t) * th.sin().powi(2)).sqrt(), &br)
}

fn sample_toward_zero<F: Fn(f64) -> f64>(f: &F, t_lo: f64, t_hi: f64) -> Vec<[f64; 2]> {
    let decades = (t_hi / t_lo).log10().round() as i32;
    (0..=4 * decades).map(|i| t_hi * 10f64.powf(-i as f64 / 4.0)).map(|t| [t, f(t)]).collect()
}

fn classify_record<F: Fn(f64) -> f64>(name: &str, expected: StateClass, f: F, t_lo: f64, t_hi: f64) -> ClassRecord {
    let (observed, note) = classify_near_zero(|t| f(t).abs(), t_lo, t_hi);
    ClassRecord { name: name.into(), expected, observed, samples: sample_toward_zero(&f, t_lo, t_hi), note }
}

/// Runs the three classification examples.
pub fn exinj_suite() -> Result<ExinjReport> {
    let exinj = classify_record("exinj", StateClass::S0, exinj_f, 1e-6, 1e-1);
    let exinj_last = exinj_f(1e-6);
    // ∫₀¹ sin(1/x) dx = ∫₁^∞ sin y / y² dy
    let gl = GaussLegendre::new(24);
    let g = |y: f64| y.sin() / (y * y);
    let inner = gl.integrate(g, 1.0, PI) + alternating_tail(g, PI, PI, 1e-12, 1_000_000)?;
    let exinj_limit = 1f64.sin() - inner;

    let case_ii = classify_record("case-ii", StateClass::BoundedNoLimit, case_ii_f, 1e-4, 1e-1);
    let case_ii_sup = case_ii.samples.iter().map(|s| s[1].abs()).fold(0.0, f64::max);
    let last: Vec<f64> = (0..=48).map(|i| 1e-3 * 10f64.powf(-i as f64 / 48.0)).map(case_ii_f).collect();
    let case_ii_oscillation = last.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - last.iter().cloned().fold(f64::INFINITY, f64::min);

    let l1strict = classify_record("l1strict", StateClass::Unbounded, l1strict_f, 1e-8, 1e-1);
    let gl16 = GaussLegendre::new(16);
    let mut br: Vec<f64> = (0..=14).rev().map(|e| 10f64.powi(-e)).collect();
    br.insert(0, 0.0);
    let l1strict_integral = gl16.integrate_panels(l1strict_f, &br);
    let k = build_kernel(&KernelSpec::normalized(Family::SqrtSingular), EPS_TAIL)?;
    let l1strict_fubini = 2.0 * gl16.integrate_panels(|w| k.tail(w * w), &[0.0, 0.25, 0.5, 0.75, 1.0]);

    let strictly_increasing = [1e-2, 1e-3, 1e-4].windows(2).all(|w| l1strict_f(w[1]) > l1strict_f(w[0]));
    let pass = exinj.observed == exinj.expected
        && (exinj_last - exinj_limit).abs() <= 1e-4
        && case_ii.observed == case_ii.expected
        && case_ii_sup.is_finite()
        && case_ii_oscillation >= 1.0
        && l1strict.observed == l1strict.expected
        && strictly_increasing
        && (l1strict_integral - l1strict_fubini).abs() <= 1e-6 * l1strict_fubini;
    Ok(ExinjReport {
        exinj,
        exinj_last,
        exinj_limit,
        case_ii,
        case_ii_sup,
        case_ii_oscillation,
        l1strict,
        l1strict_integral,
        l1strict_fubini,
        pass,
    })
}

// ---------------------------------------------------------------------------
// η(s) = e^{κ₁s/2}u: in L¹_μ with Πη ∈ 𝒱, but not in 𝓜

#[derive(Clone, Debug, Serialize)]
pub struct MuntzWitness {
    pub sigma: f64,
    /// Σ aₙ/(κₙ − σκ₁)
    pub l1_mu_closed: f64,
    pub l1_mu_quad: f64,
    /// (L, ∫₀^L μ η²) for growing cutoffs; grows like a₁L.
    pub m_norm_sq: Vec<[f64; 2]>,
    pub m_norm_slope: f64,
    /// ‖Πη‖_𝒱 from Πη = Σ aₙκₙ e^{−κₙτ}/(κₙ − σκ₁) u.
    pub pi_norm_closed: f64,
    /// ‖Πη_grid − Πη‖_𝒱 / ‖Πη‖_𝒱 with Πη_grid from the discrete Π.
    pub pi_gap: f64,
    pub note: String,
    pub pass: bool,
}

pub fn muntz_witness(a: &[f64], kappa: &[f64], dt: f64) -> Result<MuntzWitness> {
    let sigma = 0.5;
    let k = build_kernel(&KernelSpec::normalized(Family::Prony { a: a.to_vec(), kappa: kappa.to_vec() }), EPS_TAIL)?;
    let k1 = kappa[0];
    let eta = |s: f64| (sigma * k1 * s).exp();
    let gl = GaussLegendre::new(16);
    let unit_breaks = |len: f64| -> Vec<f64> { (0..=(len.ceil() as usize)).map(|i| (i as f64).min(len)).collect() };

    let l1_mu_closed: f64 = a.iter().zip(kappa).map(|(a, k)| a / (k - sigma * k1)).sum();
    let cut = (1.0 / EPS_TAIL).ln() / ((1.0 - sigma) * k1);
    let l1_mu_quad = gl.integrate_panels(|s| k.mu(s) * eta(s), &unit_breaks(cut));

    let m_norm_sq: Vec<[f64; 2]> = [10.0, 20.0, 40.0]
        .iter()
        .map(|&l| {
            [
                l,
                gl.integrate_panels(
                    |s| a.iter().zip(kappa).map(|(a, k)| a * (-k * s).exp()).sum::<f64>() * eta(s).powi(2),
                    &unit_breaks(l),
                ),
            ]
        })
        .collect();
    let m_norm_slope = (m_norm_sq[2][1] - m_norm_sq[1][1]) / (m_norm_sq[2][0] - m_norm_sq[1][0]);

    let pi_closed = |t: f64| a.iter().zip(kappa).map(|(a, k)| a * k * (-k * t).exp() / (k - sigma * k1)).sum::<f64>();
    let pi_norm_closed = gl.integrate_panels(|t| pi_closed(t).powi(2) / k.mu(t), &unit_breaks(k.l_trunc)).sqrt();

    let s_len = 2.0 * cut;
    let sg = Grid::covering(s_len, dt)?;
    let field = WeightedField::from_profile(&[1.0], sg, Weight::Mu, eta);
    let p = pi_map(&field, &k)?.xi;
    let tg = p.grid;
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..tg.cells {
        let t = tg.mid(j);
        let exact = pi_closed(t);
        num += k.nu(t) * (p.values[0][j] - exact).powi(2);
        den += k.nu(t) * exact * exact;
    }
    let pi_gap = (num / den).sqrt();
    let pass = (l1_mu_quad - l1_mu_closed).abs() <= 1e-6 * l1_mu_closed
        && (m_norm_slope - a[0]).abs() <= 1e-3 * a[0]
        && pi_norm_closed.is_finite()
        && pi_gap <= 1e-3;
    Ok(MuntzWitness {
        sigma,
        l1_mu_closed,
        l1_mu_quad,
        m_norm_sq,
        m_norm_slope,
        pi_norm_closed,
        pi_gap,
        note: "σ = 1/2 only; membership for other σ in [1/2, 1) is not checked".into(),
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_operator, OperatorSpec};
    use proptest::prelude::*;

    #[test]
    fn exnn_worked_instance() {
        let s = exnn_build(&[1.0, 1.0], &[1.0, 2.0]).unwrap();
        assert_eq!(s.b, vec![vec![1.0, 2.0], vec![0.5, 0.5]]);
        // by hand: 1·0.5 − 2·0.5
        assert!((s.det_product + 0.5).abs() < 1e-15);
        assert!((s.det_lu + 0.5).abs() < 1e-14);
        assert!((s.x[0] - 3.0).abs() < 1e-12 && (s.x[1] + 1.0).abs() < 1e-12);
        assert!(s.warning.is_none());
        assert_eq!(s.profile(2.0), 2.0);
    }

    #[test]
    fn exnn_rejects_bad_rates() {
        assert!(exnn_build(&[1.0], &[1.0]).is_err());
        assert!(exnn_build(&[1.0, 1.0], &[2.0, 1.0]).is_err());
        assert!(exnn_build(&[1.0, -1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn exnn_close_rates_warn() {
        let s = exnn_build(&[1.0; 6], &[1.0, 1.001, 1.002, 1.003, 1.004, 1.005]).unwrap();
        assert!(s.warning.is_some());
    }

    #[test]
    fn exnn_check_passes_on_a_single_mode() {
        let s = exnn_build(&[1.0, 1.0], &[1.0, 2.0]).unwrap();
        let op = build_operator(&OperatorSpec::ExplicitList { lambdas: vec![1.0] }).unwrap();
        let v = exnn_check(&s, &op, &[1.0], &[0.3], 2.0, 4e-3).unwrap();
        assert!(v.pi_gap <= 1e-5, "{}", v.pi_gap);
        assert!(v.trajectory_gap <= 1e-3, "{}", v.trajectory_gap);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn exnn_random_instances(n in 2usize..=6, k0 in 0.3f64..2.0, gaps in prop::collection::vec(0.3f64..1.5, 5)) {
            let mut kappa = vec![k0];
            for g in gaps.iter().take(n - 1) {
                kappa.push(kappa.last().unwrap() + g);
            }
            let s = exnn_build(&vec![1.0; n], &kappa).unwrap();
            // permutation expansion of det(B); its own rounding error is bounded by n!·n·ε·Σ|terms|
            let mut det = 0.0;
            let mut size = 0.0;
            let mut perm: Vec<usize> = (0..n).collect();
            permute(&mut perm, 0, &mut |p| {
                let term = inversion_sign(p) * (0..n).map(|r| s.b[r][p[r]]).product::<f64>();
                det += term;
                size += term.abs();
            });
            let rounding = factorial(n) * n as f64 * f64::EPSILON * size;
            prop_assert!((det - s.det_product).abs() <= 1e-8 * s.det_product.abs() + rounding);
            if s.warning.is_none() {
                prop_assert!(s.det_gap <= DET_GAP);
                prop_assert!(s.residual <= 1e-6);
            }
        }
    }

    fn permute(p: &mut Vec<usize>, i: usize, f: &mut dyn FnMut(&[usize])) {
        if i == p.len() {
            f(p);
            return;
        }
        for j in i..p.len() {
            p.swap(i, j);
            permute(p, i + 1, f);
            p.swap(i, j);
        }
    }

    fn inversion_sign(p: &[usize]) -> f64 {
        let mut s = 1.0;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if p[i] > p[j] {
                    s = -s;
                }
            }
        }
        s
    }

    #[test]
    fn kappa_value() {
        let v = kappa_constant(1e-2).unwrap();
        assert!((0.27..=0.29).contains(&v));
        // integration by parts tail: ∫_X^∞ g sin ≈ g(X) cos X + g′(X) sin X
        let g = |x: f64| ((x - 1.0) / x).sqrt() / x;
        let big = 2000.0 * PI;
        let gl = GaussLegendre::new(24);
        let head = gl.integrate_panels(|x| g(x) * x.sin(), &{
            let mut b: Vec<f64> = (0..=200).map(|i| 1.0 + (PI - 1.0) * (i as f64 / 200.0).powi(2)).collect();
            b.extend((2..=2000).map(|i| i as f64 * PI));
            b
        });
        let h = 1e-4;
        let dg = (g(big + h) - g(big - h)) / (2.0 * h);
        let oracle = head + g(big) * big.cos() + dg * big.sin();
        let fine = kappa_constant(1e-4).unwrap();
        assert!((fine - oracle).abs() < 1e-4, "{fine} vs {oracle}");
        let gl = GaussLegendre::new(8);
        let near = gl.integrate(|x| g(x) * x.sin(), 1.0, 1.0 + 1e-8);
        assert!(near.abs() < 1e-11);
    }

    #[test]
    fn cantor_basics() {
        assert_eq!(cantor(0, 0.3), 0.3);
        assert_eq!(cantor(1, 0.5), 0.5);
        assert_eq!(cantor(3, 1.0), 1.0);
        assert!((cantor(2, 1.0 / 9.0) - 0.25).abs() < 1e-15);
        for n in 0..6 {
            assert!((cantor_integral(n, 1.0) - 0.5).abs() < 1e-15);
        }
        // cantor_integral against a fine midpoint sum
        let m = 3usize.pow(8);
        let h = 1.0 / m as f64;
        let direct: f64 = (0..m / 2).map(|i| cantor(4, (i as f64 + 0.5) * h)).sum::<f64>() * h;
        assert!((direct - cantor_integral(4, (m / 2) as f64 * h)).abs() < 1e-12);
    }

    #[test]
    fn cantor_record() {
        let r = cantor_sequence(7).unwrap();
        assert!(r.distances[1][2] > 0.0);
        assert!(r.pass, "{:?}", r.ratios);
        assert_eq!(r.limit_certificate_gap, 0.5);
    }

    #[test]
    fn closed_forms_of_the_classification_examples() {
        for t in [0.5, 0.1, 1e-2, 1e-3] {
            // linear kernel, injective case: (1−t) sin 1 − ∫_t^1 sin(1/x) dx, inner integral by GL in y
            let gl = GaussLegendre::new(16);
            let inner = gl.integrate_panels(|y| y.sin() / (y * y), &half_period_breaks(1.0, 1.0 / t));
            assert!((exinj_f(t) - ((1.0 - t) * 1f64.sin() - inner)).abs() < 1e-10);
            let ii = (1.0 / t).sin() - 1f64.sin() - 1f64.cos() + t * 1f64.cos();
            assert!((case_ii_f(t) - ii).abs() < 1e-8 * (1.0 / t), "t = {t}");
        }
        // singular kernel, unbounded case, against the original s-integral, split at s = 1 − t halfway
        let t = 0.3;
        let gl = GaussLegendre::new(32);
        let f = |s: f64| ((1.0 - t - s) / (s * (t + s))).sqrt();
        // s = v², then s = (1−t) − w² near the right end
        let mid = 0.5 * (1.0 - t);
        let left = gl.integrate(|v| 2.0 * v * f(v * v), 0.0, mid.sqrt());
        let right = gl.integrate(|w| 2.0 * w * f(1.0 - t - w * w), 0.0, mid.sqrt());
        assert!((l1strict_f(t) - (left + right)).abs() < 1e-10);
    }

    #[test]
    fn exinj_suite_classifies() {
        let r = exinj_suite().unwrap();
        assert!(r.pass, "{:?} {:?} {:?}", r.exinj.observed, r.case_ii.observed, r.l1strict.observed);
        // Ci(1) = γ + Σ (−1)^k / (2k (2k)!)
        let mut ci = 0.5772156649015329;
        let mut fact = 1.0;
        for kk in 1..20 {
            fact *= (2 * kk - 1) as f64 * (2 * kk) as f64;
            ci += (-1f64).powi(kk) / (2.0 * kk as f64 * fact);
        }
        assert!((r.exinj_limit - ci).abs() < 1e-10, "{} vs {ci}", r.exinj_limit);
    }

    #[test]
    fn muntz_membership() {
        let w = muntz_witness(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0], 1e-2).unwrap();
        assert!(w.pass, "{w:?}");
        let closed = 1.0 / 0.5 + 1.0 / 1.5 + 1.0 / 2.5;
        assert!((w.l1_mu_closed - closed).abs() < 1e-14);
    }
}
