//! Fixed numerical thresholds shared by the library, the CLI and the tests.

/// Default relative tail mass used to truncate kernels on (0, ∞).
pub const EPS_TAIL: f64 = 1e-8;

/// Slack allowed in the pointwise decay-condition checks.
pub const DECAY_CONDITION_SLACK: f64 = 1e-12;

/// Slack for ‖Πη‖ ≤ ‖η‖.
pub const PI_CONTRACTION_SLACK: f64 = 1e-10;

/// Slack for the integral bound ∫‖ξ‖_V ≤ √M(0)‖ξ‖.
pub const INTEGRAL_BOUND_SLACK: f64 = 1e-10;

/// Per-mode threshold below which a tail sum counts as zero.
pub const MINIMALITY_ZERO: f64 = 1e-12;

/// Gap between Γξ and the stored state function of a proper state.
pub const PROPER_STATE_GAP: f64 = 1e-10;

/// Cauchy variation over the last decade (relative to scale) below which
/// a limit at t → 0 is declared to exist.
pub const LIMIT_CAUCHY_REL: f64 = 1e-4;

/// Monotone growth factor above which values are declared unbounded.
pub const UNBOUNDED_GROWTH: f64 = 1e3;

/// Values above this are treated as a divergent quadrature.
pub const OVERFLOW_GUARD: f64 = 1e100;

/// Multiplier in tol_fd = C_FD · Δt · max|d²/dt²|.
pub const C_FD: f64 = 10.0;

/// Fraction of the series excluded from the start of a decay fit.
pub const FIT_SKIP_FRACTION: f64 = 0.1;

/// Relative determinant gap between the product formula and LU.
pub const DET_GAP: f64 = 1e-10;

/// Condition number above which the Prony moment matrix is flagged.
pub const COND_WARN: f64 = 1e12;

/// Default factor by which ν at the last cell must exceed ν at the first.
pub const NU_GROWTH_FACTOR: f64 = 10.0;

/// Total log-energy decrease ω·(fit span) below which a series is flagged
/// as non-decaying.
pub const DECAY_FIT_FLOOR: f64 = 1e-9;

/// Pairwise relative L∞ gap allowed between formulations in a comparison.
pub const COMPARE_GAP: f64 = 1e-3;

/// Smallest R² of the log-energy fit accepted as exponential decay.
pub const DECAY_R_SQUARED: f64 = 0.99;

/// Fraction of steps at which every Lyapunov margin must hold.
pub const MARGIN_FRACTION: f64 = 0.99;

/// Relative slack on α − M(0) = 1.
pub const NORMALIZATION_GAP: f64 = 1e-12;

/// A state is flagged rough when a cell-to-cell jump exceeds this times √Δτ·max|ξ|.
pub const ROUGH_JUMP: f64 = 1.0;
