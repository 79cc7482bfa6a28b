//! Monte-Carlo experiment summaries and recurrence/transience diagnostics.
//!
//! Per-trial work is exposed as standalone functions (`hitting_time_trial`,
//! `first_zero_hit`, `transience_mass_trial`) so callers can distribute
//! trials however they like, and the aggregation steps are deterministic
//! functions of the per-trial results in trial order.

use crate::analysis::scaling_value;
use crate::error::{Error, Result};
use crate::rng::{SplitMix64, Streams};
use crate::walk::{check_probability, on_lattice, step_marginal_unchecked, Trajectory, WalkParams};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Mean, standard error, and a 95% CI over the uncensored trial values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSummary {
    /// Number of values entering the mean (censored trials excluded).
    pub count: u64,
    pub mean: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub censored_count: u64,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn summarize(values: &[f64]) -> TrialSummary {
    summarize_with_censored(values, 0)
}

/// Summary over `values`, recording additionally how many trials were
/// censored before producing a value. Empty input yields NaN statistics.
pub fn summarize_with_censored(values: &[f64], censored_count: u64) -> TrialSummary {
    let count = values.len() as u64;
    if count == 0 {
        return TrialSummary {
            count: 0,
            mean: f64::NAN,
            stderr: f64::NAN,
            ci_low: f64::NAN,
            ci_high: f64::NAN,
            censored_count,
        };
    }
    let m = mean(values);
    let var = if count > 1 {
        values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (count - 1) as f64
    } else {
        0.0
    };
    let stderr = (var / count as f64).sqrt();
    TrialSummary {
        count,
        mean: m,
        stderr,
        ci_low: m - Z95 * stderr,
        ci_high: m + Z95 * stderr,
        censored_count,
    }
}

/// One hitting-time trial: steps taken until the position first returned to
/// zero, or `None` if it had not within `cap` steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HittingSample {
    pub cap: u64,
    pub steps_to_zero: Option<u64>,
}

impl HittingSample {
    pub fn is_censored(&self) -> bool {
        self.steps_to_zero.is_none()
    }
}

fn check_hitting_start(start_time: u64, start_x: i64) -> Result<()> {
    if start_time == 0 {
        return Err(Error::NotStarted);
    }
    if start_x == 0 {
        return Err(Error::StartAtZero);
    }
    if !on_lattice(start_x, start_time) {
        return Err(Error::OffLattice {
            x: start_x,
            n: start_time,
        });
    }
    Ok(())
}

fn hitting_core(
    t: f64,
    start_time: u64,
    start_x: i64,
    cap: u64,
    rng: &mut SplitMix64,
) -> HittingSample {
    let mut x = start_x;
    for k in 1..=cap {
        x += step_marginal_unchecked(x, start_time + k - 1, t, rng) as i64;
        if x == 0 {
            return HittingSample {
                cap,
                steps_to_zero: Some(k),
            };
        }
    }
    HittingSample {
        cap,
        steps_to_zero: None,
    }
}

/// Runs the position-time chain from (start_time, start_x) until it hits
/// zero, giving up after `cap` steps.
pub fn hitting_time_trial(
    params: &WalkParams,
    start_time: u64,
    start_x: i64,
    cap: u64,
    rng: &mut SplitMix64,
) -> Result<HittingSample> {
    check_hitting_start(start_time, start_x)?;
    if cap == 0 {
        return Err(Error::ZeroSteps);
    }
    Ok(hitting_core(params.drift(), start_time, start_x, cap, rng))
}

/// Aggregates hitting samples in trial order; censored trials are excluded
/// from the mean and surface in `censored_count`.
pub fn summarize_hitting(samples: &[HittingSample]) -> TrialSummary {
    let hits: Vec<f64> = samples
        .iter()
        .filter_map(|s| s.steps_to_zero.map(|k| k as f64))
        .collect();
    let censored = samples.len() as u64 - hits.len() as u64;
    summarize_with_censored(&hits, censored)
}

/// Independent hitting-time trials, one stream per trial index.
pub fn hitting_time_trials(
    params: &WalkParams,
    start_time: u64,
    start_x: i64,
    cap: u64,
    trials: u64,
    streams: &Streams,
) -> Result<TrialSummary> {
    check_hitting_start(start_time, start_x)?;
    if cap == 0 {
        return Err(Error::ZeroSteps);
    }
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let t = params.drift();
    let samples: Vec<HittingSample> = (0..trials)
        .map(|i| hitting_core(t, start_time, start_x, cap, &mut streams.stream(i)))
        .collect();
    Ok(summarize_hitting(&samples))
}

/// Upper bound on the expected steps to reach zero from (start_time = |x|,
/// position x) in the strongly reversing regime: 2|x| / (1 - 6p) + 1.
/// Only valid for p < 1/6.
pub fn bound_positive_recurrence(p: f64, x: i64) -> Result<f64> {
    check_probability("p", p)?;
    if p >= 1.0 / 6.0 {
        return Err(Error::ParamRegime {
            what: "positive-recurrence mean bound",
            value: p,
        });
    }
    Ok(2.0 * x.unsigned_abs() as f64 / (1.0 - 6.0 * p) + 1.0)
}

/// Earliest time after which the running law-of-iterated-logarithm
/// statistics are defined (ln ln n and ln ln ln n must be positive).
pub const LIL_MIN_TIME: u64 = 16;

/// Per-path occupation and fluctuation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathDiagnostics {
    /// Times n >= 1 with X_n = 0.
    pub zero_hits: u64,
    /// Last such time, if any.
    pub last_return: Option<u64>,
    /// Strict sign flips relative to the last nonzero sign.
    pub sign_changes: u64,
    /// max over n in [16, N] of |X_n| / sqrt(2 n ln ln n).
    pub max_lil_stat: Option<f64>,
    /// max over n in [16, N] of |X_n| / sqrt(2 n ln n ln ln ln n).
    pub max_lil_critical: Option<f64>,
}

/// Scans a trajectory once, collecting all path diagnostics.
pub fn path_diagnostics(trajectory: &Trajectory) -> PathDiagnostics {
    let mut zero_hits = 0u64;
    let mut last_return = None;
    let mut sign_changes = 0u64;
    let mut last_sign = 0i8;
    let mut max_lil_stat: Option<f64> = None;
    let mut max_lil_critical: Option<f64> = None;
    for (idx, x) in trajectory.positions().enumerate() {
        let n = idx as u64 + 1;
        if x == 0 {
            zero_hits += 1;
            last_return = Some(n);
        } else {
            let sign = if x > 0 { 1i8 } else { -1 };
            if last_sign != 0 && sign != last_sign {
                sign_changes += 1;
            }
            last_sign = sign;
        }
        if n >= LIL_MIN_TIME {
            let nf = n as f64;
            let abs_x = (x as f64).abs();
            let ln = nf.ln();
            let lnln = ln.ln();
            let stat = abs_x / (2.0 * nf * lnln).sqrt();
            let crit = abs_x / (2.0 * nf * ln * lnln.ln()).sqrt();
            if max_lil_stat.is_none_or(|m| stat > m) {
                max_lil_stat = Some(stat);
            }
            if max_lil_critical.is_none_or(|m| crit > m) {
                max_lil_critical = Some(crit);
            }
        }
    }
    PathDiagnostics {
        zero_hits,
        last_return,
        sign_changes,
        max_lil_stat,
        max_lil_critical,
    }
}

/// Time of the walk's first visit to zero within `horizon` steps, starting
/// fresh from the origin.
pub fn first_zero_hit(params: &WalkParams, horizon: u64, rng: &mut SplitMix64) -> Option<u64> {
    if horizon == 0 {
        return None;
    }
    let t = params.drift();
    let mut x: i64 = if rng.bernoulli(params.r()) { 1 } else { -1 };
    for n in 1..horizon {
        x += step_marginal_unchecked(x, n, t, rng) as i64;
        if x == 0 {
            return Some(n + 1);
        }
    }
    None
}

/// Fraction of paths that have not yet returned to zero, per horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub horizon: u64,
    pub no_return_fraction: f64,
}

/// Evaluates the survival curve at each horizon from per-trial first-hit
/// times (`None` = no return within the largest horizon). Nonincreasing in
/// the horizon by construction, since each path is reused across horizons.
pub fn curve_from_first_hits(first_hits: &[Option<u64>], horizons: &[u64]) -> Vec<CurvePoint> {
    let total = first_hits.len() as f64;
    horizons
        .iter()
        .map(|&h| {
            let survived = first_hits
                .iter()
                .filter(|hit| hit.is_none_or(|k| k > h))
                .count();
            CurvePoint {
                horizon: h,
                no_return_fraction: survived as f64 / total,
            }
        })
        .collect()
}

fn check_horizons(horizons: &[u64]) -> Result<()> {
    if horizons.is_empty() || horizons[0] == 0 || horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::HorizonsNotIncreasing);
    }
    Ok(())
}

/// No-return fractions over a shared set of sampled paths, evaluated at a
/// strictly increasing sequence of horizons.
pub fn return_probability_curve(
    params: &WalkParams,
    horizons: &[u64],
    trials: u64,
    streams: &Streams,
) -> Result<Vec<CurvePoint>> {
    check_horizons(horizons)?;
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let longest = *horizons.last().unwrap();
    let first_hits: Vec<Option<u64>> = (0..trials)
        .map(|i| first_zero_hit(params, longest, &mut streams.stream(i)))
        .collect();
    Ok(curve_from_first_hits(&first_hits, horizons))
}

/// Terminal value of the scaled martingale a_N X_N for one fresh path.
/// `scale` must be a_N for the chosen horizon.
pub fn transience_mass_trial(
    params: &WalkParams,
    horizon: u64,
    scale: f64,
    rng: &mut SplitMix64,
) -> f64 {
    let t = params.drift();
    let mut x: i64 = if rng.bernoulli(params.r()) { 1 } else { -1 };
    for n in 1..horizon {
        x += step_marginal_unchecked(x, n, t, rng) as i64;
    }
    scale * x as f64
}

/// Distribution summary of the martingale limit proxy M_N = a_N X_N.
#[derive(Debug, Clone, PartialEq)]
pub struct TransienceMass {
    pub horizon: u64,
    pub epsilon: f64,
    /// Summary of the signed values; the mean stays at 2r - 1 for every
    /// horizon because M is a martingale.
    pub summary: TrialSummary,
    pub mean_abs: f64,
    /// Fraction of trials with |M_N| > epsilon.
    pub frac_above_epsilon: f64,
}

/// Estimates how much mass the scaled walk keeps away from zero at the
/// horizon. Only meaningful in the superdiffusive regime, so p <= 3/4 is
/// rejected.
pub fn transience_mass_estimate(
    params: &WalkParams,
    horizon: u64,
    trials: u64,
    epsilon: f64,
    streams: &Streams,
) -> Result<TransienceMass> {
    if params.p() <= 0.75 {
        return Err(Error::ParamRegime {
            what: "transience mass estimate",
            value: params.p(),
        });
    }
    if horizon == 0 {
        return Err(Error::ZeroSteps);
    }
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::ParamRegime {
            what: "transience threshold epsilon",
            value: epsilon,
        });
    }
    let scale = scaling_value(params.p(), horizon)?;
    let masses: Vec<f64> = (0..trials)
        .map(|i| transience_mass_trial(params, horizon, scale, &mut streams.stream(i)))
        .collect();
    Ok(summarize_transience(&masses, horizon, epsilon))
}

/// Aggregation step shared by sequential and parallel callers.
pub fn summarize_transience(masses: &[f64], horizon: u64, epsilon: f64) -> TransienceMass {
    let above = masses.iter().filter(|m| m.abs() > epsilon).count();
    TransienceMass {
        horizon,
        epsilon,
        summary: summarize(masses),
        mean_abs: masses.iter().map(|m| m.abs()).sum::<f64>() / masses.len() as f64,
        frac_above_epsilon: above as f64 / masses.len() as f64,
    }
}
