//! Analytic side of the walk: discrete generator, moment recursion, the
//! martingale scaling sequence, and residual checks that quantify how far a
//! simulated path strays from the identities the theory promises.

use crate::error::{Error, Result};
use crate::rng::Streams;
use crate::stats::{summarize, TrialSummary};
use crate::walk::{check_probability, on_lattice, step_marginal_unchecked, WalkParams};

/// Scalar test function on positions, as fed to the generator.
pub type TestFunction = fn(i64) -> f64;

pub fn abs_fn(x: i64) -> f64 {
    (x as f64).abs()
}

pub fn identity_fn(x: i64) -> f64 {
    x as f64
}

pub fn square_fn(x: i64) -> f64 {
    let v = x as f64;
    v * v
}

#[inline]
fn generator_core<F: Fn(i64) -> f64>(f: &F, x: i64, n: u64, t: f64) -> f64 {
    let nf = n as f64;
    let xf = x as f64;
    let up = (xf * t + nf) / (2.0 * nf);
    let down = (nf - xf * t) / (2.0 * nf);
    up * (f(x + 1) - f(x)) + down * (f(x - 1) - f(x))
}

/// One-step generator of the position-time chain applied to `f` at (x, n).
///
/// Defined for n >= 1 and any integer x: off the reachable lattice the
/// formal transition weights may leave [0, 1], which is fine for the
/// difference operator.
pub fn generator_apply<F: Fn(i64) -> f64>(
    f: F,
    x: i64,
    n: u64,
    params: &WalkParams,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::NotStarted);
    }
    Ok(generator_core(&f, x, n, params.drift()))
}

/// E[X_1], ..., E[X_n_max] from the one-step mean recursion
/// E[X_1] = 2r - 1, E[X_{n+1}] = (1 + (2p-1)/n) E[X_n].
pub fn mean_sequence(params: &WalkParams, n_max: u64) -> Vec<f64> {
    let t = params.drift();
    let mut means = Vec::with_capacity(n_max as usize);
    if n_max == 0 {
        return means;
    }
    means.push(2.0 * params.r() - 1.0);
    for k in 1..n_max {
        let prev = means[k as usize - 1];
        means.push(prev * (1.0 + t / k as f64));
    }
    means
}

fn check_scaling_p(p: f64) -> Result<f64> {
    check_probability("p", p)?;
    if p == 0.0 {
        // a_2 would divide by zero: the recursion needs n + 2p - 1 > 0
        return Err(Error::ParamRegime {
            what: "scaling sequence",
            value: p,
        });
    }
    Ok(2.0 * p - 1.0)
}

/// The deflator a_n that turns X_n into a martingale: a_1 = 1 and
/// a_{n+1} = a_n * n / (n + 2p - 1). Requires p in (0, 1].
#[derive(Debug, Clone)]
pub struct ScalingSequence {
    p: f64,
    values: Vec<f64>,
}

impl ScalingSequence {
    pub fn compute(p: f64, n_max: u64) -> Result<Self> {
        let t = check_scaling_p(p)?;
        if n_max == 0 {
            return Err(Error::ZeroSteps);
        }
        let mut values = Vec::with_capacity(n_max as usize);
        values.push(1.0);
        for k in 1..n_max {
            let kf = k as f64;
            let prev = values[k as usize - 1];
            values.push(prev * kf / (kf + t));
        }
        Ok(ScalingSequence { p, values })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn len(&self) -> u64 {
        self.values.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// a_n, 1-based. Panics outside 1..=len.
    pub fn value(&self, n: u64) -> f64 {
        assert!(
            (1..=self.len()).contains(&n),
            "scaling index {n} out of range 1..={}",
            self.len()
        );
        self.values[n as usize - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// n^(2p-1) * a_n, which approaches gamma(2p) for large n.
    pub fn scaled(&self, n: u64) -> f64 {
        (n as f64).powf(2.0 * self.p - 1.0) * self.value(n)
    }
}

/// a_n alone, in O(1) memory.
pub fn scaling_value(p: f64, n: u64) -> Result<f64> {
    Ok(scaling_pair(p, n)?.0)
}

/// (a_n, a_{n+1}) by streaming the recursion.
fn scaling_pair(p: f64, n: u64) -> Result<(f64, f64)> {
    let t = check_scaling_p(p)?;
    if n == 0 {
        return Err(Error::ZeroSteps);
    }
    // same operation order as ScalingSequence::compute, so the two agree
    // to the last bit
    let mut a = 1.0f64;
    for k in 1..n {
        let kf = k as f64;
        a = a * kf / (kf + t);
    }
    let nf = n as f64;
    Ok((a, a * nf / (nf + t)))
}

/// How far a_{n+1} E[X_{n+1} | X_n = x] is from a_n x. Zero in exact
/// arithmetic; in floating point it only picks up rounding noise, so
/// |residual| stays within 1e-10 * (|a_n x| + 1).
pub fn martingale_residual(x: i64, n: u64, p: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::NotStarted);
    }
    let (a_n, a_next) = scaling_pair(p, n)?;
    let t = 2.0 * p - 1.0;
    let nf = n as f64;
    Ok(x as f64 * (a_next * ((nf + t) / nf) - a_n))
}

// published coefficients kept verbatim, beyond f64 precision
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_gamma(z: f64) -> f64 {
    if z < 0.5 {
        return lanczos_gamma(z + 1.0) / z;
    }
    let zz = z - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (zz + i as f64);
    }
    let t = zz + 7.5;
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(zz + 0.5) * (-t).exp() * acc
}

/// Gamma function for positive real arguments (Lanczos, g = 7, 9 terms).
/// Relative error is far below the 1e-10 the callers rely on.
pub fn gamma_fn(z: f64) -> Result<f64> {
    if !z.is_finite() || z <= 0.0 {
        return Err(Error::ParamRegime {
            what: "gamma function",
            value: z,
        });
    }
    Ok(lanczos_gamma(z))
}

/// Monte-Carlo check of the discrete Dynkin identity: along a path from
/// (start_time, start_x) to the horizon,
///
///   D = f(X_N) - f(x_0) - sum_{k=m}^{N-1} (L_k f)(X_k)
///
/// has mean zero. Returns the summary of D over independent trials, one
/// pseudo-random stream per trial index.
pub fn dynkin_residual_samples<F: Fn(i64) -> f64>(
    f: F,
    params: &WalkParams,
    start_time: u64,
    start_x: i64,
    horizon: u64,
    trials: u64,
    streams: &Streams,
) -> Result<TrialSummary> {
    if start_time == 0 {
        return Err(Error::NotStarted);
    }
    if !on_lattice(start_x, start_time) {
        return Err(Error::OffLattice {
            x: start_x,
            n: start_time,
        });
    }
    if horizon <= start_time {
        return Err(Error::HorizonBeforeStart {
            horizon,
            start_time,
        });
    }
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let t = params.drift();
    let f_start = f(start_x);
    let mut samples = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let mut rng = streams.stream(trial);
        let mut x = start_x;
        let mut acc = 0.0;
        for k in start_time..horizon {
            acc += generator_core(&f, x, k, t);
            x += step_marginal_unchecked(x, k, t, &mut rng) as i64;
        }
        samples.push(f(x) - f_start - acc);
    }
    Ok(summarize(&samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exact_distribution;

    fn params(p: f64, r: f64) -> WalkParams {
        WalkParams::new(p, r).unwrap()
    }

    #[test]
    fn generator_requires_a_started_chain() {
        let err = generator_apply(abs_fn, 0, 0, &params(0.5, 0.5)).unwrap_err();
        assert_eq!(err, Error::NotStarted);
    }

    #[test]
    fn generator_of_abs_matches_its_closed_form() {
        // L_n |x| = (2p-1)|x|/n away from zero, and exactly 1 at zero.
        for &p in &[0.0, 0.3, 0.9, 1.0] {
            let pr = params(p, 0.5);
            let t = 2.0 * p - 1.0;
            for n in 1..=30u64 {
                let mut x = -(n as i64);
                while x <= n as i64 {
                    let got = generator_apply(abs_fn, x, n, &pr).unwrap();
                    let want = if x == 0 {
                        1.0
                    } else {
                        t * (x as f64).abs() / n as f64
                    };
                    assert!(
                        (got - want).abs() <= 1e-12,
                        "p={p} n={n} x={x}: {got} vs {want}"
                    );
                    x += 2;
                }
            }
        }
    }

    #[test]
    fn generator_of_identity_is_the_drift() {
        let pr = params(0.8, 0.5);
        for n in 1..=20u64 {
            for x in [-(n as i64), 0, n as i64] {
                let got = generator_apply(identity_fn, x, n, &pr).unwrap();
                let want = 0.6 * x as f64 / n as f64;
                assert!((got - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn generator_is_linear() {
        let pr = params(0.65, 0.5);
        let combo = |x: i64| 2.5 * abs_fn(x) - 0.75 * square_fn(x);
        for (x, n) in [(3i64, 7u64), (-2, 4), (0, 2), (10, 10)] {
            let lhs = generator_apply(combo, x, n, &pr).unwrap();
            let rhs = 2.5 * generator_apply(abs_fn, x, n, &pr).unwrap()
                - 0.75 * generator_apply(square_fn, x, n, &pr).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12);
        }
    }

    #[test]
    fn generator_accepts_off_lattice_points() {
        // |x| > n is fine for the difference operator
        generator_apply(square_fn, 100, 3, &params(0.7, 0.5)).unwrap();
    }

    #[test]
    fn mean_sequence_matches_exact_distributions() {
        for &p in &[0.25, 0.5, 0.9] {
            for &r in &[0.3, 1.0] {
                let pr = params(p, r);
                let means = mean_sequence(&pr, 8);
                for n in 1..=8u64 {
                    let exact = exact_distribution(&pr, n).unwrap().mean();
                    let rec = means[n as usize - 1];
                    assert!(
                        (exact - rec).abs() <= 1e-12,
                        "p={p} r={r} n={n}: {rec} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn fully_persistent_mean_is_linear_in_time() {
        let means = mean_sequence(&params(1.0, 1.0), 6);
        assert_eq!(means, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn scaling_sequence_known_cases() {
        // p = 1/2: no memory, a_n = 1 identically
        let s = ScalingSequence::compute(0.5, 50).unwrap();
        assert!(s.values().iter().all(|&a| a == 1.0));
        // p = 1: a_n = 1/n exactly up to rounding
        let s = ScalingSequence::compute(1.0, 50).unwrap();
        for n in 1..=50u64 {
            assert!((s.value(n) - 1.0 / n as f64).abs() <= 1e-14);
        }
        assert_eq!(s.value(1), 1.0);
    }

    #[test]
    fn scaling_rejects_p_zero_and_zero_length() {
        assert!(matches!(
            ScalingSequence::compute(0.0, 10).unwrap_err(),
            Error::ParamRegime { .. }
        ));
        assert_eq!(
            ScalingSequence::compute(0.5, 0).unwrap_err(),
            Error::ZeroSteps
        );
    }

    #[test]
    fn scaled_sequence_approaches_gamma_of_two_p() {
        let n = 1_000_000u64;
        for &p in &[0.75, 0.9] {
            let a_n = scaling_value(p, n).unwrap();
            let scaled = (n as f64).powf(2.0 * p - 1.0) * a_n;
            let limit = gamma_fn(2.0 * p).unwrap();
            assert!(
                (scaled - limit).abs() <= 0.005 * limit,
                "p={p}: {scaled} vs limit {limit}"
            );
        }
    }

    #[test]
    fn scaling_value_agrees_with_the_table() {
        let s = ScalingSequence::compute(0.8, 1000).unwrap();
        let single = scaling_value(0.8, 1000).unwrap();
        assert_eq!(s.value(1000), single);
    }

    #[test]
    fn martingale_residual_is_rounding_noise_only() {
        for &p in &[0.2, 0.6, 0.75, 1.0] {
            for &n in &[1u64, 10, 100, 10_000] {
                for &x in &[1i64, -1, n as i64, -(n as i64)] {
                    let res = martingale_residual(x, n, p).unwrap();
                    let a_n = scaling_value(p, n).unwrap();
                    let tol = 1e-10 * ((a_n * x as f64).abs() + 1.0);
                    assert!(
                        res.abs() <= tol,
                        "p={p} n={n} x={x}: residual {res} exceeds {tol}"
                    );
                }
            }
        }
    }

    #[test]
    fn gamma_known_values() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((gamma_fn(0.5).unwrap() - sqrt_pi).abs() <= 1e-12 * sqrt_pi);
        assert!((gamma_fn(1.0).unwrap() - 1.0).abs() <= 1e-12);
        assert!((gamma_fn(2.0).unwrap() - 1.0).abs() <= 1e-12);
        assert!((gamma_fn(5.0).unwrap() - 24.0).abs() <= 24.0 * 1e-12);
        assert!((gamma_fn(1.5).unwrap() - 0.8862269255).abs() <= 1e-10);
    }

    #[test]
    fn gamma_recurrence_holds() {
        let mut z = 0.1;
        while z < 6.0 {
            let lhs = gamma_fn(z + 1.0).unwrap();
            let rhs = z * gamma_fn(z).unwrap();
            assert!(((lhs - rhs) / lhs).abs() <= 1e-12, "z={z}: {lhs} vs {rhs}");
            z += 0.137;
        }
    }

    #[test]
    fn gamma_rejects_nonpositive_arguments() {
        for z in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(gamma_fn(z).is_err(), "gamma({z}) should fail");
        }
    }

    #[test]
    fn dynkin_validates_inputs() {
        let pr = params(0.9, 0.5);
        let streams = Streams::new(1);
        assert_eq!(
            dynkin_residual_samples(square_fn, &pr, 0, 0, 10, 5, &streams).unwrap_err(),
            Error::NotStarted
        );
        assert_eq!(
            dynkin_residual_samples(square_fn, &pr, 1, 2, 10, 5, &streams).unwrap_err(),
            Error::OffLattice { x: 2, n: 1 }
        );
        assert_eq!(
            dynkin_residual_samples(square_fn, &pr, 5, 1, 5, 5, &streams).unwrap_err(),
            Error::HorizonBeforeStart {
                horizon: 5,
                start_time: 5
            }
        );
        assert_eq!(
            dynkin_residual_samples(square_fn, &pr, 1, 1, 10, 0, &streams).unwrap_err(),
            Error::ZeroTrials
        );
    }

    #[test]
    fn dynkin_mean_is_zero_for_a_short_run() {
        let pr = params(0.7, 0.5);
        let streams = Streams::new(20_240_601);
        let summary = dynkin_residual_samples(square_fn, &pr, 1, 1, 50, 20_000, &streams).unwrap();
        assert!(
            summary.mean.abs() <= 3.0 * summary.stderr,
            "mean {} stderr {}",
            summary.mean,
            summary.stderr
        );
    }
}
