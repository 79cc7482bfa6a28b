//! Core walk model: parameters, step history, one-step laws, trajectory sampling.
//!
//! The walk starts at the origin. The first step is +1 with probability `r`.
//! Every later step recalls one earlier step through a memory kernel and
//! copies it with probability `p` (reverses it otherwise). Under the uniform
//! kernel the conditional law collapses to a function of the current position
//! and time alone,
//!
//!   P[next = y | X_n = x] = (x·y·(2p-1) + n) / (2n),   y in {-1, +1},
//!
//! which is what `kernel_prob` computes and what marginal sampling exploits.
//! Positions live on the lattice |x| <= n with x = n (mod 2).

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Memory strength `p` and first-step bias `r`, both probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    p: f64,
    r: f64,
}

impl WalkParams {
    pub fn new(p: f64, r: f64) -> Result<Self> {
        check_probability("p", p)?;
        check_probability("r", r)?;
        Ok(WalkParams { p, r })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// 2p - 1, the drift factor that multiplies the position in the kernel.
    #[inline]
    pub(crate) fn drift(&self) -> f64 {
        2.0 * self.p - 1.0
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if value.is_nan() || !(0.0..=1.0).contains(&value) {
        return Err(Error::ProbabilityRange { name, value });
    }
    Ok(())
}

fn check_step(step: i8) -> Result<()> {
    if step == 1 || step == -1 {
        Ok(())
    } else {
        Err(Error::InvalidStep(step))
    }
}

/// Reachability: after n steps the position must satisfy |x| <= n, x = n (mod 2).
#[inline]
pub(crate) fn on_lattice(x: i64, n: u64) -> bool {
    let n_i = n as i64;
    x.unsigned_abs() <= n && (x - n_i) % 2 == 0
}

/// P[first step = `step`]: `r` for +1, `1 - r` for -1.
pub fn first_step_prob(params: &WalkParams, step: i8) -> Result<f64> {
    check_step(step)?;
    Ok(if step == 1 { params.r } else { 1.0 - params.r })
}

/// One-step law at time n >= 1 and position x under the uniform kernel.
///
/// The two step probabilities are computed as a value and its complement, so
/// they sum to exactly 1.0 and each lies in [0, 1]: with t = 2p-1 in [-1, 1]
/// and |x| <= n, rounding is monotone and x·t + n stays inside [0, 2n].
pub fn kernel_prob(x: i64, n: u64, step: i8, params: &WalkParams) -> Result<f64> {
    check_step(step)?;
    if n == 0 {
        return Err(Error::NotStarted);
    }
    if !on_lattice(x, n) {
        return Err(Error::OffLattice { x, n });
    }
    let up = prob_up(x, n, params.drift());
    Ok(if step == 1 { up } else { 1.0 - up })
}

/// (x·t + n) / (2n) with t = 2p - 1. Caller guarantees n >= 1 and |x| <= n.
#[inline]
pub(crate) fn prob_up(x: i64, n: u64, t: f64) -> f64 {
    let nf = n as f64;
    (x as f64 * t + nf) / (2.0 * nf)
}

/// Draws the next step of the position-time chain. Caller guarantees n >= 1
/// and a lattice-valid x.
#[inline]
pub(crate) fn step_marginal_unchecked(x: i64, n: u64, t: f64, rng: &mut SplitMix64) -> i8 {
    if rng.bernoulli(prob_up(x, n, t)) {
        1
    } else {
        -1
    }
}

/// Bit-packed record of every step taken, one bit per step (+1 = set).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepHistory {
    words: Vec<u64>,
    len: u64,
}

impl StepHistory {
    pub fn new() -> Self {
        StepHistory::default()
    }

    pub fn with_capacity(n_steps: u64) -> Self {
        StepHistory {
            words: Vec::with_capacity((n_steps as usize).div_ceil(64)),
            len: 0,
        }
    }

    pub fn from_steps(steps: &[i8]) -> Result<Self> {
        let mut h = StepHistory::with_capacity(steps.len() as u64);
        for &s in steps {
            check_step(s)?;
            h.push(s);
        }
        Ok(h)
    }

    /// Appends a unit step. Panics on values other than +1/-1.
    pub fn push(&mut self, step: i8) {
        assert!(step == 1 || step == -1, "step must be +1 or -1, got {step}");
        let bit = self.len % 64;
        if bit == 0 {
            self.words.push(0);
        }
        if step == 1 {
            *self.words.last_mut().unwrap() |= 1u64 << bit;
        }
        self.len += 1;
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Step at 0-based `index`. Panics past the end.
    pub fn get(&self, index: u64) -> i8 {
        assert!(
            index < self.len,
            "index {index} out of range (len {})",
            self.len
        );
        let word = self.words[(index / 64) as usize];
        if (word >> (index % 64)) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = i8> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Sum of all steps, i.e. the position. Tail bits past `len` are never
    /// set, so a popcount over whole words is enough.
    pub fn sum(&self) -> i64 {
        let ones: u64 = self.words.iter().map(|w| w.count_ones() as u64).sum();
        2 * ones as i64 - self.len as i64
    }
}

/// Time, position, and (optionally) the full step record.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    n: u64,
    x: i64,
    history: Option<StepHistory>,
}

impl WalkState {
    pub fn origin() -> Self {
        WalkState {
            n: 0,
            x: 0,
            history: None,
        }
    }

    pub fn origin_with_history() -> Self {
        WalkState {
            n: 0,
            x: 0,
            history: Some(StepHistory::new()),
        }
    }

    /// State without a step record; rejects off-lattice (x, n) pairs.
    pub fn new(n: u64, x: i64) -> Result<Self> {
        if !on_lattice(x, n) {
            return Err(Error::OffLattice { x, n });
        }
        Ok(WalkState {
            n,
            x,
            history: None,
        })
    }

    /// State carrying `history`; time and position are derived from it.
    pub fn with_history(history: StepHistory) -> Self {
        WalkState {
            n: history.len(),
            x: history.sum(),
            history: Some(history),
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn x(&self) -> i64 {
        self.x
    }

    pub fn history(&self) -> Option<&StepHistory> {
        self.history.as_ref()
    }

    /// Advances by one validated step, extending the record if one is kept.
    pub fn apply_step(&mut self, step: i8) -> Result<()> {
        check_step(step)?;
        self.n += 1;
        self.x += step as i64;
        if let Some(h) = self.history.as_mut() {
            h.push(step);
        }
        Ok(())
    }
}

/// How `sample_trajectory` draws steps after the first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// Position-time chain via `kernel_prob`; uniform memory only.
    Marginal,
    /// Recall an index from the memory kernel, then copy or reverse.
    History,
}

/// Recall-weight profile over the recorded steps.
pub trait MemoryKernel {
    /// Probability of recalling the step at 0-based `index` among `n`
    /// recorded steps. Defined for n >= 1.
    fn mass(&self, n: u64, index: u64) -> f64;

    /// Draws a recalled index in 0..n (inverse CDF by default).
    fn sample_index(&self, n: u64, rng: &mut SplitMix64) -> u64 {
        debug_assert!(n > 0);
        let u = rng.next_f64();
        let mut acc = 0.0;
        for k in 0..n {
            acc += self.mass(n, k);
            if u < acc {
                return k;
            }
        }
        n - 1
    }

    /// True only if `mass(n, ·)` is the uniform profile for every n.
    fn is_uniform(&self) -> bool {
        false
    }

    /// Sum of recall weights at history length n; 1 up to rounding.
    fn total_mass(&self, n: u64) -> f64 {
        (0..n).map(|k| self.mass(n, k)).sum()
    }
}

/// Equal recall weight 1/n on every recorded step.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformMemory;

impl MemoryKernel for UniformMemory {
    fn mass(&self, n: u64, _index: u64) -> f64 {
        1.0 / n as f64
    }

    fn sample_index(&self, n: u64, rng: &mut SplitMix64) -> u64 {
        rng.below(n)
    }

    fn is_uniform(&self) -> bool {
        true
    }
}

/// A sampled path: the parameters it was drawn under plus every step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    params: WalkParams,
    steps: StepHistory,
}

impl Trajectory {
    /// Wraps an externally recorded step sequence.
    pub fn new(params: WalkParams, steps: StepHistory) -> Self {
        Trajectory { params, steps }
    }

    pub fn params(&self) -> &WalkParams {
        &self.params
    }

    pub fn steps(&self) -> &StepHistory {
        &self.steps
    }

    pub fn len(&self) -> u64 {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Positions X_1, X_2, ... in step order.
    pub fn positions(&self) -> impl Iterator<Item = i64> + '_ {
        self.steps.iter().scan(0i64, |x, s| {
            *x += s as i64;
            Some(*x)
        })
    }

    pub fn final_position(&self) -> i64 {
        self.steps.sum()
    }
}

/// Draws one step given the walk so far (position-time chain form).
///
/// The state must have taken at least one step; the first step is governed
/// by the start rule, not the memory kernel.
pub fn sample_step_marginal(
    state: &WalkState,
    params: &WalkParams,
    rng: &mut SplitMix64,
) -> Result<i8> {
    if state.n == 0 {
        return Err(Error::NotStarted);
    }
    Ok(step_marginal_unchecked(
        state.x,
        state.n,
        params.drift(),
        rng,
    ))
}

/// Draws one step by recalling a recorded step through `kernel`, then
/// copying it with probability p (reversing otherwise). The recall index is
/// drawn first, then the copy/reverse coin.
pub fn sample_step_history(
    history: &StepHistory,
    params: &WalkParams,
    kernel: &dyn MemoryKernel,
    rng: &mut SplitMix64,
) -> Result<i8> {
    if history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let recalled = history.get(kernel.sample_index(history.len(), rng));
    Ok(if rng.bernoulli(params.p) {
        recalled
    } else {
        -recalled
    })
}

/// Samples a complete path of `n_steps` steps from the origin.
///
/// Marginal mode requires the uniform kernel; that is the only case where
/// the position-time chain carries the same law as the history chain.
pub fn sample_trajectory(
    params: &WalkParams,
    n_steps: u64,
    mode: SampleMode,
    kernel: &dyn MemoryKernel,
    rng: &mut SplitMix64,
) -> Result<Trajectory> {
    if n_steps == 0 {
        return Err(Error::ZeroSteps);
    }
    if mode == SampleMode::Marginal && !kernel.is_uniform() {
        return Err(Error::MarginalNeedsUniform);
    }
    let mut steps = StepHistory::with_capacity(n_steps);
    let first = if rng.bernoulli(params.r) { 1 } else { -1 };
    steps.push(first);
    match mode {
        SampleMode::Marginal => {
            let t = params.drift();
            let mut x = first as i64;
            for n in 1..n_steps {
                let s = step_marginal_unchecked(x, n, t, rng);
                x += s as i64;
                steps.push(s);
            }
        }
        SampleMode::History => {
            for n in 1..n_steps {
                let recalled = steps.get(kernel.sample_index(n, rng));
                let s = if rng.bernoulli(params.p) {
                    recalled
                } else {
                    -recalled
                };
                steps.push(s);
            }
        }
    }
    Ok(Trajectory {
        params: *params,
        steps,
    })
}
