//! Finite replica mean-field system: M copies of the walk where each move
//! recalls a step from a uniformly chosen *other* replica's record.
//!
//! The scheduler is sequential. One system step draws the mover uniformly
//! over the M replicas, the influencer uniformly over the remaining M - 1,
//! then a remembered index uniformly over the influencer's record; the
//! recalled step is copied with probability p, reversed otherwise. Exactly
//! one replica advances per step. Initialization gives every replica a
//! single fair +-1 jump.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::walk::{check_probability, StepHistory};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmfParams {
    m_replicas: usize,
    p: f64,
    total_steps: u64,
}

impl RmfParams {
    pub fn new(m_replicas: usize, p: f64, total_steps: u64) -> Result<Self> {
        if m_replicas < 2 {
            return Err(Error::ReplicaCount { m: m_replicas });
        }
        check_probability("p", p)?;
        if total_steps == 0 {
            return Err(Error::ZeroSteps);
        }
        Ok(RmfParams {
            m_replicas,
            p,
            total_steps,
        })
    }

    pub fn m_replicas(&self) -> usize {
        self.m_replicas
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn total_steps(&self) -> u64 {
        self.total_steps
    }
}

/// One replica: its position and every step it has taken.
#[derive(Debug, Clone, PartialEq)]
pub struct Replica {
    x: i64,
    history: StepHistory,
}

impl Replica {
    pub fn n(&self) -> u64 {
        self.history.len()
    }

    pub fn x(&self) -> i64 {
        self.x
    }

    pub fn history(&self) -> &StepHistory {
        &self.history
    }

    fn push(&mut self, step: i8) {
        self.x += step as i64;
        self.history.push(step);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmfState {
    replicas: Vec<Replica>,
    steps_taken: u64,
}

impl RmfState {
    /// Rebuilds a state from per-replica step records. Every replica must
    /// already have jumped at least once (the initializer guarantees this,
    /// and the stepping rule relies on nonempty records).
    pub fn from_histories(histories: Vec<StepHistory>) -> Result<Self> {
        if histories.len() < 2 {
            return Err(Error::ReplicaCount { m: histories.len() });
        }
        if histories.iter().any(|h| h.is_empty()) {
            return Err(Error::EmptyHistory);
        }
        let replicas = histories
            .into_iter()
            .map(|h| Replica {
                x: h.sum(),
                history: h,
            })
            .collect();
        Ok(RmfState {
            replicas,
            steps_taken: 0,
        })
    }

    pub fn replicas(&self) -> &[Replica] {
        &self.replicas
    }

    /// Scheduler steps taken after initialization.
    pub fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    /// Total jumps over all replicas, init included.
    pub fn total_jumps(&self) -> u64 {
        self.replicas.iter().map(|r| r.n()).sum()
    }

    /// Signed occupation ratios x_i / n_i.
    pub fn ratios(&self) -> Vec<f64> {
        self.replicas
            .iter()
            .map(|r| r.x as f64 / r.n() as f64)
            .collect()
    }
}

/// How the influencer's contribution is drawn in `rmf_step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmfMode {
    /// Recall an explicit index from the influencer's record.
    History,
    /// Draw from the influencer's position-time law directly.
    Marginal,
}

/// All replicas take their first fair +-1 jump, in index order.
pub fn rmf_init(m_replicas: usize, rng: &mut SplitMix64) -> Result<RmfState> {
    if m_replicas < 2 {
        return Err(Error::ReplicaCount { m: m_replicas });
    }
    let replicas = (0..m_replicas)
        .map(|_| {
            let step = rng.sign();
            Replica {
                x: step as i64,
                history: StepHistory::from_steps(&[step]).unwrap(),
            }
        })
        .collect();
    Ok(RmfState {
        replicas,
        steps_taken: 0,
    })
}

/// Advances exactly one replica. Draw order: mover, influencer (never the
/// mover itself), then either a remembered index plus the copy/reverse coin
/// (History) or the influencer's one-step law (Marginal).
pub fn rmf_step(state: &mut RmfState, params: &RmfParams, mode: RmfMode, rng: &mut SplitMix64) {
    let m = state.replicas.len();
    debug_assert_eq!(m, params.m_replicas);
    let mover = rng.below(m as u64) as usize;
    let raw = rng.below(m as u64 - 1) as usize;
    let influencer = raw + usize::from(raw >= mover);
    let step = match mode {
        RmfMode::History => {
            let record = &state.replicas[influencer].history;
            let recalled = record.get(rng.below(record.len()));
            if rng.bernoulli(params.p) {
                recalled
            } else {
                -recalled
            }
        }
        RmfMode::Marginal => {
            let infl = &state.replicas[influencer];
            let nf = infl.n() as f64;
            let up = (infl.x as f64 * (2.0 * params.p - 1.0) + nf) / (2.0 * nf);
            if rng.bernoulli(up) {
                1
            } else {
                -1
            }
        }
    };
    state.replicas[mover].push(step);
    state.steps_taken += 1;
}

/// A completed system run with its terminal occupation ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct RmfRun {
    pub state: RmfState,
    pub signed_ratios: Vec<f64>,
    pub abs_ratios: Vec<f64>,
    pub mean_signed_ratio: f64,
    pub mean_abs_ratio: f64,
}

/// Initializes and advances the system for `total_steps` scheduler steps,
/// reporting both signed and absolute terminal ratios.
pub fn rmf_run(params: &RmfParams, mode: RmfMode, rng: &mut SplitMix64) -> Result<RmfRun> {
    let mut state = rmf_init(params.m_replicas, rng)?;
    for _ in 0..params.total_steps {
        rmf_step(&mut state, params, mode, rng);
    }
    let signed_ratios = state.ratios();
    let abs_ratios: Vec<f64> = signed_ratios.iter().map(|r| r.abs()).collect();
    let m = signed_ratios.len() as f64;
    let mean_signed_ratio = signed_ratios.iter().sum::<f64>() / m;
    let mean_abs_ratio = abs_ratios.iter().sum::<f64>() / m;
    Ok(RmfRun {
        state,
        signed_ratios,
        abs_ratios,
        mean_signed_ratio,
        mean_abs_ratio,
    })
}

/// Uniform-in-time bound on the expected occupation ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmfBound {
    pub p: f64,
    pub value: f64,
}

/// sup_n E[|x|/n] bound: 1 / (2(1-2p)) in the strongly reversing regime
/// p < 1/4, and 1 / (2(2p-1)) in the strongly copying regime p >= 3/4.
/// Undefined between the two.
pub fn rmf_bound(p: f64) -> Result<RmfBound> {
    check_probability("p", p)?;
    let value = if p < 0.25 {
        1.0 / (2.0 * (1.0 - 2.0 * p))
    } else if p >= 0.75 {
        1.0 / (2.0 * (2.0 * p - 1.0))
    } else {
        return Err(Error::ParamRegime {
            what: "replica occupation-ratio bound",
            value: p,
        });
    };
    Ok(RmfBound { p, value })
}

/// Largest step budget `rmf_exact_small` will enumerate.
pub const MAX_EXACT_RMF_STEPS: u64 = 10;

/// Joint law of ((x_1, n_1), (x_2, n_2)) for the two-replica system.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    p: f64,
    steps: u64,
    mass: BTreeMap<(i64, u64, i64, u64), f64>,
}

impl JointPmf {
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn mass(&self) -> &BTreeMap<(i64, u64, i64, u64), f64> {
        &self.mass
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.values().sum()
    }

    /// Total variation distance to an empirical joint distribution given as
    /// key counts out of `total` runs.
    pub fn tv_distance_counts(
        &self,
        counts: &BTreeMap<(i64, u64, i64, u64), u64>,
        total: u64,
    ) -> f64 {
        let t = total as f64;
        let mut sum = 0.0;
        for (key, &mass) in &self.mass {
            let emp = counts.get(key).copied().unwrap_or(0) as f64 / t;
            sum += (mass - emp).abs();
        }
        for (key, &c) in counts {
            if !self.mass.contains_key(key) {
                sum += c as f64 / t;
            }
        }
        0.5 * sum
    }
}

// Configurations are full history pairs packed as
// bits1 | len1 | bits2 | len2 (16 + 8 + 16 + 8 bits); history lengths stay
// below 16 within the enumeration cap.
fn pack(bits1: u64, len1: u64, bits2: u64, len2: u64) -> u64 {
    debug_assert!(len1 < 16 && len2 < 16);
    (bits1 << 32) | (len1 << 24) | (bits2 << 8) | len2
}

fn unpack(key: u64) -> (u64, u64, u64, u64) {
    (
        key >> 32,
        (key >> 24) & 0xFF,
        (key >> 8) & 0xFFFF,
        key & 0xFF,
    )
}

/// Exact joint law of the two-replica system after `steps` scheduler steps,
/// by dynamic programming over full history configurations.
///
/// The step distribution is accumulated from the recall rule itself (count
/// the influencer's matching steps, weight by p versus 1-p), so this does
/// not share a code path with either sampler.
pub fn rmf_exact_small(p: f64, steps: u64) -> Result<JointPmf> {
    check_probability("p", p)?;
    if steps > MAX_EXACT_RMF_STEPS {
        return Err(Error::EnumerationCap {
            what: "replica joint distribution steps",
            requested: steps,
            max: MAX_EXACT_RMF_STEPS,
        });
    }
    // init: each replica holds one fair sign
    let mut level: BTreeMap<u64, f64> = BTreeMap::new();
    for bits1 in 0..2u64 {
        for bits2 in 0..2u64 {
            level.insert(pack(bits1, 1, bits2, 1), 0.25);
        }
    }
    for _ in 0..steps {
        let mut next: BTreeMap<u64, f64> = BTreeMap::new();
        for (&key, &prob) in &level {
            let (bits1, len1, bits2, len2) = unpack(key);
            // mover 1 guided by replica 2, and vice versa, each with
            // scheduler probability 1/2
            for mover in 0..2 {
                let (m_bits, m_len, g_bits, g_len) = if mover == 0 {
                    (bits1, len1, bits2, len2)
                } else {
                    (bits2, len2, bits1, len1)
                };
                let ones = (g_bits & ((1 << g_len) - 1)).count_ones() as f64;
                let n = g_len as f64;
                // P[step = +1] averaged over the recalled index
                let up = (ones * p + (n - ones) * (1.0 - p)) / n;
                for (step_bit, step_prob) in [(1u64, up), (0u64, 1.0 - up)] {
                    if step_prob == 0.0 {
                        continue;
                    }
                    let new_bits = m_bits | (step_bit << m_len);
                    let new_key = if mover == 0 {
                        pack(new_bits, m_len + 1, g_bits, g_len)
                    } else {
                        pack(g_bits, g_len, new_bits, m_len + 1)
                    };
                    *next.entry(new_key).or_insert(0.0) += prob * 0.5 * step_prob;
                }
            }
        }
        level = next;
    }
    // aggregate histories into (x, n) per replica
    let mut mass: BTreeMap<(i64, u64, i64, u64), f64> = BTreeMap::new();
    for (&key, &prob) in &level {
        let (bits1, len1, bits2, len2) = unpack(key);
        let x1 = 2 * (bits1.count_ones() as i64) - len1 as i64;
        let x2 = 2 * (bits2.count_ones() as i64) - len2 as i64;
        *mass.entry((x1, len1, x2, len2)).or_insert(0.0) += prob;
    }
    Ok(JointPmf { p, steps, mass })
}

/// Average pairwise correlation of the signed ratios across replicas, from
/// several independent runs (rows = runs, columns = replicas). None when
/// there are too few runs or replicas, or the ratios are degenerate.
pub fn replica_ratio_correlation(ratio_rows: &[Vec<f64>]) -> Option<f64> {
    let runs = ratio_rows.len();
    if runs < 2 {
        return None;
    }
    let m = ratio_rows[0].len();
    if m < 2 || ratio_rows.iter().any(|r| r.len() != m) {
        return None;
    }
    let rf = runs as f64;
    let col_means: Vec<f64> = (0..m)
        .map(|j| ratio_rows.iter().map(|r| r[j]).sum::<f64>() / rf)
        .collect();
    let col_vars: Vec<f64> = (0..m)
        .map(|j| {
            ratio_rows
                .iter()
                .map(|r| (r[j] - col_means[j]).powi(2))
                .sum::<f64>()
                / (rf - 1.0)
        })
        .collect();
    let sum_mean: f64 = col_means.iter().sum();
    let sum_var = ratio_rows
        .iter()
        .map(|r| (r.iter().sum::<f64>() - sum_mean).powi(2))
        .sum::<f64>()
        / (rf - 1.0);
    let total_var: f64 = col_vars.iter().sum();
    let avg_var = total_var / m as f64;
    if avg_var <= 0.0 {
        return None;
    }
    let avg_cov = (sum_var - total_var) / (m * (m - 1)) as f64;
    Some(avg_cov / avg_var)
}
