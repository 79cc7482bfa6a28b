//! Exact small-horizon distributions by brute-force path enumeration.
//!
//! `exact_distribution` walks all 2^n sign sequences and accumulates their
//! probabilities from the recall-and-copy rule directly: each remembered
//! step contributes p if the candidate step copies it and 1-p if it reverses
//! it, averaged over the n recorded steps. No closed-form kernel is
//! involved, so this is an independent reference for the samplers and for
//! the position-time chain law.

use crate::error::{Error, Result};
use crate::walk::{on_lattice, WalkParams};

/// Horizons above this would enumerate more than 2^20 paths.
pub const MAX_EXACT_HORIZON: u64 = 20;

/// Distribution of the position after exactly `n` steps, on the lattice
/// {-n, -n+2, ..., n}.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    n: u64,
    mass: Vec<f64>,
}

impl Pmf {
    fn zeroed(n: u64) -> Self {
        Pmf {
            n,
            mass: vec![0.0; n as usize + 1],
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Support positions in increasing order, aligned with `masses`.
    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        let n = self.n as i64;
        (0..=n).map(move |i| 2 * i - n)
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn entries(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.support().zip(self.mass.iter().copied())
    }

    /// Mass at position x; zero off the lattice.
    pub fn mass_at(&self, x: i64) -> f64 {
        if !on_lattice(x, self.n) {
            return 0.0;
        }
        self.mass[((x + self.n as i64) / 2) as usize]
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.entries().map(|(x, m)| x as f64 * m).sum()
    }

    /// Empirical distribution of observed final positions at horizon n.
    pub fn empirical(n: u64, finals: &[i64]) -> Result<Pmf> {
        if finals.is_empty() {
            return Err(Error::ZeroTrials);
        }
        let mut pmf = Pmf::zeroed(n);
        let weight = 1.0 / finals.len() as f64;
        for &x in finals {
            if !on_lattice(x, n) {
                return Err(Error::OffLattice { x, n });
            }
            pmf.mass[((x + n as i64) / 2) as usize] += weight;
        }
        Ok(pmf)
    }

    /// Total variation distance. Panics if the horizons differ.
    pub fn tv_distance(&self, other: &Pmf) -> f64 {
        assert_eq!(self.n, other.n, "distributions live on different lattices");
        0.5 * self
            .mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

/// Exact law of the position after n steps, 1 <= n <= 20.
pub fn exact_distribution(params: &WalkParams, n: u64) -> Result<Pmf> {
    if n == 0 {
        return Err(Error::ZeroSteps);
    }
    if n > MAX_EXACT_HORIZON {
        return Err(Error::EnumerationCap {
            what: "exact distribution horizon",
            requested: n,
            max: MAX_EXACT_HORIZON,
        });
    }
    let mut pmf = Pmf::zeroed(n);
    let mut steps: Vec<i8> = Vec::with_capacity(n as usize);
    extend_paths(&mut steps, 1.0, n as usize, params, &mut pmf);
    Ok(pmf)
}

fn extend_paths(
    steps: &mut Vec<i8>,
    prob: f64,
    horizon: usize,
    params: &WalkParams,
    pmf: &mut Pmf,
) {
    if steps.len() == horizon {
        let x: i64 = steps.iter().map(|&s| s as i64).sum();
        pmf.mass[((x + horizon as i64) / 2) as usize] += prob;
        return;
    }
    let m = steps.len();
    for cand in [1i8, -1] {
        let step_prob = if m == 0 {
            if cand == 1 {
                params.r()
            } else {
                1.0 - params.r()
            }
        } else {
            // average over which recorded step gets recalled
            let mut total = 0.0;
            for &past in steps.iter() {
                total += if past == cand {
                    params.p()
                } else {
                    1.0 - params.p()
                };
            }
            total / m as f64
        };
        if step_prob == 0.0 {
            continue;
        }
        steps.push(cand);
        extend_paths(steps, prob * step_prob, horizon, params, pmf);
        steps.pop();
    }
}
