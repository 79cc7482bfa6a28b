//! Experiment configuration: a flat JSON object with an "experiment"
//! selector plus that experiment's scalar parameters. Unknown keys are
//! rejected, every diagnostic names the key it is about, and all domain
//! preconditions are checked here, before any simulation work starts.

use serde_json::{Map, Value};

use crate::CliError;
use erw::oracle::MAX_EXACT_HORIZON;
use erw::rmf::RmfParams;
use erw::walk::WalkParams;

/// Step-sampling strategy selector shared by `simulate` and `rmf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Marginal,
    History,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Marginal => "marginal",
            Mode::History => "history",
        }
    }
}

/// A fully validated experiment request.
#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentConfig {
    /// Raw sampled trajectories, one row per (trial, step).
    Simulate {
        p: f64,
        r: f64,
        steps: u64,
        trials: u64,
        mode: Mode,
        master_seed: u64,
    },
    /// Exact position distribution at a small horizon.
    Exact { p: f64, r: f64, horizon: u64 },
    /// E[X_n] for n = 1..=n_max from the moment recursion.
    Moments { p: f64, r: f64, n_max: u64 },
    /// Hitting times of zero from (start_time, start_x).
    Hitting {
        p: f64,
        start_time: u64,
        start_x: i64,
        cap: u64,
        trials: u64,
        master_seed: u64,
        compare_bound: bool,
    },
    /// No-return fractions at nested horizons over shared paths.
    Curve {
        p: f64,
        r: f64,
        horizons: Vec<u64>,
        trials: u64,
        master_seed: u64,
    },
    /// Scaled-martingale mass at a horizon (superdiffusive regime).
    Transience {
        p: f64,
        r: f64,
        horizon: u64,
        trials: u64,
        epsilon: f64,
        master_seed: u64,
    },
    /// Per-path occupation and iterated-logarithm diagnostics.
    Lil {
        p: f64,
        r: f64,
        horizon: u64,
        trials: u64,
        master_seed: u64,
    },
    /// Replica mean-field runs.
    Rmf {
        replicas: usize,
        p: f64,
        total_steps: u64,
        runs: u64,
        mode: Mode,
        master_seed: u64,
    },
}

impl ExperimentConfig {
    pub fn experiment_name(&self) -> &'static str {
        match self {
            ExperimentConfig::Simulate { .. } => "simulate",
            ExperimentConfig::Exact { .. } => "exact",
            ExperimentConfig::Moments { .. } => "moments",
            ExperimentConfig::Hitting { .. } => "hitting",
            ExperimentConfig::Curve { .. } => "curve",
            ExperimentConfig::Transience { .. } => "transience",
            ExperimentConfig::Lil { .. } => "lil",
            ExperimentConfig::Rmf { .. } => "rmf",
        }
    }

    /// Flat JSON echo of the config, defaults filled in. Parsing it back
    /// yields the same config.
    pub fn to_flat_json(&self) -> Map<String, Value> {
        let mut map = Map::new();
        let mut put = |k: &str, v: Value| {
            map.insert(k.to_string(), v);
        };
        put("experiment", Value::from(self.experiment_name()));
        match self {
            ExperimentConfig::Simulate {
                p,
                r,
                steps,
                trials,
                mode,
                master_seed,
            } => {
                put("p", Value::from(*p));
                put("r", Value::from(*r));
                put("steps", Value::from(*steps));
                put("trials", Value::from(*trials));
                put("mode", Value::from(mode.as_str()));
                put("master_seed", Value::from(*master_seed));
            }
            ExperimentConfig::Exact { p, r, horizon } => {
                put("p", Value::from(*p));
                put("r", Value::from(*r));
                put("horizon", Value::from(*horizon));
            }
            ExperimentConfig::Moments { p, r, n_max } => {
                put("p", Value::from(*p));
                put("r", Value::from(*r));
                put("n_max", Value::from(*n_max));
            }
            ExperimentConfig::Hitting {
                p,
                start_time,
                start_x,
                cap,
                trials,
                master_seed,
                compare_bound,
            } => {
                put("p", Value::from(*p));
                put("start_time", Value::from(*start_time));
                put("start_x", Value::from(*start_x));
                put("cap", Value::from(*cap));
                put("trials", Value::from(*trials));
                put("master_seed", Value::from(*master_seed));
                put("compare_bound", Value::from(*compare_bound));
            }
            ExperimentConfig::Curve {
                p,
                r,
                horizons,
                trials,
                master_seed,
            } => {
                put("p", Value::from(*p));
                put("r", Value::from(*r));
                let joined = horizons
                    .iter()
                    .map(|h| h.to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                put("horizons", Value::from(joined));
                put("trials", Value::from(*trials));
                put("master_seed", Value::from(*master_seed));
            }
            ExperimentConfig::Transience {
                p,
                r,
                horizon,
                trials,
                epsilon,
                master_seed,
            } => {
                put("p", Value::from(*p));
                put("r", Value::from(*r));
                put("horizon", Value::from(*horizon));
                put("trials", Value::from(*trials));
                put("epsilon", Value::from(*epsilon));
                put("master_seed", Value::from(*master_seed));
            }
            ExperimentConfig::Lil {
                p,
                r,
                horizon,
                trials,
                master_seed,
            } => {
                put("p", Value::from(*p));
                put("r", Value::from(*r));
                put("horizon", Value::from(*horizon));
                put("trials", Value::from(*trials));
                put("master_seed", Value::from(*master_seed));
            }
            ExperimentConfig::Rmf {
                replicas,
                p,
                total_steps,
                runs,
                mode,
                master_seed,
            } => {
                put("replicas", Value::from(*replicas as u64));
                put("p", Value::from(*p));
                put("total_steps", Value::from(*total_steps));
                put("runs", Value::from(*runs));
                put("mode", Value::from(mode.as_str()));
                put("master_seed", Value::from(*master_seed));
            }
        }
        map
    }
}

/// Key-at-a-time reader over the flat config object. Every getter removes
/// its key; whatever remains at the end is reported as unknown.
struct KeyReader {
    map: Map<String, Value>,
}

type ConfigResult<T> = Result<T, CliError>;

fn bad(msg: String) -> CliError {
    CliError::Config(msg)
}

impl KeyReader {
    fn new(text: &str) -> ConfigResult<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| bad(format!("config is not valid JSON: {e}")))?;
        match value {
            Value::Object(map) => Ok(KeyReader { map }),
            other => Err(bad(format!(
                "config must be a JSON object, got {}",
                kind_name(&other)
            ))),
        }
    }

    fn take(&mut self, key: &str) -> ConfigResult<Value> {
        let v = self
            .map
            .remove(key)
            .ok_or_else(|| bad(format!("missing required config key \"{key}\"")))?;
        if v.is_array() || v.is_object() || v.is_null() {
            return Err(bad(format!(
                "config key \"{key}\" must be a scalar, got {}",
                kind_name(&v)
            )));
        }
        Ok(v)
    }

    fn take_opt(&mut self, key: &str) -> ConfigResult<Option<Value>> {
        match self.map.remove(key) {
            None => Ok(None),
            Some(v) if v.is_array() || v.is_object() || v.is_null() => Err(bad(format!(
                "config key \"{key}\" must be a scalar, got {}",
                kind_name(&v)
            ))),
            Some(v) => Ok(Some(v)),
        }
    }

    fn str(&mut self, key: &str) -> ConfigResult<String> {
        match self.take(key)? {
            Value::String(s) => Ok(s),
            other => Err(bad(format!(
                "config key \"{key}\" must be a string, got {}",
                kind_name(&other)
            ))),
        }
    }

    fn u64(&mut self, key: &str) -> ConfigResult<u64> {
        let v = self.take(key)?;
        v.as_u64().ok_or_else(|| {
            bad(format!(
                "config key \"{key}\" must be a non-negative integer, got {v}"
            ))
        })
    }

    fn i64(&mut self, key: &str) -> ConfigResult<i64> {
        let v = self.take(key)?;
        v.as_i64()
            .ok_or_else(|| bad(format!("config key \"{key}\" must be an integer, got {v}")))
    }

    fn f64(&mut self, key: &str) -> ConfigResult<f64> {
        let v = self.take(key)?;
        v.as_f64()
            .ok_or_else(|| bad(format!("config key \"{key}\" must be a number, got {v}")))
    }

    fn f64_opt(&mut self, key: &str) -> ConfigResult<Option<f64>> {
        match self.take_opt(key)? {
            None => Ok(None),
            Some(v) => v
                .as_f64()
                .map(Some)
                .ok_or_else(|| bad(format!("config key \"{key}\" must be a number, got {v}"))),
        }
    }

    fn prob(&mut self, key: &str) -> ConfigResult<f64> {
        let v = self.f64(key)?;
        if !(0.0..=1.0).contains(&v) {
            return Err(bad(format!(
                "config key \"{key}\": {v} is not a probability (must lie in [0, 1])"
            )));
        }
        Ok(v)
    }

    fn bool_opt(&mut self, key: &str) -> ConfigResult<Option<bool>> {
        match self.take_opt(key)? {
            None => Ok(None),
            Some(Value::Bool(b)) => Ok(Some(b)),
            Some(other) => Err(bad(format!(
                "config key \"{key}\" must be a boolean, got {}",
                kind_name(&other)
            ))),
        }
    }

    fn mode_opt(&mut self, key: &str) -> ConfigResult<Mode> {
        match self.take_opt(key)? {
            None => Ok(Mode::Marginal),
            Some(Value::String(s)) => match s.as_str() {
                "marginal" => Ok(Mode::Marginal),
                "history" => Ok(Mode::History),
                other => Err(bad(format!(
                    "config key \"{key}\" must be \"marginal\" or \"history\", got \"{other}\""
                ))),
            },
            Some(other) => Err(bad(format!(
                "config key \"{key}\" must be a string, got {}",
                kind_name(&other)
            ))),
        }
    }

    /// Comma-separated positive integers, e.g. "10,100,1000".
    fn horizon_list(&mut self, key: &str) -> ConfigResult<Vec<u64>> {
        let raw = self.str(key)?;
        raw.split(',')
            .map(|part| {
                part.trim().parse::<u64>().map_err(|_| {
                    bad(format!(
                        "config key \"{key}\": \"{part}\" is not a positive integer"
                    ))
                })
            })
            .collect()
    }

    fn finish(self, experiment: &str) -> ConfigResult<()> {
        if self.map.is_empty() {
            return Ok(());
        }
        let mut keys: Vec<&str> = self.map.keys().map(|k| k.as_str()).collect();
        keys.sort_unstable();
        Err(bad(format!(
            "unknown config key(s) for experiment \"{experiment}\": {}",
            keys.join(", ")
        )))
    }
}

fn kind_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn positive(value: u64, key: &str) -> ConfigResult<u64> {
    if value == 0 {
        return Err(CliError::Domain(format!(
            "config key \"{key}\" must be at least 1"
        )));
    }
    Ok(value)
}

/// Parses and fully validates a JSON experiment config. A config that comes
/// back Ok will not fail validation again at run time.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let mut reader = KeyReader::new(text)?;
    let experiment = reader.str("experiment")?;
    let config = match experiment.as_str() {
        "simulate" => {
            let p = reader.prob("p")?;
            let r = reader.prob("r")?;
            let steps = positive(reader.u64("steps")?, "steps")?;
            let trials = positive(reader.u64("trials")?, "trials")?;
            let mode = reader.mode_opt("mode")?;
            let master_seed = reader.u64("master_seed")?;
            WalkParams::new(p, r)?;
            ExperimentConfig::Simulate {
                p,
                r,
                steps,
                trials,
                mode,
                master_seed,
            }
        }
        "exact" => {
            let p = reader.prob("p")?;
            let r = reader.prob("r")?;
            let horizon = positive(reader.u64("horizon")?, "horizon")?;
            WalkParams::new(p, r)?;
            if horizon > MAX_EXACT_HORIZON {
                return Err(CliError::Resource(format!(
                    "exact distribution horizon {horizon} exceeds the enumeration cap of {MAX_EXACT_HORIZON}"
                )));
            }
            ExperimentConfig::Exact { p, r, horizon }
        }
        "moments" => {
            let p = reader.prob("p")?;
            let r = reader.prob("r")?;
            let n_max = positive(reader.u64("n_max")?, "n_max")?;
            WalkParams::new(p, r)?;
            ExperimentConfig::Moments { p, r, n_max }
        }
        "hitting" => {
            let p = reader.prob("p")?;
            let start_time = reader.u64("start_time")?;
            let start_x = reader.i64("start_x")?;
            let cap = positive(reader.u64("cap")?, "cap")?;
            let trials = positive(reader.u64("trials")?, "trials")?;
            let master_seed = reader.u64("master_seed")?;
            let compare_bound = reader.bool_opt("compare_bound")?.unwrap_or(false);
            WalkParams::new(p, 0.5)?;
            validate_hitting_start(start_time, start_x)?;
            if compare_bound {
                // fails for p >= 1/6, where no mean bound exists
                erw::stats::bound_positive_recurrence(p, start_x)?;
            }
            ExperimentConfig::Hitting {
                p,
                start_time,
                start_x,
                cap,
                trials,
                master_seed,
                compare_bound,
            }
        }
        "curve" => {
            let p = reader.prob("p")?;
            let r = reader.prob("r")?;
            let horizons = reader.horizon_list("horizons")?;
            let trials = positive(reader.u64("trials")?, "trials")?;
            let master_seed = reader.u64("master_seed")?;
            WalkParams::new(p, r)?;
            if horizons.is_empty() || horizons[0] == 0 || horizons.windows(2).any(|w| w[0] >= w[1])
            {
                return Err(CliError::from(erw::Error::HorizonsNotIncreasing));
            }
            ExperimentConfig::Curve {
                p,
                r,
                horizons,
                trials,
                master_seed,
            }
        }
        "transience" => {
            let p = reader.prob("p")?;
            let r = reader.prob("r")?;
            let horizon = positive(reader.u64("horizon")?, "horizon")?;
            let trials = positive(reader.u64("trials")?, "trials")?;
            let epsilon = reader.f64_opt("epsilon")?.unwrap_or(0.01);
            let master_seed = reader.u64("master_seed")?;
            WalkParams::new(p, r)?;
            if p <= 0.75 {
                return Err(CliError::Domain(format!(
                    "transience mass estimate is not defined at parameter value {p} (needs p > 3/4)"
                )));
            }
            if !epsilon.is_finite() || epsilon <= 0.0 {
                return Err(CliError::Domain(format!(
                    "config key \"epsilon\" must be a positive number, got {epsilon}"
                )));
            }
            ExperimentConfig::Transience {
                p,
                r,
                horizon,
                trials,
                epsilon,
                master_seed,
            }
        }
        "lil" => {
            let p = reader.prob("p")?;
            let r = reader.prob("r")?;
            let horizon = positive(reader.u64("horizon")?, "horizon")?;
            let trials = positive(reader.u64("trials")?, "trials")?;
            let master_seed = reader.u64("master_seed")?;
            WalkParams::new(p, r)?;
            ExperimentConfig::Lil {
                p,
                r,
                horizon,
                trials,
                master_seed,
            }
        }
        "rmf" => {
            let replicas = reader.u64("replicas")?;
            let p = reader.prob("p")?;
            let total_steps = reader.u64("total_steps")?;
            let runs = positive(reader.u64("runs")?, "runs")?;
            let mode = reader.mode_opt("mode")?;
            let master_seed = reader.u64("master_seed")?;
            let replicas = usize::try_from(replicas)
                .map_err(|_| bad(format!("config key \"replicas\": {replicas} is too large")))?;
            RmfParams::new(replicas, p, total_steps)?;
            ExperimentConfig::Rmf {
                replicas,
                p,
                total_steps,
                runs,
                mode,
                master_seed,
            }
        }
        other => {
            return Err(bad(format!(
                "unknown experiment \"{other}\" (expected one of: simulate, exact, moments, \
                 hitting, curve, transience, lil, rmf)"
            )));
        }
    };
    reader.finish(config.experiment_name())?;
    Ok(config)
}

fn validate_hitting_start(start_time: u64, start_x: i64) -> Result<(), CliError> {
    if start_time == 0 {
        return Err(CliError::from(erw::Error::NotStarted));
    }
    if start_x == 0 {
        return Err(CliError::from(erw::Error::StartAtZero));
    }
    if start_x.unsigned_abs() > start_time || (start_x - start_time as i64) % 2 != 0 {
        return Err(CliError::from(erw::Error::OffLattice {
            x: start_x,
            n: start_time,
        }));
    }
    Ok(())
}
