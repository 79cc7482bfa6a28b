//! Turns a validated config into a result table. Trial-parallel experiments
//! fan out over rayon but collect in trial order and aggregate
//! sequentially, so the table is identical for any worker count.

use rayon::prelude::*;

use crate::config::{ExperimentConfig, Mode};
use crate::table::{Cell, ResultTable};
use crate::CliError;
use erw::analysis::{mean_sequence, scaling_value};
use erw::oracle::exact_distribution;
use erw::rmf::{replica_ratio_correlation, rmf_bound, rmf_run, RmfMode, RmfParams};
use erw::rng::{SplitMix64, Streams};
use erw::stats::{
    bound_positive_recurrence, curve_from_first_hits, first_zero_hit, hitting_time_trial,
    path_diagnostics, summarize, summarize_hitting, summarize_transience, transience_mass_trial,
};
use erw::walk::{sample_trajectory, SampleMode, UniformMemory, WalkParams};

/// Maps each trial index to its own pseudo-random stream and runs them in
/// parallel, preserving trial order in the result.
pub fn par_trials<T, F>(trials: u64, streams: &Streams, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut SplitMix64) -> T + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|trial| work(trial, &mut streams.stream(trial)))
        .collect()
}

impl From<Mode> for SampleMode {
    fn from(mode: Mode) -> Self {
        match mode {
            Mode::Marginal => SampleMode::Marginal,
            Mode::History => SampleMode::History,
        }
    }
}

impl From<Mode> for RmfMode {
    fn from(mode: Mode) -> Self {
        match mode {
            Mode::Marginal => RmfMode::Marginal,
            Mode::History => RmfMode::History,
        }
    }
}

/// Executes the experiment and builds its result table.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable, CliError> {
    let echo = config.to_flat_json();
    match *config {
        ExperimentConfig::Simulate {
            p,
            r,
            steps,
            trials,
            mode,
            master_seed,
        } => {
            let params = WalkParams::new(p, r)?;
            let streams = Streams::new(master_seed);
            let sample_mode = SampleMode::from(mode);
            let paths: Vec<Result<Vec<i64>, erw::Error>> =
                par_trials(trials, &streams, |_, rng| {
                    sample_trajectory(&params, steps, sample_mode, &UniformMemory, rng)
                        .map(|t| t.positions().collect())
                });
            let mut table = ResultTable::new(vec!["trial", "n", "x"], echo);
            for (trial, path) in paths.into_iter().enumerate() {
                for (idx, x) in path?.into_iter().enumerate() {
                    table.push_row(vec![
                        Cell::UInt(trial as u64),
                        Cell::UInt(idx as u64 + 1),
                        Cell::Int(x),
                    ]);
                }
            }
            Ok(table)
        }
        ExperimentConfig::Exact { p, r, horizon } => {
            let params = WalkParams::new(p, r)?;
            let pmf = exact_distribution(&params, horizon)?;
            let mut table = ResultTable::new(vec!["x", "mass"], echo);
            for (x, mass) in pmf.entries() {
                table.push_row(vec![Cell::Int(x), Cell::Float(mass)]);
            }
            Ok(table)
        }
        ExperimentConfig::Moments { p, r, n_max } => {
            let params = WalkParams::new(p, r)?;
            let means = mean_sequence(&params, n_max);
            let mut table = ResultTable::new(vec!["n", "mean"], echo);
            for (idx, mean) in means.into_iter().enumerate() {
                table.push_row(vec![Cell::UInt(idx as u64 + 1), Cell::Float(mean)]);
            }
            Ok(table)
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
            let params = WalkParams::new(p, 0.5)?;
            let streams = Streams::new(master_seed);
            let samples = par_trials(trials, &streams, |_, rng| {
                hitting_time_trial(&params, start_time, start_x, cap, rng)
            });
            let samples: Vec<_> = samples.into_iter().collect::<Result<_, _>>()?;
            let s = summarize_hitting(&samples);
            let mut columns = vec![
                "count",
                "mean",
                "stderr",
                "ci_low",
                "ci_high",
                "censored_count",
            ];
            if compare_bound {
                columns.push("bound");
            }
            let mut table = ResultTable::new(columns, echo);
            let mut row = vec![
                Cell::UInt(s.count),
                Cell::Float(s.mean),
                Cell::Float(s.stderr),
                Cell::Float(s.ci_low),
                Cell::Float(s.ci_high),
                Cell::UInt(s.censored_count),
            ];
            if compare_bound {
                row.push(Cell::Float(bound_positive_recurrence(p, start_x)?));
            }
            table.push_row(row);
            Ok(table)
        }
        ExperimentConfig::Curve {
            p,
            r,
            ref horizons,
            trials,
            master_seed,
        } => {
            let params = WalkParams::new(p, r)?;
            let streams = Streams::new(master_seed);
            let longest = *horizons.last().expect("validated non-empty");
            let hits = par_trials(trials, &streams, |_, rng| {
                first_zero_hit(&params, longest, rng)
            });
            let mut table = ResultTable::new(vec!["horizon", "no_return_fraction"], echo);
            for point in curve_from_first_hits(&hits, horizons) {
                table.push_row(vec![
                    Cell::UInt(point.horizon),
                    Cell::Float(point.no_return_fraction),
                ]);
            }
            Ok(table)
        }
        ExperimentConfig::Transience {
            p,
            r,
            horizon,
            trials,
            epsilon,
            master_seed,
        } => {
            let params = WalkParams::new(p, r)?;
            if p <= 0.75 {
                return Err(CliError::from(erw::Error::ParamRegime {
                    what: "transience mass estimate",
                    value: p,
                }));
            }
            let scale = scaling_value(p, horizon)?;
            let streams = Streams::new(master_seed);
            let masses = par_trials(trials, &streams, |_, rng| {
                transience_mass_trial(&params, horizon, scale, rng)
            });
            let est = summarize_transience(&masses, horizon, epsilon);
            let mut table = ResultTable::new(
                vec![
                    "horizon",
                    "count",
                    "mean",
                    "stderr",
                    "ci_low",
                    "ci_high",
                    "mean_abs",
                    "frac_above_epsilon",
                ],
                echo,
            );
            table.push_row(vec![
                Cell::UInt(est.horizon),
                Cell::UInt(est.summary.count),
                Cell::Float(est.summary.mean),
                Cell::Float(est.summary.stderr),
                Cell::Float(est.summary.ci_low),
                Cell::Float(est.summary.ci_high),
                Cell::Float(est.mean_abs),
                Cell::Float(est.frac_above_epsilon),
            ]);
            Ok(table)
        }
        ExperimentConfig::Lil {
            p,
            r,
            horizon,
            trials,
            master_seed,
        } => {
            let params = WalkParams::new(p, r)?;
            let streams = Streams::new(master_seed);
            let diags: Vec<Result<erw::stats::PathDiagnostics, erw::Error>> =
                par_trials(trials, &streams, |_, rng| {
                    sample_trajectory(&params, horizon, SampleMode::Marginal, &UniformMemory, rng)
                        .map(|t| path_diagnostics(&t))
                });
            let mut table = ResultTable::new(
                vec![
                    "path",
                    "zero_hits",
                    "last_return",
                    "sign_changes",
                    "max_lil_stat",
                    "max_lil_critical",
                ],
                echo,
            );
            for (idx, diag) in diags.into_iter().enumerate() {
                let d = diag?;
                table.push_row(vec![
                    Cell::UInt(idx as u64),
                    Cell::UInt(d.zero_hits),
                    Cell::opt_u64(d.last_return),
                    Cell::UInt(d.sign_changes),
                    Cell::opt_f64(d.max_lil_stat),
                    Cell::opt_f64(d.max_lil_critical),
                ]);
            }
            Ok(table)
        }
        ExperimentConfig::Rmf {
            replicas,
            p,
            total_steps,
            runs,
            mode,
            master_seed,
        } => {
            let params = RmfParams::new(replicas, p, total_steps)?;
            let streams = Streams::new(master_seed);
            let rmf_mode = RmfMode::from(mode);
            let results = par_trials(runs, &streams, |_, rng| {
                rmf_run(&params, rmf_mode, rng)
                    .map(|run| (run.mean_signed_ratio, run.mean_abs_ratio, run.signed_ratios))
            });
            let mut table =
                ResultTable::new(vec!["run", "mean_signed_ratio", "mean_abs_ratio"], echo);
            let mut signed = Vec::with_capacity(runs as usize);
            let mut abs = Vec::with_capacity(runs as usize);
            let mut ratio_rows = Vec::with_capacity(runs as usize);
            for (idx, result) in results.into_iter().enumerate() {
                let (mean_signed, mean_abs, ratios) = result?;
                table.push_row(vec![
                    Cell::UInt(idx as u64),
                    Cell::Float(mean_signed),
                    Cell::Float(mean_abs),
                ]);
                signed.push(mean_signed);
                abs.push(mean_abs);
                ratio_rows.push(ratios);
            }
            let signed_summary = summarize(&signed);
            let abs_summary = summarize(&abs);
            table.push_summary("runs", Cell::UInt(runs));
            table.push_summary("signed_ratio_mean", Cell::Float(signed_summary.mean));
            table.push_summary("signed_ratio_stderr", Cell::Float(signed_summary.stderr));
            table.push_summary("abs_ratio_mean", Cell::Float(abs_summary.mean));
            table.push_summary("abs_ratio_stderr", Cell::Float(abs_summary.stderr));
            if let Ok(bound) = rmf_bound(p) {
                table.push_summary("bound", Cell::Float(bound.value));
            }
            if let Some(corr) = replica_ratio_correlation(&ratio_rows) {
                table.push_summary("replica_correlation", Cell::Float(corr));
            }
            Ok(table)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn run(text: &str) -> ResultTable {
        run_experiment(&parse_config(text).unwrap()).unwrap()
    }

    fn float(cell: &Cell) -> f64 {
        match *cell {
            Cell::Float(v) => v,
            ref other => panic!("expected a float cell, got {other:?}"),
        }
    }

    #[test]
    fn exact_two_step_table() {
        let table = run(r#"{"experiment":"exact","p":0.75,"r":0.3,"horizon":2}"#);
        assert_eq!(table.columns, vec!["x", "mass"]);
        assert_eq!(table.rows.len(), 3);
        assert_eq!(table.rows[0][0], Cell::Int(-2));
        let expected = [0.525, 0.25, 0.225];
        for (row, want) in table.rows.iter().zip(expected) {
            assert!((float(&row[1]) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn simulate_emits_one_row_per_step() {
        let table = run(
            r#"{"experiment":"simulate","p":0.6,"r":0.5,"steps":8,"trials":3,"master_seed":5}"#,
        );
        assert_eq!(table.rows.len(), 24);
        // rows come in trial-major order with 1-based step index
        assert_eq!(table.rows[0][0], Cell::UInt(0));
        assert_eq!(table.rows[0][1], Cell::UInt(1));
        assert_eq!(table.rows[8][0], Cell::UInt(1));
    }

    #[test]
    fn moments_recursion_table() {
        let table = run(r#"{"experiment":"moments","p":1.0,"r":1.0,"n_max":4}"#);
        let means: Vec<&Cell> = table.rows.iter().map(|r| &r[1]).collect();
        assert_eq!(
            means,
            vec![
                &Cell::Float(1.0),
                &Cell::Float(2.0),
                &Cell::Float(3.0),
                &Cell::Float(4.0)
            ]
        );
    }

    #[test]
    fn hitting_reports_bound_only_when_asked() {
        let with = run(
            r#"{"experiment":"hitting","p":0.0,"start_time":1,"start_x":1,"cap":10,"trials":50,"master_seed":3,"compare_bound":true}"#,
        );
        assert!(with.columns.contains(&"bound"));
        assert_eq!(with.rows[0][1], Cell::Float(1.0)); // p = 0: always one step
        assert_eq!(with.rows[0][6], Cell::Float(3.0));
        let without = run(
            r#"{"experiment":"hitting","p":0.0,"start_time":1,"start_x":1,"cap":10,"trials":50,"master_seed":3}"#,
        );
        assert!(!without.columns.contains(&"bound"));
    }

    #[test]
    fn curve_rows_align_with_horizons() {
        let table = run(
            r#"{"experiment":"curve","p":0.5,"r":0.5,"horizons":"4,16,64","trials":400,"master_seed":11}"#,
        );
        assert_eq!(table.rows.len(), 3);
        assert_eq!(table.rows[0][0], Cell::UInt(4));
        assert_eq!(table.rows[2][0], Cell::UInt(64));
    }

    #[test]
    fn rmf_summary_has_bound_and_correlation() {
        let table = run(
            r#"{"experiment":"rmf","replicas":4,"p":0.9,"total_steps":50,"runs":20,"master_seed":7}"#,
        );
        assert_eq!(table.rows.len(), 20);
        let keys: Vec<&str> = table.summary.iter().map(|(k, _)| *k).collect();
        assert!(keys.contains(&"bound"));
        assert!(keys.contains(&"replica_correlation"));
        assert!(keys.contains(&"signed_ratio_mean"));
        // p = 0.5 has no bound; summary omits it
        let table = run(
            r#"{"experiment":"rmf","replicas":4,"p":0.5,"total_steps":50,"runs":5,"master_seed":7}"#,
        );
        let keys: Vec<&str> = table.summary.iter().map(|(k, _)| *k).collect();
        assert!(!keys.contains(&"bound"));
    }

    #[test]
    fn identical_configs_render_identical_bytes() {
        let text =
            r#"{"experiment":"lil","p":0.7,"r":0.5,"horizon":200,"trials":10,"master_seed":77}"#;
        let a = run(text).to_csv();
        let b = run(text).to_csv();
        assert_eq!(a, b);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let text = r#"{"experiment":"curve","p":0.9,"r":0.5,"horizons":"10,50","trials":500,"master_seed":123}"#;
        let config = parse_config(text).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_experiment(&config).unwrap().to_csv());
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap()
            .install(|| run_experiment(&config).unwrap().to_csv());
        assert_eq!(single, many);
    }
}
