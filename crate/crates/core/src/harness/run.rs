use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::agents::{train, Agent};
use crate::env::{action_dim, project_action, state_dim, sum_rate, Action, ChannelSource, Environment, SystemConfig};
use crate::numerics::RngStream;
use crate::{Error, Result};

use super::config::{ExperimentConfig, Method};
use super::metrics::{format_sig9, rows_from_series, write_metrics_csv, MetricsRow};

/// Uniform raw action in `[-1, 1]` per coordinate.
pub fn random_raw_action(cfg: &SystemConfig, rng: &mut RngStream) -> Vec<f64> {
    (0..action_dim(cfg)).map(|_| rng.uniform_range(-1.0, 1.0)).collect()
}

/// Executes `steps` uniform random actions and returns their rewards.
pub fn random_policy(env: &mut Environment, steps: u64, rng: &mut RngStream) -> Result<Vec<f64>> {
    (0..steps)
        .map(|_| {
            let raw = random_raw_action(env.config(), rng);
            env.step(&raw).map(|s| s.reward)
        })
        .collect()
}

/// Best of `trials` random feasible actions on fixed channels.
///
/// The channels are evaluated at each candidate's UAV position. The result
/// is a lower bound on the achievable sum rate.
pub fn random_search_best<S: ChannelSource + ?Sized>(
    channels: &S,
    cfg: &SystemConfig,
    trials: u64,
    rng: &mut RngStream,
) -> Result<(Action, f64)> {
    if trials == 0 {
        return Err(Error::Config("random search needs at least one trial".into()));
    }
    let mut best: Option<(Action, f64)> = None;
    for _ in 0..trials {
        let action = project_action(&random_raw_action(cfg, rng), cfg)?;
        let (rate, _) = sum_rate(&channels.channels_at(cfg, action.uav_xy), &action, cfg.noise_power)?;
        if best.as_ref().map_or(true, |(_, b)| rate > *b) {
            best = Some((action, rate));
        }
    }
    Ok(best.expect("at least one trial"))
}

/// Mean reward over the last tenth of a run (at least one step).
pub fn final_window_mean(rewards: &[f64]) -> f64 {
    assert!(!rewards.is_empty(), "empty reward series");
    let w = (rewards.len() / 10).max(1);
    rewards[rewards.len() - w..].iter().sum::<f64>() / w as f64
}

/// Environment seeded for `seed`; every method sees the same channels.
pub fn make_environment(cfg: &ExperimentConfig, seed: u64) -> Result<Environment> {
    Environment::new(cfg.system.clone(), cfg.delta, &RngStream::new(seed, 0).derive(100))
}

/// Trains (or runs the random policy) for one seed and returns its metric
/// rows.
pub fn run_experiment(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<MetricsRow>> {
    cfg.validate()?;
    let root = RngStream::new(seed, 0);
    let mut env = make_environment(cfg, seed)?;
    let total = (cfg.episodes * cfg.steps) as usize;
    let mut rewards = Vec::with_capacity(total);
    let mut eta = Vec::with_capacity(total);
    let mut loss = Vec::with_capacity(total);
    let mut wall = Vec::with_capacity(total);
    let start = Instant::now();
    let clock = |timing: bool| {
        if timing {
            start.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        }
    };
    match cfg.method {
        Method::Random => {
            let mut rng = root.derive(300);
            for episode in 0..cfg.episodes {
                if episode > 0 {
                    env.reset()?;
                }
                for r in random_policy(&mut env, cfg.steps, &mut rng)? {
                    rewards.push(r);
                    eta.push(0.0);
                    loss.push(f64::NAN);
                    wall.push(clock(cfg.timing));
                }
            }
        }
        Method::Learner(_) => {
            let sys = env.config().clone();
            let mut agent = Agent::new(state_dim(&sys), action_dim(&sys), cfg.agent_config(), &root.derive(200))?;
            train(&mut env, &mut agent, cfg.episodes, cfg.steps, |rec| {
                rewards.push(rec.reward);
                eta.push(rec.eta);
                loss.push(rec.critic_loss);
                wall.push(clock(cfg.timing));
                Ok(())
            })?;
        }
    }
    Ok(rows_from_series(&rewards, &eta, &loss, &wall))
}

/// One grid axis: a config key and the values it takes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub key: String,
    pub values: Vec<String>,
}

impl GridAxis {
    /// Parses `key=v1,v2,...`; values are split on `;` instead when the
    /// list contains one, so list-valued keys can be swept.
    pub fn parse(spec: &str) -> Result<Self> {
        let (key, vals) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("grid axis `{spec}` is not key=values")))?;
        let sep = if vals.contains(';') { ';' } else { ',' };
        let values: Vec<String> = vals.split(sep).map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
        if values.is_empty() {
            return Err(Error::Config(format!("grid axis `{key}` has no values")));
        }
        Ok(GridAxis {
            key: key.trim().to_string(),
            values,
        })
    }
}

/// Outcome of one (cell, seed) job.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub cell: usize,
    pub seed: u64,
    pub file: PathBuf,
    /// Final-window mean, or the failure message.
    pub result: std::result::Result<f64, String>,
}

/// Aggregate over the seeds of one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub assignment: Vec<(String, String)>,
    pub ok: usize,
    pub failed: usize,
    pub mean: f64,
    pub stdev: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub cells: Vec<CellSummary>,
    pub runs: Vec<RunOutcome>,
}

impl SweepReport {
    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| r.result.is_err()).count()
    }
}

fn cartesian(axes: &[GridAxis]) -> Vec<Vec<(String, String)>> {
    let mut cells = vec![Vec::new()];
    for axis in axes {
        cells = cells
            .into_iter()
            .flat_map(|cell| {
                axis.values.iter().map(move |v| {
                    let mut c = cell.clone();
                    c.push((axis.key.clone(), v.clone()));
                    c
                })
            })
            .collect();
    }
    cells
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}

/// Mean and sample standard deviation.
pub fn mean_stdev(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs every grid cell for every seed of `base`, in parallel.
///
/// Writes one metrics file per run, `runs.csv` listing each run's
/// final-window mean or error, and `summary.csv` with per-cell mean and
/// standard deviation over the successful seeds. Failed runs are recorded
/// and the sweep continues.
pub fn run_sweep(base: &ExperimentConfig, axes: &[GridAxis], out_dir: &Path) -> Result<SweepReport> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let cells = cartesian(axes);
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| base.seeds.iter().map(move |&s| (c, s)))
        .collect();
    let runs: Vec<RunOutcome> = jobs
        .par_iter()
        .map(|&(cell, seed)| {
            let tag: Vec<String> = cells[cell].iter().map(|(k, v)| format!("{k}={v}")).collect();
            let name = if tag.is_empty() {
                format!("run_seed{seed}.csv")
            } else {
                format!("cell{cell}_{}_seed{seed}.csv", sanitize(&tag.join("_")))
            };
            let file = out_dir.join(name);
            let result = (|| {
                let mut cfg = base.clone();
                for (k, v) in &cells[cell] {
                    cfg.set(k, v).map_err(|m| Error::Config(format!("{k}: {m}")))?;
                }
                cfg.finalize()?;
                let rows = run_experiment(&cfg, seed)?;
                write_metrics_csv(&rows, &file)?;
                let rewards: Vec<f64> = rows.iter().map(|r| r.reward).collect();
                Ok(final_window_mean(&rewards))
            })()
            .map_err(|e: Error| e.to_string());
            if let Err(e) = &result {
                log::warn!("cell {cell} seed {seed} failed: {e}");
            }
            RunOutcome { cell, seed, file, result }
        })
        .collect();

    let summaries: Vec<CellSummary> = cells
        .iter()
        .enumerate()
        .map(|(i, assignment)| {
            let ok: Vec<f64> = runs
                .iter()
                .filter(|r| r.cell == i)
                .filter_map(|r| r.result.as_ref().ok().copied())
                .collect();
            let failed = runs.iter().filter(|r| r.cell == i && r.result.is_err()).count();
            let (mean, stdev) = mean_stdev(&ok);
            CellSummary {
                assignment: assignment.clone(),
                ok: ok.len(),
                failed,
                mean,
                stdev,
            }
        })
        .collect();

    let keys: Vec<&str> = axes.iter().map(|a| a.key.as_str()).collect();
    let mut summary = String::new();
    summary.push_str("cell");
    for k in &keys {
        summary.push(',');
        summary.push_str(k);
    }
    summary.push_str(",ok,failed,mean,stdev\n");
    for (i, c) in summaries.iter().enumerate() {
        summary.push_str(&i.to_string());
        for (_, v) in &c.assignment {
            summary.push(',');
            summary.push_str(&csv_field(v));
        }
        summary.push_str(&format!(
            ",{},{},{},{}\n",
            c.ok,
            c.failed,
            format_sig9(c.mean),
            format_sig9(c.stdev)
        ));
    }
    let path = out_dir.join("summary.csv");
    std::fs::write(&path, summary).map_err(|e| Error::io(&path, e))?;

    let mut listing = String::from("cell,seed,file,final_mean,error\n");
    for r in &runs {
        let file = r.file.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        match &r.result {
            Ok(m) => listing.push_str(&format!("{},{},{},{},\n", r.cell, r.seed, file, format_sig9(*m))),
            Err(e) => listing.push_str(&format!("{},{},,,{}\n", r.cell, r.seed, csv_field(e))),
        }
    }
    let path = out_dir.join("runs.csv");
    std::fs::write(&path, listing).map_err(|e| Error::io(&path, e))?;

    Ok(SweepReport {
        cells: summaries,
        runs,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{ChannelSet, Fading};
    use crate::harness::metrics::read_metrics_csv;
    use crate::numerics::{ComplexMatrix, Complex64};

    fn tiny() -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        for (k, v) in [
            ("M", "2"),
            ("K", "1"),
            ("N", "4"),
            ("steps", "40"),
            ("warmup", "16"),
            ("actor_hidden", "8"),
            ("critic_conv_channels", "2"),
            ("critic_hidden", "8"),
        ] {
            c.set(k, v).unwrap();
        }
        c.finalize().unwrap();
        c
    }

    #[test]
    fn random_policy_nonnegative_and_reproducible() {
        let cfg = tiny();
        let mut a = make_environment(&cfg, 3).unwrap();
        let mut b = make_environment(&cfg, 3).unwrap();
        let ra = random_policy(&mut a, 200, &mut RngStream::new(1, 0)).unwrap();
        let rb = random_policy(&mut b, 200, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(ra, rb);
        assert!(ra.iter().all(|&r| r >= 0.0));
    }

    #[test]
    fn random_policy_positive_on_default_config() {
        let cfg = ExperimentConfig::default();
        let mut env = make_environment(&cfg, 1).unwrap();
        let r = random_policy(&mut env, 100, &mut RngStream::new(2, 0)).unwrap();
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        assert!(mean > 0.0);
    }

    #[test]
    fn single_trial_equals_one_random_step() {
        let cfg = tiny();
        let mut env = make_environment(&cfg, 4).unwrap();
        let fading: Fading = env.fading().clone();
        let first = random_policy(&mut env, 1, &mut RngStream::new(9, 0)).unwrap()[0];
        let (_, best) = random_search_best(&fading, &cfg.system, 1, &mut RngStream::new(9, 0)).unwrap();
        assert_eq!(best, first);
    }

    #[test]
    fn more_trials_never_worse() {
        let cfg = tiny();
        let env = make_environment(&cfg, 5).unwrap();
        let (_, b100) = random_search_best(env.fading(), &cfg.system, 100, &mut RngStream::new(3, 0)).unwrap();
        let (_, b1000) = random_search_best(env.fading(), &cfg.system, 1000, &mut RngStream::new(3, 0)).unwrap();
        assert!(b1000 >= b100);
    }

    #[test]
    fn single_link_near_closed_form_optimum() {
        let mut sys = SystemConfig::with_sizes(1, 1, 1);
        sys.max_power = 1.0;
        sys.noise_power = 1.0;
        let h_br = Complex64::new(0.8, -0.3);
        let h_ru = Complex64::new(-0.4, 0.9);
        let channels = ChannelSet::from_matrices(
            ComplexMatrix::from_vec(1, 1, vec![h_br]).unwrap(),
            ComplexMatrix::from_vec(1, 1, vec![h_ru]).unwrap(),
            ComplexMatrix::zeros(1, 1),
        )
        .unwrap();
        // best case: full reflection, aligned phase, full power
        let optimum = (1.0 + sys.max_power * (h_br.norm() * h_ru.norm()).powi(2) / sys.noise_power).log2();
        let (_, best) = random_search_best(&channels, &sys, 10_000, &mut RngStream::new(4, 0)).unwrap();
        assert!(best <= optimum + 1e-12);
        assert!(best >= 0.95 * optimum, "{best} vs {optimum}");
    }

    #[test]
    fn final_window() {
        let r: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(final_window_mean(&r), 19.5);
        assert_eq!(final_window_mean(&[3.0]), 3.0);
    }

    #[test]
    fn run_is_deterministic() {
        let cfg = tiny();
        let a = run_experiment(&cfg, 11).unwrap();
        let b = run_experiment(&cfg, 11).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn sweep_bookkeeping_and_reaggregation() {
        let mut cfg = tiny();
        cfg.seeds = vec![1, 2, 3];
        let axes = [GridAxis::parse("Pt_dB=-10,0,10").unwrap()];
        let dir = tempfile::tempdir().unwrap();
        let report = run_sweep(&cfg, &axes, dir.path()).unwrap();
        assert_eq!(report.runs.len(), 9);
        assert_eq!(report.failures(), 0);
        let csvs = std::fs::read_dir(dir.path())
            .unwrap()
            .filter(|e| {
                let n = e.as_ref().unwrap().file_name().to_string_lossy().into_owned();
                n.starts_with("cell") && n.ends_with(".csv")
            })
            .count();
        assert_eq!(csvs, 9);
        assert!(dir.path().join("summary.csv").exists());
        for (i, cell) in report.cells.iter().enumerate() {
            let means: Vec<f64> = report
                .runs
                .iter()
                .filter(|r| r.cell == i)
                .map(|r| {
                    let rows = read_metrics_csv(&r.file).unwrap();
                    final_window_mean(&rows.iter().map(|x| x.reward).collect::<Vec<_>>())
                })
                .collect();
            let (m, s) = mean_stdev(&means);
            assert_eq!(m, cell.mean);
            assert_eq!(s, cell.stdev);
        }
    }

    #[test]
    fn sweep_records_failures_and_continues() {
        let mut cfg = tiny();
        cfg.seeds = vec![1];
        let axes = [GridAxis::parse("tau=0.5,7").unwrap()];
        let dir = tempfile::tempdir().unwrap();
        let report = run_sweep(&cfg, &axes, dir.path()).unwrap();
        assert_eq!(report.failures(), 1);
        assert_eq!(report.cells[0].ok, 1);
        assert_eq!(report.cells[1].failed, 1);
        let runs = std::fs::read_to_string(dir.path().join("runs.csv")).unwrap();
        assert!(runs.contains("tau"));
    }

    #[test]
    fn grid_parsing() {
        let a = GridAxis::parse("actor_hidden=64,64;128,128").unwrap();
        assert_eq!(a.values, vec!["64,64", "128,128"]);
        assert!(GridAxis::parse("tau").is_err());
        assert!(GridAxis::parse("tau=").is_err());
    }
}
