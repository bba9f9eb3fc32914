use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use starris::env::{action_dim, state_dim};
use starris::harness::{
    final_window_mean, load_config, make_environment, random_policy, random_search_best,
    run_experiment, run_sweep, write_metrics_csv, ExperimentConfig, GridAxis,
};
use starris::nn::{build_critic, finite_diff_check, CriticSpec};
use starris::numerics::RngStream;

/// STAR-RIS-UAV downlink simulator and deep-RL optimizers.
///
/// Settings are resolved as command-line flag, then STARRIS_* environment
/// variable, then config file, then built-in default.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train (or run the random policy) for every configured seed.
    Run(Common),
    /// Run a grid of configurations over all seeds in parallel.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Grid axis `key=v1,v2,...` (repeatable; `;` separates values
        /// that contain commas).
        #[arg(long = "grid", required = true)]
        grid: Vec<String>,
        /// Worker threads (defaults to all cores).
        #[arg(long, env = "STARRIS_JOBS")]
        jobs: Option<usize>,
    },
    /// Random-policy and random-search reference values per seed.
    Baseline {
        #[command(flatten)]
        common: Common,
        /// Random-search trials on the first episode's channels.
        #[arg(long, default_value_t = 10_000, env = "STARRIS_TRIALS")]
        trials: u64,
    },
    /// Finite-difference check of the convolutional critic's gradients.
    Gradcheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// `key = value` experiment file.
    #[arg(long, env = "STARRIS_CONFIG")]
    config: Option<PathBuf>,
    /// Single seed, replacing the configured seed list.
    #[arg(long, env = "STARRIS_SEED")]
    seed: Option<u64>,
    /// ddpg, ca-ddpg, td3 or random.
    #[arg(long, env = "STARRIS_ALGO")]
    algo: Option<String>,
    #[arg(long, env = "STARRIS_STEPS")]
    steps: Option<u64>,
    #[arg(long, env = "STARRIS_EPISODES")]
    episodes: Option<u64>,
    /// Transmit power budget, dB relative to 1 W.
    #[arg(long = "pt-db", env = "STARRIS_PT_DB", allow_negative_numbers = true)]
    pt_db: Option<f64>,
    /// CSI uncertainty in [0, 1).
    #[arg(long, env = "STARRIS_DELTA")]
    delta: Option<f64>,
    /// Output directory.
    #[arg(long, env = "STARRIS_OUT")]
    out: Option<PathBuf>,
    /// Extra `key=value` assignment (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn resolve(&self) -> starris::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => load_config(p)?,
            None => ExperimentConfig::default(),
        };
        let mut assign = |k: &str, v: String| {
            cfg.set(k, &v)
                .map_err(|m| starris::Error::Config(format!("--{k}: {m}")))
        };
        if let Some(s) = self.seed {
            assign("seeds", s.to_string())?;
        }
        if let Some(a) = &self.algo {
            assign("algo", a.clone())?;
        }
        if let Some(s) = self.steps {
            assign("steps", s.to_string())?;
        }
        if let Some(e) = self.episodes {
            assign("episodes", e.to_string())?;
        }
        if let Some(p) = self.pt_db {
            assign("Pt_dB", p.to_string())?;
        }
        if let Some(d) = self.delta {
            assign("delta", d.to_string())?;
        }
        if let Some(o) = &self.out {
            assign("output", o.display().to_string())?;
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| starris::Error::Config(format!("--set `{kv}` is not key=value")))?;
            assign(k.trim(), v.to_string())?;
        }
        cfg.finalize()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> starris::Result<bool> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.resolve()?;
            std::fs::create_dir_all(&cfg.output).map_err(|e| starris::Error::Config(format!("{}: {e}", cfg.output.display())))?;
            let mut ok = true;
            for &seed in &cfg.seeds {
                let path = cfg.output.join(format!("{}_seed{seed}.csv", cfg.method));
                match run_experiment(&cfg, seed).and_then(|rows| {
                    write_metrics_csv(&rows, &path)?;
                    Ok(rows)
                }) {
                    Ok(rows) => {
                        let rewards: Vec<f64> = rows.iter().map(|r| r.reward).collect();
                        println!(
                            "{} seed {seed}: final-window mean {:.6} bit/s/Hz -> {}",
                            cfg.method,
                            final_window_mean(&rewards),
                            path.display()
                        );
                    }
                    Err(e) => {
                        eprintln!("seed {seed} failed: {e}");
                        ok = false;
                    }
                }
            }
            Ok(ok)
        }
        Command::Sweep { common, grid, jobs } => {
            let cfg = common.resolve()?;
            let axes = grid.iter().map(|g| GridAxis::parse(g)).collect::<starris::Result<Vec<_>>>()?;
            let go = || run_sweep(&cfg, &axes, &cfg.output);
            let report = match jobs {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| starris::Error::Config(e.to_string()))?
                    .install(go)?,
                None => go()?,
            };
            for c in &report.cells {
                let tag: Vec<String> = c.assignment.iter().map(|(k, v)| format!("{k}={v}")).collect();
                println!("{}: mean {:.6} stdev {:.6} ({} ok, {} failed)", tag.join(" "), c.mean, c.stdev, c.ok, c.failed);
            }
            println!("summary written to {}", cfg.output.join("summary.csv").display());
            Ok(report.failures() == 0)
        }
        Command::Baseline { common, trials } => {
            let cfg = common.resolve()?;
            for &seed in &cfg.seeds {
                let mut env = make_environment(&cfg, seed)?;
                let fading = env.fading().clone();
                let mut rng = RngStream::new(seed, 0).derive(300);
                let rewards = random_policy(&mut env, cfg.steps, &mut rng)?;
                let mean = rewards.iter().sum::<f64>() / rewards.len() as f64;
                let (_, best) = random_search_best(&fading, &cfg.system, trials, &mut RngStream::new(seed, 0).derive(400))?;
                println!("seed {seed}: random-policy mean {mean:.6}, random-search best of {trials} {best:.6} bit/s/Hz");
            }
            Ok(true)
        }
        Command::Gradcheck { common, tolerance } => {
            let cfg = common.resolve()?;
            let a = cfg.agent_config();
            let sd = state_dim(&cfg.system);
            let ad = action_dim(&cfg.system);
            let mut rng = RngStream::new(cfg.seeds[0], 0);
            let spec = CriticSpec::conv(a.critic_conv_channels.clone(), a.critic_hidden.clone());
            let spec = CriticSpec {
                kernel: a.kernel_size,
                padding: a.padding,
                stride: a.stride,
                ..spec
            };
            let critic = build_critic(sd, ad, &spec, &mut rng)?;
            let s: Vec<f64> = (0..sd).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
            let act: Vec<f64> = (0..ad).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
            let r = finite_diff_check(&critic, &s, &act, tolerance);
            println!(
                "{} gradients checked: max parameter error {:.3e} (index {}), max action error {:.3e}, tolerance {:.1e}: {}",
                r.checked,
                r.max_param_error,
                r.worst_param,
                r.max_side_error,
                r.tolerance,
                if r.passed { "PASS" } else { "FAIL" }
            );
            Ok(r.passed)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
