use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use efe_core::aif::{sophisticated_plan, standard_plan, EfeMode, PreferenceMode, Preferences};
use efe_core::dp::backward_induction;
use efe_core::envs::{EnvSpec, RandomSpec};
use efe_core::model::Model;
use efe_core::pomdp::{exact_posterior, sophisticated_plan_pomdp, standard_plan_pomdp};
use efe_core::{FinitePomdp, Guards, TIE_TOL};
use efe_planner::io::{read_model, to_json_string, write_json, write_model, write_text};
use efe_planner::{run_compare, run_learn, run_simulate, ExperimentConfig, PlannerError, Result};
use serde_json::json;

#[derive(Parser)]
#[command(name = "efe-planner", version, about = "Active inference and dynamic programming planners for finite models")]
struct Cli {
    /// Base seed for generation and learning.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Maximum number of action sequences a standard planner may enumerate.
    #[arg(long, global = true)]
    guard_sequences: Option<u128>,
    /// Maximum belief-tree size for the sophisticated POMDP planner.
    #[arg(long, global = true)]
    guard_tree: Option<u128>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Gridworld,
    Tmaze,
    Random,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum PlanScheme {
    Standard,
    Sophisticated,
}

#[derive(Clone, Copy, ValueEnum)]
enum EfeKind {
    Exact,
    MeanField,
}

#[derive(clap::Args)]
struct PrefArgs {
    /// Finite inverse temperature; the zero-temperature limit when omitted.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_enum, default_value = "exact")]
    efe: EfeKind,
    /// Pruning threshold for mean-field scoring.
    #[arg(long)]
    prune: Option<f64>,
}

impl PrefArgs {
    fn mode(&self) -> PreferenceMode {
        match self.beta {
            Some(beta) => PreferenceMode::Finite { beta },
            None => PreferenceMode::ZeroTempLimit,
        }
    }

    fn efe(&self) -> EfeMode {
        match self.efe {
            EfeKind::Exact => EfeMode::Exact,
            EfeKind::MeanField => EfeMode::MeanField { prune: self.prune },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark model file.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 3)]
        horizon: usize,
        #[arg(long, default_value_t = 3)]
        width: usize,
        #[arg(long, default_value_t = 3)]
        height: usize,
        #[arg(long, default_value_t = 0)]
        reward_cell: usize,
        #[arg(long, default_value_t = 0.0)]
        slip: f64,
        #[arg(long, default_value_t = 0)]
        start: usize,
        #[arg(long, default_value_t = 1.0)]
        cue_reliability: f64,
        #[arg(long)]
        identity_likelihood: bool,
        #[arg(long, default_value_t = 3)]
        n_states: usize,
        #[arg(long, default_value_t = 2)]
        n_actions: usize,
        #[arg(long)]
        n_obs: Option<usize>,
        #[arg(long)]
        reward_ties: bool,
        #[arg(long, default_value_t = 0.0)]
        sparsity: f64,
    },
    /// Backward induction: optimal values, Q-values and argmax sets.
    Solve {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plan one step of a fully observed model.
    Plan {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        scheme: PlanScheme,
        #[arg(long)]
        state: usize,
        #[arg(long, default_value_t = 0)]
        time: usize,
        #[command(flatten)]
        prefs: PrefArgs,
    },
    /// Plan one step of a partially observed model after a history.
    PlanPomdp {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        scheme: PlanScheme,
        /// Comma-separated past actions.
        #[arg(long, value_delimiter = ',')]
        actions: Vec<usize>,
        /// Comma-separated observations, one more than actions.
        #[arg(long, value_delimiter = ',', required = true)]
        observations: Vec<usize>,
        #[command(flatten)]
        prefs: PrefArgs,
    },
    /// Roll out planners as described by an experiment config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Learn the observation likelihood of a model from sampled episodes.
    Learn {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        prior_concentration: f64,
        #[arg(long)]
        episodes: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Compare schemes against backward induction as described by an experiment config.
    Compare {
        #[arg(long)]
        config: PathBuf,
    },
}

fn guards(cli: &Cli, base: Guards) -> Guards {
    Guards {
        sequences: cli.guard_sequences.unwrap_or(base.sequences),
        tree: cli.guard_tree.unwrap_or(base.tree),
    }
}

fn emit(out: Option<&PathBuf>, value: &serde_json::Value) -> Result<()> {
    match out {
        Some(p) => write_json(p, value),
        None => {
            print!("{}", to_json_string(value)?);
            Ok(())
        }
    }
}

fn as_pomdp(model: Model) -> Result<FinitePomdp> {
    match model {
        Model::Pomdp(p) => Ok(p),
        Model::Mdp(_) => Err(PlannerError::Config("expected a partially observed model".into())),
    }
}

fn load_config(cli: &Cli, path: &PathBuf) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    cfg.guards = guards(cli, cfg.guards);
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| PlannerError::Config(e.to_string()))?;
    }
    match &cli.command {
        Command::Gen {
            kind,
            out,
            horizon,
            width,
            height,
            reward_cell,
            slip,
            start,
            cue_reliability,
            identity_likelihood,
            n_states,
            n_actions,
            n_obs,
            reward_ties,
            sparsity,
        } => {
            let spec = match kind {
                Kind::Gridworld => EnvSpec::Gridworld {
                    width: *width,
                    height: *height,
                    reward_cell: *reward_cell,
                    slip: *slip,
                    horizon: *horizon,
                    start: *start,
                },
                Kind::Tmaze => EnvSpec::Tmaze {
                    cue_reliability: *cue_reliability,
                    horizon: *horizon,
                    identity_likelihood: *identity_likelihood,
                },
                Kind::Random => {
                    let mut r = RandomSpec::new(cli.seed, *n_states, *n_actions, *horizon);
                    r.n_obs = *n_obs;
                    r.reward_ties = *reward_ties;
                    r.sparsity = *sparsity;
                    EnvSpec::Random(r)
                }
            };
            write_model(out, &spec.build()?)
        }
        Command::Solve { model, out } => {
            let model = read_model(model)?;
            let mdp = model.mdp();
            let bi = backward_induction(mdp, TIE_TOL);
            let policy: Vec<Vec<usize>> = (0..mdp.horizon())
                .map(|t| (0..mdp.n_states()).map(|s| bi.canonical_action(t, s)).collect())
                .collect();
            emit(
                out.as_ref(),
                &json!({
                    "values": bi.values.to_nested(),
                    "q": bi.q.to_nested(),
                    "argmax_sets": bi.argmax_sets.to_nested(),
                    "policy": policy,
                }),
            )
        }
        Command::Plan {
            model,
            scheme,
            state,
            time,
            prefs,
        } => {
            let model = read_model(model)?;
            let mdp = model.mdp();
            let p = Preferences::new(mdp.reward(), prefs.mode())?;
            let value = match scheme {
                PlanScheme::Standard => {
                    let plan = standard_plan(mdp, &p, *state, *time, prefs.efe(), &guards(cli, Guards::default()))?;
                    serde_json::to_value(plan)?
                }
                PlanScheme::Sophisticated => {
                    let plan = sophisticated_plan(mdp, &p, *time, *state)?;
                    json!({
                        "chosen": plan.chosen,
                        "argmin_set": plan.argmin_set,
                        "scores": plan.table.row(*time, *state),
                    })
                }
            };
            emit(None, &value)
        }
        Command::PlanPomdp {
            model,
            scheme,
            actions,
            observations,
            prefs,
        } => {
            let pomdp = as_pomdp(read_model(model)?)?;
            let p = Preferences::new(pomdp.mdp().reward(), prefs.mode())?;
            let g = guards(cli, Guards::default());
            let value = match scheme {
                PlanScheme::Standard => {
                    serde_json::to_value(standard_plan_pomdp(&pomdp, &p, actions, observations, prefs.efe(), &g)?)?
                }
                PlanScheme::Sophisticated => {
                    let post = exact_posterior(&pomdp, actions, observations)?;
                    let plan = sophisticated_plan_pomdp(&pomdp, &p, post.current(), &g)?;
                    json!({
                        "chosen": plan.chosen,
                        "argmin_set": plan.argmin_set,
                        "scores": plan.root.scores,
                        "belief": plan.root.belief,
                    })
                }
            };
            emit(None, &value)
        }
        Command::Simulate { config } => {
            let cfg = load_config(cli, config)?;
            let report = run_simulate(&cfg)?;
            print!("{}", report.to_csv()?);
            Ok(())
        }
        Command::Learn {
            model,
            prior_concentration,
            episodes,
            out,
            metrics,
        } => {
            let pomdp = as_pomdp(read_model(model)?)?;
            let outcome = run_learn(&pomdp, *prior_concentration, *episodes, cli.seed)?;
            write_json(out, &outcome.learned)?;
            if let Some(m) = metrics {
                write_text(m, &outcome.metrics_csv()?)?;
            }
            Ok(())
        }
        Command::Compare { config } => {
            let cfg = load_config(cli, config)?;
            let report = run_compare(&cfg)?;
            print!("{}", report.to_csv()?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
