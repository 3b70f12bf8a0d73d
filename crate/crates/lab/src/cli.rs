//! The `hardcore-lab` command line.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a
//! computation does not converge, 2 for usage, config and input errors.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hardcore_core::bp::{
    alpha, iterate_f, iterate_h, loopy_bp_marginals, uniqueness_margin, BpMode,
    DirectedMessageField, FixedPointOptions, VertexField,
};
use hardcore_core::dynamics::{ChainState, DEFAULT_RHO_BURN_IN};
use hardcore_core::estimators::{
    mixing_time_exact, solve_bp, tv_exact, BurnInParams, BurnInProbe, CouplingExperiment,
    CouplingParams, FactorEstimator, PartitionEstimator, PartitionOptions, StartPolicy, StartSet,
    UniformityExperiment, UniformityParams,
};
use hardcore_core::graph::girth;
use hardcore_core::oracle::exact_partition;
use hardcore_core::rng::stream_rng;
use hardcore_core::{Graph, IndependentSet};
use rand::Rng;
use serde::Serialize;
use serde_json::json;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::config::{load_config, ExperimentConfig, GraphSpec};
use crate::error::{LabError, Result};
use crate::formats::{dump_arc_values, dump_message_field, dump_vertex_field, dump_vertex_values, save_edge_list, trajectory_record};
use crate::report::{emit, write_csv, Check, GraphSummary, Metric, Report};
use crate::runner;
use crate::verify::{self, Effort};

pub const SEED_ENV: &str = "HARDCORE_LAB_SEED";

#[derive(Debug, Parser)]
#[command(name = "hardcore-lab", version, about = "Hard-core model experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Inputs shared by the experiment subcommands.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON experiment config; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Edge-list file.
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
    /// Fugacity.
    #[arg(long, conflicts_with = "lambda_ratio")]
    pub lambda: Option<f64>,
    /// Fugacity as a multiple of λ_c(Δ) for the maximum degree Δ of the graph.
    #[arg(long)]
    pub lambda_ratio: Option<f64>,
    /// Slack δ below the uniqueness threshold (default 0.2).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Accuracy parameter ε.
    #[arg(long = "eps")]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<u64>,
    #[arg(long)]
    pub window: Option<u64>,
    /// Root seed; falls back to the config, then to $HARDCORE_LAB_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent or `-`.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Per-replicate rows as CSV.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    /// Worker threads for replicates; 0 uses every core.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Record wall-clock time in the report.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Regular,
    Bipartite,
    Tree,
    Gnp,
    Connected,
    Cycle,
    Path,
    Grid,
    Complete,
    Star,
    Heawood,
    Petersen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Parented,
    Unrooted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Operator {
    F,
    H,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Init {
    Ones,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Start {
    Empty,
    /// Greedy maximal independent set in vertex order.
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PairStart {
    /// `∅` against `{v}` for `--vertex`, or a random `v`.
    EmptyPlus,
    BurnedIn,
    Coalesced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorKind {
    Indicator,
    RaoBlackwell,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a graph and write it as an edge list.
    Gen {
        #[arg(long, value_enum, default_value_t = GenKind::Regular)]
        kind: GenKind,
        #[arg(long)]
        n: Option<usize>,
        /// Degree for regular graphs.
        #[arg(long = "delta-reg", alias = "degree")]
        degree: Option<usize>,
        /// Edge probability for G(n, p).
        #[arg(long)]
        p: Option<f64>,
        /// Extra edges on top of a spanning tree for `connected`.
        #[arg(long)]
        extra: Option<usize>,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Girth and size of a graph.
    Girth {
        #[command(flatten)]
        common: Common,
    },
    /// Run loopy BP for a number of rounds and dump the marginal estimates.
    Bp {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        iterations: usize,
        #[arg(long, value_enum, default_value_t = Mode::Parented)]
        mode: Mode,
    },
    /// Iterate a BP operator to its fixed point and report the convergence.
    Fixpoint {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Operator::F)]
        operator: Operator,
        #[arg(long, value_enum, default_value_t = Init::Ones)]
        init: Init,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iterations: usize,
        /// Dump the final field here.
        #[arg(long, value_name = "FILE")]
        field: Option<PathBuf>,
    },
    /// Build the path-coupling weights and check their contraction.
    Phi {
        #[command(flatten)]
        common: Common,
        /// Dump the weights here.
        #[arg(long, value_name = "FILE")]
        field: Option<PathBuf>,
    },
    /// Run Glauber dynamics and stream trajectory records.
    Sample {
        #[command(flatten)]
        common: Common,
        /// Steps to run; default 10n.
        #[arg(long)]
        steps: Option<u64>,
        /// Steps between records; default n.
        #[arg(long)]
        every: Option<u64>,
        #[arg(long, value_enum, default_value_t = Start::Empty)]
        start: Start,
    },
    /// Exact mixing time on a small graph (default ε = 1/4).
    Mix {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: usize,
    },
    /// Uniformity of the unblocked-neighbor counts (default ε = 0.3).
    Uniformity {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        vertex: usize,
        #[arg(long, value_enum, default_value_t = Start::Empty)]
        start: Start,
        /// Fail unless the dynamic fraction reaches this.
        #[arg(long)]
        min_fraction: Option<f64>,
    },
    /// Coupled chains from adjacent states: distance after T steps.
    Contraction {
        #[command(flatten)]
        common: Common,
        /// Steps T; default 10n.
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long, value_enum, default_value_t = PairStart::BurnedIn)]
        start: PairStart,
        /// Disagreement vertex for `--start empty-plus`; random when absent.
        #[arg(long)]
        vertex: Option<usize>,
        /// Fail if the mean Hamming distance exceeds this.
        #[arg(long)]
        max_hamming: Option<f64>,
    },
    /// Estimate the partition function (default ε = 0.05).
    Count {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
        #[arg(long, value_enum, default_value_t = EstimatorKind::Indicator)]
        estimator: EstimatorKind,
        /// Samples per factor are ceil(C n / ε²).
        #[arg(long)]
        sample_constant: Option<f64>,
        /// Compare against the exact value and fail beyond relative error ε.
        #[arg(long)]
        check_exact: bool,
    },
    /// Fraction of chains above suspicion at checkpoints, from a dense start.
    Burnin {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        vertex: usize,
        #[arg(long, default_value_t = DEFAULT_RHO_BURN_IN)]
        rho: f64,
        #[arg(long, default_value_t = 2)]
        radius: usize,
        /// Comma-separated step counts; default 0, n, 4n, 10 n ln Δ.
        #[arg(long, value_delimiter = ',')]
        checkpoints: Option<Vec<u64>>,
        #[arg(long, value_enum, default_value_t = Start::Greedy)]
        start: Start,
    },
    /// Run verification suites.
    Verify {
        /// oracle, lambda-c, uniqueness, contraction, phi, jacobian,
        /// stationarity, trees, counting, pins or all.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Samples per graph for the stationarity suite.
        #[arg(long)]
        samples: Option<usize>,
        /// Trials per case for the counting suite.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long)]
        timing: bool,
    },
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprintln!("hardcore-lab: {}; try --help", usage_line(&e));
            return 2;
        }
        Err(e) => {
            // --help and --version
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("hardcore-lab: {e}");
            e.exit_code()
        }
    }
}

/// The first line of a clap error, without its `error: ` prefix.
fn usage_line(e: &clap::Error) -> String {
    let text = e.render().to_string();
    let first = text.lines().next().unwrap_or_default();
    first.strip_prefix("error: ").unwrap_or(first).to_string()
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| LabError::usage(format!("{SEED_ENV}=`{s}` is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

/// A loaded experiment: the resolved config, its graph and fugacity.
struct Setup {
    config: ExperimentConfig,
    graph: Graph,
    seed: u64,
    jobs: usize,
    csv: Option<PathBuf>,
    timing: bool,
    started: Instant,
}

impl Setup {
    fn load(c: &Common) -> Result<Self> {
        let started = Instant::now();
        let mut config = match (&c.config, &c.graph) {
            (Some(path), _) => load_config(path)?,
            (None, Some(path)) => ExperimentConfig::for_graph(GraphSpec::File { path: path.clone() }),
            (None, None) => {
                return Err(LabError::usage(
                    "missing required field `graph`: pass --graph FILE or --config FILE",
                ))
            }
        };
        if let Some(path) = &c.graph {
            config.graph = GraphSpec::File { path: path.clone() };
        }
        if c.lambda.is_some() || c.lambda_ratio.is_some() {
            config.lambda = c.lambda;
            config.lambda_ratio = c.lambda_ratio;
        }
        config.delta = c.delta.unwrap_or(config.delta);
        config.epsilon = c.epsilon.or(config.epsilon);
        config.replicates = c.replicates.unwrap_or(config.replicates);
        config.burn_in = c.burn_in.or(config.burn_in);
        config.window = c.window.or(config.window);
        config.out = c.out.clone().or(config.out);
        let seed = match c.seed.or(config.seed) {
            Some(s) => s,
            None => env_seed()?.unwrap_or(0),
        };
        config.seed = Some(seed);
        config.validate()?;
        let graph = config.graph.build()?;
        Ok(Self {
            config,
            graph,
            seed,
            jobs: c.jobs,
            csv: c.csv.clone(),
            timing: c.timing,
            started,
        })
    }

    fn lambda(&self) -> Result<f64> {
        self.config.resolve_lambda(&self.graph)
    }

    fn n(&self) -> usize {
        self.graph.vertex_count()
    }

    fn report(&self, experiment: &str) -> Report {
        let mut r = Report::new(experiment, Some(self.config.clone()));
        r.graph = Some(GraphSummary::of(&self.graph));
        r.lambda = self.lambda().ok();
        r
    }

    fn start_set(&self, start: Start) -> IndependentSet {
        match start {
            Start::Empty => IndependentSet::empty(self.n()),
            Start::Greedy => IndependentSet::greedy_maximal(&self.graph, 0..self.n()),
        }
    }

    fn write_rows<R: Serialize>(&self, rows: &[R]) -> Result<()> {
        match &self.csv {
            Some(path) => write_csv(path, rows),
            None => Ok(()),
        }
    }

    fn finish(&self, mut report: Report) -> Result<bool> {
        if self.timing {
            report.wall_clock_seconds = Some(self.started.elapsed().as_secs_f64());
        }
        emit(self.config.out.as_deref(), &report.to_json()?)?;
        Ok(report.passed)
    }

    fn emit_text(&self, text: &str) -> Result<bool> {
        emit(self.config.out.as_deref(), text)?;
        Ok(true)
    }
}

fn require<T>(value: Option<T>, flag: &str, kind: &str) -> Result<T> {
    value.ok_or_else(|| LabError::usage(format!("--{flag} is required for --kind {kind}")))
}

#[allow(clippy::too_many_arguments)]
fn gen_spec(
    kind: GenKind,
    n: Option<usize>,
    degree: Option<usize>,
    p: Option<f64>,
    extra: Option<usize>,
    rows: Option<usize>,
    cols: Option<usize>,
    seed: u64,
) -> Result<GraphSpec> {
    let name = format!("{kind:?}").to_lowercase();
    let n_of = || require(n, "n", &name);
    Ok(match kind {
        GenKind::Regular => GraphSpec::Regular { n: n_of()?, degree: require(degree, "delta-reg", &name)?, seed },
        GenKind::Bipartite => GraphSpec::Bipartite {
            n_per_side: n_of()?,
            degree: require(degree, "delta-reg", &name)?,
            seed,
        },
        GenKind::Tree => GraphSpec::Tree { n: n_of()?, seed },
        GenKind::Gnp => GraphSpec::Gnp { n: n_of()?, p: require(p, "p", &name)?, seed },
        GenKind::Connected => GraphSpec::Connected { n: n_of()?, extra_edges: extra.unwrap_or(0), seed },
        GenKind::Cycle => GraphSpec::Cycle { n: n_of()? },
        GenKind::Path => GraphSpec::Path { n: n_of()? },
        GenKind::Grid => GraphSpec::Grid { rows: require(rows, "rows", &name)?, cols: require(cols, "cols", &name)? },
        GenKind::Complete => GraphSpec::Complete { n: n_of()? },
        GenKind::Star => GraphSpec::Star { leaves: n_of()? },
        GenKind::Heawood => GraphSpec::Heawood,
        GenKind::Petersen => GraphSpec::Petersen,
    })
}

pub fn run(command: Command) -> Result<bool> {
    match command {
        Command::Gen { kind, n, degree, p, extra, rows, cols, seed, out } => {
            let seed = match seed {
                Some(s) => s,
                None => env_seed()?.unwrap_or(0),
            };
            let g = gen_spec(kind, n, degree, p, extra, rows, cols, seed)?.build()?;
            emit(out.as_deref(), &save_edge_list(&g))?;
            Ok(true)
        }
        Command::Girth { common } => {
            let s = Setup::load(&common)?;
            let mut r = s.report("girth");
            let gi = girth(&s.graph);
            r.details = json!({ "girth": gi, "connected": s.graph.is_connected() });
            if let Some(gi) = gi {
                r.metrics.push(Metric::exact("girth", gi as f64, s.seed));
            }
            s.finish(r)
        }
        Command::Bp { common, iterations, mode } => {
            let s = Setup::load(&common)?;
            let lambda = s.lambda()?;
            let m = match mode {
                Mode::Parented => BpMode::Parented,
                Mode::Unrooted => BpMode::Unrooted,
            };
            let q = loopy_bp_marginals(&s.graph, lambda, iterations, m);
            let text = match mode {
                Mode::Parented => dump_arc_values(&s.graph, &q.values),
                Mode::Unrooted => dump_vertex_values(&q.values),
            };
            s.emit_text(&text)
        }
        Command::Fixpoint { common, operator, init, tolerance, max_iterations, field } => {
            let s = Setup::load(&common)?;
            let lambda = s.lambda()?;
            let g = &s.graph;
            let options = FixedPointOptions { tolerance, max_iterations };
            let mut rng = stream_rng(s.seed, 0);
            let mut draw = |len: usize| -> Vec<f64> {
                match init {
                    Init::Ones => vec![1.0; len],
                    Init::Random => (0..len).map(|_| rng.random_range(0.0..=1.0)).collect(),
                }
            };
            let (converged, iterations, residual, rate, dump) = match operator {
                Operator::F => {
                    let r = iterate_f(g, lambda, VertexField::new(g, draw(g.vertex_count()))?, options);
                    let rate = r.observed_rate(1e-8);
                    (r.converged, r.iterations, r.final_residual, rate, dump_vertex_field(&r.fixed_point))
                }
                Operator::H => {
                    let r = iterate_h(g, lambda, DirectedMessageField::new(g, draw(g.arc_count()))?, options);
                    let rate = r.observed_rate(1e-8);
                    (r.converged, r.iterations, r.final_residual, rate, dump_message_field(g, &r.fixed_point))
                }
            };
            if let Some(path) = field {
                emit(Some(&path), &dump)?;
            }
            let d = g.max_degree();
            let mut r = s.report("fixpoint");
            r.parameters = json!({
                "operator": format!("{operator:?}"),
                "init": format!("{init:?}").to_lowercase(),
                "tolerance": tolerance,
                "max_iterations": max_iterations,
            });
            let a = alpha(lambda, d);
            r.details = json!({
                "converged": converged,
                "iterations": iterations,
                "final_residual": residual,
                "observed_rate": rate,
                "alpha": a,
                "uniqueness_margin": uniqueness_margin(lambda, d, s.config.delta),
            });
            r.metrics.push(Metric::exact("iterations", iterations as f64, s.seed));
            r.metrics.push(Metric::exact("final_residual", residual, s.seed));
            r.push_check(Check::holds("converged", converged));
            s.finish(r)
        }
        Command::Phi { common, field } => {
            let s = Setup::load(&common)?;
            let lambda = s.lambda()?;
            let delta = s.config.delta;
            let sol = solve_bp(&s.graph, lambda)?;
            let check = hardcore_core::bp::verify_phi_contraction(&s.graph, lambda, &sol.omega_star, &sol.phi, delta);
            if let Some(path) = field {
                emit(Some(&path), &dump_vertex_values(sol.phi.values()))?;
            }
            let mut r = s.report("phi");
            r.details = json!({
                "method": format!("{:?}", sol.method).to_lowercase(),
                "iterations": sol.iterations,
                "phi_min": sol.phi.min(),
                "phi_max": sol.phi.max(),
                "certified": sol.phi.certified(),
                "worst_vertex": check.worst_vertex,
            });
            r.metrics.push(Metric::exact("max_ratio", check.max_ratio, s.seed));
            r.push_check(Check::at_most("max_ratio", check.max_ratio, check.threshold));
            if sol.phi.certified() {
                r.push_check(Check::at_most("phi_max", sol.phi.max(), 12.0));
            }
            s.finish(r)
        }
        Command::Sample { common, steps, every, start } => {
            let s = Setup::load(&common)?;
            let lambda = s.lambda()?;
            let n = s.n() as u64;
            let steps = steps.unwrap_or(10 * n);
            let every = every.unwrap_or(n).max(1);
            let init = s.start_set(start);
            let mut chain = ChainState::from_set(&s.graph, lambda, &init, stream_rng(s.seed, 0));
            let mut text = trajectory_record(0, chain.occupied());
            while chain.steps() < steps {
                chain.run(every.min(steps - chain.steps()));
                text.push_str(&trajectory_record(chain.steps(), chain.occupied()));
            }
            s.emit_text(&text)
        }
        Command::Mix { common, max_steps } => {
            let s = Setup::load(&common)?;
            let lambda = s.lambda()?;
            let eps = s.config.epsilon.unwrap_or(0.25);
            let t = mixing_time_exact(&s.graph, lambda, eps, &StartSet::All, max_steps)?;
            let empty = IndependentSet::empty(s.n());
            let curve = (0..=t)
                .map(|k| tv_exact(&s.graph, lambda, k, &empty))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let mut r = s.report("mix");
            r.parameters = json!({ "epsilon": eps, "max_steps": max_steps });
            r.details = json!({ "tv_from_empty": curve });
            r.metrics.push(Metric::exact("mixing_time", t as f64, s.seed));
            s.finish(r)
        }
        Command::Uniformity { common, vertex, start, min_fraction } => {
            let s = Setup::load(&common)?;
            let lambda = s.lambda()?;
            let n = s.n() as u64;
            let params = UniformityParams {
                vertex,
                epsilon: s.config.epsilon.unwrap_or(0.3),
                burn_in: s.config.burn_in.unwrap_or(100 * n),
                window: s.config.window.unwrap_or(n),
                replicates: s.config.replicates,
                seed: s.seed,
            };
            let exp = UniformityExperiment::new(&s.graph, lambda, s.start_set(start), params.clone())?;
            let outcomes = runner::run_outcomes(&exp, s.jobs)?;
            #[derive(Serialize)]
            struct Row {
                replicate: usize,
                s_within: bool,
                w_below: bool,
            }
            let rows: Vec<Row> = outcomes
                .iter()
                .enumerate()
                .map(|(i, o)| Row { replicate: i, s_within: o.s_within, w_below: o.w_below })
                .collect();
            s.write_rows(&rows)?;
            let rep = hardcore_core::estimators::Replicated::aggregate(&exp, outcomes);
            let mut r = s.report("uniformity");
            r.parameters = json!({
                "vertex": vertex,
                "epsilon": params.epsilon,
                "burn_in": params.burn_in,
                "window": params.window,
                "start": format!("{start:?}").to_lowercase(),
            });
            r.details = json!({
                "s_center": rep.s_center,
                "w_bound": rep.w_bound,
                "tolerance": rep.tolerance,
                "stationary_exact": rep.stationary_exact,
            });
            let stationary_count = if rep.stationary_exact { 1 } else { rep.replicates as u64 };
            r.metrics.push(Metric {
                replicates: stationary_count,
                ..Metric::exact("stationary_fraction", rep.stationary_fraction, s.seed)
            });
            r.metrics.push(Metric::estimate("dynamic_fraction", &rep.dynamic_fraction, s.seed));
            if let Some(min) = min_fraction {
                r.push_check(Check::at_least("dynamic_fraction", rep.dynamic_fraction.mean, min));
            }
            s.finish(r)
        }
        Command::Contraction { common, steps, start, vertex, max_hamming } => {
            let s = Setup::load(&common)?;
            let lambda = s.lambda()?;
            let n = s.n();
            let d = s.graph.max_degree().max(2);
            let policy = match (start, vertex) {
                (PairStart::EmptyPlus, Some(v)) => {
                    if v >= n {
                        return Err(LabError::usage(format!("--vertex {v} is out of range")));
                    }
                    StartPolicy::EmptyPlus(v)
                }
                (PairStart::EmptyPlus, None) => StartPolicy::EmptyPlusRandom,
                (PairStart::BurnedIn, _) => StartPolicy::BurnedIn {
                    burn_in: s
                        .config
                        .burn_in
                        .unwrap_or((10.0 * n as f64 * (d as f64).ln()) as u64),
                },
                (PairStart::Coalesced, _) => StartPolicy::Coalesced,
            };
            let sol = solve_bp(&s.graph, lambda)?;
            let params = CouplingParams {
                steps: steps.unwrap_or(10 * n as u64),
                replicates: s.config.replicates,
                start: policy.clone(),
                seed: s.seed,
            };
            let exp = CouplingExperiment::new(&s.graph, lambda, sol.phi, params.clone())?;
            let outcomes = runner::run_outcomes(&exp, s.jobs)?;
            #[derive(Serialize)]
            struct Row {
                replicate: usize,
                hamming: usize,
                weighted: f64,
                initial_weighted: f64,
                coalesced: bool,
            }
            let rows: Vec<Row> = outcomes
                .iter()
                .enumerate()
                .map(|(i, o)| Row {
                    replicate: i,
                    hamming: o.hamming,
                    weighted: o.weighted,
                    initial_weighted: o.initial_weighted,
                    coalesced: o.coalesced,
                })
                .collect();
            s.write_rows(&rows)?;
            let rep = hardcore_core::estimators::Replicated::aggregate(&exp, outcomes);
            let mut r = s.report("contraction");
            r.parameters = json!({ "steps": params.steps, "start": format!("{policy:?}") });
            r.details = json!({
                "weighted_drift_per_step": rep.weighted_drift_per_step,
                "coalesced_fraction": rep.coalesced_fraction,
            });
            r.metrics.push(Metric::estimate("hamming", &rep.hamming, s.seed));
            r.metrics.push(Metric::estimate("weighted", &rep.weighted, s.seed));
            if let Some(max) = max_hamming {
                r.push_check(Check::at_most("hamming", rep.hamming.mean, max));
            }
            s.finish(r)
        }
        Command::Count { common, confidence, estimator, sample_constant, check_exact } => {
            let s = Setup::load(&common)?;
            let lambda = s.lambda()?;
            if !(confidence > 0.0 && confidence < 1.0) {
                return Err(LabError::usage(format!("--confidence {confidence} is not in (0, 1)")));
            }
            let z = Normal::new(0.0, 1.0)
                .expect("standard normal")
                .inverse_cdf(0.5 + confidence / 2.0);
            let eps = s.config.epsilon.unwrap_or(0.05);
            let defaults = PartitionOptions::default();
            let options = PartitionOptions {
                sample_constant: sample_constant.unwrap_or(defaults.sample_constant),
                estimator: match estimator {
                    EstimatorKind::Indicator => FactorEstimator::Indicator,
                    EstimatorKind::RaoBlackwell => FactorEstimator::RaoBlackwell,
                },
                ..defaults
            };
            let exp = PartitionEstimator::new(&s.graph, lambda, eps, z, s.seed, options)?;
            let factors = runner::run_outcomes(&exp, s.jobs)?;
            #[derive(Serialize)]
            struct Row {
                factor: usize,
                vertices: usize,
                burn_in: u64,
                samples: u64,
                estimate: f64,
                std_error: f64,
                steps: u64,
            }
            let rows: Vec<Row> = factors
                .iter()
                .enumerate()
                .map(|(i, f)| Row {
                    factor: i,
                    vertices: f.vertices,
                    burn_in: f.burn_in,
                    samples: f.samples,
                    estimate: f.estimate,
                    std_error: f.std_error,
                    steps: f.steps,
                })
                .collect();
            s.write_rows(&rows)?;
            let est = hardcore_core::estimators::Replicated::aggregate(&exp, factors)?;
            let mut r = s.report("count");
            r.parameters = json!({
                "epsilon": eps,
                "confidence": confidence,
                "z_score": z,
                "estimator": format!("{estimator:?}").to_lowercase(),
                "samples_per_factor": exp.samples_per_factor(),
            });
            r.details = json!({
                "estimate": est.estimate,
                "log_estimate": est.log_estimate,
                "log_std_error": est.log_std_error,
                "lower": est.lower,
                "upper": est.upper,
                "total_steps": est.total_steps,
            });
            r.metrics.push(Metric {
                name: "log_partition".to_string(),
                value: est.log_estimate,
                half_width: Some(z * est.log_std_error),
                replicates: est.factors.len() as u64,
                seed: s.seed,
            });
            if check_exact {
                let exact = exact_partition(&s.graph, lambda)?;
                r.push_check(Check::at_most("relative_error", (est.estimate / exact - 1.0).abs(), eps));
            }
            s.finish(r)
        }
        Command::Burnin { common, vertex, rho, radius, checkpoints, start } => {
            let s = Setup::load(&common)?;
            let lambda = s.lambda()?;
            let n = s.n() as u64;
            let d = s.graph.max_degree().max(2) as f64;
            let checkpoints = checkpoints.unwrap_or_else(|| vec![0, n, 4 * n, (10.0 * n as f64 * d.ln()) as u64]);
            let params = BurnInParams {
                vertex,
                rho,
                radius,
                checkpoints: checkpoints.clone(),
                replicates: s.config.replicates,
                seed: s.seed,
            };
            let probe = BurnInProbe::new(&s.graph, lambda, s.start_set(start), params)?;
            let outcomes = runner::run_outcomes(&probe, s.jobs)?;
            let rows: Vec<Vec<u8>> = outcomes.iter().map(|o| o.iter().map(|&b| u8::from(b)).collect()).collect();
            if let Some(path) = &s.csv {
                let mut w = csv::Writer::from_path(path)?;
                let mut header = vec!["replicate".to_string()];
                header.extend(checkpoints.iter().map(|t| format!("t{t}")));
                w.write_record(&header)?;
                for (i, row) in rows.iter().enumerate() {
                    let mut rec = vec![i.to_string()];
                    rec.extend(row.iter().map(|b| b.to_string()));
                    w.write_record(&rec)?;
                }
                w.flush().map_err(|e| LabError::io(path, e))?;
            }
            let rep = hardcore_core::estimators::Replicated::aggregate(&probe, outcomes);
            let mut r = s.report("burnin");
            r.parameters = json!({
                "vertex": vertex,
                "rho": rho,
                "radius": radius,
                "checkpoints": checkpoints,
                "start": format!("{start:?}").to_lowercase(),
            });
            for (t, f) in rep.checkpoints.iter().zip(&rep.fractions) {
                r.metrics.push(Metric {
                    replicates: rep.replicates as u64,
                    ..Metric::exact(&format!("above_suspicion_at_{t}"), *f, s.seed)
                });
            }
            s.finish(r)
        }
        Command::Verify { suite, samples, trials, jobs, out, timing } => {
            let started = Instant::now();
            let mut effort = Effort::full(jobs);
            if let Some(x) = samples {
                effort.stationarity_samples = x;
            }
            if let Some(x) = trials {
                effort.counting_trials = x;
            }
            let outcomes = verify::run_suite(&suite, effort)?;
            let mut r = Report::new("verify", None);
            r.parameters = json!({
                "suite": suite,
                "stationarity_samples": effort.stationarity_samples,
                "counting_trials": effort.counting_trials,
            });
            for o in &outcomes {
                for c in &o.checks {
                    let mut c = c.clone();
                    c.name = format!("{} {}: {}", o.id, o.name, c.name);
                    r.push_check(c);
                }
            }
            r.details = serde_json::to_value(
                outcomes
                    .iter()
                    .map(|o| json!({ "criterion": o.id, "name": o.name, "passed": o.passed, "summary": o.summary }))
                    .collect::<Vec<_>>(),
            )?;
            if timing {
                r.wall_clock_seconds = Some(started.elapsed().as_secs_f64());
            }
            emit(out.as_deref(), &r.to_json()?)?;
            Ok(r.passed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn lambda_flags_conflict() {
        let err = Cli::try_parse_from(["hardcore-lab", "girth", "--graph", "g", "--lambda", "1", "--lambda-ratio", "0.5"])
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn normal_quantile() {
        let z = Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.975);
        assert!((z - hardcore_core::estimators::Z_95).abs() < 1e-9);
    }
}
