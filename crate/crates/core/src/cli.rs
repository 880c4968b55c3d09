//! Command-line front end.
//!
//! Every subcommand resolves its parameters from flags, then an optional
//! `--config` JSON object, then built-in defaults, and writes its outputs and
//! a `manifest.json` under `--output-dir`. The master seed additionally falls
//! back to `HITWALK_SEED`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::acceptance;
use crate::appendix::bound_ratio_scan;
use crate::binomial_moments::moment_set;
use crate::graphs::{sample_connected_er, sample_er, stationary_distribution, Graph, DEFAULT_MAX_ATTEMPTS};
use crate::harness::{
    empirical_summary, failures_csv, histogram, histogram_csv, records_csv, run_trials, TrialConfig, TrialMode,
    DEFAULT_BINS,
};
use crate::output::{manifest, real, to_json, write_file, Json};
use crate::ustat::{condition_diagnostics, hitting_statistics, synthetic_statistics, DEFAULT_EPS, MIN_MC_SAMPLES};
use crate::walk_spectra::{
    avg_starting_from_matrix, avg_starting_spectral_scalar, graph_spectrum, hitting_matrix_exact,
    hitting_matrix_spectral, init_dense_backend, HittingMatrix,
};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_ACCEPTANCE: i32 = 4;

pub const SEED_ENV: &str = "HITWALK_SEED";
pub const DEFAULT_OUTPUT_DIR: &str = "hitwalk-out";

#[derive(Parser, Debug)]
#[command(name = "hitwalk", version, about = "Hitting times of random walks on Erdős–Rényi graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON object with default values for any flag (keys use underscores).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; falls back to the config file, then HITWALK_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a connected G(n+1, p) and write its edge file.
    SampleGraph {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        max_attempts: Option<u32>,
        /// Keep the first draw even if it is disconnected.
        #[arg(long)]
        allow_disconnected: bool,
    },
    /// Hitting matrices and the average starting hitting time of a graph.
    Hitting {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        edges: Option<PathBuf>,
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// The moment set at (n, p) as a flat JSON object.
    Moments {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
    },
    /// U-statistics of one graph (--edges) or of one synthetic sample.
    Ustat {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        edges: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Monte Carlo campaign over independent graphs.
    CltRun {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        p_star: Option<f64>,
        /// Number of trials.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        max_attempts: Option<u32>,
        #[arg(long)]
        bins: Option<usize>,
        /// Store per-trial wall times (makes reruns differ).
        #[arg(long)]
        record_timing: bool,
    },
    /// Numeric values of the four CLT conditions, one JSON object per n.
    DiagConditions {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        mc_samples: Option<usize>,
    },
    /// Exhaustive weighted configuration sums and their bound ratios.
    AppendixScan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        ordered: bool,
    },
    /// Run the acceptance suite.
    Selftest {
        #[command(flatten)]
        common: Common,
        /// Comma-separated criterion numbers; all by default.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<usize>>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Method {
    Exact,
    Spectral,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Exact,
    Truncated,
    Both,
}

/// Flag, then config file, then default.
struct Resolver {
    config: Map<String, Value>,
}

impl Resolver {
    fn load(path: Option<&Path>) -> Result<Self> {
        let config = match path {
            None => Map::new(),
            Some(p) => match serde_json::from_str::<Value>(&fs::read_to_string(p)?)? {
                Value::Object(map) => map,
                _ => return Err(Error::Parse(format!("{} is not a JSON object", p.display()))),
            },
        };
        Ok(Self { config })
    }

    fn get<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.config.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v.clone())
                .map(Some)
                .map_err(|e| Error::InvalidArgument(format!("config key `{key}`: {e}"))),
        }
    }

    fn or<T: DeserializeOwned>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(self.get(flag, key)?.unwrap_or(default))
    }

    fn required<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<T> {
        self.get(flag, key)?.ok_or_else(|| Error::InvalidArgument(format!("--{} is required", key.replace('_', "-"))))
    }

    fn flag(&self, set: bool, key: &str) -> Result<bool> {
        Ok(set || self.or(None, key, false)?)
    }

    fn value_enum<E: ValueEnum>(&self, flag: Option<E>, key: &str, default: E) -> Result<E> {
        if let Some(f) = flag {
            return Ok(f);
        }
        match self.get::<String>(None, key)? {
            None => Ok(default),
            Some(s) => E::from_str(&s, true).map_err(|_| Error::InvalidArgument(format!("config key `{key}`: `{s}`"))),
        }
    }
}

struct Context {
    resolver: Resolver,
    seed: u64,
    workers: usize,
    output_dir: PathBuf,
    started: Instant,
}

impl Context {
    fn new(common: &Common) -> Result<Self> {
        let resolver = Resolver::load(common.config.as_deref())?;
        let seed = match resolver.get(common.seed, "seed")? {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(s) => s.trim().parse().map_err(|_| Error::Parse(format!("{SEED_ENV} = `{s}` is not a u64")))?,
                Err(_) => 0,
            },
        };
        let workers = resolver.or(common.workers, "workers", 1)?;
        if workers == 0 {
            return Err(Error::InvalidArgument("--workers must be positive".into()));
        }
        let output_dir = resolver.or(common.output_dir.clone(), "output_dir", PathBuf::from(DEFAULT_OUTPUT_DIR))?;
        Ok(Self { resolver, seed, workers, output_dir, started: Instant::now() })
    }

    fn write(&self, name: &str, contents: &str) -> Result<()> {
        write_file(&self.output_dir, name, contents).map(|_| ())
    }

    fn finish(&self, subcommand: &str, config: Json, artifacts: &[&str]) -> Result<()> {
        let wall_ms = self.started.elapsed().as_secs_f64() * 1e3;
        let config = config.field("seed", self.seed).field("workers", self.workers).field(
            "output_dir",
            self.output_dir.display().to_string(),
        );
        self.write("manifest.json", &manifest(subcommand, config, wall_ms, artifacts).render_pretty())
    }
}

/// Parse `argv` (including the program name) and run; returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidProbability(_)
        | Error::TooFewVertices(_)
        | Error::NonMonotoneSchedule
        | Error::InvalidArgument(_)
        | Error::Parse(_)
        | Error::Json(_) => EXIT_VALIDATION,
        _ => EXIT_RUNTIME,
    }
}

fn execute(command: Command) -> Result<i32> {
    init_dense_backend();
    match command {
        Command::SampleGraph { common, n, p, max_attempts, allow_disconnected } => {
            let ctx = Context::new(&common)?;
            let r = &ctx.resolver;
            let n: usize = r.required(n, "n")?;
            let p: f64 = r.required(p, "p")?;
            let max_attempts = r.or(max_attempts, "max_attempts", DEFAULT_MAX_ATTEMPTS)?;
            let allow_disconnected = r.flag(allow_disconnected, "allow_disconnected")?;
            let g = if allow_disconnected {
                sample_er(n + 1, p, ctx.seed)?
            } else {
                sample_connected_er(n + 1, p, ctx.seed, max_attempts)?
            };
            ctx.write("graph.edges", &g.to_edge_text())?;
            let info = Json::obj()
                .field("n_plus_1", g.n_plus_1())
                .field("p", p)
                .field("edges", g.edge_count())
                .field("connected", g.is_connected())
                .field("attempts", g.attempts());
            println!("{}", info.render());
            let config = Json::obj()
                .field("n", n)
                .field("p", p)
                .field("max_attempts", max_attempts)
                .field("allow_disconnected", allow_disconnected);
            ctx.finish("sample-graph", config, &["graph.edges"])?;
        }
        Command::Hitting { common, edges, method } => {
            let ctx = Context::new(&common)?;
            let r = &ctx.resolver;
            let edges: PathBuf = r.required(edges, "edges")?;
            let method = r.value_enum(method, "method", Method::Both)?;
            let g = Graph::from_edge_text(&fs::read_to_string(&edges)?)?;
            let out = hitting_report(&g, method, &ctx)?;
            println!("{}", out.0.render());
            let config =
                Json::obj().field("edges", edges.display().to_string()).field("method", format!("{method:?}").to_lowercase());
            let mut artifacts = vec!["hitting.json"];
            artifacts.extend(out.1);
            ctx.finish("hitting", config, &artifacts)?;
        }
        Command::Moments { common, n, p } => {
            let ctx = Context::new(&common)?;
            let n: usize = ctx.resolver.required(n, "n")?;
            let p: f64 = ctx.resolver.required(p, "p")?;
            let json = to_json(&moment_set(n, p)?)?.render();
            println!("{json}");
            ctx.write("moments.json", &format!("{json}\n"))?;
            ctx.finish("moments", Json::obj().field("n", n).field("p", p), &["moments.json"])?;
        }
        Command::Ustat { common, n, p, edges, mode } => {
            let ctx = Context::new(&common)?;
            let r = &ctx.resolver;
            let edges: Option<PathBuf> = r.get(edges, "edges")?;
            let mode = r.value_enum(mode, "mode", Mode::Exact)?;
            let (json, config) = match edges {
                Some(path) => {
                    let g = Graph::from_edge_text(&fs::read_to_string(&path)?)?;
                    let m = moment_set(g.n(), g.p())?;
                    let hs = hitting_statistics(&g, &m, mode != Mode::Truncated)?;
                    let json = Json::obj()
                        .field("source", "graph")
                        .field("n", g.n())
                        .field("p", g.p())
                        .field("statistics", to_json(&hs)?)
                        .field("remainder", hs.remainder());
                    (json, Json::obj().field("edges", path.display().to_string()))
                }
                None => {
                    let n: usize = r.required(n, "n")?;
                    let p: f64 = r.required(p, "p")?;
                    let m = moment_set(n, p)?;
                    let s = synthetic_statistics(n, p, &m, ctx.seed)?;
                    let json = Json::obj()
                        .field("source", "synthetic")
                        .field("n", n)
                        .field("p", p)
                        .field("statistics", to_json(&s)?);
                    (json, Json::obj().field("n", n).field("p", p))
                }
            };
            let text = json.render();
            println!("{text}");
            ctx.write("ustat.json", &format!("{text}\n"))?;
            ctx.finish("ustat", config.field("mode", format!("{mode:?}").to_lowercase()), &["ustat.json"])?;
        }
        Command::CltRun { common, n, p, p_star, m, mode, max_attempts, bins, record_timing } => {
            let ctx = Context::new(&common)?;
            let r = &ctx.resolver;
            let mut cfg = TrialConfig::new(r.required(n, "n")?, r.required(p, "p")?, r.required(m, "m_trials")?, ctx.seed);
            cfg.p_star = r.or(p_star, "p_star", cfg.p)?;
            cfg.mode = match r.value_enum(mode, "mode", Mode::Exact)? {
                Mode::Exact => TrialMode::Exact,
                Mode::Truncated => TrialMode::Truncated,
                Mode::Both => TrialMode::Both,
            };
            cfg.max_attempts = r.or(max_attempts, "max_attempts", cfg.max_attempts)?;
            cfg.record_timing = r.flag(record_timing, "record_timing")?;
            cfg.workers = ctx.workers;
            let bins = r.or(bins, "bins", DEFAULT_BINS)?;
            cfg.validate()?;
            let batch = run_trials(&cfg)?;
            let summary = empirical_summary(&batch, cfg.p_star)?;
            let values: Vec<f64> = batch.records.iter().map(|t| t.statistic()).collect();
            ctx.write("trials.csv", &records_csv(&batch))?;
            ctx.write("failures.csv", &failures_csv(&batch))?;
            ctx.write("summary.json", &summary.to_json().render_pretty())?;
            ctx.write("histogram.csv", &histogram_csv(&histogram(&values, bins)?))?;
            println!("{}", summary.to_json().render());
            let config = cfg.to_json().field("bins", bins);
            ctx.finish("clt-run", config, &["trials.csv", "failures.csv", "summary.json", "histogram.csv"])?;
        }
        Command::DiagConditions { common, n_list, p, eps, mc_samples } => {
            let ctx = Context::new(&common)?;
            let r = &ctx.resolver;
            let n_list: Vec<usize> = r.required(n_list, "n_list")?;
            let p: f64 = r.required(p, "p")?;
            let eps = r.or(eps, "eps", DEFAULT_EPS)?;
            let mc_samples = r.or(mc_samples, "mc_samples", 10 * MIN_MC_SAMPLES)?;
            let mut lines = String::new();
            for &n in &n_list {
                let d = condition_diagnostics(n, p, eps, mc_samples, ctx.seed)?;
                let line = to_json(&d)?.render();
                println!("{line}");
                lines.push_str(&line);
                lines.push('\n');
            }
            ctx.write("conditions.jsonl", &lines)?;
            let config = Json::obj()
                .field("n_list", Json::Arr(n_list.iter().map(|&n| n.into()).collect()))
                .field("p", p)
                .field("eps", eps)
                .field("mc_samples", mc_samples);
            ctx.finish("diag-conditions", config, &["conditions.jsonl"])?;
        }
        Command::AppendixScan { common, k, n_list, p, ordered } => {
            let ctx = Context::new(&common)?;
            let r = &ctx.resolver;
            let k: usize = r.required(k, "k")?;
            let n_list: Vec<usize> = r.required(n_list, "n_list")?;
            let p: f64 = r.required(p, "p")?;
            let ordered = r.flag(ordered, "ordered")?;
            let scan = bound_ratio_scan(k, &n_list, p, ordered)?;
            let mut csv = String::from("n_plus_1,k,p,ordered,value,ratio\n");
            for row in &scan.rows {
                csv.push_str(&format!("{},{k},{},{ordered},{},{}\n", row.n + 1, real(p), real(row.value), real(row.ratio)));
            }
            print!("{csv}");
            ctx.write("appendix.csv", &csv)?;
            let config = Json::obj()
                .field("k", k)
                .field("n_list", Json::Arr(n_list.iter().map(|&n| n.into()).collect()))
                .field("p", p)
                .field("ordered", ordered);
            ctx.finish("appendix-scan", config, &["appendix.csv"])?;
        }
        Command::Selftest { common, only } => {
            let ctx = Context::new(&common)?;
            let ids: Vec<usize> = ctx.resolver.or(only, "only", (1..=acceptance::CRITERIA).collect())?;
            if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > acceptance::CRITERIA) {
                return Err(Error::InvalidArgument(format!("no acceptance criterion {bad}")));
            }
            let seed = ctx.resolver.get(common.seed, "seed")?.unwrap_or(acceptance::DEFAULT_SEED);
            let mut rows = Vec::new();
            let mut all = true;
            for &id in &ids {
                let o = acceptance::run(id, seed, ctx.workers);
                println!("{o}");
                all &= o.passed;
                rows.push(
                    Json::obj()
                        .field("criterion", o.id)
                        .field("name", o.name)
                        .field("passed", o.passed)
                        .field("detail", o.detail)
                        .field("seconds", o.seconds),
                );
            }
            ctx.write("selftest.json", &Json::Arr(rows).render_pretty())?;
            let config = Json::obj()
                .field("criteria", Json::Arr(ids.iter().map(|&i| i.into()).collect()))
                .field("acceptance_seed", seed);
            ctx.finish("selftest", config, &["selftest.json"])?;
            return Ok(if all { EXIT_OK } else { EXIT_ACCEPTANCE });
        }
    }
    Ok(EXIT_OK)
}

fn matrix_json(h: &HittingMatrix) -> Json {
    let m = h.size();
    Json::Arr((0..m).map(|i| Json::Arr((0..m).map(|j| h.get(i, j).into()).collect())).collect())
}

fn hitting_report(g: &Graph, method: Method, ctx: &Context) -> Result<(Json, Vec<&'static str>)> {
    let pi = stationary_distribution(g)?;
    let mut json = Json::obj().field("n_plus_1", g.n_plus_1()).field("edges", g.edge_count());
    let mut artifacts = Vec::new();
    let exact = match method {
        Method::Spectral => None,
        _ => Some(hitting_matrix_exact(g)?),
    };
    let spectrum = graph_spectrum(g, method != Method::Exact)?;
    let spectral = match method {
        Method::Exact => None,
        _ => Some(hitting_matrix_spectral(g, &spectrum)?),
    };
    for (name, file, h) in [("exact", "hitting_exact.json", &exact), ("spectral", "hitting_spectral.json", &spectral)] {
        if let Some(h) = h {
            let per_vertex = avg_starting_from_matrix(h, &pi);
            json = json
                .field(&format!("{name}_matrix"), matrix_json(h))
                .field(&format!("{name}_avg_starting"), Json::Arr(per_vertex.iter().map(|&v| v.into()).collect()))
                .field(&format!("{name}_first_step_residual"), h.first_step_residual(g));
            ctx.write(file, &matrix_json(h).render_pretty())?;
            artifacts.push(file);
        }
    }
    if let (Some(a), Some(b)) = (&exact, &spectral) {
        json = json.field("max_relative_difference", a.max_relative_difference(b));
    }
    json = json.field("h_i", avg_starting_spectral_scalar(&spectrum.eigenvalues));
    ctx.write("hitting.json", &format!("{}\n", json.render()))?;
    Ok((json, artifacts))
}
