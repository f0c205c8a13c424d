use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use instab_core::pipeline::{self, validate_artifacts, PipelineConfig, EXIT_FATAL, EXIT_NO_TRANSITION, EXIT_OK};
use serde_json::{Map, Value};

/// Mine a Java project's history for architectural instability.
#[derive(Parser)]
#[command(name = "instab", version)]
struct Cli {
    /// Log verbosity (error, warn, info, debug, trace); RUST_LOG takes precedence.
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read commit history into commits.jsonl.
    Ingest(ConfigArgs),
    /// Committer windows and transition detection.
    Phases(ConfigArgs),
    /// Enumerate tagged or periodic releases.
    Releases(ConfigArgs),
    /// Extract dependency graphs for each release.
    Deps(ConfigArgs),
    /// Compute per-release metrics, diffs and the release series.
    Metrics(ConfigArgs),
    /// Correlate modified-file ratio with instability.
    Correlate(ConfigArgs),
    /// Fit the instability forecast and flag hot-spots.
    Predict(ConfigArgs),
    /// Write plot data and the run summary.
    Report(ConfigArgs),
    /// Run every stage.
    Run(ConfigArgs),
    /// Check the artifacts of an output directory.
    Validate {
        /// Output directory to check.
        dir: PathBuf,
    },
}

/// Every flag overrides the config-file key of the same name.
#[derive(Args, Default)]
struct ConfigArgs {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    project: Option<String>,
    #[arg(long)]
    repo_path: Option<PathBuf>,
    #[arg(long)]
    commit_log: Option<PathBuf>,
    #[arg(long)]
    merge_map: Option<PathBuf>,
    /// Glob for source files; repeat for several.
    #[arg(long)]
    source_filter: Vec<String>,
    #[arg(long)]
    window_days: Option<i64>,
    #[arg(long)]
    step_days: Option<i64>,
    #[arg(long)]
    cathedral_max: Option<usize>,
    #[arg(long)]
    bazaar_min: Option<usize>,
    #[arg(long)]
    sustain: Option<usize>,
    #[arg(long)]
    tag_pattern: Option<String>,
    #[arg(long)]
    fallback_interval_days: Option<i64>,
    #[arg(long)]
    include_annotations: Option<bool>,
    #[arg(long)]
    z_threshold: Option<f64>,
    #[arg(long)]
    lag: Option<usize>,
    #[arg(long)]
    train_fraction: Option<f64>,
    #[arg(long)]
    permutations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut doc = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                match serde_json::from_str::<Value>(&text).with_context(|| format!("parsing {}", path.display()))? {
                    Value::Object(m) => m,
                    _ => bail!("{}: config must be a JSON object", path.display()),
                }
            }
            None => Map::new(),
        };
        let mut set = |key: &str, v: Option<Value>| {
            if let Some(v) = v {
                doc.insert(key.to_string(), v);
            }
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| Value::from(p.to_string_lossy().into_owned()));
        set("project", self.project.clone().map(Value::from));
        set("repo_path", path(&self.repo_path));
        set("commit_log", path(&self.commit_log));
        set("merge_map", path(&self.merge_map));
        set(
            "source_filter",
            (!self.source_filter.is_empty()).then(|| Value::from(self.source_filter.clone())),
        );
        set("window_days", self.window_days.map(Value::from));
        set("step_days", self.step_days.map(Value::from));
        set("cathedral_max", self.cathedral_max.map(Value::from));
        set("bazaar_min", self.bazaar_min.map(Value::from));
        set("sustain", self.sustain.map(Value::from));
        set("tag_pattern", self.tag_pattern.clone().map(Value::from));
        set("fallback_interval_days", self.fallback_interval_days.map(Value::from));
        set("include_annotations", self.include_annotations.map(Value::from));
        set("z_threshold", self.z_threshold.map(Value::from));
        set("lag", self.lag.map(Value::from));
        set("train_fraction", self.train_fraction.map(Value::from));
        set("permutations", self.permutations.map(Value::from));
        set("seed", self.seed.map(Value::from));
        set("output_dir", path(&self.output_dir));
        Ok(PipelineConfig::from_json(&Value::Object(doc).to_string())?)
    }
}

fn transition_exit(found: bool) -> i32 {
    if found {
        EXIT_OK
    } else {
        EXIT_NO_TRANSITION
    }
}

fn execute(command: Command) -> Result<i32> {
    let (args, stage) = match command {
        Command::Validate { dir } => {
            let checks = validate_artifacts(&dir)?;
            let mut failed = false;
            for c in &checks {
                match &c.error {
                    None => println!("ok   {}", c.path),
                    Some(e) => {
                        failed = true;
                        println!("FAIL {}: {e}", c.path);
                    }
                }
            }
            return Ok(if failed { EXIT_FATAL } else { EXIT_OK });
        }
        Command::Ingest(a) => (a, "ingest"),
        Command::Phases(a) => (a, "phases"),
        Command::Releases(a) => (a, "releases"),
        Command::Deps(a) => (a, "deps"),
        Command::Metrics(a) => (a, "metrics"),
        Command::Correlate(a) => (a, "correlate"),
        Command::Predict(a) => (a, "predict"),
        Command::Report(a) => (a, "report"),
        Command::Run(a) => (a, "run"),
    };
    let cfg = args.resolve()?;
    if matches!(stage, "ingest" | "run") {
        cfg.validate()?;
    }
    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating output directory {}", cfg.output_dir.display()))?;
    let code = match stage {
        "ingest" => {
            let log = pipeline::stage_ingest(&cfg)?;
            println!("{} commits", log.len());
            EXIT_OK
        }
        "phases" => {
            let t = pipeline::stage_phases(&cfg)?;
            println!("transition found: {}", t.found);
            transition_exit(t.found)
        }
        "releases" => {
            let r = pipeline::stage_releases(&cfg)?;
            println!("{} releases", r.len());
            EXIT_OK
        }
        "deps" => {
            let g = pipeline::stage_deps(&cfg)?;
            println!("{} dependency graphs", g.len());
            EXIT_OK
        }
        "metrics" => {
            let m = pipeline::stage_metrics(&cfg)?;
            println!("metrics for {} releases", m.len());
            EXIT_OK
        }
        "correlate" => {
            pipeline::stage_correlate(&cfg)?;
            EXIT_OK
        }
        "predict" => {
            pipeline::stage_predict(&cfg)?;
            EXIT_OK
        }
        "report" => {
            let r = pipeline::stage_report(&cfg)?;
            transition_exit(r["transition_found"].as_bool().unwrap_or(false))
        }
        _ => {
            let outcome = pipeline::run_pipeline(&cfg)?;
            println!(
                "transition found: {}; {} releases analysed; artifacts in {}",
                outcome.transition.found,
                outcome.releases,
                cfg.output_dir.display()
            );
            outcome.exit_code()
        }
    };
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let filter = tracing_subscriber::EnvFilter::try_from_default_env()
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(&cli.log_level));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .init();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FATAL as u8)
        }
    }
}
