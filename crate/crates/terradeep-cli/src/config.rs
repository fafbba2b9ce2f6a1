use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use terradeep::data::{InputMode, SplitPlan};
use terradeep::error::Error;
use terradeep::zoo::{self, Task};

use crate::args::ExperimentArgs;

/// CLI failures split into usage problems (exit 1) and everything the
/// library already classifies (exit 2 or 3).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Lib(err) => write!(f, "{err}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError::Lib(err)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lib(err) => err.exit_code(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Config-file schema: the same knobs as the flags, all optional, plus the
/// split plan (which has no flag form). Unknown keys are rejected so typos
/// fail loudly instead of silently running defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub task: Option<String>,
    pub learner: Option<String>,
    pub mode: Option<String>,
    pub data: Option<PathBuf>,
    pub synth: Option<bool>,
    pub count: Option<usize>,
    pub nw: Option<usize>,
    pub size: Option<usize>,
    pub epochs: Option<usize>,
    pub batch: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub plan: Option<SplitPlan>,
}

/// Where the samples come from.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Path(PathBuf),
    Synth,
}

/// A fully resolved experiment: flag values layered over config-file values
/// layered over defaults. Serialized verbatim into every report as the
/// config echo, so a flag run and its config-file twin are provably the
/// same experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub task: Option<Task>,
    pub learner: Option<String>,
    pub mode: Option<InputMode>,
    pub source: DataSource,
    pub count: Option<usize>,
    pub nw: usize,
    pub size: usize,
    pub epochs: Option<usize>,
    pub batch: Option<usize>,
    pub plan: SplitPlan,
    #[serde(skip)]
    pub out: PathBuf,
    pub seed: u64,
}

/// Default per-class volume of the synthetic corpora.
pub const DEFAULT_SLIP_COUNT: usize = 1000;
pub const DEFAULT_IMAGE_COUNT: usize = 100;

pub fn resolve(args: &ExperimentArgs) -> CliResult<ExperimentConfig> {
    let file = match &args.config {
        Some(path) => read_config_file(path)?,
        None => ConfigFile::default(),
    };

    let task = match (&args.task, &file.task) {
        (Some(t), _) => Some(t.to_task()),
        (None, Some(name)) => Some(parse_task(name)?),
        (None, None) => None,
    };
    let mode = match (&args.mode, &file.mode) {
        (Some(m), _) => Some(m.to_mode()),
        (None, Some(name)) => Some(parse_mode(name)?),
        (None, None) => None,
    };
    let learner = args.learner.clone().or(file.learner);
    let data = args.data.clone().or(file.data);
    let synth = args.synth || file.synth.unwrap_or(false);
    if data.is_some() && synth {
        return Err(usage("--data and --synth are mutually exclusive"));
    }
    let seed = args.seed.or(file.seed).unwrap_or(7);
    let size = args.size.or(file.size).unwrap_or(64);
    if !(size == 64 || size == 128) {
        return Err(usage(format!("--size {size} not supported (use 64 or 128)")));
    }

    let config = ExperimentConfig {
        task,
        learner,
        mode,
        source: match data {
            Some(path) => DataSource::Path(path),
            None => DataSource::Synth,
        },
        count: args.count.or(file.count),
        nw: args.nw.or(file.nw).unwrap_or(50),
        size,
        epochs: args.epochs.or(file.epochs),
        batch: args.batch.or(file.batch),
        plan: file.plan.unwrap_or_else(|| SplitPlan::standard(seed)),
        out: args.out.clone().or(file.out).unwrap_or_else(|| "results".into()),
        seed,
    };
    validate(&config)?;
    Ok(config)
}

fn read_config_file(path: &Path) -> CliResult<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Lib(Error::Io {
            path: path.display().to_string(),
            source: e,
        }))?;
    serde_json::from_str(&text).map_err(|e| CliError::Lib(Error::Format {
        path: path.display().to_string(),
        line: Some(e.line()),
        msg: e.to_string(),
    }))
}

fn parse_task(name: &str) -> CliResult<Task> {
    match name {
        "slip" => Ok(Task::Slip),
        "image" => Ok(Task::Image),
        other => Err(usage(format!("unknown task '{other}' (use slip or image)"))),
    }
}

fn parse_mode(name: &str) -> CliResult<InputMode> {
    match name {
        "raw" => Ok(InputMode::Raw),
        "filtered" => Ok(InputMode::Filtered),
        other => Err(usage(format!(
            "unknown mode '{other}' (use raw or filtered)"
        ))),
    }
}

/// Structural checks that don't need data: the learner must exist and agree
/// with the task, and a dataset path must be resolvable now rather than
/// after minutes of work.
fn validate(config: &ExperimentConfig) -> CliResult<()> {
    if let Some(name) = &config.learner {
        let learner = zoo::build(name)?;
        if let Some(task) = config.task {
            if learner.task() != task {
                return Err(usage(format!(
                    "learner {name} belongs to the {} task, not {}",
                    learner.task().as_str(),
                    task.as_str()
                )));
            }
        }
    }
    if let DataSource::Path(path) = &config.source {
        if !path.exists() {
            return Err(CliError::Lib(Error::Io {
                path: path.display().to_string(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such path"),
            }));
        }
    }
    if config.nw == 0 {
        return Err(usage("--nw must be at least 1"));
    }
    Ok(())
}

impl ExperimentConfig {
    /// The task, inferred from the learner when not given explicitly.
    pub fn require_task(&self) -> CliResult<Task> {
        if let Some(task) = self.task {
            return Ok(task);
        }
        if let Some(name) = &self.learner {
            return Ok(zoo::build(name)?.task());
        }
        Err(usage("--task is required (or --learner to infer it)"))
    }

    pub fn require_learner(&self) -> CliResult<&str> {
        self.learner
            .as_deref()
            .ok_or_else(|| usage("--learner is required"))
    }

    /// Per-class synthetic volume with per-task defaults.
    pub fn count_for(&self, task: Task) -> usize {
        self.count.unwrap_or(match task {
            Task::Slip => DEFAULT_SLIP_COUNT,
            Task::Image => DEFAULT_IMAGE_COUNT,
        })
    }
}

/// Parallelism cap from `TERRADEEP_THREADS`; absent means sequential.
pub fn threads_from_env() -> CliResult<usize> {
    match std::env::var("TERRADEEP_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(1),
        Err(e) => Err(usage(format!("TERRADEEP_THREADS unreadable: {e}"))),
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(usage(format!(
                "TERRADEEP_THREADS must be a positive integer, got '{raw}'"
            ))),
        },
    }
}
