use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use terradeep::data::{holdout_split, InputMode, LabeledDataset};
use terradeep::error::Error;
use terradeep::eval::{prepare_image_input, prepare_slip_input, run_experiment};
use terradeep::image::HogConfig;
use terradeep::zoo::{self, InputLayout, Learner, Task, TrainOverrides};

use crate::args::ExperimentArgs;
use crate::commands::{create_dir, write_file};
use crate::config::{resolve, threads_from_env, usage, CliResult, ExperimentConfig};
use crate::source::{image_corpus, slip_frames};

/// Per-class synthetic volume for the comparison grid. The grid exists to
/// compare pipelines, not to chase headline accuracy, so it runs at smoke
/// scale by default; `--count` raises it.
const GRID_SLIP_COUNT: usize = 150;
const GRID_IMAGE_COUNT: usize = 6;

const MODES: [InputMode; 2] = [InputMode::Raw, InputMode::Filtered];

struct Cell {
    learner: Arc<dyn Learner>,
    mode: InputMode,
    /// Index into the prepared-dataset table, or the reason the combination
    /// is structurally impossible.
    input: Result<usize, &'static str>,
}

struct CellResult {
    accuracy_mean: f64,
    accuracy_std: f64,
}

/// `None` marks a structurally unsupported cell that was skipped.
type CellOutcome = Result<Option<CellResult>, Error>;

/// Structural support rule for a (layout, mode) combination; mirrors what
/// input preparation accepts. Plane learners consume raw pixels only — the
/// filtered branch produces descriptor vectors that have no plane form.
fn unsupported_reason(layout: &InputLayout, mode: InputMode) -> Option<&'static str> {
    match (layout, mode) {
        (InputLayout::ImagePlane, InputMode::Filtered) => {
            Some("filtered features are vectors; plane learners take raw images")
        }
        _ => None,
    }
}

/// Run every catalog entry (optionally one task's slice) in both input
/// modes over the split plan; write one report directory per supported cell
/// and a summary table, assembled in fixed grid order regardless of how
/// many worker threads ran the cells.
pub fn run(args: &ExperimentArgs) -> CliResult<()> {
    let config = resolve(args)?;
    let threads = threads_from_env()?;
    let entries: Vec<Arc<dyn Learner>> = zoo::catalog()
        .into_iter()
        .filter(|e| config.task.is_none_or(|t| e.task() == t))
        .map(Arc::from)
        .collect();
    if entries.is_empty() {
        return Err(usage("no catalog entries match the requested task"));
    }

    // Build each distinct prepared dataset once; cells reference them by
    // index so worker threads can share them immutably.
    let mut prepared: Vec<(Task, InputMode, InputLayout, LabeledDataset)> = Vec::new();
    let mut cells: Vec<Cell> = Vec::new();
    let mut slip_cache: Option<Vec<terradeep::signal::SensorFrame>> = None;
    let mut image_cache: Option<LabeledDataset> = None;
    for learner in entries {
        for mode in MODES {
            let layout = learner.layout();
            let input = match unsupported_reason(&layout, mode) {
                Some(reason) => Err(reason),
                None => {
                    let task = learner.task();
                    let key = prepared
                        .iter()
                        .position(|(t, m, l, _)| *t == task && *m == mode && *l == layout);
                    let idx = match key {
                        Some(idx) => idx,
                        None => {
                            let data = prepare_cell_input(
                                &config,
                                task,
                                mode,
                                &layout,
                                &mut slip_cache,
                                &mut image_cache,
                            )?;
                            prepared.push((task, mode, layout, data));
                            prepared.len() - 1
                        }
                    };
                    Ok(idx)
                }
            };
            cells.push(Cell {
                learner: learner.clone(),
                mode,
                input,
            });
        }
    }

    let bench_dir = config.out.join("bench");
    create_dir(&bench_dir)?;
    let echo = serde_json::to_value(&config).map_err(Error::from)?;

    // Fixed-order result slots; workers pull the next unclaimed cell.
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<CellOutcome>>> =
        cells.iter().map(|_| Mutex::new(None)).collect();
    let worker = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        if i >= cells.len() {
            break;
        }
        let outcome = run_cell(&cells[i], &config, &prepared, &bench_dir, &echo);
        *slots[i].lock().expect("result slot") = Some(outcome);
    };
    if threads <= 1 {
        worker();
    } else {
        std::thread::scope(|s| {
            for _ in 0..threads.min(cells.len()) {
                s.spawn(worker);
            }
        });
    }

    // Summary in grid order; the first failing cell aborts the command.
    let mut summary = String::from("learner,mode,status,accuracy_mean,accuracy_std\n");
    let mut table = format!(
        "{:<12} {:<9} {:<12} {:>8} {:>8}\n",
        "learner", "mode", "status", "mean", "std"
    );
    for (cell, slot) in cells.iter().zip(&slots) {
        let outcome = slot
            .lock()
            .expect("result slot")
            .take()
            .expect("every cell ran");
        let name = cell.learner.name();
        let mode = cell.mode.as_str();
        match outcome {
            Err(err) => {
                return Err(err.with_context(&format!("cell {name}-{mode}: ")).into())
            }
            Ok(None) => {
                let reason = cell.input.err().unwrap_or("unsupported");
                summary.push_str(&format!("{name},{mode},unsupported,,\n"));
                table.push_str(&format!(
                    "{name:<12} {mode:<9} {:<12} {:>8} {:>8}\n",
                    "unsupported", "-", "-"
                ));
                eprintln!("skipped {name}-{mode}: {reason}");
            }
            Ok(Some(res)) => {
                summary.push_str(&format!(
                    "{name},{mode},ok,{},{}\n",
                    res.accuracy_mean, res.accuracy_std
                ));
                table.push_str(&format!(
                    "{name:<12} {mode:<9} {:<12} {:>8.4} {:>8.4}\n",
                    "ok", res.accuracy_mean, res.accuracy_std
                ));
            }
        }
    }
    write_file(&bench_dir.join("summary.csv"), summary.as_bytes())?;
    print!("{table}");
    println!("summary written to {}", bench_dir.join("summary.csv").display());
    Ok(())
}

fn prepare_cell_input(
    config: &ExperimentConfig,
    task: Task,
    mode: InputMode,
    layout: &InputLayout,
    slip_cache: &mut Option<Vec<terradeep::signal::SensorFrame>>,
    image_cache: &mut Option<LabeledDataset>,
) -> CliResult<LabeledDataset> {
    match task {
        Task::Slip => {
            if slip_cache.is_none() {
                let count = config.count.unwrap_or(GRID_SLIP_COUNT);
                *slip_cache = Some(slip_frames(config, count)?);
            }
            let frames = slip_cache.as_ref().expect("slip corpus cached");
            Ok(prepare_slip_input(frames, layout, mode, config.nw)?)
        }
        Task::Image => {
            if image_cache.is_none() {
                let count = config.count.unwrap_or(GRID_IMAGE_COUNT);
                *image_cache = Some(image_corpus(config, count)?);
            }
            let images = image_cache.as_ref().expect("image corpus cached");
            Ok(prepare_image_input(
                images,
                layout,
                mode,
                &HogConfig::default(),
            )?)
        }
    }
}

/// Run one supported cell: the full split-plan experiment, the per-cell
/// report files, and the run-1 model artifact (refit with run 1's seed, so
/// its bytes match the model the experiment itself trained).
fn run_cell(
    cell: &Cell,
    config: &ExperimentConfig,
    prepared: &[(Task, InputMode, InputLayout, LabeledDataset)],
    bench_dir: &std::path::Path,
    echo: &serde_json::Value,
) -> CellOutcome {
    let Ok(idx) = cell.input else {
        return Ok(None);
    };
    let data = &prepared[idx].3;
    let name = cell.learner.name();
    let overrides = TrainOverrides {
        epochs: config.epochs,
        batch_size: config.batch,
        seed: config.seed,
    };
    let started = Instant::now();
    let mut report = run_experiment(
        cell.learner.as_ref(),
        cell.mode,
        data,
        &config.plan,
        &overrides,
    )?;
    report.config = echo.clone();

    let dir: PathBuf = bench_dir.join(format!("{name}-{}", cell.mode.as_str()));
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        source: e,
    })?;
    let put = |file: &str, bytes: &[u8]| -> Result<(), Error> {
        let path = dir.join(file);
        std::fs::write(&path, bytes).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })
    };
    put("report.json", report.to_json_pretty()?.as_bytes())?;
    put("runs.csv", report.runs_csv().as_bytes())?;
    put("curve_run1.csv", report.curve_csv(0)?.as_bytes())?;

    let first = config.plan.runs[0];
    let (train_idx, _) = holdout_split(data.len(), first.ratio, first.seed)?;
    let model = cell.learner.fit(
        &data.subset(&train_idx)?,
        &TrainOverrides {
            epochs: config.epochs,
            batch_size: config.batch,
            seed: first.seed,
        },
    )?;
    put("model.tdml", &model.tdml_bytes()?)?;

    eprintln!(
        "cell {name}-{} done in {:.1}s (mean {:.4})",
        cell.mode.as_str(),
        started.elapsed().as_secs_f64(),
        report.accuracy_mean
    );
    Ok(Some(CellResult {
        accuracy_mean: report.accuracy_mean,
        accuracy_std: report.accuracy_std,
    }))
}
