use std::time::Instant;

use terradeep::zoo::{self, TrainOverrides};

use crate::args::ExperimentArgs;
use crate::commands::{create_dir, write_file};
use crate::config::{resolve, CliResult};
use crate::source::learner_dataset;

/// Fit one catalog learner on the requested dataset and save the model and
/// its epoch curve.
pub fn run(args: &ExperimentArgs) -> CliResult<()> {
    let config = resolve(args)?;
    let name = config.require_learner()?.to_string();
    let learner = zoo::build(&name)?;
    let mode = config.mode.unwrap_or_else(|| learner.default_mode());
    let task = learner.task();
    let data = learner_dataset(&config, learner.as_ref(), mode, config.count_for(task))?;

    let overrides = TrainOverrides {
        epochs: config.epochs,
        batch_size: config.batch,
        seed: config.seed,
    };
    let started = Instant::now();
    let model = learner.fit(&data, &overrides)?;
    eprintln!(
        "trained {name} ({}) on {} samples in {:.1}s",
        mode.as_str(),
        data.len(),
        started.elapsed().as_secs_f64()
    );

    create_dir(&config.out)?;
    let stem = format!("{name}-{}", mode.as_str());
    let model_path = config.out.join(format!("{stem}.tdml"));
    write_file(&model_path, &model.tdml_bytes()?)?;
    let mut curve = String::from("epoch,accuracy\n");
    for (e, acc) in model.epoch_curve().iter().enumerate() {
        curve.push_str(&format!("{},{}\n", e + 1, acc));
    }
    let curve_path = config.out.join(format!("{stem}-curve.csv"));
    write_file(&curve_path, curve.as_bytes())?;
    println!(
        "model written to {} (curve: {})",
        model_path.display(),
        curve_path.display()
    );
    Ok(())
}
