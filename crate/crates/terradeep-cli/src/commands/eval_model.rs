use terradeep::error::Error;
use terradeep::eval::scoring_report;
use terradeep::serialize::model_from_bytes;
use terradeep::zoo;

use crate::args::EvalArgs;
use crate::commands::{create_dir, write_file};
use crate::config::{resolve, CliError, CliResult};
use crate::source::learner_dataset;

/// Load a saved model, score it against a dataset prepared the same way the
/// learner trains, and write the evaluation report.
pub fn run(args: &EvalArgs) -> CliResult<()> {
    let config = resolve(&args.experiment)?;
    let name = config.require_learner()?.to_string();
    let learner = zoo::build(&name)?;
    let mode = config.mode.unwrap_or_else(|| learner.default_mode());
    let task = learner.task();

    let bytes = std::fs::read(&args.model).map_err(|e| {
        CliError::Lib(Error::Io {
            path: args.model.display().to_string(),
            source: e,
        })
    })?;
    let model = model_from_bytes(&bytes)?;
    let data = learner_dataset(&config, learner.as_ref(), mode, config.count_for(task))?;
    if model.class_names() != data.class_names() {
        return Err(CliError::Lib(Error::Dataset(format!(
            "model classes {:?} do not match dataset classes {:?}",
            model.class_names(),
            data.class_names()
        ))));
    }

    let mut report = scoring_report(&name, task.as_str(), mode, &data, model.as_ref())?;
    report.config = serde_json::to_value(&config).map_err(Error::from)?;

    create_dir(&config.out)?;
    let path = config
        .out
        .join(format!("eval-{name}-{}.json", mode.as_str()));
    write_file(&path, report.to_json_pretty()?.as_bytes())?;
    println!(
        "accuracy {:.4} on {} samples; report written to {}",
        report.accuracy_mean,
        data.len(),
        path.display()
    );
    Ok(())
}
