use terradeep::data::{
    load_image_dir, load_sensor_csv, synth_slip, synth_terrain, InputMode, LabeledDataset,
    DEFAULT_TERRAIN_CLASSES,
};
use terradeep::eval::{prepare_image_input, prepare_slip_input};
use terradeep::image::HogConfig;
use terradeep::signal::SensorFrame;
use terradeep::zoo::{Learner, Task};

use crate::config::{CliResult, DataSource, ExperimentConfig};

/// The telemetry log an experiment runs on: the seeded synthetic drive
/// (`count` frames per regime) or a CSV from disk, where outlier rows were
/// already dropped by the loader.
pub fn slip_frames(config: &ExperimentConfig, count: usize) -> CliResult<Vec<SensorFrame>> {
    match &config.source {
        DataSource::Synth => Ok(synth_slip(count, config.nw, config.seed)?),
        DataSource::Path(path) => {
            let log = load_sensor_csv(path)?;
            if log.dropped_outliers > 0 {
                eprintln!("dropped {} outlier frames", log.dropped_outliers);
            }
            Ok(log.frames)
        }
    }
}

/// The image corpus: seeded synthetic textures at `--size` (`count` images
/// per class), or a directory of per-class PGM folders loaded at the
/// canonical 128x128.
pub fn image_corpus(config: &ExperimentConfig, count: usize) -> CliResult<LabeledDataset> {
    match &config.source {
        DataSource::Synth => Ok(synth_terrain(
            &DEFAULT_TERRAIN_CLASSES,
            count,
            config.size,
            config.seed,
        )?),
        DataSource::Path(path) => Ok(load_image_dir(path)?),
    }
}

/// Build the exact dataset one learner trains on: corpus per task, then the
/// layout/mode preparation.
pub fn learner_dataset(
    config: &ExperimentConfig,
    learner: &dyn Learner,
    mode: InputMode,
    count: usize,
) -> CliResult<LabeledDataset> {
    match learner.task() {
        Task::Slip => {
            let frames = slip_frames(config, count)?;
            Ok(prepare_slip_input(
                &frames,
                &learner.layout(),
                mode,
                config.nw,
            )?)
        }
        Task::Image => {
            let images = image_corpus(config, count)?;
            Ok(prepare_image_input(
                &images,
                &learner.layout(),
                mode,
                &HogConfig::default(),
            )?)
        }
    }
}
