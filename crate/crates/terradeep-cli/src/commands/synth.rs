use terradeep::data::{synth_slip, synth_terrain, write_sensor_csv, DEFAULT_TERRAIN_CLASSES};
use terradeep::image::GrayImage;
use terradeep::zoo::Task;

use crate::args::ExperimentArgs;
use crate::commands::create_dir;
use crate::config::{resolve, usage, CliResult, DataSource};

/// Generate the seeded synthetic corpus for one task and write it in the
/// same formats the loaders read back: a telemetry CSV, or one PGM
/// directory per terrain class.
pub fn run(args: &ExperimentArgs) -> CliResult<()> {
    let config = resolve(args)?;
    if matches!(config.source, DataSource::Path(_)) {
        return Err(usage("synth generates data; --data is not applicable"));
    }
    let task = config.require_task()?;
    create_dir(&config.out)?;
    match task {
        Task::Slip => {
            let frames = synth_slip(config.count_for(task), config.nw, config.seed)?;
            let path = config.out.join("slip.csv");
            write_sensor_csv(&path, &frames)?;
            println!("wrote {} frames to {}", frames.len(), path.display());
        }
        Task::Image => {
            let data = synth_terrain(
                &DEFAULT_TERRAIN_CLASSES,
                config.count_for(task),
                config.size,
                config.seed,
            )?;
            let root = config.out.join("terrain");
            let mut written = 0usize;
            let mut index_in_class = 0usize;
            let mut last_label = usize::MAX;
            for i in 0..data.len() {
                let label = data.labels()[i];
                if label != last_label {
                    index_in_class = 0;
                    last_label = label;
                }
                let class = &data.class_names()[label];
                let dir = root.join(class);
                create_dir(&dir)?;
                let pixels: Vec<f64> = data.sample(i).iter().map(|p| p * 255.0).collect();
                let img = GrayImage::new(config.size, config.size, pixels)?;
                let path = dir.join(format!("{class}_{index_in_class:04}.pgm"));
                terradeep::data::write_pgm(&path, &img)?;
                index_in_class += 1;
                written += 1;
            }
            println!("wrote {written} images under {}", root.display());
        }
    }
    Ok(())
}
