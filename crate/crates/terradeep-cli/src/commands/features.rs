use terradeep::data::{InputMode, LabeledDataset};
use terradeep::eval::prepare_image_input;
use terradeep::image::HogConfig;
use terradeep::signal::assemble_slip_dataset;
use terradeep::zoo::{InputLayout, Task};

use crate::args::ExperimentArgs;
use crate::commands::{create_dir, write_file};
use crate::config::{resolve, CliResult};
use crate::source::{image_corpus, slip_frames};

/// Extract per-sample feature vectors and write them as one CSV: the
/// torque/variance quadruple for telemetry, flattened pixels or the
/// gradient-histogram descriptor for images. Defaults to the filtered view,
/// which is the branch that exists to be exported.
pub fn run(args: &ExperimentArgs) -> CliResult<()> {
    let config = resolve(args)?;
    let task = config.require_task()?;
    let mode = config.mode.unwrap_or(InputMode::Filtered);
    let count = config.count_for(task);
    let (dataset, stem) = match task {
        Task::Slip => {
            let frames = slip_frames(&config, count)?;
            (
                assemble_slip_dataset(&frames, mode, config.nw)?,
                format!("features-slip-{}", mode.as_str()),
            )
        }
        Task::Image => {
            let images = image_corpus(&config, count)?;
            (
                prepare_image_input(&images, &InputLayout::Vector, mode, &HogConfig::default())?,
                format!("features-image-{}", mode.as_str()),
            )
        }
    };
    create_dir(&config.out)?;
    let path = config.out.join(format!("{stem}.csv"));
    write_file(&path, features_csv(&dataset).as_bytes())?;
    println!(
        "wrote {} rows of {} features to {}",
        dataset.len(),
        dataset.sample_shape()[0],
        path.display()
    );
    Ok(())
}

fn features_csv(data: &LabeledDataset) -> String {
    let dims = data.sample_shape()[0];
    let mut out = String::new();
    for j in 0..dims {
        out.push_str(&format!("f{j},"));
    }
    out.push_str("label,class\n");
    for i in 0..data.len() {
        for v in data.sample(i) {
            out.push_str(&format!("{v},"));
        }
        let label = data.labels()[i];
        out.push_str(&format!("{label},{}\n", data.class_names()[label]));
    }
    out
}
