pub mod benchmark;
pub mod eval_model;
pub mod features;
pub mod gradcheck;
pub mod synth;
pub mod train;
pub mod zoo_catalog;

use std::path::Path;

use terradeep::error::Error;

use crate::config::{CliError, CliResult};

/// Write bytes to `path`, mapping failures onto the data-error exit class.
pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| {
        CliError::Lib(Error::Io {
            path: path.display().to_string(),
            source: e,
        })
    })
}

pub fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|e| {
        CliError::Lib(Error::Io {
            path: path.display().to_string(),
            source: e,
        })
    })
}
