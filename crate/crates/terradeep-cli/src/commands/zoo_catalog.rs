use terradeep::error::Error;
use terradeep::zoo;

use crate::config::CliResult;

/// Print every catalog entry's pinned configuration as JSON.
pub fn run() -> CliResult<()> {
    let value = zoo::catalog_json()?;
    let text = serde_json::to_string_pretty(&value).map_err(Error::from)?;
    println!("{text}");
    Ok(())
}
