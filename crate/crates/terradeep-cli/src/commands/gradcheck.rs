use terradeep::error::Error;
use terradeep::nn::verification_suite;

use crate::args::GradcheckArgs;
use crate::config::CliResult;

/// Run the finite-difference audit and print one line per architecture.
/// Any tolerance breach is an internal invariant failure, not bad input.
pub fn run(args: &GradcheckArgs) -> CliResult<()> {
    let outcomes = verification_suite(args.seed)?;
    let mut failures = Vec::new();
    for o in &outcomes {
        println!(
            "{:<18} max rel err {:>10.3e}  (tolerance {:>6.0e})  {}",
            o.name,
            o.error,
            o.tolerance,
            if o.passes() { "pass" } else { "FAIL" }
        );
        if !o.passes() {
            failures.push(o.name.clone());
        }
    }
    if !failures.is_empty() {
        return Err(Error::Invariant(format!(
            "gradient audit failed for: {}",
            failures.join(", ")
        ))
        .into());
    }
    Ok(())
}
