use dlps_core::reproduction::run_checks;
use dlps_core::{Error, Result};

use crate::report::{pretty, stdout};
use crate::ValidateArgs;

fn corrupt(spec: &str) -> Result<(&str, f64)> {
    let bad = || Error::InvalidParameter {
        name: "corrupt-demand",
        reason: format!("expected ID=KW, got `{spec}`"),
    };
    let (id, kw) = spec.split_once('=').ok_or_else(bad)?;
    Ok((id, kw.parse().map_err(|_| bad())?))
}

/// Returns whether every check passed.
pub fn run(args: ValidateArgs) -> Result<bool> {
    let mut ds = args.data.load()?;
    for spec in &args.corrupt_demand {
        let (id, kw) = corrupt(spec)?;
        let c = ds
            .customers
            .iter_mut()
            .find(|c| c.id == id)
            .ok_or_else(|| Error::UnknownCustomer(id.to_string()))?;
        c.base_demand = kw;
    }
    let checks = run_checks(&ds);
    let text = if args.json {
        pretty(&checks)
    } else {
        checks
            .iter()
            .map(|c| {
                let verdict = if c.passed { "PASS" } else { "FAIL" };
                format!("{}: {} (expected {}) ... {verdict}\n", c.name, c.observed, c.expected)
            })
            .collect()
    };
    stdout(&text)?;
    Ok(checks.iter().all(|c| c.passed))
}
