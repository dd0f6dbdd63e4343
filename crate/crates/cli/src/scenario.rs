use dlps_core::scenario::{apply_scenario, scenario_deltas, Preset, ScenarioMode, ScenarioSpec};
use dlps_core::{Error, Result};
use serde_json::json;

use crate::input::read_source;
use crate::report::{two_decimals, Cell, Kind, Report, Table};
use crate::ScenarioArgs;

const DEFAULT_SEED: u64 = 1;

fn parse_spec(text: &str, source: &str) -> Result<ScenarioSpec> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        source_name: source.to_string(),
        line: e.line() as u64,
        field: "scenario".into(),
        message: e.to_string(),
    })
}

pub fn run(args: ScenarioArgs) -> Result<()> {
    let ds = args.data.load()?;
    let (sc, seed) = match (&args.preset, &args.scenario) {
        (Some(name), _) => {
            let preset: Preset = name.parse().map_err(|reason| Error::InvalidParameter { name: "preset", reason })?;
            let seed = args.seed.unwrap_or(DEFAULT_SEED);
            (preset.scenario(&ds, seed)?, (preset == Preset::S4).then_some(seed))
        }
        (None, Some(path)) => {
            let (text, name) = read_source(path)?;
            let mut spec = parse_spec(&text, &name)?;
            let mut seed = None;
            if let ScenarioMode::Random(event) = &mut spec.mode {
                if let Some(s) = args.seed {
                    event.seed = s;
                }
                seed = Some(event.seed);
            }
            (spec.resolve(&ds)?, seed)
        }
        (None, None) => unreachable!("clap requires --scenario or --preset"),
    };
    let perturbed = apply_scenario(&ds, &sc)?;

    let mut deltas = Table::new(&["id", "category", "d_ld_pct", "d_up_pct", "d_b_pct", "d_dc_pct"]);
    let mut financials = Table::new(&["category", "case", "demand_kwh", "purchase_cost_rs", "revenue_rs", "profit_rs", "profit_pct"]);
    let mut results = Vec::new();
    let mut headline = String::new();
    for cat in ds.present_categories() {
        let d = scenario_deltas(&ds, &perturbed, args.state, cat)?;
        for c in &d.customers {
            deltas.push(vec![c.id.as_str().into(), cat.as_str().into(), Cell::Money(c.d_ld), Cell::Money(c.d_up), Cell::Money(c.d_b), Cell::Money(c.d_dc)]);
        }
        for (case, fs) in [("base", &d.base), ("scenario", &d.perturbed)] {
            financials.push(vec![
                cat.as_str().into(),
                case.into(),
                Cell::Money(fs.demand_kwh),
                Cell::Money(fs.purchase_cost),
                Cell::Money(fs.revenue),
                Cell::Money(fs.profit),
                Cell::Money(fs.profit_fraction.unwrap_or(f64::NAN) * 100.0),
            ]);
        }
        headline.push_str(&format!(
            "{cat} state {}: purchase {} -> {} Rs, revenue {} -> {} Rs\n",
            args.state,
            two_decimals(d.base.purchase_cost),
            two_decimals(d.perturbed.purchase_cost),
            two_decimals(d.base.revenue),
            two_decimals(d.perturbed.revenue)
        ));
        results.push(d);
    }
    let summary = json!({
        "dataset": ds.label,
        "scenario": sc,
        "seed": seed,
        "state": args.state,
        "results": results,
    });

    let mut report = Report::new("scenario", &ds.label);
    report.table("deltas", Kind::Table, &deltas, args.out.format);
    report.table("financials", Kind::Table, &financials, args.out.format);
    report.summary(&summary);
    report.emit(&args.out, &headline)
}
