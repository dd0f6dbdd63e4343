use dlps_core::comparator::{aggregates, compare_to_reference, run_comparison, ComparisonConfig, SignalKind};
use dlps_core::scenario::RandomEvent;
use dlps_core::Result;
use serde_json::json;

use crate::report::{two_decimals, Cell, Kind, Report, Table};
use crate::CompareArgs;

pub fn run(args: CompareArgs) -> Result<()> {
    let ds = args.data.load()?;
    // A zero reduction draws nothing, so the seed is dropped to keep output seed-independent.
    let demand_response = (args.dr_max != 0.0).then_some(RandomEvent {
        max_reduction: args.dr_max,
        seed: args.seed,
        symmetric: false,
    });
    let cfg = ComparisonConfig {
        tou_multiplier: args.tou_multiplier,
        demand_response,
        with_profit: !args.no_profit,
    };
    let bc = run_comparison(&ds, &cfg)?;
    let rows = compare_to_reference(&bc, SignalKind::Rtp)?;
    let totals = aggregates(&bc);

    let mut comparison = Table::new(&["signal", "category", "state", "billing_rs", "delta_vs_rtp_pct"]);
    for r in &rows {
        comparison.push(vec![r.signal.to_string().into(), r.category.as_str().into(), r.state.into(), Cell::Money(r.billing_rs), Cell::Money(r.delta_vs_rtp_pct)]);
    }
    let mut agg = Table::new(&["signal", "category", "window", "billing_rs"]);
    let mut headline = String::new();
    for a in &totals {
        agg.push(vec![a.signal.to_string().into(), a.category.as_str().into(), a.window.into(), Cell::Money(a.billing_rs)]);
        if a.window == "day" {
            headline.push_str(&format!("{} {} day: {} Rs\n", a.signal, a.category, two_decimals(a.billing_rs)));
        }
    }
    let mut plot = Table::new(&["category", "state", "signal", "delta_vs_rtp_pct"]);
    for r in rows.iter().filter(|r| r.signal != SignalKind::Rtp) {
        plot.push(vec![r.category.as_str().into(), r.state.into(), r.signal.to_string().into(), Cell::Exact(r.delta_vs_rtp_pct)]);
    }
    let summary = json!({
        "dataset": ds.label,
        "tou_multiplier": cfg.tou_multiplier,
        "demand_response": cfg.demand_response,
        "with_profit": cfg.with_profit,
        "aggregates": totals,
    });

    let mut report = Report::new("compare", &ds.label);
    report.table("comparison", Kind::Table, &comparison, args.out.format);
    report.table("aggregates", Kind::Table, &agg, args.out.format);
    report.table("delta_vs_rtp", Kind::Plot, &plot, args.out.format);
    report.summary(&summary);
    report.emit(&args.out, &headline)
}
