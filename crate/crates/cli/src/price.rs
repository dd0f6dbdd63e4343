use dlps_core::pricing::{alpha, billing_ratio, breakeven_demand, fixed_price};
use dlps_core::sensitivity::zeta;
use dlps_core::{build_schedule, demand_at_state, verify_ebe, Error, Result, Scope};
use serde_json::{json, Value};

use crate::report::{two_decimals, Cell, Kind, Report, Table};
use crate::PriceArgs;

pub fn run(args: PriceArgs) -> Result<()> {
    let ds = args.data.load()?;
    let sched = build_schedule(&ds)?;
    let states = match args.state {
        Some(s) if ds.profile.state(s).is_none() => {
            return Err(Error::InvalidParameter {
                name: "state",
                reason: format!("state {s} is not in the day profile"),
            })
        }
        Some(s) => vec![s],
        None => ds.profile.states.iter().map(|s| s.index).collect(),
    };

    let mut prices = Table::new(&["state", "id", "category", "demand_kw", "price_rs_per_kwh", "bill_rs"]);
    let mut plot = Table::new(&["state", "id", "category", "demand_share_pct", "billing_ratio", "price_rs_per_kwh"]);
    let mut windows = Vec::new();
    for &index in &states {
        let state = ds.profile.state(index).expect("state checked above");
        for c in &ds.customers {
            let d = demand_at_state(c, state);
            let p = sched.price_for(c, state).ok_or_else(|| Error::UnknownCustomer(c.id.clone()))?;
            prices.push(vec![index.into(), c.id.as_str().into(), c.category.as_str().into(), Cell::Exact(d), Cell::Money(p), Cell::Money(p * d)]);
        }
        if !state.is_peak {
            continue;
        }
        for cat in ds.present_categories() {
            let group: Vec<&_> = ds.customers_in(cat).collect();
            let demands = ds.group_demands(cat, state);
            let total: f64 = demands.iter().sum();
            for (i, c) in group.iter().enumerate() {
                let p = sched.on_peak[&index][&c.id];
                plot.push(vec![
                    index.into(),
                    c.id.as_str().into(),
                    cat.as_str().into(),
                    Cell::Exact(100.0 * demands[i] / total),
                    Cell::Exact(billing_ratio(&demands, i)?),
                    Cell::Exact(p),
                ]);
            }
            let k_p = ds.config(cat).map(|c| c.k_p).unwrap_or_default();
            windows.push(json!({
                "state": index,
                "category": cat,
                "fixed_price": fixed_price(state.mcp, k_p)?,
                "breakeven_demand_kw": breakeven_demand(&demands)?,
                "alpha": alpha(&demands, k_p, state.mcp)?,
                "zeta": zeta(&demands, k_p, state.mcp)?,
            }));
        }
    }

    let scopes = match args.state {
        Some(s) => vec![Scope::State(s)],
        None => vec![Scope::Peak, Scope::OffPeak, Scope::Day],
    };
    let mut financials = Vec::new();
    let mut headline = String::new();
    for cat in ds.present_categories() {
        for scope in &scopes {
            if scope.states(&ds.profile).is_empty() {
                continue;
            }
            let fs = verify_ebe(&ds, &sched, scope, Some(cat))?;
            headline.push_str(&format!(
                "{cat} {scope}: purchase {} Rs, revenue {} Rs, profit {} Rs\n",
                two_decimals(fs.purchase_cost),
                two_decimals(fs.revenue),
                two_decimals(fs.profit)
            ));
            financials.push(fs);
        }
    }
    let summary: Value = json!({
        "dataset": ds.label,
        "profile": ds.profile.label,
        "states": states,
        "off_peak_prices": sched.off_peak,
        "on_peak_groups": windows,
        "financials": financials,
    });

    let mut report = Report::new("price", &ds.label);
    report.table("prices", Kind::Table, &prices, args.out.format);
    report.table("price_vs_contribution", Kind::Plot, &plot, args.out.format);
    report.summary(&summary);
    report.emit(&args.out, &headline)
}
