//! Economic balance pricing.
//!
//! During peak states every customer gets an individual price proportional to
//! their demand within the category group:
//!
//! ```text
//! P_j = (1 + k_p) * D_j * (ΣD / ΣD²) * MCP
//! ```
//!
//! which makes the group revenue `Σ D_j P_j` equal `(1 + k_p) * MCP * ΣD`, the
//! purchase cost plus the assured profit. Outside the peak window each
//! category pays one demand-weighted average price over the whole window.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::domain::{demand_at_state, validate_dataset, Category, Customer, Dataset, Scope, SystemState};
use crate::error::{Error, Result};

fn check_mcp(mcp: f64) -> Result<()> {
    if mcp > 0.0 && mcp.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveMcp(mcp))
    }
}

fn check_profit(k_p: f64) -> Result<()> {
    if (0.0..1.0).contains(&k_p) {
        Ok(())
    } else {
        Err(Error::invalid("k_p", format!("{k_p} is outside [0, 1)")))
    }
}

/// Sums of demand and squared demand for a nondegenerate group.
pub(crate) fn group_moments(demands: &[f64]) -> Result<(f64, f64)> {
    if let Some(bad) = demands.iter().find(|d| !(**d >= 0.0 && d.is_finite())) {
        return Err(Error::invalid("demand", format!("{bad} is not a non-negative number")));
    }
    let sum: f64 = demands.iter().sum();
    let sum_sq: f64 = demands.iter().map(|d| d * d).sum();
    if sum_sq.is_nan() || sum_sq <= 0.0 {
        return Err(Error::DegenerateGroup {
            category: None,
            state: None,
        });
    }
    Ok((sum, sum_sq))
}

/// Uniform selling price that carries the profit margin.
pub fn fixed_price(mcp: f64, k_p: f64) -> Result<f64> {
    check_mcp(mcp)?;
    check_profit(k_p)?;
    Ok((1.0 + k_p) * mcp)
}

/// Per-customer peak prices for one category at one state, in input order.
pub fn on_peak_prices(demands: &[f64], k_p: f64, mcp: f64) -> Result<Vec<f64>> {
    check_mcp(mcp)?;
    check_profit(k_p)?;
    let (sum, sum_sq) = group_moments(demands)?;
    let scale = (1.0 + k_p) * mcp * sum / sum_sq;
    Ok(demands.iter().map(|d| d * scale).collect())
}

/// Demand-proportionality constant: `price_j = alpha * D_j / ΣD`.
pub fn alpha(demands: &[f64], k_p: f64, mcp: f64) -> Result<f64> {
    check_mcp(mcp)?;
    check_profit(k_p)?;
    let (sum, sum_sq) = group_moments(demands)?;
    Ok((1.0 + k_p) * mcp * sum * sum / sum_sq)
}

/// Demand at which the dynamic price equals the fixed price (ΣD²/ΣD).
///
/// Customers strictly above it pay more than the fixed price, strictly below
/// pay less, and exactly at it pay the fixed price.
pub fn breakeven_demand(demands: &[f64]) -> Result<f64> {
    let (sum, sum_sq) = group_moments(demands)?;
    Ok(sum_sq / sum)
}

/// Dynamic-to-fixed billing ratio of customer `index`: `D_j ΣD / ΣD²`.
pub fn billing_ratio(demands: &[f64], index: usize) -> Result<f64> {
    let (sum, sum_sq) = group_moments(demands)?;
    let d = demands
        .get(index)
        .ok_or_else(|| Error::invalid("index", format!("{index} out of range")))?;
    Ok(d * sum / sum_sq)
}

/// Uniform off-peak price of one category.
///
/// `demands[w]` holds the category's customer demands at window state `w`
/// and `mcps[w]` that state's MCP.
pub fn off_peak_price(demands: &[Vec<f64>], mcps: &[f64], k_p: f64) -> Result<f64> {
    if demands.len() != mcps.len() {
        return Err(Error::invalid(
            "mcps",
            format!("{} demand rows but {} prices", demands.len(), mcps.len()),
        ));
    }
    check_profit(k_p)?;
    let mut cost = 0.0;
    let mut energy = 0.0;
    for (row, &mcp) in demands.iter().zip(mcps) {
        check_mcp(mcp)?;
        for &d in row {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::invalid("demand", format!("{d} is not a non-negative number")));
            }
            cost += d * mcp;
            energy += d;
        }
    }
    if energy.is_nan() || energy <= 0.0 {
        return Err(Error::DegenerateWindow { category: None });
    }
    Ok((1.0 + k_p) * cost / energy)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleProvenance {
    pub dataset: String,
    pub profile: String,
    pub profit_factors: BTreeMap<Category, f64>,
    pub peak_states: Vec<u8>,
}

/// Unit prices for every customer and state of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceSchedule {
    /// state index → customer id → Rs/kWh
    pub on_peak: BTreeMap<u8, BTreeMap<String, f64>>,
    /// Applies at every off-peak state.
    pub off_peak: BTreeMap<Category, f64>,
    pub provenance: ScheduleProvenance,
}

impl PriceSchedule {
    pub fn price_for(&self, customer: &Customer, state: &SystemState) -> Option<f64> {
        if state.is_peak {
            self.on_peak.get(&state.index)?.get(&customer.id).copied()
        } else {
            self.off_peak.get(&customer.category).copied()
        }
    }
}

pub fn build_schedule(ds: &Dataset) -> Result<PriceSchedule> {
    let report = validate_dataset(ds);
    if !report.is_valid() {
        return Err(Error::InvalidDataset(report));
    }
    let categories = ds.present_categories();
    let profit = |cat: Category| ds.config(cat).map(|c| c.k_p).unwrap_or_default();

    let mut on_peak = BTreeMap::new();
    for state in ds.profile.states.iter().filter(|s| s.is_peak) {
        let mut prices = BTreeMap::new();
        for &cat in &categories {
            let demands = ds.group_demands(cat, state);
            let group = on_peak_prices(&demands, profit(cat), state.mcp)
                .map_err(|e| e.in_group(cat, Some(state.index)))?;
            for (customer, price) in ds.customers_in(cat).zip(group) {
                prices.insert(customer.id.clone(), price);
            }
        }
        on_peak.insert(state.index, prices);
    }

    let window: Vec<&SystemState> = ds.profile.states.iter().filter(|s| !s.is_peak).collect();
    let mut off_peak = BTreeMap::new();
    if !window.is_empty() {
        let mcps: Vec<f64> = window.iter().map(|s| s.mcp).collect();
        for &cat in &categories {
            let demands: Vec<Vec<f64>> = window.iter().map(|s| ds.group_demands(cat, s)).collect();
            let price = off_peak_price(&demands, &mcps, profit(cat)).map_err(|e| e.in_group(cat, None))?;
            off_peak.insert(cat, price);
        }
    }

    Ok(PriceSchedule {
        on_peak,
        off_peak,
        provenance: ScheduleProvenance {
            dataset: ds.label.clone(),
            profile: ds.profile.label.clone(),
            profit_factors: ds.categories.iter().map(|c| (c.category, c.k_p)).collect(),
            peak_states: ds.profile.peak_states(),
        },
    })
}

/// Purchase cost, revenue and profit over a scope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinancialSummary {
    /// `None` means all categories.
    pub category: Option<Category>,
    pub scope: Scope,
    pub demand_kwh: f64,
    pub purchase_cost: f64,
    pub revenue: f64,
    pub profit: f64,
    /// Undefined when the purchase cost is zero.
    pub profit_fraction: Option<f64>,
}

impl FinancialSummary {
    pub(crate) fn from_totals(
        category: Option<Category>,
        scope: Scope,
        demand_kwh: f64,
        purchase_cost: f64,
        revenue: f64,
    ) -> Self {
        let profit = revenue - purchase_cost;
        FinancialSummary {
            category,
            scope,
            demand_kwh,
            purchase_cost,
            revenue,
            profit,
            profit_fraction: (purchase_cost > 0.0).then(|| profit / purchase_cost),
        }
    }
}

/// Audits the balance of `sched` against `ds` over `scope`.
pub fn verify_ebe(
    ds: &Dataset,
    sched: &PriceSchedule,
    scope: &Scope,
    category: Option<Category>,
) -> Result<FinancialSummary> {
    let mut demand = 0.0;
    let mut purchase = 0.0;
    let mut revenue = 0.0;
    for index in scope.states(&ds.profile) {
        let state = ds.profile.state(index).ok_or(Error::MissingStateCoverage(index))?;
        for c in ds.customers.iter().filter(|c| category.is_none_or(|cat| c.category == cat)) {
            let d = demand_at_state(c, state);
            let price = sched
                .price_for(c, state)
                .ok_or_else(|| Error::UnknownCustomer(c.id.clone()))?;
            demand += d;
            purchase += state.mcp * d;
            revenue += price * d;
        }
    }
    Ok(FinancialSummary::from_totals(category, scope.clone(), demand, purchase, revenue))
}
