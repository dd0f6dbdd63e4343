//! Billing under flat, real-time, time-of-use and demand-linked signals.
//!
//! The MCP profile is taken as the real-time (RTP) signal. Flat and TOU
//! levels are load-weighted means of it, so at the demands they were derived
//! from they collect the same revenue as RTP (per day for flat, per window
//! for TOU at multiplier 1.0).

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::domain::{demand_at_state, Category, Dataset, DayProfile, Scope};
use crate::error::{Error, Result};
use crate::pricing::{build_schedule, PriceSchedule};
use crate::scenario::{apply_scenario, random_dr_event, RandomEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    Flat,
    Rtp,
    Tou,
    Proposed,
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignalKind::Flat => "flat",
            SignalKind::Rtp => "rtp",
            SignalKind::Tou => "tou",
            SignalKind::Proposed => "proposed",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TariffSignal {
    Flat(f64),
    /// Rs/kWh per state index.
    Rtp(BTreeMap<u8, f64>),
    /// Peak membership follows the billed profile.
    Tou { peak: f64, off_peak: f64 },
    Proposed(PriceSchedule),
}

impl TariffSignal {
    pub fn kind(&self) -> SignalKind {
        match self {
            TariffSignal::Flat(_) => SignalKind::Flat,
            TariffSignal::Rtp(_) => SignalKind::Rtp,
            TariffSignal::Tou { .. } => SignalKind::Tou,
            TariffSignal::Proposed(_) => SignalKind::Proposed,
        }
    }
}

pub fn rtp_signal(profile: &DayProfile) -> TariffSignal {
    TariffSignal::Rtp(profile.states.iter().map(|s| (s.index, s.mcp)).collect())
}

/// Total demand of `ds` at each state, in profile order.
pub fn state_totals(ds: &Dataset) -> Vec<f64> {
    ds.profile.states.iter().map(|s| ds.total_demand(s)).collect()
}

fn weighted_mcp<'a>(
    profile: &'a DayProfile,
    totals: &'a [f64],
    keep: impl Fn(bool) -> bool,
) -> Result<Option<f64>> {
    if totals.len() != profile.states.len() {
        return Err(Error::invalid(
            "totals",
            format!("{} totals for {} states", totals.len(), profile.states.len()),
        ));
    }
    let mut cost = 0.0;
    let mut energy = 0.0;
    for (s, &d) in profile.states.iter().zip(totals) {
        if keep(s.is_peak) {
            cost += s.mcp * d;
            energy += d;
        }
    }
    Ok((energy > 0.0).then(|| cost / energy))
}

/// Load-weighted mean of the MCP over the whole day.
pub fn derive_flat(profile: &DayProfile, totals: &[f64]) -> Result<TariffSignal> {
    let level = weighted_mcp(profile, totals, |_| true)?
        .ok_or_else(|| Error::invalid("totals", "total demand is zero"))?;
    Ok(TariffSignal::Flat(level))
}

/// Two-level signal: load-weighted MCP mean of each window, with the peak
/// level scaled by `peak_multiplier`.
pub fn derive_tou(profile: &DayProfile, totals: &[f64], peak_multiplier: f64) -> Result<TariffSignal> {
    if !(peak_multiplier >= 1.0 && peak_multiplier.is_finite()) {
        return Err(Error::invalid(
            "peak_multiplier",
            format!("{peak_multiplier} must be at least 1"),
        ));
    }
    let peak = weighted_mcp(profile, totals, |p| p)?
        .ok_or_else(|| Error::invalid("totals", "peak window is empty or has zero demand"))?;
    let off_peak = weighted_mcp(profile, totals, |p| !p)?
        .ok_or_else(|| Error::invalid("totals", "off-peak window is empty or has zero demand"))?;
    Ok(TariffSignal::Tou {
        peak: peak * peak_multiplier,
        off_peak,
    })
}

/// Billing of every category at every state under one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalBilling {
    pub kind: SignalKind,
    pub with_profit: bool,
    /// (category, state) → Rs
    pub cells: BTreeMap<(Category, u8), f64>,
}

impl SignalBilling {
    pub fn cell(&self, category: Category, state: u8) -> Option<f64> {
        self.cells.get(&(category, state)).copied()
    }

    /// Sum over `states` for one category, or all categories when `None`.
    pub fn total(&self, category: Option<Category>, states: &[u8]) -> f64 {
        let mut sum = 0.0;
        for &state in states {
            for (&(cat, s), &v) in &self.cells {
                if s == state && category.is_none_or(|c| c == cat) {
                    sum += v;
                }
            }
        }
        sum
    }
}

/// With `with_profit`, non-proposed signals are marked up by the category's
/// `1 + k_p`; the proposed schedule already carries it.
pub fn bill_under_signal(ds: &Dataset, signal: &TariffSignal, with_profit: bool) -> Result<SignalBilling> {
    let mut cells = BTreeMap::new();
    for state in &ds.profile.states {
        for cat in ds.present_categories() {
            let markup = match signal {
                TariffSignal::Proposed(_) => 1.0,
                _ if with_profit => ds.config(cat).map(|c| c.multiplier()).unwrap_or(1.0),
                _ => 1.0,
            };
            let mut bill = 0.0;
            for c in ds.customers_in(cat) {
                let price = match signal {
                    TariffSignal::Flat(v) => *v,
                    TariffSignal::Rtp(map) => *map
                        .get(&state.index)
                        .ok_or(Error::MissingStateCoverage(state.index))?,
                    TariffSignal::Tou { peak, off_peak } => {
                        if state.is_peak {
                            *peak
                        } else {
                            *off_peak
                        }
                    }
                    TariffSignal::Proposed(sched) => sched
                        .price_for(c, state)
                        .ok_or(Error::MissingStateCoverage(state.index))?,
                };
                bill += price * demand_at_state(c, state);
            }
            cells.insert((cat, state.index), bill * markup);
        }
    }
    Ok(SignalBilling {
        kind: signal.kind(),
        with_profit,
        cells,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BillingComparison {
    pub signals: Vec<SignalBilling>,
    pub profile: DayProfile,
}

impl BillingComparison {
    pub fn get(&self, kind: SignalKind) -> Option<&SignalBilling> {
        self.signals.iter().find(|s| s.kind == kind)
    }

    pub fn total(&self, kind: SignalKind, category: Option<Category>, scope: &Scope) -> Option<f64> {
        let states = scope.states(&self.profile);
        self.get(kind).map(|b| b.total(category, &states))
    }

    pub fn categories(&self) -> Vec<Category> {
        let mut cats: Vec<Category> = self
            .signals
            .iter()
            .flat_map(|s| s.cells.keys().map(|(c, _)| *c))
            .collect();
        cats.sort();
        cats.dedup();
        cats
    }
}

/// One output row: `signal,category,state,billing_rs,delta_vs_rtp_pct`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaRow {
    pub signal: SignalKind,
    pub category: Category,
    pub state: u8,
    pub billing_rs: f64,
    pub delta_vs_rtp_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub signal: SignalKind,
    pub category: Category,
    pub window: &'static str,
    pub billing_rs: f64,
}

/// Per-state percentage change of every signal against `reference`.
pub fn compare_to_reference(bc: &BillingComparison, reference: SignalKind) -> Result<Vec<DeltaRow>> {
    let base = bc
        .get(reference)
        .ok_or_else(|| Error::invalid("reference", format!("no {reference} billing present")))?;
    let mut rows = Vec::new();
    for billing in &bc.signals {
        for (&(category, state), &value) in &billing.cells {
            let reference_value = base.cell(category, state).unwrap_or(0.0);
            if reference_value.is_nan() || reference_value <= 0.0 {
                return Err(Error::ZeroReference {
                    signal: reference.to_string(),
                    category,
                    state,
                });
            }
            rows.push(DeltaRow {
                signal: billing.kind,
                category,
                state,
                billing_rs: value,
                delta_vs_rtp_pct: 100.0 * (value - reference_value) / reference_value,
            });
        }
    }
    Ok(rows)
}

pub fn aggregates(bc: &BillingComparison) -> Vec<AggregateRow> {
    let mut rows = Vec::new();
    for billing in &bc.signals {
        for category in bc.categories() {
            for (window, scope) in [("day", Scope::Day), ("peak", Scope::Peak), ("off_peak", Scope::OffPeak)] {
                rows.push(AggregateRow {
                    signal: billing.kind,
                    category,
                    window,
                    billing_rs: billing.total(Some(category), &scope.states(&bc.profile)),
                });
            }
        }
    }
    rows
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonConfig {
    pub tou_multiplier: f64,
    /// Random peak-window demand reductions applied before billing.
    pub demand_response: Option<RandomEvent>,
    pub with_profit: bool,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        ComparisonConfig {
            tou_multiplier: 1.0,
            demand_response: None,
            with_profit: true,
        }
    }
}

/// Derives flat and TOU from the undisturbed demands, applies the optional
/// demand response event to the peak window, then bills the resulting
/// demands under all four signals.
pub fn run_comparison(ds: &Dataset, cfg: &ComparisonConfig) -> Result<BillingComparison> {
    let totals = state_totals(ds);
    let flat = derive_flat(&ds.profile, &totals)?;
    let tou = derive_tou(&ds.profile, &totals, cfg.tou_multiplier)?;
    let billed = match &cfg.demand_response {
        Some(event) => apply_scenario(ds, &random_dr_event(ds, event, &Scope::Peak)?)?,
        None => ds.clone(),
    };
    let proposed = TariffSignal::Proposed(build_schedule(&billed)?);
    let signals = [flat, rtp_signal(&ds.profile), tou, proposed]
        .iter()
        .map(|s| bill_under_signal(&billed, s, cfg.with_profit))
        .collect::<Result<Vec<_>>>()?;
    Ok(BillingComparison {
        signals,
        profile: ds.profile.clone(),
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;
    use crate::domain::{CategoryConfig, Customer, SystemState};
    use crate::ingest::bundled_benchmark;

    fn profile(mcps: &[(f64, bool)]) -> DayProfile {
        DayProfile {
            label: "test".into(),
            states: mcps
                .iter()
                .enumerate()
                .map(|(i, &(mcp, peak))| SystemState::new(i as u8 + 1, mcp, 1.0, peak))
                .collect(),
        }
    }

    #[test]
    fn flat_examples() {
        let p = profile(&[(2.0, false), (4.0, true)]);
        assert_eq!(derive_flat(&p, &[100.0, 300.0]).unwrap(), TariffSignal::Flat(3.5));
        let p = profile(&[(2.5, false); 5]);
        assert_eq!(derive_flat(&p, &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap(), TariffSignal::Flat(2.5));
        let p = profile(&[(1.0, false), (2.0, true), (3.0, true)]);
        assert_eq!(derive_flat(&p, &[7.0; 3]).unwrap(), TariffSignal::Flat(2.0));
        assert!(derive_flat(&p, &[0.0; 3]).is_err());
        assert!(derive_flat(&p, &[1.0; 2]).is_err());
    }

    #[test]
    fn tou_examples() {
        let p = profile(&[(3.0, false), (3.0, true)]);
        assert_eq!(
            derive_tou(&p, &[5.0, 5.0], 1.0).unwrap(),
            TariffSignal::Tou { peak: 3.0, off_peak: 3.0 }
        );
        let p = profile(&[(4.0, true), (6.0, true), (2.0, false)]);
        assert_eq!(
            derive_tou(&p, &[10.0; 3], 1.0).unwrap(),
            TariffSignal::Tou { peak: 5.0, off_peak: 2.0 }
        );
        assert_eq!(
            derive_tou(&p, &[10.0; 3], 1.5).unwrap(),
            TariffSignal::Tou { peak: 7.5, off_peak: 2.0 }
        );
        assert!(derive_tou(&p, &[10.0; 3], 0.9).is_err());
        let all_peak = profile(&[(4.0, true); 3]);
        assert!(derive_tou(&all_peak, &[1.0; 3], 1.0).is_err());
    }

    #[test]
    fn flat_bill_for_single_customer() {
        let ds = Dataset {
            label: "one".into(),
            customers: vec![Customer::new("I8", Category::Industrial, 92.0)],
            categories: vec![CategoryConfig { category: Category::Industrial, k_p: 0.01 }],
            profile: bundled_benchmark().profile,
        };
        let b = bill_under_signal(&ds, &TariffSignal::Flat(4.89), false).unwrap();
        assert_relative_eq!(b.cell(Category::Industrial, 22).unwrap(), 449.88, max_relative = 1e-12);
        assert_eq!(b.total(None, &[]), 0.0);
    }

    #[test]
    fn rtp_must_cover_every_state() {
        let ds = bundled_benchmark();
        let mut map: BTreeMap<u8, f64> = ds.profile.states.iter().map(|s| (s.index, s.mcp)).collect();
        map.remove(&7);
        assert!(matches!(
            bill_under_signal(&ds, &TariffSignal::Rtp(map), true),
            Err(Error::MissingStateCoverage(7))
        ));
    }

    #[test]
    fn proposed_equals_marked_up_rtp_per_state() {
        let ds = bundled_benchmark();
        let bc = run_comparison(&ds, &ComparisonConfig::default()).unwrap();
        let rows = compare_to_reference(&bc, SignalKind::Rtp).unwrap();
        for r in rows.iter().filter(|r| r.signal == SignalKind::Proposed && ds.profile.state(r.state).unwrap().is_peak) {
            assert!(r.delta_vs_rtp_pct.abs() < 1e-7, "{r:?}");
        }
        for r in rows.iter().filter(|r| r.signal == SignalKind::Rtp) {
            assert_eq!(r.delta_vs_rtp_pct, 0.0);
        }
    }

    #[test]
    fn revenue_neutral_constructions() {
        let ds = bundled_benchmark();
        let bc = run_comparison(&ds, &ComparisonConfig { with_profit: false, ..Default::default() }).unwrap();
        let rtp_day = bc.total(SignalKind::Rtp, None, &Scope::Day).unwrap();
        assert_relative_eq!(bc.total(SignalKind::Flat, None, &Scope::Day).unwrap(), rtp_day, max_relative = 1e-9);
        for scope in [Scope::Peak, Scope::OffPeak] {
            assert_relative_eq!(
                bc.total(SignalKind::Tou, None, &scope).unwrap(),
                bc.total(SignalKind::Rtp, None, &scope).unwrap(),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn delta_arithmetic() {
        let profile = profile(&[(4.0, true)]);
        let mk = |kind, v| SignalBilling {
            kind,
            with_profit: false,
            cells: [((Category::Residential, 1u8), v)].into_iter().collect(),
        };
        let bc = BillingComparison {
            signals: vec![mk(SignalKind::Rtp, 400.0), mk(SignalKind::Flat, 350.0)],
            profile,
        };
        let rows = compare_to_reference(&bc, SignalKind::Rtp).unwrap();
        assert_eq!(rows[1].delta_vs_rtp_pct, -12.5);

        let zero = BillingComparison {
            signals: vec![mk(SignalKind::Rtp, 0.0)],
            profile: bc.profile.clone(),
        };
        assert!(matches!(compare_to_reference(&zero, SignalKind::Rtp), Err(Error::ZeroReference { .. })));
    }

    #[test]
    fn aggregates_split_day_into_windows() {
        let ds = bundled_benchmark();
        let event = RandomEvent { max_reduction: 0.15, seed: 5, symmetric: false };
        let bc = run_comparison(&ds, &ComparisonConfig { demand_response: Some(event), ..Default::default() }).unwrap();
        let agg = aggregates(&bc);
        assert_eq!(agg.len(), 4 * 3 * 3);
        for chunk in agg.chunks(3) {
            assert_relative_eq!(chunk[0].billing_rs, chunk[1].billing_rs + chunk[2].billing_rs, max_relative = 1e-9);
        }
    }
}
