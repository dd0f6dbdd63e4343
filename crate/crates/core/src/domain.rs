//! Customers, categories, system states and dataset-level validation.
//!
//! Every state lasts one hour, so a demand in kW is also the energy in kWh
//! consumed during that state. Money is in Rs, prices in Rs/kWh.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Number of system states in a day profile.
pub const STATES_PER_DAY: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Residential,
    Commercial,
    Industrial,
}

impl Category {
    pub const ALL: [Category; 3] = [
        Category::Residential,
        Category::Commercial,
        Category::Industrial,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Residential => "residential",
            Category::Commercial => "commercial",
            Category::Industrial => "industrial",
        }
    }

    /// Single-letter id prefix used by the benchmark dataset.
    pub fn prefix(self) -> char {
        match self {
            Category::Residential => 'R',
            Category::Commercial => 'C',
            Category::Industrial => 'I',
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "r" | "residential" => Ok(Category::Residential),
            "c" | "commercial" => Ok(Category::Commercial),
            "i" | "industrial" => Ok(Category::Industrial),
            other => Err(format!("unknown category `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Customer {
    pub id: String,
    pub category: Category,
    /// Demand in kW at a state whose load factor is 1.0.
    pub base_demand: f64,
    /// Per-state multiplicative demand adjustments (demand response events).
    /// States without an entry use 1.0.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub state_adjustments: BTreeMap<u8, f64>,
}

impl Customer {
    pub fn new(id: impl Into<String>, category: Category, base_demand: f64) -> Self {
        Customer {
            id: id.into(),
            category,
            base_demand,
            state_adjustments: BTreeMap::new(),
        }
    }

    pub fn adjustment_at(&self, state: u8) -> f64 {
        self.state_adjustments.get(&state).copied().unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryConfig {
    pub category: Category,
    /// Assured profit as a fraction of purchase cost; prices carry `1 + k_p`.
    pub k_p: f64,
}

impl CategoryConfig {
    pub fn multiplier(&self) -> f64 {
        1.0 + self.k_p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    /// 1-based hour index.
    pub index: u8,
    /// Hours; fixed at 1.0.
    pub duration: f64,
    /// Market clearing price, Rs/kWh.
    pub mcp: f64,
    pub load_factor: f64,
    pub is_peak: bool,
}

impl SystemState {
    pub fn new(index: u8, mcp: f64, load_factor: f64, is_peak: bool) -> Self {
        SystemState {
            index,
            duration: 1.0,
            mcp,
            load_factor,
            is_peak,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayProfile {
    pub label: String,
    pub states: Vec<SystemState>,
}

impl DayProfile {
    pub fn state(&self, index: u8) -> Option<&SystemState> {
        self.states.iter().find(|s| s.index == index)
    }

    pub fn peak_states(&self) -> Vec<u8> {
        self.states.iter().filter(|s| s.is_peak).map(|s| s.index).collect()
    }

    pub fn off_peak_states(&self) -> Vec<u8> {
        self.states.iter().filter(|s| !s.is_peak).map(|s| s.index).collect()
    }

    /// Same profile with every MCP replaced by `mcp`.
    pub fn with_constant_mcp(&self, mcp: f64) -> DayProfile {
        let mut out = self.clone();
        for s in &mut out.states {
            s.mcp = mcp;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub label: String,
    pub customers: Vec<Customer>,
    pub categories: Vec<CategoryConfig>,
    pub profile: DayProfile,
}

impl Dataset {
    pub fn customer(&self, id: &str) -> Option<&Customer> {
        self.customers.iter().find(|c| c.id == id)
    }

    pub fn config(&self, category: Category) -> Option<&CategoryConfig> {
        self.categories.iter().find(|c| c.category == category)
    }

    pub fn customers_in(&self, category: Category) -> impl Iterator<Item = &Customer> {
        self.customers.iter().filter(move |c| c.category == category)
    }

    /// Categories that have at least one customer, in canonical order.
    pub fn present_categories(&self) -> Vec<Category> {
        let present: BTreeSet<Category> = self.customers.iter().map(|c| c.category).collect();
        present.into_iter().collect()
    }

    /// Demands of one category at one state, in dataset order.
    pub fn group_demands(&self, category: Category, state: &SystemState) -> Vec<f64> {
        self.customers_in(category)
            .map(|c| demand_at_state(c, state))
            .collect()
    }

    pub fn total_demand(&self, state: &SystemState) -> f64 {
        self.customers.iter().map(|c| demand_at_state(c, state)).sum()
    }
}

/// Which customers' demands scale a summary.
pub type CategoryFilter = Option<Category>;

/// A set of system states an analysis runs over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scope {
    State(u8),
    Peak,
    OffPeak,
    Day,
    States(Vec<u8>),
}

impl Scope {
    /// State indices selected in `profile`, in profile order. Unknown indices are dropped.
    pub fn states(&self, profile: &DayProfile) -> Vec<u8> {
        match self {
            Scope::State(i) => profile.state(*i).map(|s| vec![s.index]).unwrap_or_default(),
            Scope::Peak => profile.peak_states(),
            Scope::OffPeak => profile.off_peak_states(),
            Scope::Day => profile.states.iter().map(|s| s.index).collect(),
            Scope::States(list) => {
                let wanted: BTreeSet<u8> = list.iter().copied().collect();
                profile
                    .states
                    .iter()
                    .map(|s| s.index)
                    .filter(|i| wanted.contains(i))
                    .collect()
            }
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::State(i) => write!(f, "state {i}"),
            Scope::Peak => f.write_str("peak"),
            Scope::OffPeak => f.write_str("off_peak"),
            Scope::Day => f.write_str("day"),
            Scope::States(list) => write!(f, "states {list:?}"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScopeRepr {
    State(u8),
    Named(String),
    States(Vec<u8>),
}

impl Serialize for Scope {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let repr = match self {
            Scope::State(i) => ScopeRepr::State(*i),
            Scope::Peak => ScopeRepr::Named("peak".into()),
            Scope::OffPeak => ScopeRepr::Named("off_peak".into()),
            Scope::Day => ScopeRepr::Named("day".into()),
            Scope::States(list) => ScopeRepr::States(list.clone()),
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Scope {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match ScopeRepr::deserialize(deserializer)? {
            ScopeRepr::State(i) => Ok(Scope::State(i)),
            ScopeRepr::States(list) => Ok(Scope::States(list)),
            ScopeRepr::Named(name) => match name.as_str() {
                "peak" => Ok(Scope::Peak),
                "off_peak" | "off-peak" => Ok(Scope::OffPeak),
                "day" => Ok(Scope::Day),
                other => Err(serde::de::Error::custom(format!(
                    "unknown scope `{other}` (expected a state index, \"peak\", \"off_peak\" or \"day\")"
                ))),
            },
        }
    }
}

/// Demand in kW of `customer` during `state`.
pub fn demand_at_state(customer: &Customer, state: &SystemState) -> f64 {
    customer.base_demand * state.load_factor * customer.adjustment_at(state.index)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub entity: String,
    pub rule: &'static str,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub customer_counts: BTreeMap<Category, usize>,
    pub total_customers: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, entity: impl Into<String>, rule: &'static str) {
        self.violations.push(Violation {
            entity: entity.into(),
            rule,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  {}: {}", v.entity, v.rule)?;
        }
        Ok(())
    }
}

/// Collects every invariant violation in `ds`. An empty report means valid.
pub fn validate_dataset(ds: &Dataset) -> ValidationReport {
    let mut report = ValidationReport {
        total_customers: ds.customers.len(),
        ..Default::default()
    };

    let mut seen_ids = BTreeSet::new();
    for c in &ds.customers {
        *report.customer_counts.entry(c.category).or_insert(0) += 1;
        if !seen_ids.insert(c.id.as_str()) {
            report.push(&c.id, "id unique");
        }
        if !(c.base_demand > 0.0 && c.base_demand.is_finite()) {
            report.push(&c.id, "base_demand > 0");
        }
        if c.state_adjustments.values().any(|a| !(*a > 0.0 && a.is_finite())) {
            report.push(&c.id, "demand adjustment > 0");
        }
        if ds.config(c.category).is_none() {
            report.push(&c.id, "category has config");
        }
    }

    let mut seen_cats = BTreeSet::new();
    for cfg in &ds.categories {
        if !seen_cats.insert(cfg.category) {
            report.push(cfg.category.as_str(), "one config per category");
        }
        if !(cfg.k_p >= 0.0 && cfg.k_p < 1.0) {
            report.push(cfg.category.as_str(), "k_p in [0, 1)");
        }
    }

    let profile = &ds.profile;
    if profile.states.len() != STATES_PER_DAY {
        report.push(&profile.label, "exactly 24 states");
    }
    let mut seen_states = BTreeSet::new();
    for s in &profile.states {
        let entity = format!("state {}", s.index);
        if !(1..=STATES_PER_DAY as u8).contains(&s.index) {
            report.push(&entity, "state index in 1..24");
        }
        if !seen_states.insert(s.index) {
            report.push(&entity, "state index unique");
        }
        if s.duration != 1.0 {
            report.push(&entity, "duration = 1 h");
        }
        if !(s.mcp > 0.0 && s.mcp.is_finite()) {
            report.push(&entity, "mcp > 0");
        }
        if !(s.load_factor > 0.0 && s.load_factor.is_finite()) {
            report.push(&entity, "load_factor > 0");
        }
    }

    // Only meaningful once individual demands are sane.
    if report.violations.is_empty() {
        for cat in ds.present_categories() {
            for s in &profile.states {
                let sq: f64 = ds.group_demands(cat, s).iter().map(|d| d * d).sum();
                if sq.is_nan() || sq <= 0.0 {
                    report.push(
                        format!("{cat} state {}", s.index),
                        "group sum of squared demands > 0",
                    );
                }
            }
        }
    }

    report
}
