//! Demand perturbation scenarios and their effect on prices and billing.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{demand_at_state, Category, Dataset, Scope};
use crate::error::{Error, Result};
use crate::pricing::{build_schedule, verify_ebe, FinancialSummary};

/// Relative demand change of one customer, e.g. `0.10` for +10%.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Perturbation {
    /// Same change at every state of the scenario scope.
    Uniform(f64),
    /// Individual change per state index.
    PerState(BTreeMap<u8, f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub label: String,
    pub scope: Scope,
    pub perturbations: BTreeMap<String, Perturbation>,
}

impl Scenario {
    pub fn explicit(label: impl Into<String>, scope: Scope, changes: &[(&str, f64)]) -> Self {
        Scenario {
            label: label.into(),
            scope,
            perturbations: changes
                .iter()
                .map(|(id, p)| (id.to_string(), Perturbation::Uniform(*p)))
                .collect(),
        }
    }
}

/// Parameters of a randomly drawn demand response event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomEvent {
    pub max_reduction: f64,
    pub seed: u64,
    /// Draw changes from `[-r, +r]` instead of reductions from `[0, r]`.
    #[serde(default)]
    pub symmetric: bool,
}

/// On-disk scenario description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub label: String,
    #[serde(flatten)]
    pub mode: ScenarioMode,
    pub scope: Scope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ScenarioMode {
    Explicit {
        perturbations: BTreeMap<String, Perturbation>,
    },
    Random(RandomEvent),
}

impl ScenarioSpec {
    pub fn resolve(&self, ds: &Dataset) -> Result<Scenario> {
        match &self.mode {
            ScenarioMode::Explicit { perturbations } => Ok(Scenario {
                label: self.label.clone(),
                scope: self.scope.clone(),
                perturbations: perturbations.clone(),
            }),
            ScenarioMode::Random(event) => {
                let mut sc = random_dr_event(ds, event, &self.scope)?;
                sc.label = self.label.clone();
                Ok(sc)
            }
        }
    }
}

fn factor(id: &str, change: f64) -> Result<f64> {
    let f = 1.0 + change;
    if f > 0.0 && f.is_finite() {
        Ok(f)
    } else {
        Err(Error::NonPositiveDemand {
            id: id.to_string(),
            demand: f,
        })
    }
}

/// New dataset with the scenario's demand changes applied.
///
/// A uniform change with day scope rescales the customer's base demand;
/// anything narrower is recorded as per-state adjustments.
pub fn apply_scenario(ds: &Dataset, sc: &Scenario) -> Result<Dataset> {
    let mut out = ds.clone();
    let scope_states = sc.scope.states(&ds.profile);
    for (id, change) in &sc.perturbations {
        let customer = out
            .customers
            .iter_mut()
            .find(|c| &c.id == id)
            .ok_or_else(|| Error::UnknownCustomer(id.clone()))?;
        match change {
            Perturbation::Uniform(p) if sc.scope == Scope::Day => {
                customer.base_demand *= factor(id, *p)?;
            }
            Perturbation::Uniform(p) => {
                let f = factor(id, *p)?;
                for &state in &scope_states {
                    *customer.state_adjustments.entry(state).or_insert(1.0) *= f;
                }
            }
            Perturbation::PerState(map) => {
                for (&state, p) in map {
                    if ds.profile.state(state).is_none() {
                        return Err(Error::MissingStateCoverage(state));
                    }
                    let f = factor(id, *p)?;
                    *customer.state_adjustments.entry(state).or_insert(1.0) *= f;
                }
            }
        }
    }
    Ok(out)
}

/// Draws an independent change for every customer at every state of `scope`.
///
/// Customers are visited in dataset order and states in profile order, so a
/// given seed always produces the same scenario.
pub fn random_dr_event(ds: &Dataset, event: &RandomEvent, scope: &Scope) -> Result<Scenario> {
    let r = event.max_reduction;
    if !(0.0..1.0).contains(&r) {
        return Err(Error::invalid("max_reduction", format!("{r} is outside [0, 1)")));
    }
    let states = scope.states(&ds.profile);
    let mut rng = ChaCha8Rng::seed_from_u64(event.seed);
    let mut perturbations = BTreeMap::new();
    for c in &ds.customers {
        let mut per_state = BTreeMap::new();
        for &s in &states {
            let change = if r == 0.0 {
                0.0
            } else if event.symmetric {
                rng.gen_range(-r..=r)
            } else {
                -rng.gen_range(0.0..=r)
            };
            per_state.insert(s, change);
        }
        perturbations.insert(c.id.clone(), Perturbation::PerState(per_state));
    }
    let mode = if event.symmetric { "symmetric" } else { "reduction" };
    Ok(Scenario {
        label: format!("random {mode} r={r} seed={}", event.seed),
        scope: scope.clone(),
        perturbations,
    })
}

/// Percentage changes of one customer between two datasets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CustomerDelta {
    pub id: String,
    pub d_ld: f64,
    pub d_up: f64,
    pub d_b: f64,
    pub d_dc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioDeltas {
    pub state: u8,
    pub category: Category,
    pub customers: Vec<CustomerDelta>,
    pub base: FinancialSummary,
    pub perturbed: FinancialSummary,
}

impl ScenarioDeltas {
    pub fn customer(&self, id: &str) -> Option<&CustomerDelta> {
        self.customers.iter().find(|c| c.id == id)
    }

    /// Customers whose demand did not change.
    pub fn unchanged(&self) -> impl Iterator<Item = &CustomerDelta> {
        self.customers.iter().filter(|c| c.d_ld == 0.0)
    }
}

fn pct_change(before: f64, after: f64) -> f64 {
    (after / before - 1.0) * 100.0
}

pub fn scenario_deltas(
    base: &Dataset,
    perturbed: &Dataset,
    state: u8,
    category: Category,
) -> Result<ScenarioDeltas> {
    if base.customers.len() != perturbed.customers.len()
        || base
            .customers
            .iter()
            .zip(&perturbed.customers)
            .any(|(a, b)| a.id != b.id || a.category != b.category)
    {
        return Err(Error::MismatchedDatasets("customer ids or categories differ".into()));
    }
    let s0 = *base.profile.state(state).ok_or(Error::MissingStateCoverage(state))?;
    let s1 = *perturbed
        .profile
        .state(state)
        .ok_or(Error::MissingStateCoverage(state))?;

    let sched0 = build_schedule(base)?;
    let sched1 = build_schedule(perturbed)?;
    let total0: f64 = base.group_demands(category, &s0).iter().sum();
    let total1: f64 = perturbed.group_demands(category, &s1).iter().sum();

    let mut customers = Vec::new();
    for (c0, c1) in base.customers_in(category).zip(perturbed.customers_in(category)) {
        let d0 = demand_at_state(c0, &s0);
        let d1 = demand_at_state(c1, &s1);
        let p0 = sched0.price_for(c0, &s0).ok_or_else(|| Error::UnknownCustomer(c0.id.clone()))?;
        let p1 = sched1.price_for(c1, &s1).ok_or_else(|| Error::UnknownCustomer(c1.id.clone()))?;
        customers.push(CustomerDelta {
            id: c0.id.clone(),
            d_ld: pct_change(d0, d1),
            d_up: pct_change(p0, p1),
            d_b: pct_change(d0 * p0, d1 * p1),
            d_dc: pct_change(d0 / total0, d1 / total1),
        });
    }

    let scope = Scope::State(state);
    Ok(ScenarioDeltas {
        state,
        category,
        customers,
        base: verify_ebe(base, &sched0, &scope, Some(category))?,
        perturbed: verify_ebe(perturbed, &sched1, &scope, Some(category))?,
    })
}

/// Purchase cost, revenue and profit of `category` (or all) over `scope`.
pub fn financial_summary(
    ds: &Dataset,
    scope: &Scope,
    category: Option<Category>,
) -> Result<FinancialSummary> {
    if scope.states(&ds.profile).is_empty() {
        return Err(Error::EmptyScope);
    }
    let sched = build_schedule(ds)?;
    verify_ebe(ds, &sched, scope, category)
}

/// The four scenarios replayed against the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Largest and smallest industrial customers both +10%.
    S1,
    /// Both −10%.
    S2,
    /// Largest −10%, smallest +10%.
    S3,
    /// Every customer drawn from ±10% at the analysed state.
    S4,
}

/// State the benchmark scenarios are analysed at.
pub const ANALYSIS_STATE: u8 = 22;

impl Preset {
    pub fn scenario(self, ds: &Dataset, seed: u64) -> Result<Scenario> {
        let sc = match self {
            Preset::S1 => Scenario::explicit("S1", Scope::Day, &[("I8", 0.10), ("I19", 0.10)]),
            Preset::S2 => Scenario::explicit("S2", Scope::Day, &[("I8", -0.10), ("I19", -0.10)]),
            Preset::S3 => Scenario::explicit("S3", Scope::Day, &[("I8", -0.10), ("I19", 0.10)]),
            Preset::S4 => {
                let event = RandomEvent {
                    max_reduction: 0.10,
                    seed,
                    symmetric: true,
                };
                let mut sc = random_dr_event(ds, &event, &Scope::State(ANALYSIS_STATE))?;
                sc.label = "S4".into();
                sc
            }
        };
        Ok(sc)
    }
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(Preset::S1),
            "s2" => Ok(Preset::S2),
            "s3" => Ok(Preset::S3),
            "s4" => Ok(Preset::S4),
            other => Err(format!("unknown preset `{other}` (expected s1, s2, s3 or s4)")),
        }
    }
}
