//! File formats and the embedded benchmark dataset.
//!
//! * `customers.csv`: `id,category,base_demand_kw`
//! * `mcp.csv`: `state,mcp_rs_per_kwh,load_factor`, exactly 24 rows
//! * `config.json`: `{"profit_factors": {...}, "peak_states": [...]}`
//!
//! All files are UTF-8, comma separated, with `.` as decimal point.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim};
use serde::{Deserialize, Serialize};

use crate::domain::{Category, CategoryConfig, Customer, Dataset, DayProfile, SystemState, STATES_PER_DAY};
use crate::error::{Error, Result};

pub const CUSTOMERS_HEADER: [&str; 3] = ["id", "category", "base_demand_kw"];
pub const MCP_HEADER: [&str; 3] = ["state", "mcp_rs_per_kwh", "load_factor"];

/// MCP of the analysed peak state (22:00) in the benchmark, Rs/kWh. Chosen so
/// that the industrial purchase cost at that state is 1230 kW × MCP = Rs 5960.12.
pub const BENCHMARK_PEAK_MCP: f64 = 4.845626;

const BENCHMARK_CUSTOMERS: &str = include_str!("../data/customers.csv");
const BENCHMARK_MCP: &str = include_str!("../data/mcp.csv");
const BENCHMARK_CONFIG: &str = include_str!("../data/config.json");

/// One row of `customers.csv` before category resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCustomerRecord {
    pub id: String,
    pub category: String,
    pub base_demand_kw: f64,
}

/// One row of `mcp.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateRecord {
    pub state: u8,
    pub mcp: f64,
    pub load_factor: f64,
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    ReaderBuilder::new()
        .has_headers(true)
        .trim(Trim::All)
        .from_reader(text.as_bytes())
}

fn csv_error(source: &str, err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    Error::parse(source, line, "record", err.to_string())
}

fn check_header(source: &str, rdr: &mut csv::Reader<&[u8]>, expected: &[&str; 3]) -> Result<()> {
    let header = rdr.headers().map_err(|e| csv_error(source, e))?;
    if header.is_empty() {
        return Ok(());
    }
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::parse(
            source,
            1,
            "header",
            format!("expected `{}`", expected.join(",")),
        ));
    }
    Ok(())
}

fn records(source: &str, text: &str, header: &[&str; 3]) -> Result<Vec<(u64, StringRecord)>> {
    let mut rdr = reader(text);
    check_header(source, &mut rdr, header)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(source, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        out.push((line, rec));
    }
    Ok(out)
}

fn positive(source: &str, line: u64, field: &str, raw: &str) -> Result<f64> {
    let v: f64 = raw
        .parse()
        .map_err(|_| Error::parse(source, line, field, format!("`{raw}` is not a decimal number")))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::parse(source, line, field, format!("{raw} must be positive")))
    }
}

fn raw_customers(text: &str, source: &str) -> Result<Vec<(u64, RawCustomerRecord)>> {
    records(source, text, &CUSTOMERS_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            let id = rec[0].to_string();
            if id.is_empty() {
                return Err(Error::parse(source, line, "id", "empty id"));
            }
            let record = RawCustomerRecord {
                id,
                category: rec[1].to_string(),
                base_demand_kw: positive(source, line, "base_demand_kw", &rec[2])?,
            };
            Ok((line, record))
        })
        .collect()
}

pub fn parse_customer_records(text: &str, source: &str) -> Result<Vec<RawCustomerRecord>> {
    Ok(raw_customers(text, source)?.into_iter().map(|(_, r)| r).collect())
}

/// Parses `customers.csv`. `source` names the input in error messages.
pub fn parse_customers(text: &str, source: &str) -> Result<Vec<Customer>> {
    let mut seen = BTreeSet::new();
    let mut customers = Vec::new();
    for (line, rec) in raw_customers(text, source)? {
        let category: Category = rec
            .category
            .parse()
            .map_err(|msg: String| Error::parse(source, line, "category", msg))?;
        if !seen.insert(rec.id.clone()) {
            return Err(Error::parse(source, line, "id", format!("duplicate id `{}`", rec.id)));
        }
        customers.push(Customer::new(rec.id, category, rec.base_demand_kw));
    }
    Ok(customers)
}

/// Canonical `customers.csv` text.
pub fn write_customers(customers: &[Customer]) -> String {
    let mut out = CUSTOMERS_HEADER.join(",");
    out.push('\n');
    for c in customers {
        out.push_str(&format!("{},{},{}\n", c.id, c.category, c.base_demand));
    }
    out
}

/// Parses `mcp.csv` into 24 records ordered by state index.
pub fn parse_mcp(text: &str, source: &str) -> Result<Vec<StateRecord>> {
    let rows = records(source, text, &MCP_HEADER)?;
    let end_line = rows.last().map(|(l, _)| l + 1).unwrap_or(2);
    let mut by_state = BTreeMap::new();
    for (line, rec) in rows {
        let state: u8 = rec[0]
            .parse()
            .ok()
            .filter(|s| (1..=STATES_PER_DAY as u8).contains(s))
            .ok_or_else(|| Error::parse(source, line, "state", format!("`{}` is not in 1..24", &rec[0])))?;
        let record = StateRecord {
            state,
            mcp: positive(source, line, "mcp_rs_per_kwh", &rec[1])?,
            load_factor: positive(source, line, "load_factor", &rec[2])?,
        };
        if by_state.insert(state, record).is_some() {
            return Err(Error::parse(source, line, "state", format!("duplicate state {state}")));
        }
    }
    if by_state.len() != STATES_PER_DAY {
        let missing: Vec<u8> = (1..=STATES_PER_DAY as u8).filter(|s| !by_state.contains_key(s)).collect();
        return Err(Error::parse(
            source,
            end_line,
            "state",
            format!("expected 24 states, found {} (missing {missing:?})", by_state.len()),
        ));
    }
    Ok(by_state.into_values().collect())
}

pub fn write_mcp(records: &[StateRecord]) -> String {
    let mut out = MCP_HEADER.join(",");
    out.push('\n');
    for r in records {
        out.push_str(&format!("{},{},{}\n", r.state, r.mcp, r.load_factor));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    profit_factors: BTreeMap<Category, f64>,
    #[serde(default)]
    peak_states: Option<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub categories: Vec<CategoryConfig>,
    pub peak_states: BTreeSet<u8>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            categories: vec![
                CategoryConfig { category: Category::Residential, k_p: 0.03 },
                CategoryConfig { category: Category::Commercial, k_p: 0.02 },
                CategoryConfig { category: Category::Industrial, k_p: 0.01 },
            ],
            peak_states: (18..=23).collect(),
        }
    }
}

impl Config {
    pub fn k_p(&self, category: Category) -> Option<f64> {
        self.categories.iter().find(|c| c.category == category).map(|c| c.k_p)
    }

    pub fn to_json(&self) -> String {
        let raw = RawConfig {
            profit_factors: self.categories.iter().map(|c| (c.category, c.k_p)).collect(),
            peak_states: Some(self.peak_states.iter().copied().collect()),
        };
        serde_json::to_string_pretty(&raw).expect("config serializes")
    }
}

fn line_of(text: &str, needle: &str) -> u64 {
    text.lines()
        .position(|l| l.contains(needle))
        .map(|i| i as u64 + 1)
        .unwrap_or(1)
}

/// Parses `config.json`; absent keys take the benchmark defaults.
pub fn parse_config(text: &str, source: &str) -> Result<Config> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| {
        let field = if e.to_string().contains("unknown field") { "key" } else { "document" };
        Error::parse(source, e.line() as u64, field, e.to_string())
    })?;
    let mut cfg = Config::default();
    for (category, k_p) in raw.profit_factors {
        if !(0.0..1.0).contains(&k_p) {
            return Err(Error::parse(
                source,
                line_of(text, category.as_str()),
                &format!("profit_factors.{category}"),
                format!("{k_p} is outside [0, 1)"),
            ));
        }
        let slot = cfg.categories.iter_mut().find(|c| c.category == category).expect("all categories have defaults");
        slot.k_p = k_p;
    }
    if let Some(peaks) = raw.peak_states {
        let line = line_of(text, "peak_states");
        if peaks.is_empty() {
            return Err(Error::parse(source, line, "peak_states", "peak window is empty"));
        }
        if let Some(bad) = peaks.iter().find(|s| !(1..=STATES_PER_DAY as u8).contains(s)) {
            return Err(Error::parse(source, line, "peak_states", format!("state {bad} is not in 1..24")));
        }
        cfg.peak_states = peaks.into_iter().collect();
    }
    Ok(cfg)
}

pub fn build_profile(records: &[StateRecord], peak_states: &BTreeSet<u8>, label: &str) -> DayProfile {
    DayProfile {
        label: label.to_string(),
        states: records
            .iter()
            .map(|r| SystemState::new(r.state, r.mcp, r.load_factor, peak_states.contains(&r.state)))
            .collect(),
    }
}

pub fn assemble(label: &str, customers: Vec<Customer>, records: &[StateRecord], config: &Config, profile_label: &str) -> Dataset {
    let present: BTreeSet<Category> = customers.iter().map(|c| c.category).collect();
    Dataset {
        label: label.to_string(),
        customers,
        categories: config
            .categories
            .iter()
            .filter(|c| present.contains(&c.category))
            .copied()
            .collect(),
        profile: build_profile(records, &config.peak_states, profile_label),
    }
}

/// The 177-customer benchmark: 106 residential, 48 commercial and 23
/// industrial customers with profit factors 3%, 2% and 1%.
///
/// Only state 22 carries a pinned MCP and load factor 1.0; the remaining
/// states of the day profile are synthetic placeholders.
pub fn bundled_benchmark() -> Dataset {
    let customers = parse_customers(BENCHMARK_CUSTOMERS, "benchmark/customers.csv").expect("embedded customers parse");
    let records = parse_mcp(BENCHMARK_MCP, "benchmark/mcp.csv").expect("embedded mcp parses");
    let config = parse_config(BENCHMARK_CONFIG, "benchmark/config.json").expect("embedded config parses");
    assemble(
        "benchmark-177",
        customers,
        &records,
        &config,
        "synthetic day profile (state 22 pinned at MCP 4.845626)",
    )
}

/// Embedded benchmark files as `(file name, contents)`.
pub fn bundled_files() -> [(&'static str, &'static str); 3] {
    [
        ("customers.csv", BENCHMARK_CUSTOMERS),
        ("mcp.csv", BENCHMARK_MCP),
        ("config.json", BENCHMARK_CONFIG),
    ]
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads `customers.csv`, `mcp.csv` and optional `config.json` from `dir`.
pub fn load_dataset_dir(dir: &Path) -> Result<Dataset> {
    let customers_path = dir.join("customers.csv");
    let mcp_path = dir.join("mcp.csv");
    let config_path = dir.join("config.json");
    let customers = parse_customers(&read_file(&customers_path)?, &customers_path.display().to_string())?;
    let records = parse_mcp(&read_file(&mcp_path)?, &mcp_path.display().to_string())?;
    let config = if config_path.exists() {
        parse_config(&read_file(&config_path)?, &config_path.display().to_string())?
    } else {
        Config::default()
    };
    Ok(assemble(&dir.display().to_string(), customers, &records, &config, &mcp_path.display().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_customer_row() {
        let got = parse_customers("id,category,base_demand_kw\nI8,industrial,92\n", "t.csv").unwrap();
        assert_eq!(got, vec![Customer::new("I8", Category::Industrial, 92.0)]);
    }

    #[test]
    fn empty_body_is_empty_list() {
        assert!(parse_customers("id,category,base_demand_kw\n", "t.csv").unwrap().is_empty());
        assert!(parse_customers("", "t.csv").unwrap().is_empty());
    }

    #[test]
    fn unknown_category_reports_line() {
        let err = parse_customers("id,category,base_demand_kw\nX1,unknown,5\n", "t.csv").unwrap_err();
        match err {
            Error::Parse { source_name, line, field, .. } => {
                assert_eq!((source_name.as_str(), line, field.as_str()), ("t.csv", 2, "category"));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn customer_error_paths() {
        let cases = [
            ("id,category,base_demand_kw\nA,R,1\nA,R,2\n", 3, "id"),
            ("id,category,base_demand_kw\nA,R,0\n", 2, "base_demand_kw"),
            ("id,category,base_demand_kw\nA,R,-4\n", 2, "base_demand_kw"),
            ("id,category,base_demand_kw\nA,R,abc\n", 2, "base_demand_kw"),
            ("id,category,base_demand_kw\nA,R\n", 2, "record"),
            ("name,category,kw\nA,R,1\n", 1, "header"),
        ];
        for (text, want_line, want_field) in cases {
            match parse_customers(text, "c.csv") {
                Err(Error::Parse { line, field, .. }) => {
                    assert_eq!((line, field.as_str()), (want_line, want_field), "{text}");
                }
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    fn constant_mcp(rows: usize) -> String {
        let mut s = "state,mcp_rs_per_kwh,load_factor\n".to_string();
        for t in 1..=rows {
            s.push_str(&format!("{t},1.0,1.0\n"));
        }
        s
    }

    #[test]
    fn mcp_profile_parses() {
        let recs = parse_mcp(&constant_mcp(24), "m.csv").unwrap();
        assert_eq!(recs.len(), 24);
        assert!(recs.iter().enumerate().all(|(i, r)| r.state as usize == i + 1));
        let bench = parse_mcp(BENCHMARK_MCP, "m.csv").unwrap();
        assert_eq!(bench[21], StateRecord { state: 22, mcp: 4.845626, load_factor: 1.0 });
    }

    #[test]
    fn mcp_structural_errors() {
        assert!(matches!(parse_mcp(&constant_mcp(23), "m.csv"), Err(Error::Parse { ref field, .. }) if field == "state"));
        let dup = constant_mcp(24).replace("24,1.0,1.0", "23,1.0,1.0");
        assert!(matches!(parse_mcp(&dup, "m.csv"), Err(Error::Parse { line: 25, .. })));
        let neg = constant_mcp(24).replace("5,1.0,1.0", "5,-1.0,1.0");
        assert!(matches!(parse_mcp(&neg, "m.csv"), Err(Error::Parse { line: 6, ref field, .. }) if field == "mcp_rs_per_kwh"));
        let out_of_range = constant_mcp(24).replace("24,1.0,1.0", "25,1.0,1.0");
        assert!(parse_mcp(&out_of_range, "m.csv").is_err());
    }

    #[test]
    fn config_defaults_and_overrides() {
        let cfg = parse_config(BENCHMARK_CONFIG, "c.json").unwrap();
        assert_eq!(cfg.k_p(Category::Industrial), Some(0.01));
        assert_eq!(cfg.k_p(Category::Residential), Some(0.03));
        assert_eq!(cfg.k_p(Category::Commercial), Some(0.02));
        assert_eq!(parse_config("{}", "c.json").unwrap(), Config::default());
        let custom = parse_config(r#"{"profit_factors":{"industrial":0.05},"peak_states":[20]}"#, "c.json").unwrap();
        assert_eq!(custom.k_p(Category::Industrial), Some(0.05));
        assert_eq!(custom.peak_states, [20].into_iter().collect());
    }

    #[test]
    fn config_errors() {
        for text in [
            r#"{"peak_states":[25]}"#,
            r#"{"peak_states":[]}"#,
            r#"{"profit_factors":{"industrial":1.0}}"#,
            r#"{"profit_factors":{"industrial":-0.1}}"#,
            r#"{"profit_factors":{"farm":0.1}}"#,
            r#"{"peak":[1]}"#,
            "{",
        ] {
            assert!(matches!(parse_config(text, "c.json"), Err(Error::Parse { .. })), "{text}");
        }
    }

    #[test]
    fn benchmark_totals() {
        let ds = bundled_benchmark();
        assert_eq!(ds.customers.len(), 177);
        let industrial: Vec<f64> = ds.customers_in(Category::Industrial).map(|c| c.base_demand).collect();
        assert_eq!(industrial.iter().sum::<f64>(), 1230.0);
        assert_eq!(industrial.iter().map(|d| d * d).sum::<f64>(), 74872.0);
        assert_eq!(ds.profile.peak_states(), vec![18, 19, 20, 21, 22, 23]);
        assert_eq!(ds.profile.state(22).unwrap().mcp, BENCHMARK_PEAK_MCP);
        assert_eq!(ds.profile.state(22).unwrap().load_factor, 1.0);
    }

    #[test]
    fn canonical_writers_round_trip_benchmark() {
        let customers = parse_customers(BENCHMARK_CUSTOMERS, "c").unwrap();
        assert_eq!(write_customers(&customers), BENCHMARK_CUSTOMERS);
        let recs = parse_mcp(BENCHMARK_MCP, "m").unwrap();
        assert_eq!(write_mcp(&recs), BENCHMARK_MCP);
        let cfg = parse_config(BENCHMARK_CONFIG, "c").unwrap();
        assert_eq!(parse_config(&cfg.to_json(), "c").unwrap(), cfg);
    }
}
