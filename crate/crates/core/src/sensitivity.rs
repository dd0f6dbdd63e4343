//! Price-vs-demand sensitivity of the peak price signal.
//!
//! For a large group the slope `∂P_j/∂D_j` is approximately the same for all
//! customers, `ζ = (1 + k_p) MCP ΣD / ΣD²`, and then `α = ζ ΣD` and a relative
//! change in one customer's demand moves their price by the same relative
//! amount. The probe here measures how far the exact price deviates from that
//! approximation for a finite group.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pricing::{alpha, fixed_price, group_moments, on_peak_prices};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensitivityReport {
    /// Rs/kWh per kW.
    pub zeta: f64,
    /// `|α − ζ ΣD| / α`
    pub alpha_check: f64,
    /// `|Δ%P − Δ%D|` in percentage points.
    pub elasticity_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElasticityProbe {
    pub demand_change_pct: f64,
    pub price_change_pct: f64,
    pub gap_pp: f64,
}

/// Large-group approximation of the price slope, shared by every customer.
pub fn zeta(demands: &[f64], k_p: f64, mcp: f64) -> Result<f64> {
    let marked_up = fixed_price(mcp, k_p)?;
    let (sum, sum_sq) = group_moments(demands)?;
    Ok(marked_up * sum / sum_sq)
}

/// Relative discrepancy between the proportionality constant and `ζ ΣD`.
pub fn alpha_consistency(demands: &[f64], k_p: f64, mcp: f64) -> Result<f64> {
    let a = alpha(demands, k_p, mcp)?;
    let z = zeta(demands, k_p, mcp)?;
    let sum: f64 = demands.iter().sum();
    Ok((a - z * sum).abs() / a)
}

/// Perturbs customer `target` by `D → D(1 + perturbation)`, recomputes the
/// exact group prices and compares the relative price change with the
/// relative demand change.
pub fn elasticity_probe(
    demands: &[f64],
    target: usize,
    perturbation: f64,
    k_p: f64,
    mcp: f64,
) -> Result<ElasticityProbe> {
    if demands.len() < 2 {
        return Err(Error::invalid("demands", "need at least two customers"));
    }
    if !(-0.5..=0.5).contains(&perturbation) {
        return Err(Error::invalid(
            "perturbation",
            format!("{perturbation} is outside [-0.5, 0.5]"),
        ));
    }
    let base_demand = *demands
        .get(target)
        .ok_or_else(|| Error::invalid("target", format!("{target} out of range")))?;
    if base_demand.is_nan() || base_demand <= 0.0 {
        return Err(Error::invalid("target", "target demand must be positive"));
    }

    let before = on_peak_prices(demands, k_p, mcp)?[target];
    let mut perturbed = demands.to_vec();
    perturbed[target] = base_demand * (1.0 + perturbation);
    let after = on_peak_prices(&perturbed, k_p, mcp)?[target];

    let demand_change_pct = perturbation * 100.0;
    let price_change_pct = (after / before - 1.0) * 100.0;
    Ok(ElasticityProbe {
        demand_change_pct,
        price_change_pct,
        gap_pp: (price_change_pct - demand_change_pct).abs(),
    })
}

pub fn sensitivity_report(
    demands: &[f64],
    target: usize,
    perturbation: f64,
    k_p: f64,
    mcp: f64,
) -> Result<SensitivityReport> {
    Ok(SensitivityReport {
        zeta: zeta(demands, k_p, mcp)?,
        alpha_check: alpha_consistency(demands, k_p, mcp)?,
        elasticity_gap: elasticity_probe(demands, target, perturbation, k_p, mcp)?.gap_pp,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;
    use crate::ingest::BENCHMARK_PEAK_MCP;

    const INDUSTRIAL: [f64; 23] = [
        40.0, 50.0, 46.0, 54.0, 65.0, 75.0, 88.0, 92.0, 30.0, 42.0, 54.0, 62.0, 68.0, 74.0, 90.0,
        30.0, 30.0, 60.0, 25.0, 35.0, 40.0, 38.0, 42.0,
    ];

    #[test]
    fn zeta_examples() {
        assert_relative_eq!(zeta(&[50.0; 4], 0.0, 4.0).unwrap(), 0.08, max_relative = 1e-12);
        let z = zeta(&INDUSTRIAL, 0.01, BENCHMARK_PEAK_MCP).unwrap();
        assert_relative_eq!(z, 1.01 * BENCHMARK_PEAK_MCP * 1230.0 / 74872.0, max_relative = 1e-12);
        assert!((z - 0.08040).abs() < 5e-6);
        assert_relative_eq!(zeta(&[10.0, 20.0, 30.0], 0.0, 1.0).unwrap(), 60.0 / 1400.0, max_relative = 1e-12);
        assert!(matches!(zeta(&[0.0; 3], 0.0, 1.0), Err(Error::DegenerateGroup { .. })));
    }

    #[test]
    fn alpha_identity_on_examples() {
        assert!(alpha_consistency(&INDUSTRIAL, 0.01, BENCHMARK_PEAK_MCP).unwrap() <= 1e-9);
        assert!(alpha_consistency(&[13.0; 40], 0.03, 2.2).unwrap() <= 1e-9);
    }

    #[test]
    fn probe_on_first_industrial_customer() {
        // Hand recomputation: ΣD' = 1230.4, ΣD²' = 74904.16
        let ratio = 1.01 * (1230.4 / 1230.0) / (74904.16 / 74872.0);
        let expected_dp = (ratio - 1.0) * 100.0;
        let probe = elasticity_probe(&INDUSTRIAL, 0, 0.01, 0.01, BENCHMARK_PEAK_MCP).unwrap();
        assert_relative_eq!(probe.price_change_pct, expected_dp, max_relative = 1e-9);
        assert!((probe.price_change_pct - 0.9895).abs() < 1e-4);
        assert!((probe.gap_pp - 0.0105).abs() < 1e-4);
    }

    #[test]
    fn zero_perturbation_has_zero_gap() {
        let probe = elasticity_probe(&INDUSTRIAL, 4, 0.0, 0.01, 3.0).unwrap();
        assert_eq!(probe.gap_pp, 0.0);
    }

    #[test]
    fn large_uniform_group() {
        let ratio: f64 = 1.01 * (200.01 / 200.0) / (200.0201 / 200.0);
        let oracle_gap = ((ratio - 1.0) * 100.0 - 1.0).abs();
        let probe = elasticity_probe(&[1.0; 200], 0, 0.01, 0.0, 1.0).unwrap();
        assert_relative_eq!(probe.gap_pp, oracle_gap, max_relative = 1e-6);
        assert!(probe.gap_pp <= 0.02);
    }

    #[test]
    fn probe_rejects_bad_inputs() {
        assert!(elasticity_probe(&[5.0], 0, 0.01, 0.0, 1.0).is_err());
        assert!(elasticity_probe(&INDUSTRIAL, 0, 0.6, 0.0, 1.0).is_err());
        assert!(elasticity_probe(&INDUSTRIAL, 99, 0.01, 0.0, 1.0).is_err());
        assert!(elasticity_probe(&[0.0, 4.0], 0, 0.01, 0.0, 1.0).is_err());
    }

    #[test]
    fn report_bundles_all_three() {
        let r = sensitivity_report(&INDUSTRIAL, 0, 0.01, 0.01, BENCHMARK_PEAK_MCP).unwrap();
        assert!(r.zeta > 0.0);
        assert!(r.alpha_check <= 1e-9);
        assert!((r.elasticity_gap - 0.0105).abs() < 1e-4);
    }
}
