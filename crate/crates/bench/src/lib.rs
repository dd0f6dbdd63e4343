//! Fixtures shared by the benchmarks in `benches/`.

use dlps_core::ingest::bundled_benchmark;
use dlps_core::{Customer, Dataset};

/// The benchmark population repeated `copies` times, with ids suffixed by the
/// copy number and demands nudged so groups are not exact multiples.
pub fn replicated_benchmark(copies: usize) -> Dataset {
    let base = bundled_benchmark();
    let mut customers = Vec::with_capacity(base.customers.len() * copies);
    for k in 0..copies {
        for c in &base.customers {
            let nudge = 1.0 + (k % 7) as f64 * 0.01;
            customers.push(Customer::new(format!("{}-{k}", c.id), c.category, c.base_demand * nudge));
        }
    }
    Dataset {
        label: format!("{}x{copies}", base.label),
        customers,
        ..base
    }
}

/// Deterministic demands in `[20, 120)` kW.
pub fn demand_sweep(n: usize) -> Vec<f64> {
    (0..n).map(|i| 20.0 + ((i * 37) % 100) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use dlps_core::validate_dataset;

    #[test]
    fn replicas_stay_valid() {
        let ds = replicated_benchmark(3);
        assert_eq!(ds.customers.len(), 3 * 177);
        assert!(validate_dataset(&ds).is_valid());
    }
}
