use dlps_core::comparator::{run_comparison, ComparisonConfig, SignalKind};
use dlps_core::ingest::{bundled_benchmark, parse_customers, write_customers};
use dlps_core::pricing::{alpha, breakeven_demand, fixed_price, on_peak_prices};
use dlps_core::scenario::{apply_scenario, random_dr_event, scenario_deltas, RandomEvent, Scenario};
use dlps_core::sensitivity::{alpha_consistency, elasticity_probe};
use dlps_core::{build_schedule, demand_at_state, verify_ebe, Category, Customer, Scope, SystemState};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn group() -> impl Strategy<Value = (Vec<f64>, f64, f64)> {
    (
        prop::collection::vec(1e-3..=1000.0f64, 1..=500),
        1e-3..=100.0f64,
        0.0..=0.2f64,
    )
}

proptest! {
    #[test]
    fn group_revenue_balances((demands, mcp, k_p) in group()) {
        let prices = on_peak_prices(&demands, k_p, mcp).unwrap();
        let revenue: f64 = demands.iter().zip(&prices).map(|(d, p)| d * p).sum();
        let target = (1.0 + k_p) * mcp * demands.iter().sum::<f64>();
        prop_assert!(rel(revenue, target) <= 1e-9);
        // same revenue as charging everyone the fixed price
        let fixed: f64 = demands.iter().map(|d| d * fixed_price(mcp, k_p).unwrap()).sum();
        prop_assert!(rel(revenue, fixed) <= 1e-9);
    }

    #[test]
    fn prices_are_scale_invariant((demands, mcp, k_p) in group(), c in 0.01..100.0f64) {
        let base = on_peak_prices(&demands, k_p, mcp).unwrap();
        let scaled: Vec<f64> = demands.iter().map(|d| d * c).collect();
        for (a, b) in base.iter().zip(on_peak_prices(&scaled, k_p, mcp).unwrap()) {
            prop_assert!(rel(b, *a) <= 1e-9);
        }
    }

    #[test]
    fn breakeven_separates_winners_from_losers((demands, mcp, k_p) in group()) {
        let threshold = breakeven_demand(&demands).unwrap();
        let fixed = fixed_price(mcp, k_p).unwrap();
        for (d, p) in demands.iter().zip(on_peak_prices(&demands, k_p, mcp).unwrap()) {
            // skip the rounding band around the threshold itself
            if rel(*d, threshold) > 1e-9 {
                prop_assert_eq!(p > fixed, *d > threshold);
            }
        }
    }

    #[test]
    fn alpha_matches_zeta_times_total((demands, mcp, k_p) in group()) {
        prop_assert!(alpha_consistency(&demands, k_p, mcp).unwrap() <= 1e-9);
        let a = alpha(&demands, k_p, mcp).unwrap();
        let sum: f64 = demands.iter().sum();
        for (d, p) in demands.iter().zip(on_peak_prices(&demands, k_p, mcp).unwrap()) {
            prop_assert!((p - a * d / sum).abs() <= 1e-9 * p.max(1e-12) + 1e-15);
        }
    }

    #[test]
    fn price_moves_with_demand_in_moderate_groups(
        demands in prop::collection::vec(50.0..=100.0f64, 10..=200),
        target in any::<prop::sample::Index>(),
        eps in prop_oneof![0.01..=0.5f64, -0.5..=-0.01f64],
    ) {
        let i = target.index(demands.len());
        let probe = elasticity_probe(&demands, i, eps, 0.01, 4.0).unwrap();
        prop_assert_eq!(probe.price_change_pct.signum(), eps.signum());
    }

    #[test]
    fn demand_is_linear_in_load_factor(base in 0.1..1000.0f64, f in 0.01..10.0f64) {
        let c = Customer::new("X", Category::Commercial, base);
        let s = SystemState::new(5, 3.0, f, false);
        prop_assert!(rel(demand_at_state(&c, &s), f * base) <= 1e-15);
    }

    #[test]
    fn customer_csv_round_trips(rows in prop::collection::btree_map("[A-Z][0-9]{1,4}", (0usize..3, 1e-3..1e4f64), 0..40)) {
        let customers: Vec<Customer> = rows
            .into_iter()
            .map(|(id, (cat, d))| Customer::new(id, Category::ALL[cat], d))
            .collect();
        let text = write_customers(&customers);
        let parsed = parse_customers(&text, "p.csv").unwrap();
        prop_assert_eq!(&parsed, &customers);
        prop_assert_eq!(write_customers(&parsed), text);
    }

    #[test]
    fn random_events_keep_every_category_margin(seed in any::<u64>(), r in 0.0..0.5f64, symmetric in any::<bool>()) {
        let ds = bundled_benchmark();
        let sc = random_dr_event(&ds, &RandomEvent { max_reduction: r, seed, symmetric }, &Scope::Peak).unwrap();
        let perturbed = apply_scenario(&ds, &sc).unwrap();
        let sched = build_schedule(&perturbed).unwrap();
        for cfg in &perturbed.categories {
            for scope in [Scope::Peak, Scope::OffPeak, Scope::State(19)] {
                let fs = verify_ebe(&perturbed, &sched, &scope, Some(cfg.category)).unwrap();
                prop_assert!(rel(fs.profit_fraction.unwrap(), cfg.k_p) <= 1e-9);
            }
        }
        // off-peak prices are uniform within a category
        for cat in Category::ALL {
            let s = perturbed.profile.state(4).unwrap();
            let mut prices = perturbed.customers_in(cat).map(|c| sched.price_for(c, s).unwrap());
            let first = prices.next().unwrap();
            prop_assert!(prices.all(|p| p == first));
        }
    }

    #[test]
    fn billing_delta_composes(seed in any::<u64>()) {
        let ds = bundled_benchmark();
        let sc = random_dr_event(&ds, &RandomEvent { max_reduction: 0.1, seed, symmetric: true }, &Scope::State(22)).unwrap();
        let perturbed = apply_scenario(&ds, &sc).unwrap();
        for cat in Category::ALL {
            let d = scenario_deltas(&ds, &perturbed, 22, cat).unwrap();
            for c in &d.customers {
                let composed = (1.0 + c.d_ld / 100.0) * (1.0 + c.d_up / 100.0) * 100.0 - 100.0;
                prop_assert!((composed - c.d_b).abs() <= 1e-6);
            }
            prop_assert!(rel(d.perturbed.profit_fraction.unwrap(), ds.config(cat).unwrap().k_p) <= 1e-9);
        }
    }

    #[test]
    fn lone_free_rider_is_penalised(pick in 0usize..23, up in 0.01..0.5f64) {
        let ds = bundled_benchmark();
        let rider = ds.customers_in(Category::Industrial).nth(pick).unwrap().clone();
        let state = *ds.profile.state(22).unwrap();
        let threshold = breakeven_demand(&ds.group_demands(Category::Industrial, &state)).unwrap();
        // below this size the rider's own increase dilutes the sum of squares
        // less than the total, and everyone else's price goes up with theirs
        prop_assume!(rider.base_demand * (2.0 + up) > threshold);
        let perturbed = apply_scenario(&ds, &Scenario::explicit("fr", Scope::Day, &[(rider.id.as_str(), up)])).unwrap();
        let d = scenario_deltas(&ds, &perturbed, 22, Category::Industrial).unwrap();
        for c in &d.customers {
            if c.id == rider.id {
                prop_assert!(c.d_up > 0.0);
            } else {
                prop_assert!(c.d_up < 0.0);
            }
        }
    }

    #[test]
    fn comparison_aggregates_are_consistent(seed in any::<u64>(), r in 0.0..0.3f64, m in 1.0..2.0f64) {
        let ds = bundled_benchmark();
        let cfg = ComparisonConfig { tou_multiplier: m, demand_response: Some(RandomEvent { max_reduction: r, seed, symmetric: false }), with_profit: true };
        let bc = run_comparison(&ds, &cfg).unwrap();
        for kind in [SignalKind::Flat, SignalKind::Rtp, SignalKind::Tou, SignalKind::Proposed] {
            for cat in Category::ALL {
                let day = bc.total(kind, Some(cat), &Scope::Day).unwrap();
                let split = bc.total(kind, Some(cat), &Scope::Peak).unwrap() + bc.total(kind, Some(cat), &Scope::OffPeak).unwrap();
                prop_assert!(rel(split, day) <= 1e-9);
            }
        }
        for cat in Category::ALL {
            prop_assert!(rel(
                bc.total(SignalKind::Proposed, Some(cat), &Scope::Day).unwrap(),
                bc.total(SignalKind::Rtp, Some(cat), &Scope::Day).unwrap(),
            ) <= 1e-9);
        }
    }
}

#[test]
fn elasticity_gap_shrinks_with_group_size() {
    let mut previous = f64::INFINITY;
    for n in [2usize, 5, 10, 20, 50, 100, 200, 500, 1000] {
        let gap = elasticity_probe(&vec![10.0; n], 0, 0.01, 0.01, 4.0).unwrap().gap_pp;
        assert!(gap < previous, "N={n}: {gap} !< {previous}");
        if n >= 50 {
            assert!(gap <= 0.05, "N={n}: {gap}");
        }
        previous = gap;
    }
}

#[test]
fn small_rider_raises_everyone_elses_price() {
    let ds = bundled_benchmark();
    let perturbed = apply_scenario(&ds, &Scenario::explicit("fr", Scope::Day, &[("I16", 0.01)])).unwrap();
    let d = scenario_deltas(&ds, &perturbed, 22, Category::Industrial).unwrap();
    assert!(d.customer("I16").unwrap().d_up > 0.0);
    assert!(d.unchanged().all(|c| c.d_up > 0.0));
}
