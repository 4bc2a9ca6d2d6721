//! Scenario fixtures shared by unit tests, integration tests and benches.
//! Not part of the public API surface.

use crate::domain::*;

/// Compact valid scenario: 2 kW Ethanol-like plant, ETC collector, 10 kWh
/// battery, flat tariff, unit demand and a midday irradiation bump.
pub fn small_scenario(horizon: usize) -> MicrogridScenario {
    let cat = builtin_catalog();
    let fluid = cat.fluid("Ethanol").unwrap().clone();
    let demand: Vec<f64> = (0..horizon).map(|t| 1.0 + 0.5 * ((t % 24) as f64 / 23.0)).collect();
    let irradiation: Vec<f64> = (0..horizon)
        .map(|t| {
            let h = (t % 24) as f64;
            let x = (h - 12.0) / 6.0;
            if x.abs() <= 1.0 {
                0.75 * (std::f64::consts::FRAC_PI_2 * (1.0 - x.abs())).sin()
            } else {
                0.0
            }
        })
        .collect();
    MicrogridScenario {
        id: "test".to_string(),
        time: TimeGrid {
            step_hours: 1.0,
            horizon,
        },
        fluid,
        collector: CollectorSpec {
            technology: CollectorTechnology::ETC,
            efficiency: 0.87,
            area: 10.0,
        },
        orc: OrcSpec {
            eta_cycle: 0.16,
            eta_hx: 0.95,
            x_min: 0.0,
            x_max: 2.0,
            z_min: 0.0,
            z_max: 0.6,
            section_area_max: None,
        },
        battery: BatterySpec {
            eta_round: 0.95,
            b_min: 0.0,
            b_max: 10.0,
            fade: 0.2,
            throughput: 3000.0,
            cost_cycle: 0.002,
        },
        tariff: GridTariff {
            g_min: -50.0,
            g_max: 50.0,
            price_buy: vec![0.2; horizon],
            price_sell: vec![0.08; horizon],
        },
        demand,
        irradiation,
        production_cost: 0.01,
    }
}

/// Deterministic pseudo-random variant of [`small_scenario`] for property
/// tests: perturbs prices, demand, irradiation and battery data from a seed.
pub fn randomized_scenario(seed: u64, horizon: usize) -> MicrogridScenario {
    // Small xorshift so testutil stays dependency-free.
    let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15) | 1;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut s = small_scenario(horizon);
    s.id = format!("rand-{seed}");
    let cat = builtin_catalog();
    let fi = (next() * cat.fluids.len() as f64) as usize % cat.fluids.len();
    s.fluid = cat.fluids[fi].clone();
    let ci = (next() * cat.collectors.len() as f64) as usize % cat.collectors.len();
    s.collector.technology = cat.collectors[ci].technology;
    s.collector.efficiency = cat.collectors[ci].efficiency;
    s.collector.area = 4.0 + 12.0 * next();
    s.orc.x_max = 0.5 + 4.0 * next();
    s.orc.z_max = s.orc.x_max; // generous pump headroom
    s.battery.b_max = 2.0 + 12.0 * next();
    s.battery.eta_round = 0.85 + 0.15 * next();
    s.battery.fade = 0.1 + 0.3 * next();
    s.battery.throughput = 500.0 + 4000.0 * next();
    s.battery.cost_cycle = 0.001 + 0.004 * next();
    s.production_cost = 0.005 + 0.03 * next();
    for t in 0..horizon {
        s.demand[t] = (2.5 * next()).max(0.0);
        s.irradiation[t] *= 0.5 + next();
        let sell = 0.02 + 0.1 * next();
        s.tariff.price_sell[t] = sell;
        s.tariff.price_buy[t] = sell + 0.02 + 0.2 * next();
    }
    s
}
