//! The pinned demonstration instance and seeded random instances.
//!
//! The demo load mirrors the benchmark composition — one fixed load, one
//! time-decoupled adjustable load, and four batteries with distinct
//! retention ratios — over two periods.  Exact parameter values are this
//! artifact's own (documented in the README parameter table) and are pinned
//! by golden tests; the default seed 7 reproduces the shipped
//! `assets/demo_model.json` byte for byte.

use crate::error::Result;
use crate::flex_model::{BatteryParams, FixedLoadParams, FlexModel, TdLoadParams};
use crate::rng::Stream;

/// Seed of the shipped instance.
pub const DEFAULT_SEED: u64 = 7;

/// A demo model plus the seed that produced it.
#[derive(Debug, Clone)]
pub struct DemoInstance {
    pub seed: u64,
    pub model: FlexModel,
}

/// Deterministic demo instance: fixed base parameters with a small seeded
/// jitter on the window widths, so different seeds give geometrically
/// similar but distinct regions.
pub fn make_demo(seed: u64) -> DemoInstance {
    let sigmas = [1.0, 0.98, 0.95, 0.9];
    let p_hi = [0.9, 0.7, 0.5, 0.4];
    let p_lo = [0.8, 0.6, 0.55, 0.35];
    let e0s = [0.5, 0.4, 0.3, 0.2];
    let w_hi = [0.6, 0.5, 0.35, 0.25];
    let w_lo = [0.7, 0.45, 0.4, 0.3];

    let mut jitter = Stream::new(seed, "demo-jitter", 0);
    let mut j = || 1.0 + 0.04 * (jitter.next_f64() - 0.5);

    let mut batteries = Vec::new();
    for n in 0..4 {
        let sigma: f64 = sigmas[n];
        let e0 = e0s[n];
        let hi = p_hi[n] * j();
        let lo = p_lo[n] * j();
        let wh = w_hi[n] * j();
        let wl = w_lo[n] * j();
        // Energy windows bracket the zero-power decay path, so the battery
        // is feasible by construction.
        let e_min: Vec<f64> = (1..=2).map(|t| sigma.powi(t) * e0 - wl).collect();
        let e_max: Vec<f64> = (1..=2).map(|t| sigma.powi(t) * e0 + wh).collect();
        batteries.push(BatteryParams {
            p_min: vec![-lo, -lo],
            p_max: vec![hi, hi],
            e_min,
            e_max,
            e0,
            sigma,
        });
    }
    let td = TdLoadParams {
        p_min: vec![-0.5 * j(), -0.45 * j()],
        p_max: vec![0.6 * j(), 0.55 * j()],
    };
    let fixed = FixedLoadParams {
        profile: vec![1.1, 1.3],
    };
    DemoInstance {
        seed,
        model: FlexModel::new(2, 1.0, batteries, vec![td], vec![fixed]),
    }
}

/// Seeded random valid instance for test batteries: one or two batteries,
/// an optional time-decoupled load, and a fixed offset.
pub fn random_instance(seed: u64) -> Result<FlexModel> {
    let mut s = Stream::new(seed, "instance", 0);
    let n_vb = 1 + s.next_index(2);
    let with_td = s.next_f64() < 0.7;
    let mut batteries = Vec::new();
    for _ in 0..n_vb {
        let sigma = s.next_range(0.85, 1.0);
        let e0 = s.next_range(-0.3, 0.5);
        let hi = s.next_range(0.3, 1.0);
        let lo = s.next_range(0.3, 1.0);
        let wl = s.next_range(0.2, 0.8);
        let wh = s.next_range(0.2, 0.8);
        let e_min: Vec<f64> = (1..=2).map(|t| sigma.powi(t) * e0 - wl).collect();
        let e_max: Vec<f64> = (1..=2).map(|t| sigma.powi(t) * e0 + wh).collect();
        batteries.push(BatteryParams {
            p_min: vec![-lo, -lo],
            p_max: vec![hi, hi],
            e_min,
            e_max,
            e0,
            sigma,
        });
    }
    let td_loads = if with_td {
        vec![TdLoadParams {
            p_min: vec![-s.next_range(0.1, 0.6), -s.next_range(0.1, 0.6)],
            p_max: vec![s.next_range(0.1, 0.6), s.next_range(0.1, 0.6)],
        }]
    } else {
        vec![]
    };
    let fixed_loads = vec![FixedLoadParams {
        profile: vec![s.next_range(0.5, 1.5), s.next_range(0.5, 1.5)],
    }];
    let m = FlexModel::new(2, 1.0, batteries, td_loads, fixed_loads);
    m.validate()?;
    Ok(m)
}
