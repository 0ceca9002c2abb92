//! Seeded synthetic scenario generator.
//!
//! Stands in for real metered data: a solar bell curve peaking at midday,
//! morning/evening residential peaks, an evening EV charging peak, a two-tier
//! utility price and yearly demand growth. All randomness comes from one
//! seed via ChaCha8, so identical seeds give identical series.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grid::TimeGrid;
use crate::scenario::ScenarioData;

/// Shape parameters for the generator. Hour arguments are 1-based slot
/// centers; seasonal factors are indexed Q1..Q4 with Q1 the southern-summer
/// maximum.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthProfile {
    /// Clear-sky irradiance at solar noon in Q1, W/m2.
    pub solar_peak: f64,
    pub sunrise: f64,
    pub sunset: f64,
    /// Mean ambient temperature, degrees C.
    pub temp_base: f64,
    /// Diurnal temperature swing, degrees C.
    pub temp_amp: f64,
    /// Residential base load, kW.
    pub load_base: f64,
    pub load_morning_peak: f64,
    pub load_evening_peak: f64,
    /// EV charging demand at the evening peak, kW.
    pub ev_evening_peak: f64,
    /// Two-tier utility price, $/kWh.
    pub price_offpeak: f64,
    pub price_peak: f64,
    /// Peak-price window, inclusive 1-based hours.
    pub peak_start: usize,
    pub peak_end: usize,
    /// Per-quarter scaling of irradiance and warmth.
    pub season: [f64; 4],
    /// Yearly growth rates (fractions).
    pub ev_growth: f64,
    pub load_growth: f64,
    pub price_growth: f64,
    /// Multiplicative noise half-width; each sample is scaled by a uniform
    /// factor in [1 - noise, 1 + noise], clipped at zero.
    pub noise: f64,
}

impl Default for SynthProfile {
    fn default() -> Self {
        SynthProfile {
            solar_peak: 850.0,
            sunrise: 6.0,
            sunset: 20.0,
            temp_base: 14.0,
            temp_amp: 9.0,
            load_base: 120.0,
            load_morning_peak: 70.0,
            load_evening_peak: 110.0,
            ev_evening_peak: 160.0,
            price_offpeak: 0.18,
            price_peak: 0.42,
            peak_start: 15,
            peak_end: 22,
            season: [1.0, 0.62, 0.48, 0.78],
            ev_growth: 0.12,
            load_growth: 0.015,
            price_growth: 0.02,
            noise: 0.05,
        }
    }
}

impl SynthProfile {
    /// Clear-sky bell shape at 1-based hour `t`: zero outside
    /// [sunrise, sunset], one at the midpoint.
    pub fn solar_shape(&self, t: usize) -> f64 {
        let t = t as f64;
        if t <= self.sunrise || t >= self.sunset {
            return 0.0;
        }
        (std::f64::consts::PI * (t - self.sunrise) / (self.sunset - self.sunrise)).sin()
    }

    fn bump(t: usize, center: f64, width: f64) -> f64 {
        let d = (t as f64 - center) / width;
        (-0.5 * d * d).exp()
    }
}

/// Deterministic-by-seed synthetic scenario on `grid`.
pub fn synth_scenario(seed: u64, grid: &TimeGrid, profile: &SynthProfile) -> ScenarioData {
    let n = grid.slot_count();
    let mut irradiance = Vec::with_capacity(n);
    let mut ambient = Vec::with_capacity(n);
    let mut load = Vec::with_capacity(n);
    let mut ev = Vec::with_capacity(n);
    let mut price = Vec::with_capacity(n);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jitter = move |v: f64| -> f64 {
        if profile.noise == 0.0 {
            return v;
        }
        let u: f64 = rng.random_range(-1.0..=1.0);
        (v * (1.0 + profile.noise * u)).max(0.0)
    };

    for slot in grid.slots() {
        let q = slot.quarter;
        let t = slot.hour;
        let season = profile.season[q - 1];
        let years_in = (slot.year - 1) as f64;

        let sun = profile.solar_shape(t);
        irradiance.push(jitter(profile.solar_peak * season * sun));

        // Warm afternoons, cool nights; seasonality shifts the mean.
        let temp = profile.temp_base + 12.0 * (season - 0.7) + profile.temp_amp * sun;
        ambient.push(temp);

        let load_shape = profile.load_base
            + profile.load_morning_peak * SynthProfile::bump(t, 8.0, 1.6)
            + profile.load_evening_peak * SynthProfile::bump(t, 19.0, 2.2);
        load.push(jitter(load_shape * (1.0 + profile.load_growth).powf(years_in)));

        let ev_shape = profile.ev_evening_peak
            * (SynthProfile::bump(t, 19.5, 2.5) + 0.08 * SynthProfile::bump(t, 2.0, 2.0));
        ev.push(jitter(ev_shape * (1.0 + profile.ev_growth).powf(years_in)));

        let tier = if t >= profile.peak_start && t <= profile.peak_end {
            profile.price_peak
        } else {
            profile.price_offpeak
        };
        price.push(tier * (1.0 + profile.price_growth).powf(years_in));
    }

    ScenarioData::new(grid.clone(), irradiance, ambient, load, ev, price)
        .expect("generator produces only finite nonnegative series")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_is_identical() {
        let grid = TimeGrid::representative(3).unwrap();
        let p = SynthProfile::default();
        let a = synth_scenario(1, &grid, &p);
        let b = synth_scenario(1, &grid, &p);
        assert_eq!(a, b);
        let c = synth_scenario(2, &grid, &p);
        assert_ne!(a.irradiance, c.irradiance);
    }

    #[test]
    fn zero_solar_peak_means_zero_irradiance() {
        let grid = TimeGrid::representative(2).unwrap();
        let p = SynthProfile {
            solar_peak: 0.0,
            ..SynthProfile::default()
        };
        let data = synth_scenario(1, &grid, &p);
        assert!(data.irradiance.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn midday_slot_hits_solar_peak() {
        // Noise off: the Q1 midday slot evaluates the generator formula
        // exactly: peak * season(1.0) * sin(pi/2).
        let grid = TimeGrid::representative(1).unwrap();
        let p = SynthProfile {
            solar_peak: 800.0,
            sunrise: 6.0,
            sunset: 20.0,
            noise: 0.0,
            ..SynthProfile::default()
        };
        let data = synth_scenario(1, &grid, &p);
        let midday = grid.slot_index(1, 1, 1, 13).unwrap();
        assert_eq!(data.irradiance[midday], 800.0);
        let max = data.irradiance.iter().cloned().fold(0.0, f64::max);
        assert_eq!(max, 800.0);
    }

    #[test]
    fn price_is_two_tier() {
        let grid = TimeGrid::representative(1).unwrap();
        let p = SynthProfile::default();
        let data = synth_scenario(1, &grid, &p);
        let distinct: std::collections::BTreeSet<u64> = data
            .utility_price
            .iter()
            .map(|v| v.to_bits())
            .collect();
        assert_eq!(distinct.len(), 2);
    }

    #[test]
    fn ev_demand_grows_year_over_year() {
        let grid = TimeGrid::representative(3).unwrap();
        let p = SynthProfile {
            noise: 0.0,
            ..SynthProfile::default()
        };
        let data = synth_scenario(1, &grid, &p);
        let y1: f64 = grid
            .slots()
            .filter(|s| s.year == 1)
            .map(|s| data.ev_demand[s.index])
            .sum();
        let y3: f64 = grid
            .slots()
            .filter(|s| s.year == 3)
            .map(|s| data.ev_demand[s.index])
            .sum();
        assert!(y3 > y1 * 1.2);
    }
}
