//! PV electrical output from irradiance and ambient temperature via the
//! NOCT cell-temperature model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::ScenarioData;

/// Irradiance at NOCT rating conditions, W/m2.
pub const NOCT_IRRADIANCE: f64 = 800.0;

/// PV fleet parameters. `gamma` is the temperature derating coefficient
/// (1/degC); `noct` the normal operating cell temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PvParams {
    pub rating_kw: f64,
    pub efficiency: f64,
    pub gamma: f64,
    pub noct: f64,
    pub i_stc: f64,
    pub t_stc: f64,
}

impl Default for PvParams {
    fn default() -> Self {
        PvParams {
            rating_kw: 0.0,
            efficiency: 1.0,
            gamma: 0.004,
            noct: 45.0,
            i_stc: 1000.0,
            t_stc: 25.0,
        }
    }
}

impl PvParams {
    pub fn new(rating_kw: f64, efficiency: f64) -> Result<Self> {
        PvParams {
            rating_kw,
            efficiency,
            ..PvParams::default()
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.rating_kw >= 0.0) {
            return Err(Error::data(format!("pv rating must be >= 0, got {}", self.rating_kw)));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::data(format!(
                "pv efficiency must be in (0, 1], got {}",
                self.efficiency
            )));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::data(format!("pv gamma must be >= 0, got {}", self.gamma)));
        }
        if !(self.i_stc > 0.0) {
            return Err(Error::data(format!("pv i_stc must be > 0, got {}", self.i_stc)));
        }
        Ok(self)
    }
}

/// Cell temperature: ambient plus irradiance-driven heating,
/// `(NOCT - 20) / 800 W/m2` per unit irradiance.
pub fn cell_temperature(t_amb: f64, irradiance: f64, params: &PvParams) -> f64 {
    debug_assert!(irradiance >= 0.0);
    t_amb + (params.noct - 20.0) / NOCT_IRRADIANCE * irradiance
}

/// Electrical output in kW, clamped at zero (extreme cell temperatures can
/// drive the raw derating formula negative; physical panels do not consume).
pub fn pv_power(t_amb: f64, irradiance: f64, params: &PvParams) -> f64 {
    let t_cell = cell_temperature(t_amb, irradiance, params);
    let raw = params.efficiency
        * params.rating_kw
        * (irradiance / params.i_stc)
        * (1.0 - params.gamma * (t_cell - params.t_stc));
    raw.max(0.0)
}

/// Elementwise PV profile over a scenario, with a count of slots where the
/// zero clamp fired.
#[derive(Debug, Clone, PartialEq)]
pub struct PvProfile {
    pub power_kw: Vec<f64>,
    pub clamped_slots: usize,
}

pub fn build_pv_profile(scenario: &ScenarioData, params: &PvParams) -> PvProfile {
    let mut power = Vec::with_capacity(scenario.irradiance.len());
    let mut clamped = 0usize;
    for (&irr, &amb) in scenario.irradiance.iter().zip(&scenario.ambient_temp) {
        let p = pv_power(amb, irr, params);
        if p == 0.0 && irr > 0.0 {
            let t_cell = cell_temperature(amb, irr, params);
            if 1.0 - params.gamma * (t_cell - params.t_stc) < 0.0 {
                clamped += 1;
            }
        }
        power.push(p);
    }
    if clamped > 0 {
        log::warn!("pv derating clamp fired on {clamped} slots");
    }
    PvProfile {
        power_kw: power,
        clamped_slots: clamped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::synth::{synth_scenario, SynthProfile};

    #[test]
    fn cell_temperature_examples() {
        let p = PvParams { noct: 45.0, ..PvParams::default() };
        assert_eq!(cell_temperature(20.0, 0.0, &p), 20.0);
        assert_eq!(cell_temperature(25.0, 800.0, &p), 50.0);
        let p44 = PvParams { noct: 44.0, ..PvParams::default() };
        assert_eq!(cell_temperature(10.0, 400.0, &p44), 22.0);
    }

    #[test]
    fn stc_identity() {
        // At standard test conditions output equals efficiency x rating.
        let p = PvParams {
            rating_kw: 100.0,
            efficiency: 1.0,
            gamma: 0.004,
            noct: 45.0,
            i_stc: 1000.0,
            t_stc: 25.0,
        };
        // Ambient chosen so the cell sits exactly at t_stc.
        let t_amb = 25.0 - (45.0 - 20.0) / 800.0 * 1000.0;
        assert!((pv_power(t_amb, 1000.0, &p) - 100.0).abs() < 1e-12);
        assert_eq!(pv_power(30.0, 0.0, &p), 0.0);
    }

    #[test]
    fn hand_evaluated_case_43_7() {
        // rating 100, eta 0.95, I = 500, gamma 0.004, ambient 30, NOCT 44:
        // cell = 30 + 24/800*500 = 45; 95 * 0.5 * (1 - 0.004*20) = 43.7 kW.
        let p = PvParams {
            rating_kw: 100.0,
            efficiency: 0.95,
            gamma: 0.004,
            noct: 44.0,
            i_stc: 1000.0,
            t_stc: 25.0,
        };
        assert!((pv_power(30.0, 500.0, &p) - 43.7).abs() < 1e-9);
    }

    #[test]
    fn clamps_negative_output() {
        let p = PvParams {
            rating_kw: 100.0,
            efficiency: 1.0,
            gamma: 0.01,
            noct: 60.0,
            ..PvParams::default()
        };
        // Very hot: derating factor goes negative, output clamps to zero.
        assert_eq!(pv_power(120.0, 1000.0, &p), 0.0);
    }

    #[test]
    fn rating_homogeneity_and_monotonicity() {
        let p1 = PvParams::new(50.0, 0.9).unwrap();
        let p2 = PvParams::new(100.0, 0.9).unwrap();
        for irr in [0.0, 120.0, 480.0, 900.0] {
            let a = pv_power(18.0, irr, &p1);
            let b = pv_power(18.0, irr, &p2);
            assert!((b - 2.0 * a).abs() < 1e-12);
        }
        // Monotone in irradiance while the clamp is inactive.
        let mut last = -1.0;
        for irr in (0..=10).map(|i| i as f64 * 100.0) {
            let v = pv_power(10.0, irr, &p1);
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn profile_matches_elementwise_oracle() {
        let grid = TimeGrid::representative(1).unwrap();
        let data = synth_scenario(1, &grid, &SynthProfile::default());
        let p = PvParams::new(200.0, 0.92).unwrap();
        let profile = build_pv_profile(&data, &p);
        for (i, slot) in grid.slots().enumerate() {
            let expect = pv_power(data.ambient_temp[i], data.irradiance[i], &p);
            assert_eq!(profile.power_kw[slot.index], expect);
        }
        // Night slots produce nothing; midday produces something.
        assert_eq!(profile.power_kw[grid.slot_index(1, 1, 1, 2).unwrap()], 0.0);
        assert!(profile.power_kw[grid.slot_index(1, 1, 1, 13).unwrap()] > 0.0);
    }

    #[test]
    fn all_zero_irradiance_gives_zero_profile() {
        let grid = TimeGrid::representative(1).unwrap();
        let p = SynthProfile {
            solar_peak: 0.0,
            ..SynthProfile::default()
        };
        let data = synth_scenario(1, &grid, &p);
        let profile = build_pv_profile(&data, &PvParams::new(100.0, 0.9).unwrap());
        assert!(profile.power_kw.iter().all(|&v| v == 0.0));
        assert_eq!(profile.clamped_slots, 0);
    }
}
