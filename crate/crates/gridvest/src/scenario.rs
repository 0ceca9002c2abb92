//! Exogenous time series: irradiance, ambient temperature, residential load,
//! EV demand and utility price, aligned to a [`TimeGrid`], plus CSV
//! ingestion that fails loudly on any gap or bad value.

use std::io::{Read, Write};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grid::{GridMode, TimeGrid};

pub const SCENARIO_HEADER: [&str; 9] = [
    "year",
    "quarter",
    "day",
    "hour",
    "irradiance",
    "ambient_temp",
    "load",
    "ev_demand",
    "price",
];

/// Unit of the price column on disk. Values are normalized to $/kWh on load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriceUnit {
    #[default]
    PerKwh,
    PerMwh,
}

/// Unit overrides applied during ingestion.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitOptions {
    pub price: PriceUnit,
}

/// All exogenous series for one scenario. Immutable after construction;
/// internal units are kW, degrees C, W/m2 and $/kWh throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioData {
    grid: TimeGrid,
    pub irradiance: Vec<f64>,
    pub ambient_temp: Vec<f64>,
    pub residential_load: Vec<f64>,
    pub ev_demand: Vec<f64>,
    pub utility_price: Vec<f64>,
}

impl ScenarioData {
    pub fn new(
        grid: TimeGrid,
        irradiance: Vec<f64>,
        ambient_temp: Vec<f64>,
        residential_load: Vec<f64>,
        ev_demand: Vec<f64>,
        utility_price: Vec<f64>,
    ) -> Result<Self> {
        let n = grid.slot_count();
        for (name, series) in [
            ("irradiance", &irradiance),
            ("ambient_temp", &ambient_temp),
            ("load", &residential_load),
            ("ev_demand", &ev_demand),
            ("price", &utility_price),
        ] {
            if series.len() != n {
                return Err(Error::data(format!(
                    "{name} series has {} slots, grid needs {n}",
                    series.len()
                )));
            }
            for (i, v) in series.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::data(format!(
                        "{name} is not finite at slot {}",
                        grid.slot_at(i)
                    )));
                }
                if *name != *"ambient_temp" && *v < 0.0 {
                    return Err(Error::data(format!(
                        "{name} is negative ({v}) at slot {}",
                        grid.slot_at(i)
                    )));
                }
            }
        }
        Ok(ScenarioData {
            grid,
            irradiance,
            ambient_temp,
            residential_load,
            ev_demand,
            utility_price,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Collapses a full-daily scenario to representative-day form by
    /// averaging each quarter's days slot-by-hour. Quarter totals are
    /// preserved because the representative day is weighted by the
    /// quarter's day count.
    pub fn aggregate_representative(&self) -> Result<ScenarioData> {
        if self.grid.mode() == GridMode::RepresentativeDay {
            return Ok(self.clone());
        }
        let rep = TimeGrid::representative(self.grid.years())?;
        let average = |src: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; rep.slot_count()];
            for slot in self.grid.slots() {
                let days = self.grid.days_in_quarter(slot.quarter) as f64;
                let target = rep
                    .slot_index(slot.year, slot.quarter, 1, slot.hour)
                    .expect("rep grid covers every (y,q,t)");
                out[target] += src[slot.index] / days;
            }
            out
        };
        let irr = average(&self.irradiance);
        let amb = average(&self.ambient_temp);
        let load = average(&self.residential_load);
        let ev = average(&self.ev_demand);
        let price = average(&self.utility_price);
        drop(average);
        ScenarioData::new(rep, irr, amb, load, ev, price)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", SCENARIO_HEADER.join(","))?;
        for slot in self.grid.slots() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                slot.year,
                slot.quarter,
                slot.day,
                slot.hour,
                self.irradiance[slot.index],
                self.ambient_temp[slot.index],
                self.residential_load[slot.index],
                self.ev_demand[slot.index],
                self.utility_price[slot.index]
            )?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

#[derive(Debug, Deserialize)]
struct ScenarioRow {
    year: usize,
    quarter: usize,
    day: usize,
    hour: usize,
    irradiance: f64,
    ambient_temp: f64,
    load: f64,
    ev_demand: f64,
    price: f64,
}

/// Loads and validates a scenario CSV against `grid`.
///
/// Every slot of the grid must appear exactly once; the first missing slot,
/// duplicate, out-of-grid coordinate or negative value is reported with its
/// coordinates.
pub fn load_scenario(path: impl AsRef<Path>, grid: &TimeGrid, units: UnitOptions) -> Result<ScenarioData> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::data(format!("cannot open scenario file {}: {e}", path.display())))?;
    read_scenario(file, grid, units)
}

pub fn read_scenario<R: Read>(reader: R, grid: &TimeGrid, units: UnitOptions) -> Result<ScenarioData> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(reader);
    {
        let got: Vec<&str> = rdr.headers()?.iter().collect();
        if got != SCENARIO_HEADER {
            return Err(Error::data(format!(
                "scenario header mismatch: expected `{}`, found `{}`",
                SCENARIO_HEADER.join(","),
                got.join(",")
            )));
        }
    }

    let n = grid.slot_count();
    let mut seen = vec![false; n];
    let mut irradiance = vec![0.0; n];
    let mut ambient = vec![0.0; n];
    let mut load = vec![0.0; n];
    let mut ev = vec![0.0; n];
    let mut price = vec![0.0; n];

    for (line, row) in rdr.deserialize::<ScenarioRow>().enumerate() {
        let row = row.map_err(|e| Error::data(format!("malformed row {}: {e}", line + 2)))?;
        let idx = grid
            .slot_index(row.year, row.quarter, row.day, row.hour)
            .ok_or_else(|| {
                Error::data(format!(
                    "slot (y={},q={},d={},t={}) is outside the grid",
                    row.year, row.quarter, row.day, row.hour
                ))
            })?;
        if seen[idx] {
            return Err(Error::data(format!(
                "duplicate slot {}",
                grid.slot_at(idx)
            )));
        }
        seen[idx] = true;
        irradiance[idx] = row.irradiance;
        ambient[idx] = row.ambient_temp;
        load[idx] = row.load;
        ev[idx] = row.ev_demand;
        price[idx] = match units.price {
            PriceUnit::PerKwh => row.price,
            PriceUnit::PerMwh => row.price / 1000.0,
        };
    }

    if let Some(first_gap) = seen.iter().position(|s| !s) {
        return Err(Error::data(format!(
            "missing slot {}",
            grid.slot_at(first_gap)
        )));
    }

    ScenarioData::new(grid.clone(), irradiance, ambient, load, ev, price)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{synth_scenario, SynthProfile};

    fn tiny_csv(rows: &[(usize, usize, usize, usize)]) -> String {
        let mut s = SCENARIO_HEADER.join(",") + "\n";
        for &(y, q, d, t) in rows {
            s.push_str(&format!("{y},{q},{d},{t},500,20,100,30,0.25\n"));
        }
        s
    }

    #[test]
    fn loads_well_formed_rep_day_year() {
        let grid = TimeGrid::representative(1).unwrap();
        let rows: Vec<_> = grid
            .slots()
            .map(|s| (s.year, s.quarter, s.day, s.hour))
            .collect();
        let csv = tiny_csv(&rows);
        let data = read_scenario(csv.as_bytes(), &grid, UnitOptions::default()).unwrap();
        assert_eq!(data.irradiance.len(), 4 * 24);
        assert_eq!(data.utility_price[0], 0.25);
    }

    #[test]
    fn missing_hour_names_the_slot() {
        let grid = TimeGrid::representative(1).unwrap();
        let rows: Vec<_> = grid
            .slots()
            .filter(|s| !(s.quarter == 2 && s.hour == 13))
            .map(|s| (s.year, s.quarter, s.day, s.hour))
            .collect();
        let err = read_scenario(tiny_csv(&rows).as_bytes(), &grid, UnitOptions::default())
            .unwrap_err();
        assert_eq!(err.to_string(), "missing slot (y=1,q=2,d=1,t=13)");
    }

    #[test]
    fn duplicate_slot_rejected() {
        let grid = TimeGrid::representative(1).unwrap();
        let mut rows: Vec<_> = grid
            .slots()
            .map(|s| (s.year, s.quarter, s.day, s.hour))
            .collect();
        rows.push((1, 1, 1, 1));
        let err = read_scenario(tiny_csv(&rows).as_bytes(), &grid, UnitOptions::default())
            .unwrap_err();
        assert!(err.to_string().contains("duplicate slot (y=1,q=1,d=1,t=1)"));
    }

    #[test]
    fn negative_value_names_slot_and_column() {
        let grid = TimeGrid::representative(1).unwrap();
        let mut csv = SCENARIO_HEADER.join(",") + "\n";
        for s in grid.slots() {
            let load = if s.quarter == 3 && s.hour == 5 { -1.0 } else { 100.0 };
            csv.push_str(&format!(
                "{},{},{},{},500,20,{load},30,0.25\n",
                s.year, s.quarter, s.day, s.hour
            ));
        }
        let err = read_scenario(csv.as_bytes(), &grid, UnitOptions::default()).unwrap_err();
        assert!(err.to_string().contains("load is negative"));
        assert!(err.to_string().contains("(y=1,q=3,d=1,t=5)"));
    }

    #[test]
    fn mwh_price_unit_divides_by_1000() {
        // Hand conversion on a 3-row check: 250 $/MWh -> 0.25 $/kWh.
        let grid = TimeGrid::representative(1).unwrap();
        let mut csv = SCENARIO_HEADER.join(",") + "\n";
        for s in grid.slots() {
            csv.push_str(&format!(
                "{},{},{},{},0,20,100,30,250\n",
                s.year, s.quarter, s.day, s.hour
            ));
        }
        let data = read_scenario(
            csv.as_bytes(),
            &grid,
            UnitOptions { price: PriceUnit::PerMwh },
        )
        .unwrap();
        assert_eq!(data.utility_price[0], 0.25);
        assert_eq!(data.utility_price[50], 0.25);
        assert_eq!(data.utility_price[95], 0.25);
    }

    #[test]
    fn header_mismatch_rejected() {
        let grid = TimeGrid::representative(1).unwrap();
        let csv = "year,quarter,day,hour,irradiance,temp,load,ev,price\n";
        let err = read_scenario(csv.as_bytes(), &grid, UnitOptions::default()).unwrap_err();
        assert!(err.to_string().contains("header mismatch"));
    }

    #[test]
    fn roundtrip_is_bitwise_equal() {
        let grid = TimeGrid::representative(2).unwrap();
        let data = synth_scenario(7, &grid, &SynthProfile::default());
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        let back = read_scenario(buf.as_slice(), &grid, UnitOptions::default()).unwrap();
        assert_eq!(data, back);
        for (a, b) in data.irradiance.iter().zip(&back.irradiance) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn rep_day_aggregation_preserves_quarter_totals() {
        let full = TimeGrid::full_daily(1).unwrap();
        let data = synth_scenario(3, &full, &SynthProfile::default());
        let rep = data.aggregate_representative().unwrap();
        for q in 1..=4 {
            let full_total: f64 = full
                .slots()
                .filter(|s| s.quarter == q)
                .map(|s| data.residential_load[s.index] * full.day_weight(q))
                .sum();
            let rep_total: f64 = rep
                .grid()
                .slots()
                .filter(|s| s.quarter == q)
                .map(|s| rep.residential_load[s.index] * rep.grid().day_weight(q))
                .sum();
            assert!(
                (full_total - rep_total).abs() < 1e-6 * full_total.abs().max(1.0),
                "quarter {q}: {full_total} vs {rep_total}"
            );
        }
    }
}
