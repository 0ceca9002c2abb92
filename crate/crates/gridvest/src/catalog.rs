//! Battery investment-cost catalog and discounting parameters.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Battery duration class: maximum charge/discharge power equals capacity
/// divided by this many hours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BatteryType {
    H1,
    H2,
    H4,
    H8,
}

impl BatteryType {
    pub const ALL: [BatteryType; 4] = [BatteryType::H1, BatteryType::H2, BatteryType::H4, BatteryType::H8];

    pub fn hours(self) -> f64 {
        match self {
            BatteryType::H1 => 1.0,
            BatteryType::H2 => 2.0,
            BatteryType::H4 => 4.0,
            BatteryType::H8 => 8.0,
        }
    }

    fn column(self) -> usize {
        match self {
            BatteryType::H1 => 0,
            BatteryType::H2 => 1,
            BatteryType::H4 => 2,
            BatteryType::H8 => 3,
        }
    }

    pub fn from_hours(h: u32) -> Option<BatteryType> {
        match h {
            1 => Some(BatteryType::H1),
            2 => Some(BatteryType::H2),
            4 => Some(BatteryType::H4),
            8 => Some(BatteryType::H8),
            _ => None,
        }
    }
}

impl fmt::Display for BatteryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}h", self.hours() as u32)
    }
}

/// Per-year, per-type investment cost table ($/kWh) plus round-trip
/// efficiencies. Costs are indexed by 1-based horizon year.
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryCatalog {
    first_calendar_year: i32,
    /// One row per horizon year: [1h, 2h, 4h, 8h].
    costs: Vec<[f64; 4]>,
    pub charge_eff: f64,
    pub discharge_eff: f64,
}

pub const DEFAULT_CHARGE_EFF: f64 = 0.95;
pub const DEFAULT_DISCHARGE_EFF: f64 = 0.95;

impl BatteryCatalog {
    pub fn new(first_calendar_year: i32, costs: Vec<[f64; 4]>) -> Result<Self> {
        if costs.is_empty() {
            return Err(Error::data("catalog has no rows"));
        }
        for (y, row) in costs.iter().enumerate() {
            for (ty, &c) in BatteryType::ALL.iter().zip(row) {
                if !(c > 0.0) || !c.is_finite() {
                    return Err(Error::data(format!(
                        "catalog cost for year {} type {ty} must be positive, got {c}",
                        y + 1
                    )));
                }
            }
        }
        Ok(BatteryCatalog {
            first_calendar_year,
            costs,
            charge_eff: DEFAULT_CHARGE_EFF,
            discharge_eff: DEFAULT_DISCHARGE_EFF,
        })
    }

    pub fn with_efficiencies(mut self, charge_eff: f64, discharge_eff: f64) -> Result<Self> {
        for (name, e) in [("charge", charge_eff), ("discharge", discharge_eff)] {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::data(format!(
                    "{name} efficiency must be in (0, 1], got {e}"
                )));
            }
        }
        self.charge_eff = charge_eff;
        self.discharge_eff = discharge_eff;
        Ok(self)
    }

    /// Number of horizon years covered.
    pub fn years(&self) -> usize {
        self.costs.len()
    }

    pub fn first_calendar_year(&self) -> i32 {
        self.first_calendar_year
    }

    /// $/kWh for 1-based horizon year `year` and `ty`. Total over the
    /// declared horizon.
    pub fn cost(&self, year: usize, ty: BatteryType) -> f64 {
        assert!(
            year >= 1 && year <= self.costs.len(),
            "catalog year {year} outside declared horizon 1..={}",
            self.costs.len()
        );
        self.costs[year - 1][ty.column()]
    }
}

#[derive(Debug, Deserialize)]
struct CatalogRow {
    year: i32,
    type_1h: f64,
    type_2h: f64,
    type_4h: f64,
    type_8h: f64,
}

/// Loads a catalog CSV (`year,type_1h,type_2h,type_4h,type_8h`) and checks
/// it covers every year of `horizon`. Calendar years map to horizon indices
/// by order: the first row is year 1.
pub fn load_catalog(path: impl AsRef<Path>, horizon: usize) -> Result<BatteryCatalog> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::data(format!("cannot open catalog file {}: {e}", path.display())))?;
    read_catalog(file, horizon)
}

pub fn read_catalog<R: std::io::Read>(reader: R, horizon: usize) -> Result<BatteryCatalog> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows: Vec<CatalogRow> = Vec::new();
    for (line, row) in rdr.deserialize::<CatalogRow>().enumerate() {
        rows.push(row.map_err(|e| Error::data(format!("malformed catalog row {}: {e}", line + 2)))?);
    }
    if rows.is_empty() {
        return Err(Error::data("catalog file has no rows"));
    }
    rows.sort_by_key(|r| r.year);
    let first = rows[0].year;
    for (i, row) in rows.iter().enumerate() {
        let expected = first + i as i32;
        if row.year != expected {
            // Horizon index of the first missing calendar year.
            return Err(Error::data(format!(
                "catalog gap at year {}",
                expected - first + 1
            )));
        }
    }
    if rows.len() < horizon {
        return Err(Error::data(format!(
            "catalog gap at year {}: file covers {} years, horizon needs {horizon}",
            rows.len() + 1,
            rows.len()
        )));
    }
    let costs: Vec<[f64; 4]> = rows
        .iter()
        .take(horizon)
        .map(|r| [r.type_1h, r.type_2h, r.type_4h, r.type_8h])
        .collect();
    BatteryCatalog::new(first, costs)
}

/// Net-present-value discounting: `gamma_y = 1 / (1 + r)^y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EconomicParams {
    inflation_rate: f64,
}

impl EconomicParams {
    pub fn new(inflation_rate: f64) -> Result<Self> {
        if !(inflation_rate > -1.0) || !inflation_rate.is_finite() {
            return Err(Error::data(format!(
                "inflation rate must be greater than -1, got {inflation_rate}"
            )));
        }
        Ok(EconomicParams { inflation_rate })
    }

    pub fn inflation_rate(&self) -> f64 {
        self.inflation_rate
    }

    /// Discount factor for 1-based year `y`.
    pub fn discount_factor(&self, year: usize) -> f64 {
        (1.0 + self.inflation_rate).powi(-(year as i32))
    }

    pub fn factors(&self, years: usize) -> Vec<f64> {
        (1..=years).map(|y| self.discount_factor(y)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_csv(skip_year: Option<i32>, rows: usize) -> String {
        let table = [
            (2023, 935, 676, 549, 487),
            (2024, 879, 635, 516, 458),
            (2025, 830, 600, 487, 433),
            (2026, 786, 568, 461, 410),
            (2027, 791, 554, 448, 397),
            (2028, 773, 539, 441, 396),
            (2029, 755, 525, 427, 383),
            (2030, 737, 510, 414, 371),
            (2031, 719, 496, 401, 358),
            (2032, 701, 481, 388, 345),
            (2033, 683, 467, 374, 332),
            (2034, 665, 453, 361, 320),
            (2035, 647, 438, 348, 307),
            (2036, 629, 424, 335, 294),
            (2037, 612, 410, 322, 282),
        ];
        let mut s = String::from("year,type_1h,type_2h,type_4h,type_8h\n");
        for &(y, a, b, c, d) in table.iter().take(rows) {
            if Some(y) == skip_year {
                continue;
            }
            s.push_str(&format!("{y},{a},{b},{c},{d}\n"));
        }
        s
    }

    #[test]
    fn reads_cost_table_exactly() {
        let cat = read_catalog(table_csv(None, 15).as_bytes(), 15).unwrap();
        assert_eq!(cat.years(), 15);
        assert_eq!(cat.cost(1, BatteryType::H1), 935.0);
        assert_eq!(cat.cost(15, BatteryType::H8), 282.0);
        assert_eq!(cat.cost(5, BatteryType::H2), 554.0);
    }

    #[test]
    fn missing_2030_is_gap_at_year_8() {
        let err = read_catalog(table_csv(Some(2030), 15).as_bytes(), 15).unwrap_err();
        assert!(
            err.to_string().contains("catalog gap at year 8"),
            "got: {err}"
        );
    }

    #[test]
    fn short_file_is_gap_after_last_year() {
        let err = read_catalog(table_csv(None, 10).as_bytes(), 15).unwrap_err();
        assert!(err.to_string().contains("catalog gap at year 11"), "got: {err}");
    }

    #[test]
    fn rejects_nonpositive_cost() {
        let csv = "year,type_1h,type_2h,type_4h,type_8h\n2023,0,676,549,487\n";
        assert!(read_catalog(csv.as_bytes(), 1).is_err());
    }

    #[test]
    fn efficiency_validation() {
        let cat = BatteryCatalog::new(2023, vec![[1.0, 1.0, 1.0, 1.0]]).unwrap();
        assert!(cat.clone().with_efficiencies(0.9, 1.0).is_ok());
        assert!(cat.clone().with_efficiencies(0.0, 0.9).is_err());
        assert!(cat.with_efficiencies(0.9, 1.1).is_err());
    }

    #[test]
    fn discount_factors_monotone() {
        let e = EconomicParams::new(0.05).unwrap();
        let f = e.factors(15);
        assert!((f[0] - 1.0 / 1.05).abs() < 1e-15);
        for w in f.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!(EconomicParams::new(-1.0).is_err());
    }
}
