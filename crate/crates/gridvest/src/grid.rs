//! The planning time grid: (year, quarter, day, hour) indexing with
//! per-quarter day weights.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const QUARTERS_PER_YEAR: usize = 4;
pub const HOURS_PER_DAY: usize = 24;
/// Days per quarter; fixed, no calendar logic.
pub const QUARTER_DAYS: [usize; 4] = [90, 91, 92, 93];

/// Whether a quarter is modelled hour-by-hour for every day or as a single
/// representative day weighted by the quarter's day count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridMode {
    RepresentativeDay,
    FullDaily,
}

/// Index space for all time series: years x 4 quarters x days x 24 hours.
/// All coordinates are 1-based, matching the file formats.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    years: usize,
    mode: GridMode,
    days_per_quarter: [usize; 4],
    day_weights: [f64; 4],
}

/// One (year, quarter, day, hour) coordinate plus its flat index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub year: usize,
    pub quarter: usize,
    pub day: usize,
    pub hour: usize,
    pub index: usize,
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(y={},q={},d={},t={})",
            self.year, self.quarter, self.day, self.hour
        )
    }
}

impl TimeGrid {
    /// One averaged day per quarter, weighted by the quarter's day count.
    pub fn representative(years: usize) -> Result<Self> {
        if years == 0 {
            return Err(Error::data("horizon must be at least one year"));
        }
        let mut weights = [0.0; 4];
        for q in 0..4 {
            weights[q] = QUARTER_DAYS[q] as f64;
        }
        Ok(TimeGrid {
            years,
            mode: GridMode::RepresentativeDay,
            days_per_quarter: [1, 1, 1, 1],
            day_weights: weights,
        })
    }

    /// Every day of every quarter, unit weights.
    pub fn full_daily(years: usize) -> Result<Self> {
        if years == 0 {
            return Err(Error::data("horizon must be at least one year"));
        }
        Ok(TimeGrid {
            years,
            mode: GridMode::FullDaily,
            days_per_quarter: QUARTER_DAYS,
            day_weights: [1.0; 4],
        })
    }

    pub fn with_mode(years: usize, mode: GridMode) -> Result<Self> {
        match mode {
            GridMode::RepresentativeDay => Self::representative(years),
            GridMode::FullDaily => Self::full_daily(years),
        }
    }

    pub fn years(&self) -> usize {
        self.years
    }

    pub fn mode(&self) -> GridMode {
        self.mode
    }

    /// Days modelled in quarter `q` (1-based).
    pub fn days_in_quarter(&self, q: usize) -> usize {
        self.days_per_quarter[q - 1]
    }

    /// Weight of one modelled day of quarter `q` (1-based): the quarter's
    /// day count in representative mode, 1.0 in full mode.
    pub fn day_weight(&self, q: usize) -> f64 {
        self.day_weights[q - 1]
    }

    pub fn slots_per_year(&self) -> usize {
        self.days_per_quarter.iter().map(|d| d * HOURS_PER_DAY).sum()
    }

    pub fn slot_count(&self) -> usize {
        self.years * self.slots_per_year()
    }

    /// Flat index of a 1-based coordinate, or `None` when outside the grid.
    pub fn slot_index(&self, year: usize, quarter: usize, day: usize, hour: usize) -> Option<usize> {
        if year < 1
            || year > self.years
            || quarter < 1
            || quarter > QUARTERS_PER_YEAR
            || day < 1
            || day > self.days_per_quarter[quarter - 1]
            || hour < 1
            || hour > HOURS_PER_DAY
        {
            return None;
        }
        let mut idx = (year - 1) * self.slots_per_year();
        for q in 0..quarter - 1 {
            idx += self.days_per_quarter[q] * HOURS_PER_DAY;
        }
        idx += (day - 1) * HOURS_PER_DAY + (hour - 1);
        Some(idx)
    }

    /// Coordinate of a flat index. Inverse of [`TimeGrid::slot_index`].
    pub fn slot_at(&self, index: usize) -> Slot {
        debug_assert!(index < self.slot_count());
        let per_year = self.slots_per_year();
        let year = index / per_year + 1;
        let mut rest = index % per_year;
        let mut quarter = 1;
        for q in 0..4 {
            let span = self.days_per_quarter[q] * HOURS_PER_DAY;
            if rest < span {
                quarter = q + 1;
                break;
            }
            rest -= span;
        }
        let day = rest / HOURS_PER_DAY + 1;
        let hour = rest % HOURS_PER_DAY + 1;
        Slot {
            year,
            quarter,
            day,
            hour,
            index,
        }
    }

    /// Iterates all slots in canonical (year, quarter, day, hour) order.
    pub fn slots(&self) -> impl Iterator<Item = Slot> + '_ {
        (0..self.slot_count()).map(|i| self.slot_at(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn representative_grid_shape() {
        let g = TimeGrid::representative(15).unwrap();
        assert_eq!(g.slot_count(), 15 * 4 * 24);
        assert_eq!(g.day_weight(1), 90.0);
        assert_eq!(g.day_weight(4), 93.0);
        assert_eq!(g.days_in_quarter(2), 1);
    }

    #[test]
    fn full_grid_shape() {
        let g = TimeGrid::full_daily(2).unwrap();
        assert_eq!(g.slot_count(), 2 * (90 + 91 + 92 + 93) * 24);
        assert_eq!(g.day_weight(3), 1.0);
        assert_eq!(g.days_in_quarter(4), 93);
    }

    #[test]
    fn index_roundtrip() {
        for g in [TimeGrid::representative(3).unwrap(), TimeGrid::full_daily(2).unwrap()] {
            for slot in g.slots() {
                assert_eq!(
                    g.slot_index(slot.year, slot.quarter, slot.day, slot.hour),
                    Some(slot.index)
                );
            }
        }
    }

    #[test]
    fn out_of_grid_rejected() {
        let g = TimeGrid::representative(1).unwrap();
        assert_eq!(g.slot_index(1, 1, 2, 1), None); // day 2 in rep mode
        assert_eq!(g.slot_index(2, 1, 1, 1), None);
        assert_eq!(g.slot_index(1, 5, 1, 1), None);
        assert_eq!(g.slot_index(1, 1, 1, 0), None);
        assert_eq!(g.slot_index(1, 1, 1, 25), None);
    }

    #[test]
    fn slot_display_matches_convention() {
        let g = TimeGrid::representative(1).unwrap();
        let idx = g.slot_index(1, 2, 1, 13).unwrap();
        assert_eq!(g.slot_at(idx).to_string(), "(y=1,q=2,d=1,t=13)");
    }
}
