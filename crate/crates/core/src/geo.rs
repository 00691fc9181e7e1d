//! Planar stand-in for the Military Grid Reference System.
//!
//! The world is a local Cartesian plane. A cell at precision `k` is a square
//! of side `base_extent / 10^k`, addressed by its integer column/row indices.
//! Labels follow the MGRS layout `"<TAG> <easting> <northing>"` with both
//! digit groups zero-padded to `k` characters, so `coarsen` is just dropping
//! the last digit of each group.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GeoError;

pub const MIN_PRECISION: u8 = 1;
pub const MAX_PRECISION: u8 = 5;

/// A point on the local plane, in meters east/north of the world origin.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.2}, {:.2})", self.x, self.y)
    }
}

/// One grid cell. Identity is `(easting index, northing index, precision)`;
/// the textual label is rendered by the owning [`GeoGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GeoArea {
    pub easting: u32,
    pub northing: u32,
    pub precision: u8,
}

/// Grid configuration shared by every node of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeoGrid {
    /// Zone and 100 km square tag, e.g. `4QFJ`. Must not contain whitespace.
    pub tag: String,
    /// Side of the precision-0 square. 200 km gives 200 m cells at precision 3.
    pub base_extent_m: f64,
    pub precision: u8,
    pub world_width_m: f64,
    pub world_height_m: f64,
}

impl Default for GeoGrid {
    fn default() -> Self {
        GeoGrid {
            tag: "4QFJ".to_string(),
            base_extent_m: 200_000.0,
            precision: 3,
            world_width_m: 2_100.0,
            world_height_m: 2_100.0,
        }
    }
}

impl GeoGrid {
    pub fn new(
        tag: &str,
        base_extent_m: f64,
        precision: u8,
        world_width_m: f64,
        world_height_m: f64,
    ) -> Result<Self, GeoError> {
        let grid = GeoGrid {
            tag: tag.to_string(),
            base_extent_m,
            precision,
            world_width_m,
            world_height_m,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        check_precision(self.precision)?;
        if self.tag.is_empty() || self.tag.chars().any(char::is_whitespace) {
            return Err(GeoError::BadTag(self.tag.clone()));
        }
        if !(self.base_extent_m.is_finite() && self.base_extent_m > 0.0) {
            return Err(GeoError::BadExtent(self.base_extent_m));
        }
        for side in [self.world_width_m, self.world_height_m] {
            if !(side.is_finite() && side > 0.0 && side <= self.base_extent_m) {
                return Err(GeoError::BadExtent(side));
            }
        }
        Ok(())
    }

    pub fn cell_size(&self, precision: u8) -> f64 {
        self.base_extent_m / 10f64.powi(precision as i32)
    }

    pub fn contains(&self, pos: &Position) -> bool {
        pos.is_finite()
            && pos.x >= 0.0
            && pos.y >= 0.0
            && pos.x <= self.world_width_m
            && pos.y <= self.world_height_m
    }

    /// Cell containing `pos` at the grid's default precision.
    pub fn area(&self, pos: &Position) -> Result<GeoArea, GeoError> {
        self.area_of(pos, self.precision)
    }

    pub fn area_of(&self, pos: &Position, precision: u8) -> Result<GeoArea, GeoError> {
        check_precision(precision)?;
        if !self.contains(pos) {
            return Err(GeoError::OutOfBounds(*pos));
        }
        let size = self.cell_size(precision);
        let limit = 10u64.pow(precision as u32) - 1;
        let index = |v: f64| ((v / size).floor() as u64).min(limit) as u32;
        Ok(GeoArea {
            easting: index(pos.x),
            northing: index(pos.y),
            precision,
        })
    }

    /// Half-open bounds `[min, max)`. Not clipped to the world.
    pub fn bounds_of(&self, area: &GeoArea) -> (Position, Position) {
        let size = self.cell_size(area.precision);
        let min = Position::new(area.easting as f64 * size, area.northing as f64 * size);
        (min, Position::new(min.x + size, min.y + size))
    }

    pub fn center_of(&self, area: &GeoArea) -> Position {
        let (min, max) = self.bounds_of(area);
        Position::new((min.x + max.x) / 2.0, (min.y + max.y) / 2.0)
    }

    pub fn area_contains(&self, area: &GeoArea, pos: &Position) -> bool {
        let (min, max) = self.bounds_of(area);
        pos.x >= min.x && pos.x < max.x && pos.y >= min.y && pos.y < max.y
    }

    pub fn coarsen(&self, area: &GeoArea, new_precision: u8) -> Result<GeoArea, GeoError> {
        check_precision(new_precision)?;
        if new_precision > area.precision {
            return Err(GeoError::Refinement {
                from: area.precision,
                to: new_precision,
            });
        }
        let div = 10u32.pow((area.precision - new_precision) as u32);
        Ok(GeoArea {
            easting: area.easting / div,
            northing: area.northing / div,
            precision: new_precision,
        })
    }

    pub fn label(&self, area: &GeoArea) -> String {
        let w = area.precision as usize;
        format!(
            "{} {:0w$} {:0w$}",
            self.tag,
            area.easting,
            area.northing,
            w = w
        )
    }

    pub fn parse_label(&self, label: &str) -> Result<GeoArea, GeoError> {
        let bad = || GeoError::BadLabel(label.to_string());
        let mut parts = label.split(' ');
        let (tag, east, north) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(t), Some(e), Some(n), None) => (t, e, n),
            _ => return Err(bad()),
        };
        if tag != self.tag || east.len() != north.len() {
            return Err(bad());
        }
        let precision = u8::try_from(east.len()).map_err(|_| bad())?;
        if check_precision(precision).is_err()
            || !east
                .bytes()
                .chain(north.bytes())
                .all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        Ok(GeoArea {
            easting: east.parse().map_err(|_| bad())?,
            northing: north.parse().map_err(|_| bad())?,
            precision,
        })
    }
}

fn check_precision(precision: u8) -> Result<(), GeoError> {
    if (MIN_PRECISION..=MAX_PRECISION).contains(&precision) {
        Ok(())
    } else {
        Err(GeoError::Precision(precision))
    }
}
