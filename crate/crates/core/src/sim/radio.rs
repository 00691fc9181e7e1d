use serde::{Deserialize, Serialize};

use crate::geo::Position;
use crate::time::SimDuration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollisionMode {
    /// Overlapping receptions all succeed.
    Ideal,
    /// A receiver hearing two frames at once loses both.
    Destructive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadioConfig {
    pub range_m: f64,
    pub bitrate_bps: f64,
    /// Buildings block the signal: only cars sharing a straight line of
    /// streets hear each other.
    pub corner_mode: bool,
    pub collision: CollisionMode,
    /// Frames waiting for the MAC beyond this are dropped.
    pub queue_limit: usize,
}

impl Default for RadioConfig {
    fn default() -> Self {
        RadioConfig {
            range_m: 250.0,
            bitrate_bps: 24e6,
            corner_mode: true,
            collision: CollisionMode::Ideal,
            queue_limit: 1000,
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.range_m.is_finite() && self.range_m > 0.0) {
            return Err(format!(
                "radio range_m must be positive, got {}",
                self.range_m
            ));
        }
        if !(self.bitrate_bps.is_finite() && self.bitrate_bps > 0.0) {
            return Err(format!(
                "radio bitrate_bps must be positive, got {}",
                self.bitrate_bps
            ));
        }
        if self.queue_limit == 0 {
            return Err("radio queue_limit must be positive".into());
        }
        Ok(())
    }

    /// Air time of a frame, rounded up to the microsecond.
    pub fn tx_duration(&self, bytes: usize) -> SimDuration {
        SimDuration::from_micros(((bytes as f64 * 8.0 / self.bitrate_bps) * 1e6).ceil() as u64)
    }

    /// Symmetric link test. `a_lines` and `b_lines` are the sorted sight
    /// lines visible from each end; they only matter in corner mode.
    pub fn reachable(
        &self,
        a: &Position,
        a_lines: &[usize],
        b: &Position,
        b_lines: &[usize],
    ) -> bool {
        if a.distance(b) > self.range_m {
            return false;
        }
        !self.corner_mode || share_any(a_lines, b_lines)
    }
}

fn share_any(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}
