//! Desk-scale scenario generator: a Manhattan road grid, vehicles doing a
//! random walk on it (uniform turn choice at each intersection), one RSU at
//! the central intersection, and a matching config.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ConfigError, RunError};
use crate::geo::Position;
use crate::road::{manhattan_segments, write_segments, RawSegment, RoadGraph};
use crate::scenario::{RsuConfig, Scenario, ScenarioConfig};
use crate::sim::{write_samples, MobilityTrace, TraceSample};

/// Grid corner offset from the world origin, so intersections sit at cell
/// centres rather than on cell borders.
pub const GRID_MARGIN_M: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LanePattern {
    Uniform(u32),
    /// The middle row and column get `avenue` lanes, all others `street`.
    Central {
        avenue: u32,
        street: u32,
    },
}

impl FromStr for LanePattern {
    type Err = String;

    /// `2` or `uniform:2` for a uniform grid, `central:6` for 6-lane central
    /// avenues over 2-lane streets.
    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("bad lane pattern {s:?} (expected N, uniform:N or central:N)");
        let (kind, n) = s.split_once(':').unwrap_or(("uniform", s));
        let n: u32 = n.parse().map_err(|_| bad())?;
        match kind {
            "uniform" => Ok(LanePattern::Uniform(n)),
            "central" => Ok(LanePattern::Central {
                avenue: n,
                street: 2,
            }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub block_m: f64,
    pub lanes: LanePattern,
    pub n_cars: usize,
    pub duration_s: f64,
    pub seed: u64,
    pub min_speed_mps: f64,
    pub max_speed_mps: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            rows: 5,
            cols: 5,
            block_m: 200.0,
            lanes: LanePattern::Uniform(2),
            n_cars: 50,
            duration_s: 300.0,
            seed: 1,
            min_speed_mps: 8.0,
            max_speed_mps: 14.0,
        }
    }
}

impl GridSpec {
    fn validate(&self) -> Result<(), ConfigError> {
        if self.rows < 2 || self.cols < 2 {
            return Err(ConfigError::Invalid(
                "grid needs at least 2 rows and 2 columns".into(),
            ));
        }
        if !(self.block_m.is_finite() && self.block_m > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "block_m must be positive, got {}",
                self.block_m
            )));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "duration must be positive, got {}",
                self.duration_s
            )));
        }
        if !(self.min_speed_mps > 0.0 && self.min_speed_mps <= self.max_speed_mps) {
            return Err(ConfigError::Invalid(
                "speed range must be positive and ordered".into(),
            ));
        }
        Ok(())
    }

    pub fn segments(&self) -> Vec<RawSegment> {
        let (mid_row, mid_col) = (self.rows / 2, self.cols / 2);
        let lanes = self.lanes;
        manhattan_segments(
            self.rows,
            self.cols,
            self.block_m,
            |horizontal, line, _| match lanes {
                LanePattern::Uniform(n) => n,
                LanePattern::Central { avenue, street } => {
                    let central = if horizontal {
                        line == mid_row
                    } else {
                        line == mid_col
                    };
                    if central {
                        avenue
                    } else {
                        street
                    }
                }
            },
        )
        .into_iter()
        .map(|s| {
            RawSegment::new(
                Position::new(s.node_a_x + GRID_MARGIN_M, s.node_a_y + GRID_MARGIN_M),
                Position::new(s.node_b_x + GRID_MARGIN_M, s.node_b_y + GRID_MARGIN_M),
                s.lanes,
            )
        })
        .collect()
    }

    pub fn center(&self) -> Position {
        Position::new(
            GRID_MARGIN_M + (self.cols / 2) as f64 * self.block_m,
            GRID_MARGIN_M + (self.rows / 2) as f64 * self.block_m,
        )
    }

    /// World side: the grid plus a margin on both sides, at least 2.1 km.
    pub fn world_side_m(&self) -> f64 {
        let span = (self.rows.max(self.cols) - 1) as f64 * self.block_m;
        (span + 2.0 * GRID_MARGIN_M).max(2_100.0)
    }

    /// Default config for the grid: one RSU at the central intersection.
    pub fn config(&self) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.scenario.name = format!("grid{}x{}", self.rows, self.cols);
        cfg.scenario.duration_s = self.duration_s;
        cfg.scenario.seed = self.seed;
        cfg.grid.world_width_m = self.world_side_m();
        cfg.grid.world_height_m = self.world_side_m();
        let c = self.center();
        cfg.rsu.push(RsuConfig {
            x: c.x,
            y: c.y,
            ..Default::default()
        });
        cfg
    }

    /// Builds the scenario in memory with `config` (e.g. from [`Self::config`]).
    pub fn build(&self, config: ScenarioConfig) -> Result<Scenario, ConfigError> {
        self.validate()?;
        let graph = Arc::new(RoadGraph::build(&self.segments(), config.road)?);
        let samples = random_walk(&graph, self, &mut ChaCha8Rng::seed_from_u64(self.seed));
        let trace = MobilityTrace::from_samples(&samples)?;
        Scenario::from_parts(config, graph, trace, PathBuf::new())
    }

    /// Writes `roads.csv`, `trace.csv` and `scenario.toml` into `dir`.
    /// Returns the config path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf, RunError> {
        self.validate().map_err(|e| RunError::Sim(e.to_string()))?;
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| RunError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let cfg = self.config();
        let graph = RoadGraph::build(&self.segments(), cfg.road)
            .map_err(|e| RunError::Sim(e.to_string()))?;

        let roads = dir.join("roads.csv");
        let f = std::fs::File::create(&roads).map_err(io(&roads))?;
        write_segments(f, &self.segments()).map_err(|e| RunError::Serialize(e.to_string()))?;

        let trace = dir.join("trace.csv");
        let samples = random_walk(&graph, self, &mut ChaCha8Rng::seed_from_u64(self.seed));
        let f = std::fs::File::create(&trace).map_err(io(&trace))?;
        if samples.is_empty() {
            use std::io::Write;
            let mut f = f;
            writeln!(f, "time_s,vehicle_id,x_m,y_m,speed_mps").map_err(io(&trace))?;
        } else {
            write_samples(f, &samples).map_err(|e| RunError::Serialize(e.to_string()))?;
        }

        let path = dir.join("scenario.toml");
        std::fs::write(&path, cfg.to_toml()).map_err(io(&path))?;
        Ok(path)
    }
}

/// One-second samples of `spec.n_cars` vehicles, each starting at a random
/// point of a random block, driving at a constant random speed and turning
/// uniformly at random at every intersection (no U-turns except at dead ends).
pub fn random_walk<R: Rng>(graph: &RoadGraph, spec: &GridSpec, rng: &mut R) -> Vec<TraceSample> {
    let mut out = Vec::new();
    let steps = spec.duration_s.floor() as usize;
    let width = (spec.n_cars.max(1) - 1).to_string().len();
    for car in 0..spec.n_cars {
        let id = format!("car{car:0width$}");
        let speed = rng.random_range(spec.min_speed_mps..=spec.max_speed_mps);
        let edge = rng.random_range(0..graph.edges().len());
        let e = &graph.edges()[edge];
        let (mut from, mut to) = if rng.random_bool(0.5) {
            (e.a, e.b)
        } else {
            (e.b, e.a)
        };
        let mut along = rng.random_range(0.0..e.length_m);
        let mut len = e.length_m;
        for step in 0..=steps {
            let (a, b) = (graph.nodes()[from], graph.nodes()[to]);
            let f = along / len;
            out.push(TraceSample {
                time_s: step as f64,
                vehicle_id: id.clone(),
                x_m: a.x + f * (b.x - a.x),
                y_m: a.y + f * (b.y - a.y),
                speed_mps: speed,
            });
            along += speed;
            while along >= len {
                along -= len;
                let options: Vec<usize> = graph
                    .neighbors(to)
                    .iter()
                    .map(|(n, _)| *n)
                    .filter(|n| *n != from)
                    .collect();
                let next = if options.is_empty() {
                    from
                } else {
                    options[rng.random_range(0..options.len())]
                };
                from = to;
                to = next;
                len = graph.nodes()[from].distance(&graph.nodes()[to]);
            }
        }
    }
    out.sort_by(|a, b| {
        a.time_s
            .total_cmp(&b.time_s)
            .then_with(|| a.vehicle_id.cmp(&b.vehicle_id))
    });
    out
}
