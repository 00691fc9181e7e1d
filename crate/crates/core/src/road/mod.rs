//! Street topology used to steer Interests.
//!
//! Intersections are graph nodes and street blocks are undirected edges with
//! a lane-weighted cost. Two derived views sit on top of the physical graph:
//!
//! * logical streets ([`LogicalEdge`]): chains of blocks fused through
//!   degree-2 nodes whose bearing change stays under the line-of-sight
//!   tolerance. These are the "directions" used for implicit ACKs.
//! * sight lines: blocks that continue straight through any node, including
//!   junctions. The corner-blocking radio model uses them.

mod los;
mod path;

use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use los::{merge_los, turn_angle};
pub use path::{AreaDistances, PathResult, Router};

use crate::error::RoadError;
use crate::geo::Position;

/// Per-lane-count cost multipliers. Wider roads are cheaper so routes favour
/// streets that are more likely to carry relaying cars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LaneWeights {
    pub two: f64,
    pub four: f64,
    pub six: f64,
}

impl Default for LaneWeights {
    fn default() -> Self {
        LaneWeights {
            two: 1.0,
            four: 0.7,
            six: 0.25,
        }
    }
}

impl LaneWeights {
    pub fn weight(&self, lanes: u32) -> Result<f64, RoadError> {
        match lanes {
            2 => Ok(self.two),
            4 => Ok(self.four),
            6 => Ok(self.six),
            other => Err(RoadError::UnknownLanes(other)),
        }
    }

    pub fn validate(&self) -> Result<(), RoadError> {
        let ok = [self.two, self.four, self.six]
            .iter()
            .all(|w| w.is_finite() && *w > 0.0)
            && self.two >= self.four
            && self.four >= self.six;
        if ok {
            Ok(())
        } else {
            Err(RoadError::Weights)
        }
    }

    pub fn edge_cost(&self, length_m: f64, lanes: u32) -> Result<f64, RoadError> {
        if !(length_m.is_finite() && length_m > 0.0) {
            return Err(RoadError::Length(length_m));
        }
        Ok(length_m * self.weight(lanes)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoadParams {
    pub lane_weights: LaneWeights,
    /// Largest bearing change, in degrees, that still counts as line of sight.
    pub los_tolerance_deg: f64,
    pub fp1_radius_m: f64,
    pub fp2_radius_m: f64,
    /// Endpoints closer than this are the same intersection.
    pub dedup_m: f64,
}

impl Default for RoadParams {
    fn default() -> Self {
        RoadParams {
            lane_weights: LaneWeights::default(),
            los_tolerance_deg: 15.0,
            fp1_radius_m: 10.0,
            fp2_radius_m: 30.0,
            dedup_m: 1.0,
        }
    }
}

impl RoadParams {
    pub fn validate(&self) -> Result<(), RoadError> {
        self.lane_weights.validate()?;
        if !(self.fp1_radius_m > 0.0 && self.fp1_radius_m < self.fp2_radius_m) {
            return Err(RoadError::Radii {
                fp1: self.fp1_radius_m,
                fp2: self.fp2_radius_m,
            });
        }
        Ok(())
    }
}

/// One row of the road file, before endpoint deduplication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawSegment {
    pub node_a_x: f64,
    pub node_a_y: f64,
    pub node_b_x: f64,
    pub node_b_y: f64,
    pub lanes: u32,
}

impl RawSegment {
    pub fn new(a: Position, b: Position, lanes: u32) -> Self {
        RawSegment {
            node_a_x: a.x,
            node_a_y: a.y,
            node_b_x: b.x,
            node_b_y: b.y,
            lanes,
        }
    }

    pub fn a(&self) -> Position {
        Position::new(self.node_a_x, self.node_a_y)
    }

    pub fn b(&self) -> Position {
        Position::new(self.node_b_x, self.node_b_y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Street {
    pub a: usize,
    pub b: usize,
    pub length_m: f64,
    pub lanes: u32,
    /// Direction from `a` to `b`, radians counter-clockwise from east.
    pub bearing: f64,
    pub cost: f64,
}

impl Street {
    pub fn other(&self, node: usize) -> usize {
        if node == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// A run of blocks in line of sight, between two split points.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalEdge {
    /// Node chain from one end to the other.
    pub nodes: Vec<usize>,
    /// Member blocks in chain order.
    pub edges: Vec<usize>,
    pub length_m: f64,
    pub cost: f64,
}

impl LogicalEdge {
    pub fn ends(&self) -> (usize, usize) {
        (
            self.nodes[0],
            *self.nodes.last().expect("logical edge has nodes"),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Junction {
    pub node: usize,
    pub center: Position,
    pub fp1_radius: f64,
    pub fp2_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FpClass {
    Fp1,
    Fp2,
    Edge,
}

/// Projection of a position onto its nearest block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub edge: usize,
    /// Fraction of the block from `a` (0) to `b` (1).
    pub t: f64,
    pub point: Position,
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub struct RoadGraph {
    params: RoadParams,
    nodes: Vec<Position>,
    edges: Vec<Street>,
    adjacency: Vec<Vec<(usize, usize)>>,
    logical: Vec<LogicalEdge>,
    edge_logical: Vec<usize>,
    node_logical: Vec<Vec<usize>>,
    junctions: Vec<Junction>,
    edge_sight_line: Vec<usize>,
    sight_line_count: usize,
}

impl RoadGraph {
    pub fn build(segments: &[RawSegment], params: RoadParams) -> Result<Self, RoadError> {
        params.validate()?;
        if segments.is_empty() {
            return Err(RoadError::Empty);
        }
        let mut nodes: Vec<Position> = Vec::new();
        let intern = |p: Position, nodes: &mut Vec<Position>| -> usize {
            match nodes.iter().position(|n| n.distance(&p) < params.dedup_m) {
                Some(i) => i,
                None => {
                    nodes.push(p);
                    nodes.len() - 1
                }
            }
        };

        let mut edges: Vec<Street> = Vec::new();
        let mut seen = BTreeSet::new();
        for (index, seg) in segments.iter().enumerate() {
            let (pa, pb) = (seg.a(), seg.b());
            if !(pa.is_finite() && pb.is_finite()) {
                return Err(RoadError::NonFinite { index });
            }
            let weight = params
                .lane_weights
                .weight(seg.lanes)
                .map_err(|_| RoadError::Lanes {
                    index,
                    lanes: seg.lanes,
                })?;
            let a = intern(pa, &mut nodes);
            let b = intern(pb, &mut nodes);
            if a == b {
                return Err(RoadError::ZeroLength {
                    index,
                    a: pa,
                    b: pb,
                });
            }
            if !seen.insert((a.min(b), a.max(b))) {
                continue;
            }
            let (na, nb) = (nodes[a], nodes[b]);
            let length_m = na.distance(&nb);
            edges.push(Street {
                a,
                b,
                length_m,
                lanes: seg.lanes,
                bearing: (nb.y - na.y).atan2(nb.x - na.x),
                cost: length_m * weight,
            });
        }

        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.a].push((e.b, i));
            adjacency[e.b].push((e.a, i));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        let junctions = adjacency
            .iter()
            .enumerate()
            .filter(|(_, adj)| adj.len() >= 3)
            .map(|(node, _)| Junction {
                node,
                center: nodes[node],
                fp1_radius: params.fp1_radius_m,
                fp2_radius: params.fp2_radius_m,
            })
            .collect();

        let tolerance = params.los_tolerance_deg.to_radians();
        let logical = merge_los(&nodes, &edges, &adjacency, tolerance);
        let mut edge_logical = vec![usize::MAX; edges.len()];
        let mut node_logical = vec![Vec::new(); nodes.len()];
        for (id, le) in logical.iter().enumerate() {
            for &e in &le.edges {
                edge_logical[e] = id;
            }
            let (s, t) = le.ends();
            node_logical[s].push(id);
            if t != s {
                node_logical[t].push(id);
            }
        }
        let (edge_sight_line, sight_line_count) =
            los::sight_lines(&nodes, &edges, &adjacency, tolerance);

        Ok(RoadGraph {
            params,
            nodes,
            edges,
            adjacency,
            logical,
            edge_logical,
            node_logical,
            junctions,
            edge_sight_line,
            sight_line_count,
        })
    }

    pub fn from_csv_reader<R: Read>(reader: R, params: RoadParams) -> Result<Self, RoadError> {
        let segments = read_segments(reader)?;
        Self::build(&segments, params).map_err(|e| match e {
            // report file lines rather than segment indices
            RoadError::Lanes { index, lanes } => RoadError::Row {
                row: index + 2,
                message: format!("lane count {lanes} is not one of 2, 4, 6"),
            },
            RoadError::ZeroLength { index, .. } => RoadError::Row {
                row: index + 2,
                message: "zero-length street".to_string(),
            },
            RoadError::NonFinite { index } => RoadError::Row {
                row: index + 2,
                message: "non-finite coordinate".to_string(),
            },
            other => other,
        })
    }

    pub fn from_csv_path(path: &Path, params: RoadParams) -> Result<Self, RoadError> {
        let file = std::fs::File::open(path)
            .map_err(|e| RoadError::Csv(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(file, params)
    }

    pub fn params(&self) -> &RoadParams {
        &self.params
    }

    pub fn nodes(&self) -> &[Position] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Street] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn logical_edges(&self) -> &[LogicalEdge] {
        &self.logical
    }

    pub fn logical_of_edge(&self, edge: usize) -> usize {
        self.edge_logical[edge]
    }

    /// Logical streets that start or end at `node`.
    pub fn logical_at_node(&self, node: usize) -> &[usize] {
        &self.node_logical[node]
    }

    pub fn junctions(&self) -> &[Junction] {
        &self.junctions
    }

    pub fn sight_line_of_edge(&self, edge: usize) -> usize {
        self.edge_sight_line[edge]
    }

    pub fn sight_line_count(&self) -> usize {
        self.sight_line_count
    }

    pub fn edge_cost(&self, length_m: f64, lanes: u32) -> Result<f64, RoadError> {
        self.params.lane_weights.edge_cost(length_m, lanes)
    }

    pub fn project(&self, pos: &Position) -> Projection {
        let mut best: Option<Projection> = None;
        for (i, e) in self.edges.iter().enumerate() {
            let p = project_on_segment(pos, &self.nodes[e.a], &self.nodes[e.b]);
            if best.is_none_or(|b| p.1 < b.distance) {
                best = Some(Projection {
                    edge: i,
                    t: p.0,
                    point: p.2,
                    distance: p.1,
                });
            }
        }
        best.expect("graph has at least one edge")
    }

    pub fn nearest_junction(&self, pos: &Position) -> Option<(usize, f64)> {
        self.junctions
            .iter()
            .enumerate()
            .map(|(i, j)| (i, j.center.distance(pos)))
            .fold(None, |best, cur| match best {
                Some(b) if b.1 <= cur.1 => Some(b),
                _ => Some(cur),
            })
    }

    pub fn classify_fp(&self, pos: &Position) -> FpClass {
        match self.nearest_junction(pos) {
            Some((i, d)) if d <= self.junctions[i].fp1_radius => FpClass::Fp1,
            Some((i, d)) if d <= self.junctions[i].fp2_radius => FpClass::Fp2,
            _ => FpClass::Edge,
        }
    }

    /// Junction whose FP2 disc contains `pos`, if any.
    pub fn junction_at(&self, pos: &Position) -> Option<usize> {
        self.nearest_junction(pos)
            .filter(|&(i, d)| d <= self.junctions[i].fp2_radius)
            .map(|(i, _)| i)
    }

    /// Logical streets stemming from where a car at `pos` stands: every street
    /// of the junction it is in, or the one street it drives on.
    pub fn streets_at(&self, pos: &Position) -> Vec<usize> {
        match self.junction_at(pos) {
            Some(j) => self.node_logical[self.junctions[j].node].clone(),
            None => vec![self.edge_logical[self.project(pos).edge]],
        }
    }

    /// Sight lines visible from `pos`, sorted.
    pub fn sight_lines_at(&self, pos: &Position) -> Vec<usize> {
        let mut lines: Vec<usize> = match self.junction_at(pos) {
            Some(j) => self.adjacency[self.junctions[j].node]
                .iter()
                .map(|&(_, e)| self.edge_sight_line[e])
                .collect(),
            None => vec![self.edge_sight_line[self.project(pos).edge]],
        };
        lines.sort_unstable();
        lines.dedup();
        lines
    }
}

/// Returns `(t, distance, foot)` for the closest point of segment `a`-`b`.
pub fn project_on_segment(p: &Position, a: &Position, b: &Position) -> (f64, f64, Position) {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let foot = Position::new(a.x + t * dx, a.y + t * dy);
    (t, p.distance(&foot), foot)
}

pub fn read_segments<R: Read>(reader: R) -> Result<Vec<RawSegment>, RoadError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| RoadError::Csv(e.to_string()))?
        .clone();
    let expected = ["node_a_x", "node_a_y", "node_b_x", "node_b_y", "lanes"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(RoadError::Row {
            row: 1,
            message: format!("expected header {}", expected.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize::<RawSegment>().enumerate() {
        let seg = rec.map_err(|e| RoadError::Row {
            row: i + 2,
            message: e.to_string(),
        })?;
        out.push(seg);
    }
    Ok(out)
}

pub fn write_segments<W: std::io::Write>(
    writer: W,
    segments: &[RawSegment],
) -> Result<(), RoadError> {
    let mut w = csv::Writer::from_writer(writer);
    for s in segments {
        w.serialize(s).map_err(|e| RoadError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| RoadError::Csv(e.to_string()))
}

/// Square Manhattan grid with `rows x cols` intersections.
pub fn manhattan_segments(
    rows: usize,
    cols: usize,
    block_m: f64,
    lanes: impl Fn(bool, usize, usize) -> u32,
) -> Vec<RawSegment> {
    let mut out = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let p = Position::new(c as f64 * block_m, r as f64 * block_m);
            if c + 1 < cols {
                // horizontal block along row r
                out.push(RawSegment::new(
                    p,
                    Position::new(p.x + block_m, p.y),
                    lanes(true, r, c),
                ));
            }
            if r + 1 < rows {
                out.push(RawSegment::new(
                    p,
                    Position::new(p.x, p.y + block_m),
                    lanes(false, c, r),
                ));
            }
        }
    }
    out
}
