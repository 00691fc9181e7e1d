use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::rc::Rc;
use std::sync::Arc;

use crate::geo::{GeoArea, GeoGrid, Position};

use super::{Projection, RoadGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    /// Weighted meters; `f64::INFINITY` when unreachable.
    pub cost: f64,
    /// First intersection on the optimal route.
    pub next_hop_node: Option<usize>,
    pub reachable: bool,
    /// Intersections from `next_hop_node` to the first target node reached.
    pub route: Vec<usize>,
}

impl PathResult {
    fn unreachable() -> Self {
        PathResult {
            cost: f64::INFINITY,
            next_hop_node: None,
            reachable: false,
            route: Vec::new(),
        }
    }
}

/// Cost from every intersection to the nearest target node of one area.
#[derive(Debug, Clone)]
pub struct AreaDistances {
    pub targets: Vec<usize>,
    pub dist: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl RoadGraph {
    /// Nodes inside the area's bounds, or else the single node nearest to its
    /// center (lowest id on ties).
    pub fn area_targets(&self, grid: &GeoGrid, area: &GeoArea) -> Vec<usize> {
        let inside: Vec<usize> = (0..self.nodes.len())
            .filter(|&n| grid.area_contains(area, &self.nodes[n]))
            .collect();
        if !inside.is_empty() {
            return inside;
        }
        let c = grid.center_of(area);
        let mut best = 0;
        for n in 1..self.nodes.len() {
            if self.nodes[n].distance(&c) < self.nodes[best].distance(&c) {
                best = n;
            }
        }
        vec![best]
    }

    /// Multi-source Dijkstra from the area's target nodes. Distances are built
    /// outward from the targets, so each one is the left fold of block costs
    /// taken from the target end of the route.
    pub fn distances_to_area(&self, grid: &GeoGrid, area: &GeoArea) -> AreaDistances {
        let targets = self.area_targets(grid, area);
        let mut dist = vec![f64::INFINITY; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        for &t in &targets {
            dist[t] = 0.0;
            heap.push(HeapItem(0.0, t));
        }
        while let Some(HeapItem(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &(u, e) in &self.adjacency[v] {
                let nd = d + self.edges[e].cost;
                if nd < dist[u] {
                    dist[u] = nd;
                    heap.push(HeapItem(nd, u));
                }
            }
        }
        AreaDistances { targets, dist }
    }

    /// Route from `from` into `dest`. The start is projected onto its nearest
    /// block and charged the weighted distance to either end of it.
    pub fn shortest_path_to_area(
        &self,
        grid: &GeoGrid,
        from: &Position,
        dest: &GeoArea,
    ) -> PathResult {
        let d = self.distances_to_area(grid, dest);
        self.path_with(&d, &self.project(from))
    }

    pub(crate) fn path_with(&self, d: &AreaDistances, proj: &Projection) -> PathResult {
        let e = &self.edges[proj.edge];
        let starts = [(e.a, proj.t * e.cost), (e.b, (1.0 - proj.t) * e.cost)];
        let best = starts
            .iter()
            .map(|&(n, c)| c + d.dist[n])
            .fold(f64::INFINITY, f64::min);
        if !best.is_finite() {
            return PathResult::unreachable();
        }
        let eps = 1e-9 * best.max(1.0);
        // lexicographically smallest node sequence among the optimal routes
        let first = starts
            .iter()
            .filter(|&&(n, c)| c + d.dist[n] <= best + eps)
            .map(|&(n, _)| n)
            .min()
            .expect("an optimal start exists");
        let mut route = vec![first];
        let mut v = first;
        while d.dist[v] > 0.0 {
            let dv = d.dist[v];
            let tol = 1e-9 * dv.max(1.0);
            let next = self.adjacency[v]
                .iter()
                .filter(|&&(u, e)| self.edges[e].cost + d.dist[u] <= dv + tol && d.dist[u] < dv)
                .map(|&(u, _)| u)
                .min();
            match next {
                Some(u) => {
                    route.push(u);
                    v = u;
                }
                None => break,
            }
        }
        PathResult {
            cost: best,
            next_hop_node: Some(first),
            reachable: true,
            route,
        }
    }
}

/// Memoizing front end for one simulation run. Road graph and grid are
/// immutable; per-area distance tables are computed on first use.
#[derive(Debug)]
pub struct Router {
    graph: Arc<RoadGraph>,
    grid: GeoGrid,
    cache: RefCell<HashMap<GeoArea, Rc<AreaDistances>>>,
}

impl Router {
    pub fn new(graph: Arc<RoadGraph>, grid: GeoGrid) -> Self {
        Router {
            graph,
            grid,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn graph(&self) -> &RoadGraph {
        &self.graph
    }

    pub fn grid(&self) -> &GeoGrid {
        &self.grid
    }

    pub fn distances(&self, area: &GeoArea) -> Rc<AreaDistances> {
        if let Some(d) = self.cache.borrow().get(area) {
            return d.clone();
        }
        let d = Rc::new(self.graph.distances_to_area(&self.grid, area));
        self.cache.borrow_mut().insert(*area, d.clone());
        d
    }

    pub fn path(&self, from: &Position, dest: &GeoArea) -> PathResult {
        let d = self.distances(dest);
        self.graph.path_with(&d, &self.graph.project(from))
    }

    pub fn cost(&self, from: &Position, dest: &GeoArea) -> f64 {
        self.path(from, dest).cost
    }
}
