use crate::geo::Position;

use super::{LogicalEdge, Street};

/// Bearing change, in radians, when driving `from -> via -> to`.
pub fn turn_angle(from: &Position, via: &Position, to: &Position) -> f64 {
    let (ax, ay) = (via.x - from.x, via.y - from.y);
    let (bx, by) = (to.x - via.x, to.y - via.y);
    let denom = ax.hypot(ay) * bx.hypot(by);
    if denom == 0.0 {
        return 0.0;
    }
    ((ax * bx + ay * by) / denom).clamp(-1.0, 1.0).acos()
}

fn passes_through(
    nodes: &[Position],
    adjacency: &[Vec<(usize, usize)>],
    node: usize,
    tolerance: f64,
) -> bool {
    match adjacency[node].as_slice() {
        [(u, _), (w, _)] => turn_angle(&nodes[*u], &nodes[node], &nodes[*w]) <= tolerance + 1e-12,
        _ => false,
    }
}

/// Fuses chains of blocks through degree-2 nodes whose bearing change is at
/// most `tolerance` radians. Any sharper turn, or a node of degree >= 3,
/// splits the chain. Costs of merged edges are summed in chain order.
pub fn merge_los(
    nodes: &[Position],
    edges: &[Street],
    adjacency: &[Vec<(usize, usize)>],
    tolerance: f64,
) -> Vec<LogicalEdge> {
    let through: Vec<bool> = (0..nodes.len())
        .map(|n| passes_through(nodes, adjacency, n, tolerance))
        .collect();
    let mut assigned = vec![false; edges.len()];
    let mut out = Vec::new();

    // walk from node `start` along `edge` until a split point
    let walk = |start: usize, edge: usize, assigned: &mut Vec<bool>| -> (Vec<usize>, Vec<usize>) {
        let mut chain_nodes = vec![start];
        let mut chain_edges = Vec::new();
        let (mut cur, mut e) = (start, edge);
        loop {
            assigned[e] = true;
            chain_edges.push(e);
            let next = edges[e].other(cur);
            chain_nodes.push(next);
            if next == start || !through[next] {
                break;
            }
            let Some(&(_, ne)) = adjacency[next].iter().find(|&&(_, ne)| ne != e) else {
                break;
            };
            if assigned[ne] {
                break;
            }
            cur = next;
            e = ne;
        }
        (chain_nodes, chain_edges)
    };

    // Chains anchored at split nodes first, in node order.
    for start in 0..nodes.len() {
        if through[start] {
            continue;
        }
        for &(_, e) in &adjacency[start] {
            if !assigned[e] {
                let (n, es) = walk(start, e, &mut assigned);
                out.push(logical(n, es, edges));
            }
        }
    }
    // Whatever is left forms smooth closed loops; cut each at its lowest node.
    for e in 0..edges.len() {
        if !assigned[e] {
            let start = edges[e].a.min(edges[e].b);
            let (n, es) = walk(start, e, &mut assigned);
            out.push(logical(n, es, edges));
        }
    }
    out
}

fn logical(nodes: Vec<usize>, chain: Vec<usize>, edges: &[Street]) -> LogicalEdge {
    let length_m = chain.iter().map(|&e| edges[e].length_m).sum();
    let cost = chain.iter().fold(0.0, |acc, &e| acc + edges[e].cost);
    LogicalEdge {
        nodes,
        edges: chain,
        length_m,
        cost,
    }
}

/// Groups blocks into sight lines: at every node, incident blocks that
/// continue within `tolerance` of straight are paired, smallest bend first.
/// Returns the sight line id of each edge and the number of lines.
pub(crate) fn sight_lines(
    nodes: &[Position],
    edges: &[Street],
    adjacency: &[Vec<(usize, usize)>],
    tolerance: f64,
) -> (Vec<usize>, usize) {
    let mut parent: Vec<usize> = (0..edges.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (node, adj) in adjacency.iter().enumerate() {
        let mut pairs = Vec::new();
        for (i, &(u, eu)) in adj.iter().enumerate() {
            for &(w, ew) in &adj[i + 1..] {
                let bend = turn_angle(&nodes[u], &nodes[node], &nodes[w]);
                if bend <= tolerance + 1e-12 {
                    pairs.push((bend, eu, ew));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut used = Vec::new();
        for (_, eu, ew) in pairs {
            if used.contains(&eu) || used.contains(&ew) {
                continue;
            }
            used.push(eu);
            used.push(ew);
            let (ru, rw) = (find(&mut parent, eu), find(&mut parent, ew));
            parent[ru.max(rw)] = ru.min(rw);
        }
    }
    let mut ids = vec![usize::MAX; edges.len()];
    let mut next = 0;
    let mut label = vec![usize::MAX; edges.len()];
    for (e, id) in ids.iter_mut().enumerate() {
        let root = find(&mut parent, e);
        if label[root] == usize::MAX {
            label[root] = next;
            next += 1;
        }
        *id = label[root];
    }
    (ids, next)
}
