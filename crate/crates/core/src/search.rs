//! Lowest-cost path search over a [`VisibilityGraph`].
//!
//! [`shortest_path`] runs A* backwards from the destination with a
//! straight-line heuristic scaled by the cheapest weight per meter, then
//! walks forward from the origin picking the smallest-id neighbour on an
//! optimal path. Equal-cost alternatives therefore resolve to the
//! lexicographically smallest node sequence.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::RouteError;
use crate::visibility::VisibilityGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub nodes: Vec<usize>,
    /// Link indices, one per consecutive node pair.
    pub links: Vec<usize>,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    f: f64,
    g: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn tie_tolerance(cost: f64) -> f64 {
    1e-9 * cost.max(1.0)
}

/// Smallest weight per meter over all links (0 when there are none).
pub fn min_weight_per_meter(g: &VisibilityGraph) -> f64 {
    let r = g
        .links
        .iter()
        .map(|l| l.weight / l.length)
        .fold(f64::INFINITY, f64::min);
    if r.is_finite() {
        r.max(0.0)
    } else {
        0.0
    }
}

fn check_ids(g: &VisibilityGraph, s: usize, t: usize) -> Result<(), RouteError> {
    let n = g.nodes.len();
    if s >= n || t >= n {
        return Err(RouteError::InvalidRequest(format!("node id out of range (graph has {n} nodes)")));
    }
    Ok(())
}

/// Backward search from `t`. Returns exact distances-to-`t` for every node
/// that can lie on an optimal `s`-`t` path (others stay infinite or
/// non-final) and the optimal cost.
fn backward_astar(g: &VisibilityGraph, s: usize, t: usize) -> Option<(Vec<f64>, Vec<bool>, f64)> {
    let n = g.nodes.len();
    let rate = min_weight_per_meter(g);
    let target = g.nodes[s].point;
    let h = |v: usize| g.nodes[v].point.distance(&target) * rate;
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[t] = 0.0;
    heap.push(Entry { f: h(t), g: 0.0, node: t });
    let mut best: Option<f64> = None;
    while let Some(Entry { f, g: gu, node: u }) = heap.pop() {
        if done[u] || gu > dist[u] {
            continue;
        }
        if let Some(c) = best {
            if f > c + tie_tolerance(c) {
                break;
            }
        }
        done[u] = true;
        if u == s && best.is_none() {
            best = Some(gu);
        }
        for (v, l) in g.neighbors(u) {
            let nd = gu + g.links[l].weight;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Entry { f: nd + h(v), g: nd, node: v });
            }
        }
    }
    best.map(|c| (dist, done, c))
}

/// Forward walk along tight links, smallest neighbour id first.
fn extract(g: &VisibilityGraph, s: usize, t: usize, dist: &[f64], done: &[bool]) -> Path {
    let total = dist[s];
    let tol = tie_tolerance(total);
    let mut nodes = vec![s];
    let mut links = Vec::new();
    let mut visited = vec![false; g.nodes.len()];
    visited[s] = true;
    let mut u = s;
    while u != t {
        let mut choice: Option<(usize, usize)> = None;
        for (v, l) in g.neighbors(u) {
            if visited[v] || !done[v] {
                continue;
            }
            if g.links[l].weight + dist[v] <= dist[u] + tol && choice.is_none_or(|(cv, _)| v < cv) {
                choice = Some((v, l));
            }
        }
        // With positive weights a tight neighbour always exists; fall back
        // to the strictly best one if rounding hides it.
        let (v, l) = choice.unwrap_or_else(|| {
            g.neighbors(u)
                .filter(|(v, _)| !visited[*v] && done[*v])
                .min_by(|a, b| {
                    (g.links[a.1].weight + dist[a.0]).total_cmp(&(g.links[b.1].weight + dist[b.0]))
                })
                .expect("settled node has a settled successor")
        });
        visited[v] = true;
        nodes.push(v);
        links.push(l);
        u = v;
    }
    let cost = links.iter().map(|&l| g.links[l].weight).sum();
    Path { nodes, links, cost }
}

/// Minimal-weight path from node `s` to node `t`.
pub fn shortest_path(g: &VisibilityGraph, s: usize, t: usize) -> Result<Path, RouteError> {
    check_ids(g, s, t)?;
    if s == t {
        return Ok(Path { nodes: vec![s], links: vec![], cost: 0.0 });
    }
    let (dist, done, _) = backward_astar(g, s, t)
        .ok_or_else(|| RouteError::NoPathExists(format!("node {t} is not reachable from node {s}")))?;
    Ok(extract(g, s, t, &dist, &done))
}

/// Plain Dijkstra from `s`, kept independent of the A* code path.
pub fn dijkstra(g: &VisibilityGraph, s: usize, t: usize) -> Result<Path, RouteError> {
    check_ids(g, s, t)?;
    let n = g.nodes.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(Entry { f: 0.0, g: 0.0, node: s });
    while let Some(Entry { g: du, node: u, .. }) = heap.pop() {
        if du > dist[u] {
            continue;
        }
        if u == t {
            break;
        }
        for (v, l) in g.neighbors(u) {
            let nd = du + g.links[l].weight;
            if nd < dist[v] {
                dist[v] = nd;
                prev[v] = Some((u, l));
                heap.push(Entry { f: nd, g: nd, node: v });
            }
        }
    }
    if !dist[t].is_finite() {
        return Err(RouteError::NoPathExists(format!("node {t} is not reachable from node {s}")));
    }
    let mut nodes = vec![t];
    let mut links = Vec::new();
    let mut u = t;
    while let Some((p, l)) = prev[u] {
        nodes.push(p);
        links.push(l);
        u = p;
    }
    nodes.reverse();
    links.reverse();
    let cost = links.iter().map(|&l| g.links[l].weight).sum();
    Ok(Path { nodes, links, cost })
}

/// Dijkstra on a small dense adjacency list; used for stitching legs.
pub(crate) fn dijkstra_adj(adj: &[Vec<(usize, f64)>], s: usize, t: usize) -> Option<(Vec<usize>, f64)> {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(Entry { f: 0.0, g: 0.0, node: s });
    while let Some(Entry { g: du, node: u, .. }) = heap.pop() {
        if du > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = du + w;
            if nd < dist[v] {
                dist[v] = nd;
                prev[v] = u;
                heap.push(Entry { f: nd, g: nd, node: v });
            }
        }
    }
    if !dist[t].is_finite() {
        return None;
    }
    let mut path = vec![t];
    while *path.last().unwrap() != s {
        path.push(prev[*path.last().unwrap()]);
    }
    path.reverse();
    Some((path, dist[t]))
}
