//! Step-wise obstacle exclusion.
//!
//! Routing starts from the direct origin-destination link. Whenever the best
//! path collides with an obstacle, the first such obstacle along the path is
//! activated: its MBR corners join the node set and links crossing its
//! polygon are excluded. The loop ends once the best path is obstacle free.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cost::CostModel;
use crate::error::RouteError;
use crate::geometry::{
    first_contact_param, point_in_polygon, segment_enters_ring, segment_within_ring_avoiding,
    Containment, Point, Ring, BOUNDARY_EPS, PREDICATE_EPS,
};
use crate::scene::SceneModel;
use crate::search::{shortest_path, Path};
use crate::trajectory::dhaus;
use crate::visibility::{
    admissible_pairs, build_full_graph, check_terminal, weigh_links, NodeKind, NodeSet, VisibilityGraph,
};

/// Outward offset applied to MBR corners that are not obstacle vertices.
pub const CORNER_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Ids of all obstacles activated before this iteration's search.
    pub activated: Vec<String>,
    pub nodes: usize,
    pub links: usize,
    pub cost: Option<f64>,
    pub colliding: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalResult {
    pub graph: VisibilityGraph,
    pub path: Path,
    pub cost: f64,
    pub trace: Vec<IterationRecord>,
    pub fallback_used: bool,
}

impl HierarchicalResult {
    pub fn points(&self) -> Vec<Point> {
        self.path.nodes.iter().map(|&n| self.graph.nodes[n].point).collect()
    }

    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

/// Vertices of `ring` with an interior angle above 180 degrees, assuming
/// the ring is counter-clockwise.
fn reflex_vertices(ring: &Ring) -> Vec<Point> {
    let v = ring.vertices();
    let n = v.len();
    (0..n)
        .filter(|&i| crate::geometry::orient(&v[(i + n - 1) % n], &v[i], &v[(i + 1) % n]) < 0.0)
        .map(|i| v[i])
        .collect()
}

/// MBR corners of an obstacle ready for insertion: exact where the corner is
/// an obstacle vertex, otherwise pushed outward by [`CORNER_MARGIN`].
fn corner_nodes(ring: &Ring) -> [Point; 4] {
    let m = ring.mbr();
    let exact = |c: &Point| ring.vertices().iter().any(|v| v.approx_eq(c, PREDICATE_EPS));
    let mu = CORNER_MARGIN;
    let offsets = [(-mu, -mu), (mu, -mu), (mu, mu), (-mu, mu)];
    let mut out = m.corners();
    for (c, (dx, dy)) in out.iter_mut().zip(offsets) {
        if !exact(c) {
            *c = Point::new(c.x + dx, c.y + dy);
        }
    }
    out
}

/// Index into `scene.obstacles` of the first obstacle hit along `path`.
fn first_collision(
    g: &VisibilityGraph,
    path: &Path,
    candidates: &[usize],
    scene: &SceneModel,
) -> Option<usize> {
    for (i, &l) in path.links.iter().enumerate() {
        let seg = g.links[l].geometry;
        // Orient the link in travel direction for the contact ordering.
        let from = g.nodes[path.nodes[i]].point;
        let seg = if seg.a.approx_eq(&from, PREDICATE_EPS) { seg } else { seg.reversed() };
        let hit = candidates
            .iter()
            .copied()
            .filter(|&o| {
                let ob = &scene.obstacles[o];
                ob.mbr.intersects_segment(&seg) && segment_enters_ring(&seg, &ob.boundary, PREDICATE_EPS)
            })
            .map(|o| (first_contact_param(&seg, &scene.obstacles[o].boundary), o))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if let Some((_, o)) = hit {
            return Some(o);
        }
    }
    None
}

/// Hierarchical route from `s` to `t` inside area `area`.
pub fn route_hierarchical(
    scene: &SceneModel,
    area: usize,
    s: Point,
    t: Point,
    cost: &CostModel,
) -> Result<HierarchicalResult, RouteError> {
    route_hierarchical_with_kinds(scene, area, (s, NodeKind::Terminal), (t, NodeKind::Terminal), cost)
}

pub(crate) fn route_hierarchical_with_kinds(
    scene: &SceneModel,
    area: usize,
    s: (Point, NodeKind),
    t: (Point, NodeKind),
    cost: &CostModel,
) -> Result<HierarchicalResult, RouteError> {
    if area >= scene.areas.len() {
        return Err(RouteError::InvalidRequest(format!("no area with index {area}")));
    }
    if s.0.approx_eq(&t.0, PREDICATE_EPS) {
        return Err(RouteError::InvalidRequest("origin and destination coincide".into()));
    }
    check_terminal(scene, area, &s.0)?;
    check_terminal(scene, area, &t.0)?;
    let poly = &scene.areas[area].polygon;
    let outer = poly.outer();
    let candidates_all: Vec<usize> = scene.obstacles_in_area(area).map(|(k, _)| k).collect();

    let mut nodes = NodeSet::default();
    nodes.push(s.0, s.1);
    nodes.push(t.0, t.1);
    for p in reflex_vertices(outer) {
        nodes.push(p, NodeKind::BoundaryVertex);
    }
    let mut activated: Vec<usize> = Vec::new();
    let mut trace = Vec::new();

    for iteration in 1..=candidates_all.len() + 1 {
        let blockers: Vec<&Ring> = activated.iter().map(|&o| &scene.obstacles[o].boundary).collect();
        let pairs = admissible_pairs(nodes.nodes(), |seg| {
            segment_within_ring_avoiding(seg, outer, &blockers, PREDICATE_EPS)
        });
        let graph = VisibilityGraph::new(nodes.nodes().to_vec(), weigh_links(pairs, scene, cost));
        let mut record = IterationRecord {
            iteration,
            activated: activated.iter().map(|&o| scene.obstacles[o].id.clone()).collect(),
            nodes: graph.nodes.len(),
            links: graph.links.len(),
            cost: None,
            colliding: None,
        };
        let Ok(path) = shortest_path(&graph, 0, 1) else {
            trace.push(record);
            break;
        };
        record.cost = Some(path.cost);
        let pending: Vec<usize> = candidates_all.iter().copied().filter(|o| !activated.contains(o)).collect();
        match first_collision(&graph, &path, &pending, scene) {
            None => {
                trace.push(record);
                return Ok(HierarchicalResult { cost: path.cost, graph, path, trace, fallback_used: false });
            }
            Some(o) => {
                record.colliding = Some(scene.obstacles[o].id.clone());
                trace.push(record);
                activated.push(o);
                let ring = &scene.obstacles[o].boundary;
                let kept: Vec<Point> = corner_nodes(ring)
                    .into_iter()
                    .filter(|c| point_in_polygon(c, poly, BOUNDARY_EPS) != Containment::Outside)
                    .collect();
                if kept.is_empty() {
                    for v in ring.vertices() {
                        nodes.push(*v, NodeKind::HoleVertex);
                    }
                } else {
                    for c in kept {
                        nodes.push(c, NodeKind::MbrCorner);
                    }
                }
            }
        }
    }

    // MBR corners could not produce a clear path: exact-vertex graph.
    let graph = build_full_graph(scene, area, s.0, t.0, cost)?;
    let path = shortest_path(&graph, 0, 1)?;
    trace.push(IterationRecord {
        iteration: trace.len() + 1,
        activated: candidates_all.iter().map(|&o| scene.obstacles[o].id.clone()).collect(),
        nodes: graph.nodes.len(),
        links: graph.links.len(),
        cost: Some(path.cost),
        colliding: None,
    });
    Ok(HierarchicalResult { cost: path.cost, graph, path, trace, fallback_used: true })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub algorithm: String,
    pub nodes: usize,
    pub links: usize,
    pub iterations: usize,
    pub cost: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ms: Option<f64>,
    pub dhaus_between_paths: f64,
}

/// Runs the full and the hierarchical algorithm on the same request.
/// Wall times are recorded only when `timings` is set, so reports stay
/// reproducible by default.
pub fn compare_algorithms(
    scene: &SceneModel,
    s: Point,
    t: Point,
    cost: &CostModel,
    timings: bool,
) -> Result<Vec<BenchRow>, RouteError> {
    let area = scene
        .locate(&s)
        .ok_or(RouteError::TerminalOutsideArea { x: s.x, y: s.y })?;
    let clock = Instant::now();
    let full_graph = build_full_graph(scene, area, s, t, cost)?;
    let full = shortest_path(&full_graph, 0, 1)?;
    let full_ms = clock.elapsed().as_secs_f64() * 1e3;
    let clock = Instant::now();
    let hier = route_hierarchical(scene, area, s, t, cost)?;
    let hier_ms = clock.elapsed().as_secs_f64() * 1e3;

    let full_pts: Vec<Point> = full.nodes.iter().map(|&n| full_graph.nodes[n].point).collect();
    let dev = dhaus(&full_pts, &hier.points(), 1.0, 1.0, 1.0).unwrap_or(f64::NAN);
    Ok(vec![
        BenchRow {
            algorithm: "full".into(),
            nodes: full_graph.nodes.len(),
            links: full_graph.links.len(),
            iterations: 1,
            cost: full.cost,
            ms: timings.then_some(full_ms),
            dhaus_between_paths: dev,
        },
        BenchRow {
            algorithm: "hierarchical".into(),
            nodes: hier.graph.nodes.len(),
            links: hier.graph.links.len(),
            iterations: hier.iterations(),
            cost: hier.cost,
            ms: timings.then_some(hier_ms),
            dhaus_between_paths: dev,
        },
    ])
}
