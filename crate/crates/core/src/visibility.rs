//! On-demand visibility graph over an open area.
//!
//! Nodes are the terminals plus every outer-ring and hole vertex; a link
//! joins every pair whose straight segment lies completely inside the area.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{link_features, link_weight, CostModel, LinkFeatures};
use crate::error::RouteError;
use crate::geometry::{
    point_in_polygon, segment_within_area, Containment, Point, Segment, BOUNDARY_EPS,
    PREDICATE_EPS,
};
use crate::scene::SceneModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Terminal,
    BoundaryVertex,
    HoleVertex,
    MbrCorner,
    GateNode,
}

impl NodeKind {
    pub fn name(self) -> &'static str {
        match self {
            NodeKind::Terminal => "terminal",
            NodeKind::BoundaryVertex => "boundary_vertex",
            NodeKind::HoleVertex => "hole_vertex",
            NodeKind::MbrCorner => "mbr_corner",
            NodeKind::GateNode => "gate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub point: Point,
    pub kind: NodeKind,
}

/// Undirected weighted link, stored once with `from < to`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub from: usize,
    pub to: usize,
    pub geometry: Segment,
    pub length: f64,
    pub features: LinkFeatures,
    pub weight: f64,
}

impl Link {
    pub fn other(&self, node: usize) -> usize {
        if node == self.from {
            self.to
        } else {
            self.from
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VisibilityGraph {
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
    pub adjacency: Vec<Vec<usize>>,
}

impl VisibilityGraph {
    pub fn new(nodes: Vec<Node>, links: Vec<Link>) -> Self {
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (k, l) in links.iter().enumerate() {
            adjacency[l.from].push(k);
            adjacency[l.to].push(k);
        }
        VisibilityGraph { nodes, links, adjacency }
    }

    /// `(neighbour, link index)` pairs incident to `node`.
    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency[node]
            .iter()
            .map(move |&l| (self.links[l].other(node), l))
    }

    pub fn link_between(&self, a: usize, b: usize) -> Option<&Link> {
        self.adjacency[a]
            .iter()
            .map(|&l| &self.links[l])
            .find(|l| l.other(a) == b)
    }

    pub fn node_at(&self, p: &Point) -> Option<usize> {
        self.nodes
            .iter()
            .position(|n| n.point.approx_eq(p, PREDICATE_EPS))
    }
}

/// Ordered node list with coincident points merged; the first insertion of
/// a location wins, so terminals are pushed first.
#[derive(Debug, Clone, Default)]
pub(crate) struct NodeSet {
    nodes: Vec<Node>,
}

impl NodeSet {
    pub(crate) fn push(&mut self, point: Point, kind: NodeKind) -> usize {
        if let Some(existing) = self
            .nodes
            .iter()
            .position(|n| n.point.approx_eq(&point, PREDICATE_EPS))
        {
            return existing;
        }
        let id = self.nodes.len();
        self.nodes.push(Node { id, point, kind });
        id
    }

    pub(crate) fn nodes(&self) -> &[Node] {
        &self.nodes
    }
}

/// Every node pair `(i, j)`, `i < j`, whose segment satisfies `admits`.
pub(crate) fn admissible_pairs<F>(nodes: &[Node], admits: F) -> Vec<(usize, usize, Segment)>
where
    F: Fn(&Segment) -> bool + Sync,
{
    let n = nodes.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    pairs
        .into_par_iter()
        .filter_map(|(i, j)| {
            let s = Segment::new(nodes[i].point, nodes[j].point).ok()?;
            admits(&s).then_some((i, j, s))
        })
        .collect()
}

/// Weights admissible pairs; links with infinite weight are dropped.
pub(crate) fn weigh_links(
    pairs: Vec<(usize, usize, Segment)>,
    scene: &SceneModel,
    cost: &CostModel,
) -> Vec<Link> {
    pairs
        .into_par_iter()
        .filter_map(|(from, to, geometry)| {
            let features = link_features(&geometry, scene, cost.sample_interval_m);
            let weight = link_weight(&features, cost);
            weight.is_finite().then_some(Link {
                from,
                to,
                geometry,
                length: features.length,
                features,
                weight,
            })
        })
        .collect()
}

/// Node pairs of `nodes` that are mutually visible inside area `area`.
pub fn candidate_links(nodes: &[Node], scene: &SceneModel, area: usize) -> Vec<(usize, usize, Segment)> {
    let poly = &scene.areas[area].polygon;
    admissible_pairs(nodes, |s| segment_within_area(s, poly, PREDICATE_EPS))
}

/// Checks that `p` is a legal terminal of `area`.
pub(crate) fn check_terminal(scene: &SceneModel, area: usize, p: &Point) -> Result<(), RouteError> {
    if let Some(o) = scene.obstacle_at(p) {
        return Err(RouteError::TerminalInsideObstacle {
            x: p.x,
            y: p.y,
            obstacle: scene.obstacles[o].id.clone(),
        });
    }
    if point_in_polygon(p, &scene.areas[area].polygon, BOUNDARY_EPS) == Containment::Outside {
        return Err(RouteError::TerminalOutsideArea { x: p.x, y: p.y });
    }
    Ok(())
}

/// Terminals first, then outer-ring vertices, then hole vertices.
pub(crate) fn full_node_set(scene: &SceneModel, area: usize, terminals: &[(Point, NodeKind)]) -> NodeSet {
    let poly = &scene.areas[area].polygon;
    let mut set = NodeSet::default();
    for &(p, kind) in terminals {
        set.push(p, kind);
    }
    for v in poly.outer().vertices() {
        set.push(*v, NodeKind::BoundaryVertex);
    }
    for hole in poly.holes() {
        for v in hole.vertices() {
            set.push(*v, NodeKind::HoleVertex);
        }
    }
    set
}

/// Full graph over explicit terminals (origin, destination, gates...).
pub fn build_graph_with_terminals(
    scene: &SceneModel,
    area: usize,
    terminals: &[(Point, NodeKind)],
    cost: &CostModel,
) -> Result<VisibilityGraph, RouteError> {
    if area >= scene.areas.len() {
        return Err(RouteError::InvalidRequest(format!("no area with index {area}")));
    }
    for (p, _) in terminals {
        check_terminal(scene, area, p)?;
    }
    let set = full_node_set(scene, area, terminals);
    let pairs = candidate_links(set.nodes(), scene, area);
    let links = weigh_links(pairs, scene, cost);
    Ok(VisibilityGraph::new(set.nodes().to_vec(), links))
}

/// Full visibility graph for origin `s` (node 0) and destination `t` (node 1).
pub fn build_full_graph(
    scene: &SceneModel,
    area: usize,
    s: Point,
    t: Point,
    cost: &CostModel,
) -> Result<VisibilityGraph, RouteError> {
    if s.approx_eq(&t, PREDICATE_EPS) {
        return Err(RouteError::InvalidRequest("origin and destination coincide".into()));
    }
    build_graph_with_terminals(
        scene,
        area,
        &[(s, NodeKind::Terminal), (t, NodeKind::Terminal)],
        cost,
    )
}
