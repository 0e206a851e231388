//! End-to-end routing: in-area search with either algorithm, gates to an
//! external street network, connectors between area polygons.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cost::{link_features, link_weight, CostModel, LinkFeatures};
use crate::error::RouteError;
use crate::geometry::{Point, Segment, PREDICATE_EPS};
use crate::hierarchical::{route_hierarchical_with_kinds, IterationRecord};
use crate::scene::{SceneModel, ATTACH_TOLERANCE};
use crate::search::{dijkstra_adj, shortest_path};
use crate::visibility::{build_graph_with_terminals, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Full,
    Hierarchical,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Full => "full",
            Algorithm::Hierarchical => "hierarchical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteRequest {
    pub origin: Point,
    pub destination: Point,
    pub algorithm: Algorithm,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LegKind {
    Area { area: String },
    Connector { connector: String },
    Network,
    /// Straight access from an off-network terminal.
    Access,
}

/// One traversed link of a route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub from: Point,
    pub to: Point,
    pub leg: LegKind,
    pub length: f64,
    pub features: Option<LinkFeatures>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteResult {
    pub polyline: Vec<Point>,
    pub total_cost: f64,
    pub total_length: f64,
    pub breakdown: Vec<LinkRecord>,
    pub algorithm: Algorithm,
    pub trace: Vec<IterationRecord>,
    pub gates_used: Vec<String>,
    pub nodes: usize,
    pub links: usize,
    pub iterations: usize,
    pub fallback_used: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkNode {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkLink {
    pub from: String,
    pub to: String,
    pub weight: f64,
}

/// Pre-built street or pavement graph with directed weighted links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalNetwork {
    pub nodes: Vec<NetworkNode>,
    pub links: Vec<NetworkLink>,
    /// Gate id to network node id.
    pub gate_map: BTreeMap<String, String>,
}

impl ExternalNetwork {
    pub fn parse(text: &str) -> Result<Self, RouteError> {
        let net: ExternalNetwork = serde_json::from_str(text).map_err(|e| RouteError::Network(e.to_string()))?;
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<(), RouteError> {
        let mut seen = std::collections::HashSet::new();
        for n in &self.nodes {
            if !seen.insert(n.id.as_str()) {
                return Err(RouteError::Network(format!("duplicate node id '{}'", n.id)));
            }
            if !n.x.is_finite() || !n.y.is_finite() {
                return Err(RouteError::Network(format!("node '{}' has non-finite coordinates", n.id)));
            }
        }
        for l in &self.links {
            if !seen.contains(l.from.as_str()) || !seen.contains(l.to.as_str()) {
                return Err(RouteError::Network(format!("link {} -> {} references an unknown node", l.from, l.to)));
            }
            if !(l.weight >= 0.0) || !l.weight.is_finite() {
                return Err(RouteError::Network(format!("link {} -> {} has invalid weight {}", l.from, l.to, l.weight)));
            }
        }
        for (gate, node) in &self.gate_map {
            if !seen.contains(node.as_str()) {
                return Err(RouteError::Network(format!("gate '{gate}' maps to unknown node '{node}'")));
            }
        }
        Ok(())
    }

    fn index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    fn point(&self, k: usize) -> Point {
        Point::new(self.nodes[k].x, self.nodes[k].y)
    }
}

/// Result of routing between two points of one area.
#[derive(Debug, Clone)]
struct InAreaLeg {
    points: Vec<Point>,
    records: Vec<LinkRecord>,
    cost: f64,
    nodes: usize,
    links: usize,
    trace: Vec<IterationRecord>,
    fallback_used: bool,
}

fn route_in_area(
    scene: &SceneModel,
    area: usize,
    s: (Point, NodeKind),
    t: (Point, NodeKind),
    algorithm: Algorithm,
    cost: &CostModel,
) -> Result<InAreaLeg, RouteError> {
    let leg = LegKind::Area { area: scene.areas[area].id.clone() };
    let (graph, path, trace, fallback_used) = match algorithm {
        Algorithm::Full => {
            if s.0.approx_eq(&t.0, PREDICATE_EPS) {
                return Err(RouteError::InvalidRequest("origin and destination coincide".into()));
            }
            let g = build_graph_with_terminals(scene, area, &[s, t], cost)?;
            let p = shortest_path(&g, 0, 1)?;
            (g, p, Vec::new(), false)
        }
        Algorithm::Hierarchical => {
            let r = route_hierarchical_with_kinds(scene, area, s, t, cost)?;
            (r.graph, r.path, r.trace, r.fallback_used)
        }
    };
    let points: Vec<Point> = path.nodes.iter().map(|&n| graph.nodes[n].point).collect();
    let records = path
        .links
        .iter()
        .zip(points.windows(2))
        .map(|(&l, w)| {
            let link = &graph.links[l];
            LinkRecord {
                from: w[0],
                to: w[1],
                leg: leg.clone(),
                length: link.length,
                features: Some(link.features),
                weight: link.weight,
            }
        })
        .collect();
    Ok(InAreaLeg {
        points,
        records,
        cost: path.cost,
        nodes: graph.nodes.len(),
        links: graph.links.len(),
        trace,
        fallback_used,
    })
}

/// Edge of the stitching graph.
#[derive(Debug, Clone)]
enum Hop {
    InArea(Box<InAreaLeg>),
    Fixed(Vec<LinkRecord>),
}

impl Hop {
    fn cost(&self) -> f64 {
        match self {
            Hop::InArea(l) => l.cost,
            Hop::Fixed(r) => r.iter().map(|x| x.weight).sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Portal {
    Origin,
    Destination,
    Gate(usize),
    ConnectorEnd(usize, bool),
    Network(usize),
}

struct Meta {
    points: Vec<Point>,
    kinds: Vec<Portal>,
    area_of: Vec<Option<usize>>,
    hops: Vec<Vec<(usize, Hop)>>,
}

impl Meta {
    fn add(&mut self, p: Point, kind: Portal, area: Option<usize>) -> usize {
        self.points.push(p);
        self.kinds.push(kind);
        self.area_of.push(area);
        self.hops.push(Vec::new());
        self.points.len() - 1
    }

    fn connect(&mut self, a: usize, b: usize, hop: Hop) {
        self.hops[a].push((b, hop));
    }
}

fn straight(from: Point, to: Point, leg: LegKind, weight: f64) -> LinkRecord {
    LinkRecord { from, to, leg, length: from.distance(&to), features: None, weight }
}

/// Area a connector endpoint attaches to: the containing area, else the
/// nearest outer ring within tolerance (snapped onto it).
fn attach(scene: &SceneModel, p: Point) -> Option<(usize, Point)> {
    if let Some(a) = scene.locate(&p) {
        return Some((a, p));
    }
    scene
        .areas
        .iter()
        .enumerate()
        .map(|(k, a)| (k, a.polygon.outer().distance_to_point(&p)))
        .filter(|(_, d)| *d <= ATTACH_TOLERANCE)
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(k, _)| (k, scene.areas[k].polygon.outer().closest_point(&p)))
}

/// Routes `request` through the scene, optionally leaving the open areas
/// through gates onto `network`.
pub fn route(
    scene: &SceneModel,
    request: &RouteRequest,
    network: Option<&ExternalNetwork>,
    cost: &CostModel,
) -> Result<RouteResult, RouteError> {
    cost.validate()?;
    let (o, d) = (request.origin, request.destination);
    if o.approx_eq(&d, PREDICATE_EPS) {
        return Err(RouteError::InvalidRequest("origin and destination coincide".into()));
    }
    for p in [o, d] {
        if let Some(k) = scene.obstacle_at(&p) {
            return Err(RouteError::TerminalInsideObstacle { x: p.x, y: p.y, obstacle: scene.obstacles[k].id.clone() });
        }
    }
    let area_o = scene.locate(&o);
    let area_d = scene.locate(&d);

    if let (Some(a), Some(b)) = (area_o, area_d) {
        if a == b {
            let leg = route_in_area(scene, a, (o, NodeKind::Terminal), (d, NodeKind::Terminal), request.algorithm, cost)?;
            return Ok(assemble(request.algorithm, vec![(Hop::InArea(Box::new(leg)), None)]));
        }
    }

    for (p, area) in [(o, area_o), (d, area_d)] {
        if area.is_none() && scene.gates.is_empty() {
            return Err(RouteError::TerminalUnreachable { x: p.x, y: p.y });
        }
    }

    let mut meta = Meta { points: vec![], kinds: vec![], area_of: vec![], hops: vec![] };
    let mo = meta.add(o, Portal::Origin, area_o);
    let md = meta.add(d, Portal::Destination, area_d);
    let gate_ids: Vec<usize> = (0..scene.gates.len())
        .map(|g| meta.add(scene.gates[g].center, Portal::Gate(g), Some(scene.gates[g].area)))
        .collect();

    for (c, conn) in scene.connectors.iter().enumerate() {
        let mut ends = [0usize; 2];
        for (k, (p, first)) in [(conn.segment.a, true), (conn.segment.b, false)].into_iter().enumerate() {
            let gate = scene.gates.iter().position(|g| g.center.distance(&p) <= ATTACH_TOLERANCE);
            ends[k] = match (gate, attach(scene, p)) {
                (Some(g), _) => gate_ids[g],
                (None, Some((area, q))) => meta.add(q, Portal::ConnectorEnd(c, first), Some(area)),
                (None, None) => meta.add(p, Portal::ConnectorEnd(c, first), None),
            };
        }
        let f = link_features(&conn.segment, scene, cost.sample_interval_m);
        let w = link_weight(&f, cost);
        if w.is_finite() {
            let leg = LegKind::Connector { connector: conn.id.clone() };
            let rec = |from: Point, to: Point| LinkRecord { from, to, leg: leg.clone(), length: f.length, features: Some(f), weight: w };
            let (pa, pb) = (meta.points[ends[0]], meta.points[ends[1]]);
            meta.connect(ends[0], ends[1], Hop::Fixed(vec![rec(pa, pb)]));
            meta.connect(ends[1], ends[0], Hop::Fixed(vec![rec(pb, pa)]));
        }
    }

    if let Some(net) = network {
        net.validate()?;
        let base: Vec<usize> = (0..net.nodes.len()).map(|k| meta.add(net.point(k), Portal::Network(k), None)).collect();
        for l in &net.links {
            let (a, b) = (net.index(&l.from).unwrap(), net.index(&l.to).unwrap());
            let rec = straight(net.point(a), net.point(b), LegKind::Network, l.weight);
            meta.connect(base[a], base[b], Hop::Fixed(vec![rec]));
        }
        for (gate, node) in &net.gate_map {
            let Some(g) = scene.gates.iter().position(|x| &x.id == gate) else {
                return Err(RouteError::Network(format!("gate_map names unknown gate '{gate}'")));
            };
            let k = base[net.index(node).unwrap()];
            let (pg, pn) = (meta.points[gate_ids[g]], meta.points[k]);
            meta.connect(gate_ids[g], k, Hop::Fixed(vec![straight(pg, pn, LegKind::Network, 0.0)]));
            meta.connect(k, gate_ids[g], Hop::Fixed(vec![straight(pn, pg, LegKind::Network, 0.0)]));
        }
        for (term, area) in [(mo, area_o), (md, area_d)] {
            if area.is_some() || net.nodes.is_empty() {
                continue;
            }
            let p = meta.points[term];
            let nearest = (0..net.nodes.len())
                .min_by(|&a, &b| net.point(a).distance(&p).total_cmp(&net.point(b).distance(&p)))
                .unwrap();
            let q = net.point(nearest);
            let len = p.distance(&q);
            if len > 0.0 {
                meta.connect(term, base[nearest], Hop::Fixed(vec![straight(p, q, LegKind::Access, len)]));
                meta.connect(base[nearest], term, Hop::Fixed(vec![straight(q, p, LegKind::Access, len)]));
            } else {
                meta.connect(term, base[nearest], Hop::Fixed(vec![]));
                meta.connect(base[nearest], term, Hop::Fixed(vec![]));
            }
        }
    } else {
        // Without a network an outside terminal joins through the single gate.
        for (term, area) in [(mo, area_o), (md, area_d)] {
            if area.is_some() {
                continue;
            }
            if scene.gates.len() != 1 {
                return Err(RouteError::NoPathExists(format!(
                    "terminal {:?} is outside every area and {} gates exist without a network",
                    meta.points[term],
                    scene.gates.len()
                )));
            }
            let g = gate_ids[0];
            let (p, q) = (meta.points[term], meta.points[g]);
            let len = p.distance(&q);
            meta.connect(term, g, Hop::Fixed(vec![straight(p, q, LegKind::Access, len)]));
            meta.connect(g, term, Hop::Fixed(vec![straight(q, p, LegKind::Access, len)]));
        }
    }

    // In-area hops between every pair of portals sharing an area.
    let n = meta.points.len();
    for a in 0..n {
        for b in 0..n {
            if a == b || b == mo || a == md {
                continue;
            }
            let (Some(x), Some(y)) = (meta.area_of[a], meta.area_of[b]) else {
                continue;
            };
            if x != y || meta.points[a].approx_eq(&meta.points[b], PREDICATE_EPS) {
                continue;
            }
            let kind = |k: Portal| match k {
                Portal::Origin | Portal::Destination => NodeKind::Terminal,
                _ => NodeKind::GateNode,
            };
            let from = (meta.points[a], kind(meta.kinds[a]));
            let to = (meta.points[b], kind(meta.kinds[b]));
            match route_in_area(scene, x, from, to, request.algorithm, cost) {
                Ok(leg) => meta.connect(a, b, Hop::InArea(Box::new(leg))),
                Err(RouteError::NoPathExists(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }

    let adj: Vec<Vec<(usize, f64)>> = meta
        .hops
        .iter()
        .map(|hs| hs.iter().map(|(b, h)| (*b, h.cost())).collect())
        .collect();
    let (seq, _) = dijkstra_adj(&adj, mo, md)
        .ok_or_else(|| RouteError::NoPathExists("no gate, connector or network joins the terminals".into()))?;
    let mut hops = Vec::new();
    for w in seq.windows(2) {
        let hop = meta.hops[w[0]]
            .iter()
            .filter(|(b, _)| *b == w[1])
            .min_by(|x, y| x.1.cost().total_cmp(&y.1.cost()))
            .map(|(_, h)| h.clone())
            .expect("hop exists for every path edge");
        let gate = match meta.kinds[w[1]] {
            Portal::Gate(g) => Some(scene.gates[g].id.clone()),
            _ => None,
        };
        hops.push((hop, gate));
    }
    Ok(assemble(request.algorithm, hops))
}

fn assemble(algorithm: Algorithm, hops: Vec<(Hop, Option<String>)>) -> RouteResult {
    let mut r = RouteResult {
        polyline: Vec::new(),
        total_cost: 0.0,
        total_length: 0.0,
        breakdown: Vec::new(),
        algorithm,
        trace: Vec::new(),
        gates_used: Vec::new(),
        nodes: 0,
        links: 0,
        iterations: 0,
        fallback_used: false,
    };
    let push_point = |poly: &mut Vec<Point>, p: Point| {
        if poly.last().is_none_or(|q| !q.approx_eq(&p, PREDICATE_EPS)) {
            poly.push(p);
        }
    };
    for (hop, gate) in hops {
        match hop {
            Hop::InArea(leg) => {
                for p in &leg.points {
                    push_point(&mut r.polyline, *p);
                }
                r.breakdown.extend(leg.records);
                r.nodes += leg.nodes;
                r.links += leg.links;
                r.iterations += leg.trace.len().max(1);
                r.trace.extend(leg.trace);
                r.fallback_used |= leg.fallback_used;
            }
            Hop::Fixed(recs) => {
                for rec in &recs {
                    push_point(&mut r.polyline, rec.from);
                    push_point(&mut r.polyline, rec.to);
                }
                r.breakdown.extend(recs);
            }
        }
        if let Some(g) = gate {
            if !r.gates_used.contains(&g) {
                r.gates_used.push(g);
            }
        }
    }
    r.total_cost = r.breakdown.iter().map(|b| b.weight).sum();
    r.total_length = r.breakdown.iter().map(|b| b.length).sum();
    r
}

/// A network-bound comparison route: walk straight to the nearest point of
/// the area's outer boundary, follow the boundary the shorter way round, then
/// walk straight to the destination.
pub fn boundary_network_baseline(scene: &SceneModel, area: usize, s: Point, t: Point) -> Vec<Point> {
    let ring = scene.areas[area].polygon.outer();
    let v = ring.vertices();
    let n = v.len();
    let mut cum = vec![0.0; n + 1];
    for i in 0..n {
        cum[i + 1] = cum[i] + v[i].distance(&v[(i + 1) % n]);
    }
    let perimeter = cum[n];
    // Nearest boundary point as (edge index, point, arc position).
    let locate = |p: &Point| {
        let (i, q) = ring
            .edges()
            .enumerate()
            .map(|(i, e)| (i, e.point_at(e.project(p))))
            .min_by(|a, b| a.1.distance(p).total_cmp(&b.1.distance(p)))
            .unwrap();
        (i, q, cum[i] + v[i].distance(&q))
    };
    let (ei, ps, pos_s) = locate(&s);
    let (_, pt, pos_t) = locate(&t);
    let fwd = (pos_t - pos_s).rem_euclid(perimeter);
    let bwd = perimeter - fwd;
    let mut out = vec![s, ps];
    if fwd <= bwd {
        for k in 1..=n {
            let idx = (ei + k) % n;
            if (cum[idx] - pos_s).rem_euclid(perimeter) >= fwd {
                break;
            }
            out.push(v[idx]);
        }
    } else {
        for k in 0..n {
            let idx = (ei + n - k) % n;
            if (pos_s - cum[idx]).rem_euclid(perimeter) >= bwd {
                break;
            }
            out.push(v[idx]);
        }
    }
    out.push(pt);
    out.push(t);
    out.dedup_by(|a, b| a.approx_eq(b, PREDICATE_EPS));
    out
}

/// Straight segment record used when a polyline must be priced under a
/// cost model, for example to compare against a baseline.
pub fn price_polyline(scene: &SceneModel, poly: &[Point], cost: &CostModel) -> f64 {
    poly.windows(2)
        .filter_map(|w| Segment::new(w[0], w[1]).ok())
        .map(|s| link_weight(&link_features(&s, scene, cost.sample_interval_m), cost))
        .sum()
}
