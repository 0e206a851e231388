//! Routing scene: open-area polygons, obstacles, gates, connector pathways
//! and piecewise-constant feature fields.
//!
//! Scenes are read from a GeoJSON `FeatureCollection`. Every feature carries
//! a `role` property:
//!
//! | role        | geometry   | properties                                  |
//! |-------------|------------|---------------------------------------------|
//! | `area`      | Polygon    | `area_id` (optional); interior rings allowed |
//! | `obstacle`  | Polygon    | `obstacle_id`                               |
//! | `gate`      | Point      | `gate_id`                                   |
//! | `connector` | LineString | `connector_id` (optional), two positions    |
//! | `zone`      | Polygon    | `field`, `value`, `zone_id` (optional)      |
//!
//! A top-level `defaults` member maps field name to default value and a
//! top-level `crs` member selects `local-m` (default) or `wgs84`.

mod export;
mod projection;

pub use export::{export_graph, export_route, export_scene, round_coord};
pub use projection::{Crs, Projection};

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::geometry::{
    point_in_polygon, point_in_ring, segments_properly_intersect, Containment,
    GeometryError, Mbr, Point, PolygonWithHoles, Ring, Segment, BOUNDARY_EPS, PREDICATE_EPS,
};

/// Maximum distance of a gate centre or connector endpoint from the
/// boundary it attaches to, meters.
pub const ATTACH_TOLERANCE: f64 = 1.0;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error for '{id}': {reason}")]
    Validation { id: String, reason: String },
}

impl SceneError {
    fn invalid(id: impl Into<String>, reason: impl Into<String>) -> Self {
        SceneError::Validation { id: id.into(), reason: reason.into() }
    }

    fn parse(msg: impl Into<String>) -> Self {
        SceneError::Parse(msg.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Slope,
    Width,
    Surface,
    Weather,
}

impl FieldKind {
    pub const ALL: [FieldKind; 4] = [
        FieldKind::Slope,
        FieldKind::Width,
        FieldKind::Surface,
        FieldKind::Weather,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Slope => "slope",
            FieldKind::Width => "width",
            FieldKind::Surface => "surface",
            FieldKind::Weather => "weather",
        }
    }

    pub fn parse(s: &str) -> Option<FieldKind> {
        FieldKind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Value used when no zone and no explicit default apply.
    pub fn fallback_default(self) -> f64 {
        match self {
            FieldKind::Slope => 0.0,
            FieldKind::Width => 2.0,
            FieldKind::Surface => 1.0,
            FieldKind::Weather => 1.0,
        }
    }

    pub fn is_valid(self, v: f64) -> bool {
        v.is_finite()
            && match self {
                FieldKind::Slope => v >= 0.0,
                FieldKind::Width => v > 0.0,
                FieldKind::Surface | FieldKind::Weather => (0.0..=1.0).contains(&v),
            }
    }

    /// The poorer of two values: steeper slope, narrower width, lower
    /// surface or weather score.
    pub fn worst(self, a: f64, b: f64) -> f64 {
        match self {
            FieldKind::Slope => a.max(b),
            _ => a.min(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub id: String,
    pub ring: Ring,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureField {
    pub kind: FieldKind,
    pub zones: Vec<Zone>,
    pub default: f64,
}

impl FeatureField {
    pub fn new(kind: FieldKind, default: f64) -> Self {
        FeatureField { kind, zones: Vec::new(), default }
    }
}

/// Worst value among zones covering `p` (boundary included), else the
/// field default.
pub fn sample_field(field: &FeatureField, p: &Point) -> f64 {
    let mut hit: Option<f64> = None;
    for z in &field.zones {
        if point_in_ring(p, &z.ring, BOUNDARY_EPS) != Containment::Outside {
            hit = Some(match hit {
                Some(v) => field.kind.worst(v, z.value),
                None => z.value,
            });
        }
    }
    hit.unwrap_or(field.default)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub id: String,
    pub boundary: Ring,
    pub mbr: Mbr,
    /// Index of the area this obstacle is a hole of.
    pub area: usize,
    pub attributes: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub id: String,
    /// Gate centre, snapped onto the area's outer ring when supplied
    /// slightly outside it.
    pub center: Point,
    pub area: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Connector {
    pub id: String,
    pub segment: Segment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub id: String,
    pub polygon: PolygonWithHoles,
    /// Obstacle index for each hole of `polygon`, in hole order.
    pub hole_obstacles: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneModel {
    pub areas: Vec<Area>,
    pub obstacles: Vec<Obstacle>,
    pub gates: Vec<Gate>,
    pub connectors: Vec<Connector>,
    pub fields: Vec<FeatureField>,
    pub projection: Option<Projection>,
}

impl SceneModel {
    pub fn field(&self, kind: FieldKind) -> &FeatureField {
        self.fields
            .iter()
            .find(|f| f.kind == kind)
            .expect("every field kind is present after load")
    }

    /// Area whose traversable space contains `p` (boundary included).
    pub fn locate(&self, p: &Point) -> Option<usize> {
        self.areas
            .iter()
            .position(|a| point_in_polygon(p, &a.polygon, BOUNDARY_EPS) != Containment::Outside)
    }

    /// Obstacle whose interior contains `p`, if any.
    pub fn obstacle_at(&self, p: &Point) -> Option<usize> {
        self.obstacles
            .iter()
            .position(|o| point_in_ring(p, &o.boundary, BOUNDARY_EPS) == Containment::Inside)
    }

    pub fn obstacles_in_area(&self, area: usize) -> impl Iterator<Item = (usize, &Obstacle)> {
        self.obstacles.iter().enumerate().filter(move |(_, o)| o.area == area)
    }

    pub fn gates_in_area(&self, area: usize) -> impl Iterator<Item = (usize, &Gate)> {
        self.gates.iter().enumerate().filter(move |(_, g)| g.area == area)
    }

    /// Diagonal of the bounding box over all areas.
    pub fn diameter(&self) -> f64 {
        Mbr::of_points(
            self.areas
                .iter()
                .flat_map(|a| a.polygon.outer().vertices().iter().copied()),
        )
        .map(|m| m.diagonal())
        .unwrap_or(0.0)
    }

    /// Builds a validated scene from already-planar parts. Used by tests and
    /// generators; file input goes through [`load_scene`].
    pub fn from_parts(
        areas: Vec<(String, Ring)>,
        obstacles: Vec<(String, Ring)>,
        gates: Vec<(String, Point)>,
        connectors: Vec<(String, Segment)>,
        fields: Vec<FeatureField>,
    ) -> Result<SceneModel, SceneError> {
        let parts = RawScene {
            areas: areas
                .into_iter()
                .map(|(id, outer)| RawArea { id, outer, holes: vec![] })
                .collect(),
            obstacles: obstacles
                .into_iter()
                .map(|(id, ring)| RawObstacle { id, ring, attributes: BTreeMap::new() })
                .collect(),
            gates,
            connectors,
            fields,
        };
        assemble(parts, None)
    }
}

struct RawArea {
    id: String,
    outer: Ring,
    holes: Vec<Ring>,
}

struct RawObstacle {
    id: String,
    ring: Ring,
    attributes: BTreeMap<String, Value>,
}

struct RawScene {
    areas: Vec<RawArea>,
    obstacles: Vec<RawObstacle>,
    gates: Vec<(String, Point)>,
    connectors: Vec<(String, Segment)>,
    fields: Vec<FeatureField>,
}

/// Parses and validates a scene document using the document's own `crs`.
pub fn load_scene(document: &str) -> Result<SceneModel, SceneError> {
    load_scene_with_crs(document, None)
}

/// Like [`load_scene`], with an optional CRS override.
pub fn load_scene_with_crs(document: &str, crs: Option<Crs>) -> Result<SceneModel, SceneError> {
    let root: Value =
        serde_json::from_str(document).map_err(|e| SceneError::parse(e.to_string()))?;
    if root.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(SceneError::parse("top-level object must be a FeatureCollection"));
    }
    let features = root
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| SceneError::parse("missing 'features' array"))?;

    let crs = match crs {
        Some(c) => c,
        None => match root.get("crs") {
            None => Crs::LocalM,
            Some(Value::String(s)) => Crs::parse(s)
                .ok_or_else(|| SceneError::parse(format!("unknown crs '{s}'")))?,
            Some(_) => return Err(SceneError::parse("'crs' must be a string")),
        },
    };

    let projection = match crs {
        Crs::LocalM => None,
        Crs::Wgs84 => Some(Projection::centered_on(&area_positions(features)?)?),
    };
    let to_point = |pos: &Value, id: &str| -> Result<Point, SceneError> {
        let (x, y) = position(pos).map_err(|r| SceneError::invalid(id, r))?;
        let p = match &projection {
            Some(proj) => proj.project(x, y),
            None => Point::new(x, y),
        };
        Point::try_new(p.x, p.y).map_err(|e| SceneError::invalid(id, e.to_string()))
    };
    let to_ring = |coords: &Value, id: &str| -> Result<Ring, SceneError> {
        let pts = coords
            .as_array()
            .ok_or_else(|| SceneError::invalid(id, "ring must be an array of positions"))?
            .iter()
            .map(|pos| to_point(pos, id))
            .collect::<Result<Vec<_>, _>>()?;
        Ring::new(pts).map_err(|e| SceneError::invalid(id, e.to_string()))
    };

    let mut defaults: BTreeMap<FieldKind, f64> = BTreeMap::new();
    if let Some(d) = root.get("defaults") {
        let obj = d
            .as_object()
            .ok_or_else(|| SceneError::parse("'defaults' must be an object"))?;
        for (name, v) in obj {
            let kind = FieldKind::parse(name)
                .ok_or_else(|| SceneError::invalid(name.clone(), "unknown field in defaults"))?;
            let v = v
                .as_f64()
                .ok_or_else(|| SceneError::invalid(name.clone(), "default must be a number"))?;
            if !kind.is_valid(v) {
                return Err(SceneError::invalid(name.clone(), format!("default {v} out of range")));
            }
            defaults.insert(kind, v);
        }
    }

    let mut raw = RawScene {
        areas: Vec::new(),
        obstacles: Vec::new(),
        gates: Vec::new(),
        connectors: Vec::new(),
        fields: FieldKind::ALL
            .iter()
            .map(|&k| FeatureField::new(k, defaults.get(&k).copied().unwrap_or(k.fallback_default())))
            .collect(),
    };

    for (index, feature) in features.iter().enumerate() {
        let props = feature.get("properties").and_then(Value::as_object);
        let prop_str = |key: &str| props.and_then(|p| p.get(key)).and_then(Value::as_str);
        let role = prop_str("role")
            .ok_or_else(|| SceneError::invalid(format!("feature-{index}"), "missing 'role' property"))?;
        let geometry = feature
            .get("geometry")
            .ok_or_else(|| SceneError::invalid(format!("feature-{index}"), "missing geometry"))?;
        let gtype = geometry.get("type").and_then(Value::as_str).unwrap_or("");
        let coords = geometry.get("coordinates").unwrap_or(&Value::Null);
        let expect = |want: &str, id: &str| -> Result<(), SceneError> {
            if gtype == want {
                Ok(())
            } else {
                Err(SceneError::invalid(id, format!("role '{role}' requires {want}, got '{gtype}'")))
            }
        };
        let rings_of = |id: &str| -> Result<Vec<Ring>, SceneError> {
            coords
                .as_array()
                .ok_or_else(|| SceneError::invalid(id, "polygon coordinates must be an array"))?
                .iter()
                .map(|r| to_ring(r, id))
                .collect()
        };
        match role {
            "area" => {
                let id = prop_str("area_id").map(str::to_owned).unwrap_or(format!("area-{index}"));
                expect("Polygon", &id)?;
                let mut rings = rings_of(&id)?;
                if rings.is_empty() {
                    return Err(SceneError::invalid(id, "polygon has no rings"));
                }
                let outer = rings.remove(0);
                raw.areas.push(RawArea { id, outer, holes: rings });
            }
            "obstacle" => {
                let id = prop_str("obstacle_id")
                    .map(str::to_owned)
                    .ok_or_else(|| SceneError::invalid(format!("feature-{index}"), "obstacle without obstacle_id"))?;
                expect("Polygon", &id)?;
                let rings = rings_of(&id)?;
                if rings.len() != 1 {
                    return Err(SceneError::invalid(id, "obstacle polygons must have exactly one ring"));
                }
                let attributes = props
                    .map(|p| {
                        p.iter()
                            .filter(|(k, _)| !matches!(k.as_str(), "role" | "obstacle_id" | "crs"))
                            .map(|(k, v)| (k.clone(), v.clone()))
                            .collect()
                    })
                    .unwrap_or_default();
                raw.obstacles.push(RawObstacle {
                    id,
                    ring: rings.into_iter().next().unwrap(),
                    attributes,
                });
            }
            "gate" => {
                let id = prop_str("gate_id")
                    .map(str::to_owned)
                    .ok_or_else(|| SceneError::invalid(format!("feature-{index}"), "gate without gate_id"))?;
                expect("Point", &id)?;
                let p = to_point(coords, &id)?;
                raw.gates.push((id, p));
            }
            "connector" => {
                let id = prop_str("connector_id")
                    .map(str::to_owned)
                    .unwrap_or(format!("connector-{index}"));
                expect("LineString", &id)?;
                let pts = coords
                    .as_array()
                    .ok_or_else(|| SceneError::invalid(&id, "LineString coordinates must be an array"))?
                    .iter()
                    .map(|pos| to_point(pos, &id))
                    .collect::<Result<Vec<_>, _>>()?;
                if pts.len() != 2 {
                    return Err(SceneError::invalid(id, "connector must have exactly two positions"));
                }
                let s = Segment::new(pts[0], pts[1]).map_err(|e| SceneError::invalid(&id, e.to_string()))?;
                raw.connectors.push((id, s));
            }
            "zone" => {
                let id = prop_str("zone_id").map(str::to_owned).unwrap_or(format!("zone-{index}"));
                expect("Polygon", &id)?;
                let kind = prop_str("field")
                    .and_then(FieldKind::parse)
                    .ok_or_else(|| SceneError::invalid(&id, "zone needs field in {slope,width,surface,weather}"))?;
                let value = props
                    .and_then(|p| p.get("value"))
                    .and_then(Value::as_f64)
                    .ok_or_else(|| SceneError::invalid(&id, "zone needs a numeric value"))?;
                if !kind.is_valid(value) {
                    return Err(SceneError::invalid(id, format!("{} value {value} out of range", kind.name())));
                }
                let rings = rings_of(&id)?;
                if rings.len() != 1 {
                    return Err(SceneError::invalid(id, "zone polygons must have exactly one ring"));
                }
                let ring = rings.into_iter().next().unwrap();
                let field = raw.fields.iter_mut().find(|f| f.kind == kind).unwrap();
                field.zones.push(Zone { id, ring, value });
            }
            other => {
                return Err(SceneError::invalid(format!("feature-{index}"), format!("unknown role '{other}'")));
            }
        }
    }
    assemble(raw, projection)
}

fn position(v: &Value) -> Result<(f64, f64), String> {
    let arr = v.as_array().ok_or("position must be an array")?;
    if arr.len() < 2 {
        return Err("position needs two coordinates".into());
    }
    let x = arr[0].as_f64().ok_or("coordinate must be a number")?;
    let y = arr[1].as_f64().ok_or("coordinate must be a number")?;
    Ok((x, y))
}

fn area_positions(features: &[Value]) -> Result<Vec<(f64, f64)>, SceneError> {
    let mut out = Vec::new();
    for f in features {
        let is_area = f
            .get("properties")
            .and_then(|p| p.get("role"))
            .and_then(Value::as_str)
            == Some("area");
        if !is_area {
            continue;
        }
        if let Some(outer) = f
            .get("geometry")
            .and_then(|g| g.get("coordinates"))
            .and_then(Value::as_array)
            .and_then(|rings| rings.first())
            .and_then(Value::as_array)
        {
            for pos in outer {
                out.push(position(pos).map_err(SceneError::parse)?);
            }
        }
    }
    if out.is_empty() {
        return Err(SceneError::parse("wgs84 scene needs at least one area to centre the projection"));
    }
    Ok(out)
}

fn check_unique<'a>(kind: &str, ids: impl Iterator<Item = &'a String>) -> Result<(), SceneError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(SceneError::invalid(id.clone(), format!("duplicate {kind} id")));
        }
    }
    Ok(())
}

fn areas_overlap(a: &Ring, b: &Ring) -> bool {
    if !a.mbr().intersects(&b.mbr()) {
        return false;
    }
    let crossing = a
        .edges()
        .any(|ea| b.edges().any(|eb| segments_properly_intersect(&ea, &eb, PREDICATE_EPS)));
    crossing
        || a.vertices().iter().any(|p| point_in_ring(p, b, BOUNDARY_EPS) == Containment::Inside)
        || b.vertices().iter().any(|p| point_in_ring(p, a, BOUNDARY_EPS) == Containment::Inside)
}

fn assemble(mut raw: RawScene, projection: Option<Projection>) -> Result<SceneModel, SceneError> {
    if raw.areas.is_empty() {
        return Err(SceneError::invalid("scene", "no area polygon"));
    }
    raw.areas.sort_by(|a, b| a.id.cmp(&b.id));
    check_unique("area", raw.areas.iter().map(|a| &a.id))?;

    // Interior rings given directly on an area become anonymous obstacles.
    for area in &mut raw.areas {
        for (k, hole) in area.holes.drain(..).enumerate() {
            raw.obstacles.push(RawObstacle {
                id: format!("{}-hole-{k}", area.id),
                ring: hole,
                attributes: BTreeMap::new(),
            });
        }
    }
    raw.obstacles.sort_by(|a, b| a.id.cmp(&b.id));
    check_unique("obstacle", raw.obstacles.iter().map(|o| &o.id))?;
    raw.gates.sort_by(|a, b| a.0.cmp(&b.0));
    check_unique("gate", raw.gates.iter().map(|g| &g.0))?;
    raw.connectors.sort_by(|a, b| a.0.cmp(&b.0));
    check_unique("connector", raw.connectors.iter().map(|c| &c.0))?;
    for field in &mut raw.fields {
        field.zones.sort_by(|a, b| a.id.cmp(&b.id));
        if !field.kind.is_valid(field.default) {
            return Err(SceneError::invalid(field.kind.name(), "default out of range"));
        }
        for z in &field.zones {
            if !field.kind.is_valid(z.value) {
                return Err(SceneError::invalid(z.id.clone(), "value out of range"));
            }
        }
    }
    raw.fields.sort_by_key(|f| f.kind);

    for i in 0..raw.areas.len() {
        for j in (i + 1)..raw.areas.len() {
            if areas_overlap(&raw.areas[i].outer, &raw.areas[j].outer) {
                return Err(SceneError::invalid(
                    raw.areas[j].id.clone(),
                    format!("overlaps area '{}'", raw.areas[i].id),
                ));
            }
        }
    }

    let mut obstacles = Vec::with_capacity(raw.obstacles.len());
    for o in raw.obstacles {
        let outer_of = |a: &RawArea| point_in_ring(&o.ring.vertices()[0], &a.outer, BOUNDARY_EPS);
        let area = raw
            .areas
            .iter()
            .position(|a| outer_of(a) == Containment::Inside)
            .ok_or_else(|| SceneError::invalid(o.id.clone(), "obstacle is not inside any area"))?;
        obstacles.push(Obstacle {
            id: o.id,
            mbr: o.ring.mbr(),
            boundary: o.ring,
            area,
            attributes: o.attributes,
        });
    }

    let mut areas = Vec::with_capacity(raw.areas.len());
    for (ai, a) in raw.areas.into_iter().enumerate() {
        let members: Vec<usize> = obstacles
            .iter()
            .enumerate()
            .filter(|(_, o)| o.area == ai)
            .map(|(k, _)| k)
            .collect();
        let holes: Vec<Ring> = members.iter().map(|&k| obstacles[k].boundary.clone()).collect();
        let polygon = PolygonWithHoles::new(a.outer, holes).map_err(|e| match e {
            GeometryError::HoleOutsideOuter { index } => SceneError::invalid(
                obstacles[members[index]].id.clone(),
                "obstacle must lie strictly inside its area",
            ),
            GeometryError::HolesOverlap { first, second } => SceneError::invalid(
                obstacles[members[second]].id.clone(),
                format!("overlaps obstacle '{}'", obstacles[members[first]].id),
            ),
            other => SceneError::invalid(a.id.clone(), other.to_string()),
        })?;
        // Holes are stored clockwise; keep obstacle boundaries identical.
        for (k, &oi) in members.iter().enumerate() {
            obstacles[oi].boundary = polygon.holes()[k].clone();
        }
        areas.push(Area { id: a.id, polygon, hole_obstacles: members });
    }

    let mut gates = Vec::with_capacity(raw.gates.len());
    for (id, p) in raw.gates {
        let (area, d) = areas
            .iter()
            .enumerate()
            .map(|(k, a)| (k, a.polygon.outer().distance_to_point(&p)))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if d > ATTACH_TOLERANCE {
            return Err(SceneError::invalid(id, format!("gate is {d:.3} m from the nearest area boundary")));
        }
        let center = match point_in_polygon(&p, &areas[area].polygon, BOUNDARY_EPS) {
            Containment::Outside => areas[area].polygon.outer().closest_point(&p),
            _ => p,
        };
        gates.push(Gate { id, center, area });
    }

    let mut connectors = Vec::with_capacity(raw.connectors.len());
    for (id, segment) in raw.connectors {
        for end in [segment.a, segment.b] {
            let on_area = areas
                .iter()
                .any(|a| a.polygon.outer().distance_to_point(&end) <= ATTACH_TOLERANCE);
            let on_gate = gates.iter().any(|g| g.center.distance(&end) <= ATTACH_TOLERANCE);
            if !on_area && !on_gate {
                return Err(SceneError::invalid(id, "connector endpoint is not on an area boundary or gate"));
            }
        }
        connectors.push(Connector { id, segment });
    }

    Ok(SceneModel {
        areas,
        obstacles,
        gates,
        connectors,
        fields: raw.fields,
        projection,
    })
}
