//! Five-factor link cost: length, steepest slope, narrowest width, poorest
//! surface and weather, combined as a length-proportional weighted average of
//! unit-interval penalties.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{segment_distance, Segment, BOUNDARY_EPS};
use crate::scene::{sample_field, FieldKind, SceneModel};

/// Guard for the length coefficient used as the weight divisor.
pub const MIN_LENGTH_COEFFICIENT: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum CostError {
    #[error("invalid cost coefficients: {0}")]
    Coefficients(String),
    #[error("invalid cost model: {0}")]
    Model(String),
    #[error("cannot read cost config: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse cost config: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkFeatures {
    pub length: f64,
    pub max_slope: f64,
    pub min_width: f64,
    pub worst_surface: f64,
    pub weather: f64,
}

/// Non-negative coefficients for (length, slope, width, surface, weather)
/// summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightCoefficients {
    pub length: f64,
    pub slope: f64,
    pub width: f64,
    pub surface: f64,
    pub weather: f64,
}

impl WeightCoefficients {
    pub fn new(length: f64, slope: f64, width: f64, surface: f64, weather: f64) -> Result<Self, CostError> {
        let c = WeightCoefficients { length, slope, width, surface, weather };
        let arr = c.as_array();
        if arr.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(CostError::Coefficients(format!("{arr:?} must be finite and non-negative")));
        }
        let sum: f64 = arr.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CostError::Coefficients(format!("{arr:?} sums to {sum}, expected 1")));
        }
        Ok(c)
    }

    /// Rescales arbitrary non-negative weights to sum to one; all-zero input
    /// maps to uniform coefficients.
    pub fn normalized(raw: [f64; 5]) -> Result<Self, CostError> {
        if raw.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(CostError::Coefficients(format!("{raw:?} must be finite and non-negative")));
        }
        let sum: f64 = raw.iter().sum();
        let c = if sum > 0.0 { raw.map(|v| v / sum) } else { [0.2; 5] };
        Ok(WeightCoefficients {
            length: c[0],
            slope: c[1],
            width: c[2],
            surface: c[3],
            weather: c[4],
        })
    }

    /// Pure shortest-distance routing.
    pub fn pure_length() -> Self {
        WeightCoefficients { length: 1.0, slope: 0.0, width: 0.0, surface: 0.0, weather: 0.0 }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.length, self.slope, self.width, self.surface, self.weather]
    }
}

impl Default for WeightCoefficients {
    /// Surface and slope dominate, then width, length and weather.
    fn default() -> Self {
        WeightCoefficients { length: 0.15, slope: 0.25, width: 0.20, surface: 0.30, weather: 0.10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub coefficients: WeightCoefficients,
    /// Steepest traversable grade, percent. Steeper links are inadmissible.
    pub max_slope_pct: f64,
    /// Width at and above which the width penalty vanishes, meters.
    pub ref_width_m: f64,
    /// Absolute minimum traversable width, meters.
    pub width_floor_m: f64,
    /// Feature sampling interval along links, meters.
    pub sample_interval_m: f64,
    /// Scene diameter; informational, filled from the scene when absent.
    pub scene_diameter_m: Option<f64>,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            coefficients: WeightCoefficients::default(),
            max_slope_pct: 10.0,
            ref_width_m: 1.5,
            width_floor_m: 0.75,
            sample_interval_m: 1.0,
            scene_diameter_m: None,
        }
    }
}

/// Flat on-disk form of [`CostModel`] (JSON or TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    pub c_length: f64,
    pub c_slope: f64,
    pub c_width: f64,
    pub c_surface: f64,
    pub c_weather: f64,
    #[serde(default = "defaults::max_slope")]
    pub max_slope_pct: f64,
    #[serde(default = "defaults::ref_width")]
    pub ref_width_m: f64,
    #[serde(default = "defaults::width_floor")]
    pub width_floor_m: f64,
    #[serde(default = "defaults::sample_interval")]
    pub sample_interval_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene_diameter_m: Option<f64>,
}

mod defaults {
    pub fn max_slope() -> f64 {
        10.0
    }
    pub fn ref_width() -> f64 {
        1.5
    }
    pub fn width_floor() -> f64 {
        0.75
    }
    pub fn sample_interval() -> f64 {
        1.0
    }
}

impl CostModel {
    pub fn pure_length() -> Self {
        CostModel { coefficients: WeightCoefficients::pure_length(), ..CostModel::default() }
    }

    pub fn with_coefficients(coefficients: WeightCoefficients) -> Self {
        CostModel { coefficients, ..CostModel::default() }
    }

    pub fn validate(&self) -> Result<(), CostError> {
        let c = &self.coefficients;
        WeightCoefficients::new(c.length, c.slope, c.width, c.surface, c.weather)?;
        let positive = [
            ("max_slope_pct", self.max_slope_pct),
            ("ref_width_m", self.ref_width_m),
            ("width_floor_m", self.width_floor_m),
            ("sample_interval_m", self.sample_interval_m),
            ("scene_diameter_m", self.scene_diameter_m.unwrap_or(1.0)),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(CostError::Model(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn from_config(cfg: &CostConfig) -> Result<Self, CostError> {
        let model = CostModel {
            coefficients: WeightCoefficients::new(
                cfg.c_length,
                cfg.c_slope,
                cfg.c_width,
                cfg.c_surface,
                cfg.c_weather,
            )?,
            max_slope_pct: cfg.max_slope_pct,
            ref_width_m: cfg.ref_width_m,
            width_floor_m: cfg.width_floor_m,
            sample_interval_m: cfg.sample_interval_m,
            scene_diameter_m: cfg.scene_diameter_m,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn to_config(&self) -> CostConfig {
        let c = &self.coefficients;
        CostConfig {
            c_length: c.length,
            c_slope: c.slope,
            c_width: c.width,
            c_surface: c.surface,
            c_weather: c.weather,
            max_slope_pct: self.max_slope_pct,
            ref_width_m: self.ref_width_m,
            width_floor_m: self.width_floor_m,
            sample_interval_m: self.sample_interval_m,
            scene_diameter_m: self.scene_diameter_m,
        }
    }

    /// Parses a flat config; TOML when `toml` is set, JSON otherwise.
    pub fn parse(text: &str, toml: bool) -> Result<Self, CostError> {
        let cfg: CostConfig = if toml {
            ::toml::from_str(text).map_err(|e| CostError::Parse(e.to_string()))?
        } else {
            serde_json::from_str(text).map_err(|e| CostError::Parse(e.to_string()))?
        };
        CostModel::from_config(&cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CostError> {
        let text = std::fs::read_to_string(path)?;
        let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        CostModel::parse(&text, is_toml)
    }
}

/// Splits `seg` wherever it meets a zone boundary, so every piece carries
/// constant feature values. Pieces are ordered from `seg.a` to `seg.b`.
pub fn split_atomic(seg: &Segment, scene: &SceneModel) -> Vec<Segment> {
    split_params(seg, scene)
        .windows(2)
        .map(|w| Segment { a: seg.point_at(w[0]), b: seg.point_at(w[1]) })
        .collect()
}

fn split_params(seg: &Segment, scene: &SceneModel) -> Vec<f64> {
    let len = seg.length();
    let t_eps = BOUNDARY_EPS / len;
    let seg_box = seg.mbr().expanded(BOUNDARY_EPS);
    let mut ts = vec![0.0, 1.0];
    for field in &scene.fields {
        for zone in &field.zones {
            if !zone.ring.mbr().intersects(&seg_box) {
                continue;
            }
            for edge in zone.ring.edges() {
                if segment_distance(seg, &edge) > BOUNDARY_EPS {
                    continue;
                }
                match seg.line_intersection_param(&edge) {
                    Some(t) => ts.push(t.clamp(0.0, 1.0)),
                    None => {
                        ts.push(seg.project(&edge.a));
                        ts.push(seg.project(&edge.b));
                    }
                }
            }
        }
    }
    ts.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<f64> = Vec::with_capacity(ts.len());
    for t in ts {
        match out.last() {
            Some(&last) if t - last <= t_eps => {}
            _ => out.push(t),
        }
    }
    // Snap the tail onto 1 so pieces concatenate exactly.
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    if out.len() == 1 {
        out.insert(0, 0.0);
    }
    out
}

/// Worst-case features along `seg`. Every atomic piece is sampled at its
/// midpoint and at interior points no more than `interval` apart; contacts
/// of zero length with a zone (touching at a piece end) do not count.
pub fn link_features(seg: &Segment, scene: &SceneModel, interval: f64) -> LinkFeatures {
    let params = split_params(seg, scene);
    let len = seg.length();
    let mut worst = FieldKind::ALL.map(|k| match k {
        FieldKind::Slope => 0.0,
        _ => f64::INFINITY,
    });
    let mut sample = |t: f64| {
        let p = seg.point_at(t);
        for (slot, kind) in FieldKind::ALL.iter().enumerate() {
            let v = sample_field(scene.field(*kind), &p);
            worst[slot] = kind.worst(worst[slot], v);
        }
    };
    for w in params.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        sample(0.5 * (t0 + t1));
        let n = ((t1 - t0) * len / interval).ceil() as usize;
        for k in 1..n {
            sample(t0 + (t1 - t0) * k as f64 / n as f64);
        }
    }
    LinkFeatures {
        length: len,
        max_slope: worst[0],
        min_width: worst[1],
        worst_surface: worst[2],
        weather: worst[3],
    }
}

/// Unit-interval penalties (slope, width, surface, weather).
pub fn penalties(f: &LinkFeatures, m: &CostModel) -> [f64; 4] {
    [
        (f.max_slope / m.max_slope_pct).min(1.0),
        (1.0 - f.min_width / m.ref_width_m).clamp(0.0, 1.0),
        1.0 - f.worst_surface,
        1.0 - f.weather,
    ]
}

/// Link weight in length-like units; `f64::INFINITY` marks an inadmissible
/// link (too steep or too narrow).
pub fn link_weight(f: &LinkFeatures, m: &CostModel) -> f64 {
    if f.max_slope > m.max_slope_pct || f.min_width < m.width_floor_m {
        return f64::INFINITY;
    }
    let c = &m.coefficients;
    let p = penalties(f, m);
    let base = c.length.max(MIN_LENGTH_COEFFICIENT);
    let mix = base + c.slope * p[0] + c.width * p[1] + c.surface * p[2] + c.weather * p[3];
    f.length * mix / base
}
