use serde::{Deserialize, Serialize};

use super::SceneError;
use crate::geometry::Point;

/// Mean earth radius, meters.
const EARTH_RADIUS: f64 = 6_371_008.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Crs {
    /// Planar meters, used as-is.
    LocalM,
    /// Longitude/latitude degrees, projected at load.
    Wgs84,
}

impl Crs {
    pub fn parse(s: &str) -> Option<Crs> {
        match s {
            "local-m" => Some(Crs::LocalM),
            "wgs84" => Some(Crs::Wgs84),
            _ => None,
        }
    }
}

/// Spherical transverse Mercator centred on a reference meridian and
/// latitude. Distortion stays well under 1e-4 across a few kilometres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub lon0: f64,
    pub lat0: f64,
}

impl Projection {
    pub fn centered_on(positions: &[(f64, f64)]) -> Result<Projection, SceneError> {
        let n = positions.len() as f64;
        let lon0 = positions.iter().map(|p| p.0).sum::<f64>() / n;
        let lat0 = positions.iter().map(|p| p.1).sum::<f64>() / n;
        if !(-180.0..=180.0).contains(&lon0) || !(-85.0..=85.0).contains(&lat0) {
            return Err(SceneError::Parse(format!("centroid ({lon0}, {lat0}) is not a valid lon/lat")));
        }
        Ok(Projection { lon0, lat0 })
    }

    pub fn project(&self, lon: f64, lat: f64) -> Point {
        let lam = (lon - self.lon0).to_radians();
        let phi = lat.to_radians();
        let b = phi.cos() * lam.sin();
        let x = EARTH_RADIUS * b.atanh();
        let y = EARTH_RADIUS * (phi.tan().atan2(lam.cos()) - self.lat0.to_radians());
        Point::new(x, y)
    }

    pub fn unproject(&self, p: &Point) -> (f64, f64) {
        let d = p.y / EARTH_RADIUS + self.lat0.to_radians();
        let xr = p.x / EARTH_RADIUS;
        let lat = (d.sin() / xr.cosh()).asin();
        let lon = self.lon0.to_radians() + xr.sinh().atan2(d.cos());
        (lon.to_degrees(), lat.to_degrees())
    }
}
