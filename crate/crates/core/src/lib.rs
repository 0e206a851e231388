//! Wheelchair routing through open areas: visibility graphs over polygons
//! with holes, a hierarchical obstacle-exclusion router, a five-factor link
//! cost, trajectory similarity measures and cost-weight learning.

pub mod cli;
pub mod cost;
pub mod error;
pub mod geometry;
pub mod hierarchical;
pub mod learn;
pub mod route;
pub mod scene;
pub mod search;
pub mod trajectory;
pub mod visibility;

pub use error::RouteError;
