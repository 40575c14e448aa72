//! Seeded synthetic datasets for the two benchmark regimes: points clustered
//! around feature vertices and points scattered uniformly over the extent.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal, Poisson};

use crate::columnar::{build_feature_columns, Feature, FeatureColumns, FeatureKind, PointColumns};
use crate::error::{JoinError, Result};
use crate::geometry::Point2D;

/// Mean vertices per polyline, typical of short street segments.
pub const POLYLINE_MEAN_VERTICES: f64 = 2.4;
/// Mean vertices per polygon, typical of detailed region boundaries.
pub const POLYGON_MEAN_VERTICES: f64 = 280.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointLayout {
    /// Gaussian clusters centered on feature vertices.
    Clustered,
    /// Uniform over the extent.
    Scattered,
}

impl PointLayout {
    pub fn name(self) -> &'static str {
        match self {
            PointLayout::Clustered => "clustered",
            PointLayout::Scattered => "scattered",
        }
    }
}

impl fmt::Display for PointLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PointLayout {
    type Err = JoinError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clustered" => Ok(PointLayout::Clustered),
            "scattered" => Ok(PointLayout::Scattered),
            _ => Err(JoinError::usage(format!("unknown layout {s:?} (clustered, scattered)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub layout: PointLayout,
    pub shape: FeatureKind,
    pub point_count: usize,
    pub feature_count: usize,
    /// Mean vertices per feature, counting every ring.
    pub mean_vertices: f64,
    /// Share of polygons that get a hole; ignored for polylines.
    pub holes_fraction: f64,
    pub seed: u64,
    /// Side of the square extent `[0, extent]^2`.
    pub extent: f64,
    /// Standard deviation of a point cluster around its vertex.
    pub cluster_sigma: f64,
}

impl GenSpec {
    /// Defaults for a layout/shape pair: 2.4 vertices per polyline, 280 per
    /// polygon, a 1000 x 1000 extent, cluster sigma 1.
    pub fn new(layout: PointLayout, shape: FeatureKind, point_count: usize, feature_count: usize, seed: u64) -> Self {
        Self {
            layout,
            shape,
            point_count,
            feature_count,
            mean_vertices: match shape {
                FeatureKind::Polyline => POLYLINE_MEAN_VERTICES,
                FeatureKind::Polygon => POLYGON_MEAN_VERTICES,
            },
            holes_fraction: 0.0,
            seed,
            extent: 1000.0,
            cluster_sigma: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let min = self.shape.min_ring_vertices() as f64;
        if !(self.mean_vertices >= min && self.mean_vertices.is_finite()) {
            return Err(JoinError::usage(format!(
                "mean vertices must be at least {min}, got {}",
                self.mean_vertices
            )));
        }
        if !(0.0..=1.0).contains(&self.holes_fraction) {
            return Err(JoinError::usage(format!(
                "holes fraction must be within [0, 1], got {}",
                self.holes_fraction
            )));
        }
        if !(self.extent > 0.0 && self.extent.is_finite()) {
            return Err(JoinError::usage("extent must be positive"));
        }
        if !(self.cluster_sigma >= 0.0 && self.cluster_sigma.is_finite()) {
            return Err(JoinError::usage("cluster sigma must be non-negative"));
        }
        Ok(())
    }
}

/// Generate points and features. Identical specs give identical datasets.
pub fn generate(spec: &GenSpec) -> Result<(PointColumns, FeatureColumns)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let features: Vec<Feature> = (0..spec.feature_count)
        .map(|i| match spec.shape {
            FeatureKind::Polyline => random_walk(&mut rng, spec, i as u64),
            FeatureKind::Polygon => perturbed_circle(&mut rng, spec, i as u64),
        })
        .collect();

    let points = match spec.layout {
        PointLayout::Clustered if !features.is_empty() => clustered_points(&mut rng, spec, &features),
        _ => (0..spec.point_count)
            .map(|_| Point2D::new(rng.random_range(0.0..spec.extent), rng.random_range(0.0..spec.extent)))
            .collect(),
    };

    Ok((
        PointColumns::from_points(&points)?,
        build_feature_columns(spec.shape, &features)?,
    ))
}

/// Typical spacing between neighbouring features.
fn feature_spacing(spec: &GenSpec) -> f64 {
    spec.extent / (spec.feature_count.max(1) as f64).sqrt()
}

fn random_walk<R: Rng>(rng: &mut R, spec: &GenSpec, id: u64) -> Feature {
    let v = spec.mean_vertices;
    // at least two vertices once the mean allows it; the Poisson tail keeps the mean exact
    let base = if v >= 2.0 { 2.0 } else { 1.0 };
    let extra = if v > base {
        Poisson::new(v - base).unwrap().sample(rng) as usize
    } else {
        0
    };
    let n = base as usize + extra;

    let step = feature_spacing(spec) * 0.5;
    let clamp = |c: f64| c.clamp(0.0, spec.extent);
    let mut x = rng.random_range(0.0..spec.extent);
    let mut y = rng.random_range(0.0..spec.extent);
    let mut heading = rng.random_range(0.0..TAU);
    let mut ring = Vec::with_capacity(n);
    ring.push(Point2D::new(x, y));
    for _ in 1..n {
        heading += rng.random_range(-0.8..0.8);
        let len = step * rng.random_range(0.5..1.5);
        x = clamp(x + len * heading.cos());
        y = clamp(y + len * heading.sin());
        ring.push(Point2D::new(x, y));
    }
    Feature::new(id, vec![ring])
}

/// Star-shaped ring around `(cx, cy)`: strictly increasing angles with radius jitter.
fn star_ring<R: Rng>(rng: &mut R, cx: f64, cy: f64, radius: f64, jitter: f64, n: usize) -> Vec<Point2D> {
    let phase = rng.random_range(0.0..TAU);
    (0..n)
        .map(|k| {
            let a = phase + TAU * (k as f64 + rng.random_range(-0.3..0.3)) / n as f64;
            let r = radius * (1.0 + rng.random_range(-jitter..jitter));
            Point2D::new(cx + r * a.cos(), cy + r * a.sin())
        })
        .collect()
}

fn perturbed_circle<R: Rng>(rng: &mut R, spec: &GenSpec, id: u64) -> Feature {
    let v = spec.mean_vertices;
    let n = ((v * rng.random_range(0.5..1.5)).round() as usize).max(3);
    let radius = feature_spacing(spec) * rng.random_range(0.3..0.7);
    let cx = rng.random_range(0.0..spec.extent);
    let cy = rng.random_range(0.0..spec.extent);

    let with_hole = n >= 6 && rng.random_bool(spec.holes_fraction);
    if !with_hole {
        return Feature::new(id, vec![star_ring(rng, cx, cy, radius, 0.2, n)]);
    }
    // outer radius stays above 0.8r, hole radius below 0.55r
    let hole_n = (n / 4).max(3);
    let outer = star_ring(rng, cx, cy, radius, 0.2, n - hole_n);
    let hole_radius = radius * rng.random_range(0.2..0.5);
    let mut hole = star_ring(rng, cx, cy, hole_radius, 0.1, hole_n);
    hole.reverse();
    Feature::new(id, vec![outer, hole])
}

fn clustered_points<R: Rng>(rng: &mut R, spec: &GenSpec, features: &[Feature]) -> Vec<Point2D> {
    let noise = Normal::new(0.0, spec.cluster_sigma).unwrap();
    (0..spec.point_count)
        .map(|_| {
            let f = &features[rng.random_range(0..features.len())];
            let ring = &f.rings[0];
            let c = ring[rng.random_range(0..ring.len())];
            Point2D::new(c.x + noise.sample(rng), c.y + noise.sample(rng))
        })
        .collect()
}
