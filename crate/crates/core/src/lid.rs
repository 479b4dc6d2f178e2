//! Intrinsic-dimension estimators: box counting, the two-radius growth
//! exponent, and the maximum-likelihood nearest-neighbor LID.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{ShapeSpec, SurfaceDistance};
use crate::seed::Seed;
use crate::stats::{linear_fit, median};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LidError {
    #[error("point cloud needs at least {min} points, got {got}")]
    TooFewPoints { min: usize, got: usize },
    #[error("coordinate count {len} is not a multiple of dimension {dim}")]
    Ragged { len: usize, dim: usize },
    #[error("coordinate {index} is not finite")]
    NonFinite { index: usize },
    #[error("point has dimension {got}, cloud has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("all points coincide")]
    Degenerate,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("ball of radius {radius} holds {count} points, need at least {min}")]
    SparseBall { radius: f64, count: usize, min: usize },
    #[error("only {usable} neighbors at nonzero distance ({excluded} coincident with the query), need {k}")]
    CoincidentNeighbors { k: usize, usable: usize, excluded: usize },
    #[error("all {k} nearest neighbors are equidistant; the estimate is unbounded")]
    Equidistant { k: usize },
    #[error("the {0} group is empty")]
    EmptyPartition(&'static str),
}

pub type Result<T> = std::result::Result<T, LidError>;

/// Points of a common ambient dimension, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || !coords.len().is_multiple_of(dim) {
            return Err(LidError::Ragged { len: coords.len(), dim });
        }
        if coords.len() / dim < 2 {
            return Err(LidError::TooFewPoints { min: 2, got: coords.len() / dim });
        }
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(LidError::NonFinite { index });
        }
        Ok(Self { dim, coords })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(LidError::DimensionMismatch { expected: dim, got: r.len() });
        }
        Self::new(dim, rows.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(LidError::DimensionMismatch { expected: self.dim, got: p.len() });
        }
        Ok(())
    }
}

/// `count` points uniform on `[0, 1]^m`, occupying the first `m` coordinates
/// of `ambient`-space with the rest zero.
pub fn cube_flat(m: usize, ambient: usize, count: usize, seed: Seed) -> Result<PointCloud> {
    if m == 0 || m > ambient {
        return Err(LidError::InvalidParameter(format!("need 1 <= m <= ambient, got m = {m}, ambient = {ambient}")));
    }
    let mut rng = seed.rng();
    let coords = (0..count * ambient)
        .map(|i| if i % ambient < m { rng.random::<f64>() } else { 0.0 })
        .collect();
    PointCloud::new(ambient, coords)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LidMethod {
    BoxCounting,
    TwoRadius,
    KnnMle,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LidSupport {
    /// `(epsilon, occupied cells)` per level.
    BoxCounts(Vec<(f64, usize)>),
    Radii { r1: f64, count1: usize, r2: f64, count2: usize },
    Neighbors { k: usize, excluded: usize, r_k: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LidEstimate {
    pub value: f64,
    pub method: LidMethod,
    pub support: LidSupport,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Slope of `ln N(eps)` against `ln(1/eps)`, where `N(eps)` counts the cells
/// of a side-`eps` grid anchored at the cloud's minimum corner that hold at
/// least one point.
pub fn box_counting_dimension(cloud: &PointCloud, epsilons: &[f64]) -> Result<LidEstimate> {
    if cloud.len() < 100 {
        return Err(LidError::TooFewPoints { min: 100, got: cloud.len() });
    }
    if epsilons.len() < 4 {
        return Err(LidError::InvalidParameter("box counting needs at least 4 epsilons".into()));
    }
    if epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) || epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(LidError::InvalidParameter("epsilons must be positive and strictly decreasing".into()));
    }
    if epsilons[0] / epsilons[epsilons.len() - 1] < 4.0 {
        return Err(LidError::InvalidParameter("epsilons must span at least two octaves".into()));
    }
    let dim = cloud.dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in cloud.points() {
        for i in 0..dim {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    if lo == hi {
        return Err(LidError::Degenerate);
    }
    let counts: Vec<(f64, usize)> = epsilons
        .par_iter()
        .map(|&eps| {
            let cells: HashSet<Vec<i64>> = cloud
                .points()
                .map(|p| p.iter().zip(&lo).map(|(x, l)| ((x - l) / eps).floor() as i64).collect())
                .collect();
            (eps, cells.len())
        })
        .collect();
    let xs: Vec<f64> = counts.iter().map(|(e, _)| -e.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|(_, n)| (*n as f64).ln()).collect();
    let fit = linear_fit(&xs, &ys).ok_or(LidError::Degenerate)?;
    Ok(LidEstimate { value: fit.slope, method: LidMethod::BoxCounting, support: LidSupport::BoxCounts(counts) })
}

/// Occupancy above which [`box_counting_auto`] stops refining: the finest
/// grid used has at most this many occupied cells per cloud point.
pub const SATURATION: f64 = 1.0 / 3.0;

/// Box counting on grids of `k` cells along the cloud's widest extent,
/// `k = 1, 2, 3, 4, 5, 6, 8, 10, ...` (growing by about 5/4), stopping
/// before the occupied-cell count exceeds `SATURATION * len`. Needs at
/// least four grids spanning two octaves.
pub fn box_counting_auto(cloud: &PointCloud) -> Result<LidEstimate> {
    let dim = cloud.dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in cloud.points() {
        for i in 0..dim {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let extent = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max);
    if extent <= 0.0 {
        return Err(LidError::Degenerate);
    }
    let limit = SATURATION * cloud.len() as f64;
    let width = extent * (1.0 + 1e-9);
    let mut eps = Vec::new();
    let mut k = 1usize;
    loop {
        let e = width / k as f64;
        let cells: HashSet<Vec<i64>> = cloud
            .points()
            .map(|p| p.iter().zip(&lo).map(|(x, l)| ((x - l) / e).floor() as i64).collect())
            .collect();
        if cells.len() as f64 > limit {
            break;
        }
        eps.push(e);
        k = (k + 1).max(k * 5 / 4);
    }
    box_counting_dimension(cloud, &eps)
}

/// `ln(count2 / count1) / ln(r2 / r1)`.
pub fn two_radius_from_counts(r1: f64, count1: usize, r2: f64, count2: usize) -> Result<LidEstimate> {
    if !(r1 > 0.0 && r2 > r1 && r2.is_finite()) {
        return Err(LidError::InvalidParameter(format!("need 0 < R1 < R2, got R1 = {r1}, R2 = {r2}")));
    }
    if count1 == 0 {
        return Err(LidError::SparseBall { radius: r1, count: 0, min: 1 });
    }
    let value = (count2 as f64 / count1 as f64).ln() / (r2 / r1).ln();
    Ok(LidEstimate { value, method: LidMethod::TwoRadius, support: LidSupport::Radii { r1, count1, r2, count2 } })
}

/// Growth exponent of the closed-ball neighbor counts between two radii.
pub fn two_radius_dimension(cloud: &PointCloud, center: &[f64], r1: f64, r2: f64) -> Result<LidEstimate> {
    cloud.check_point(center)?;
    if !(r1 > 0.0 && r2 > r1 && r2.is_finite()) {
        return Err(LidError::InvalidParameter(format!("need 0 < R1 < R2, got R1 = {r1}, R2 = {r2}")));
    }
    let (mut c1, mut c2) = (0usize, 0usize);
    for p in cloud.points() {
        let d2 = squared_distance(p, center);
        c1 += (d2 <= r1 * r1) as usize;
        c2 += (d2 <= r2 * r2) as usize;
    }
    for (radius, count) in [(r1, c1), (r2, c2)] {
        if count < 5 {
            return Err(LidError::SparseBall { radius, count, min: 5 });
        }
    }
    two_radius_from_counts(r1, c1, r2, c2)
}

/// `-(1/k sum_i ln(r_i / r_k))^-1` from nonzero neighbor distances
/// `r_1 <= ... <= r_k`.
pub fn lid_from_distances(distances: &[f64]) -> Result<f64> {
    let k = distances.len();
    let r_k = distances[k - 1];
    let s: f64 = distances.iter().map(|r| (r / r_k).ln()).sum::<f64>() / k as f64;
    if s == 0.0 {
        return Err(LidError::Equidistant { k });
    }
    Ok(-1.0 / s)
}

/// Maximum-likelihood LID at `query` from its `k` nearest neighbors (exact
/// linear scan). Points at distance zero from the query are skipped and
/// reported in the support; ties are ordered by point index.
pub fn knn_lid(cloud: &PointCloud, query: &[f64], k: usize) -> Result<LidEstimate> {
    cloud.check_point(query)?;
    if k < 10 {
        return Err(LidError::InvalidParameter(format!("k = {k}, need k >= 10")));
    }
    if cloud.len() < k + 1 {
        return Err(LidError::TooFewPoints { min: k + 1, got: cloud.len() });
    }
    let mut d: Vec<(f64, usize)> = cloud.points().enumerate().map(|(i, p)| (squared_distance(p, query), i)).collect();
    let excluded = d.iter().filter(|(d2, _)| *d2 == 0.0).count();
    d.retain(|(d2, _)| *d2 > 0.0);
    if d.len() < k {
        return Err(LidError::CoincidentNeighbors { k, usable: d.len(), excluded });
    }
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    d.select_nth_unstable_by(k - 1, cmp);
    let mut nearest = d[..k].to_vec();
    nearest.sort_by(cmp);
    let radii: Vec<f64> = nearest.iter().map(|(d2, _)| d2.sqrt()).collect();
    let value = lid_from_distances(&radii)?;
    Ok(LidEstimate {
        value,
        method: LidMethod::KnnMle,
        support: LidSupport::Neighbors { k, excluded, r_k: radii[k - 1] },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LidGap {
    pub median_interior: f64,
    pub median_surface: f64,
    pub interior_queries: usize,
    pub surface_queries: usize,
}

/// Median knn LID of cloud points deeper than `band * radius` inside `shape`
/// against those within that band of its boundary. Points outside the shape
/// count as surface points. At most `max_queries` points per group are
/// queried, taken in cloud order.
pub fn surface_interior_lid_gap(cloud: &PointCloud, shape: &ShapeSpec, band: f64, k: usize, max_queries: usize) -> Result<LidGap> {
    if !(band > 0.0 && band < 0.5) {
        return Err(LidError::InvalidParameter(format!("band = {band}, need 0 < band < 0.5")));
    }
    if cloud.dim() != shape.dim() {
        return Err(LidError::DimensionMismatch { expected: shape.dim(), got: cloud.dim() });
    }
    if max_queries == 0 {
        return Err(LidError::InvalidParameter("max_queries must be positive".into()));
    }
    let cutoff = band * shape.radius();
    let (mut interior, mut surface) = (Vec::new(), Vec::new());
    for (i, p) in cloud.points().enumerate() {
        let deep = match shape.distance_to_surface(p) {
            Ok(SurfaceDistance::Inside(d)) => d > cutoff,
            _ => false,
        };
        let group = if deep { &mut interior } else { &mut surface };
        if group.len() < max_queries {
            group.push(i);
        }
    }
    if interior.is_empty() {
        return Err(LidError::EmptyPartition("interior"));
    }
    if surface.is_empty() {
        return Err(LidError::EmptyPartition("surface"));
    }
    let median_of = |idx: &[usize]| -> Result<f64> {
        let v: Vec<f64> = idx
            .par_iter()
            .map(|&i| knn_lid(cloud, cloud.point(i), k).map(|e| e.value))
            .collect::<Result<_>>()?;
        Ok(median(&v).expect("group is non-empty"))
    };
    Ok(LidGap {
        median_interior: median_of(&interior)?,
        median_surface: median_of(&surface)?,
        interior_queries: interior.len(),
        surface_queries: surface.len(),
    })
}
