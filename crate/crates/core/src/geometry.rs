//! Bounded n-dimensional bodies and the closed-form quantities attached to
//! them: shell probabilities, expected distance to the boundary, dilation
//! volume ratios and the log-domain image-counting recursion.
//!
//! A body stands in for the set of images a classifier assigns to one class.
//! Distances are in image-intensity units.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid {name} = {value}: expected {expected}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("point has dimension {found}, shape has dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("pixel count overflowed while advancing the counting state")]
    Overflow,
}

pub type Result<T> = std::result::Result<T, GeometryError>;

fn invalid(name: &'static str, value: f64, expected: &'static str) -> GeometryError {
    GeometryError::InvalidParameter { name, value, expected }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShapeKind {
    Ball,
    Box,
    Ellipsoid,
}

/// A ball, an axis-aligned box or an axis-aligned ellipsoid centred at the
/// origin.
///
/// `sizes` holds the radius (ball, one entry), the per-axis half-widths (box)
/// or the per-axis semi-axes (ellipsoid).
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSpec {
    kind: ShapeKind,
    dim: usize,
    sizes: Vec<f64>,
}

fn check_sizes(name: &'static str, sizes: &[f64]) -> Result<()> {
    for &s in sizes {
        if !(s.is_finite() && s > 0.0) {
            return Err(invalid(name, s, "a finite value > 0"));
        }
    }
    Ok(())
}

impl ShapeSpec {
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", 0.0, "dim >= 1"));
        }
        check_sizes("radius", &[radius])?;
        Ok(Self { kind: ShapeKind::Ball, dim, sizes: vec![radius] })
    }

    pub fn axis_box(half_widths: Vec<f64>) -> Result<Self> {
        if half_widths.is_empty() {
            return Err(invalid("dim", 0.0, "dim >= 1"));
        }
        check_sizes("half-width", &half_widths)?;
        Ok(Self { kind: ShapeKind::Box, dim: half_widths.len(), sizes: half_widths })
    }

    pub fn ellipsoid(semi_axes: Vec<f64>) -> Result<Self> {
        if semi_axes.is_empty() {
            return Err(invalid("dim", 0.0, "dim >= 1"));
        }
        check_sizes("semi-axis", &semi_axes)?;
        Ok(Self { kind: ShapeKind::Ellipsoid, dim: semi_axes.len(), sizes: semi_axes })
    }

    pub fn kind(&self) -> ShapeKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    /// Size along axis `i` (the radius for every axis of a ball).
    pub fn axis_size(&self, i: usize) -> f64 {
        match self.kind {
            ShapeKind::Ball => self.sizes[0],
            _ => self.sizes[i],
        }
    }

    /// Half the maximum pairwise distance between points of the body.
    pub fn radius(&self) -> f64 {
        match self.kind {
            ShapeKind::Ball => self.sizes[0],
            ShapeKind::Box => self.sizes.iter().map(|h| h * h).sum::<f64>().sqrt(),
            ShapeKind::Ellipsoid => self.sizes.iter().copied().fold(0.0, f64::max),
        }
    }

    /// Natural log of the n-dimensional volume.
    pub fn log_volume(&self) -> f64 {
        match self.kind {
            ShapeKind::Ball => log_unit_ball_volume(self.dim) + self.dim as f64 * self.sizes[0].ln(),
            ShapeKind::Box => self.sizes.iter().map(|h| (2.0 * h).ln()).sum(),
            ShapeKind::Ellipsoid => {
                log_unit_ball_volume(self.dim) + self.sizes.iter().map(|a| a.ln()).sum::<f64>()
            }
        }
    }

    /// The ball of the same dimension and volume.
    pub fn equal_volume_ball(&self) -> ShapeSpec {
        let n = self.dim as f64;
        let r = ((self.log_volume() - log_unit_ball_volume(self.dim)) / n).exp();
        ShapeSpec { kind: ShapeKind::Ball, dim: self.dim, sizes: vec![r] }
    }

    /// Ratio of the largest to the smallest axis size (1 for a ball).
    pub fn aspect_ratio(&self) -> f64 {
        let max = self.sizes.iter().copied().fold(0.0, f64::max);
        let min = self.sizes.iter().copied().fold(f64::INFINITY, f64::min);
        max / min
    }

    fn check_dim(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim {
            return Err(GeometryError::DimensionMismatch { expected: self.dim, found: point.len() });
        }
        Ok(())
    }

    pub fn contains(&self, point: &[f64]) -> Result<bool> {
        Ok(matches!(self.distance_to_surface(point)?, SurfaceDistance::Inside(_)))
    }

    /// Euclidean distance from an interior point to the boundary.
    ///
    /// Ball and box are exact. The ellipsoid nearest-point problem is solved
    /// on its one-dimensional multiplier equation (see [`ellipsoid_distance`]).
    pub fn distance_to_surface(&self, point: &[f64]) -> Result<SurfaceDistance> {
        self.check_dim(point)?;
        let d = match self.kind {
            ShapeKind::Ball => {
                let r = self.sizes[0];
                let norm = point.iter().map(|x| x * x).sum::<f64>().sqrt();
                (norm <= r).then_some(r - norm)
            }
            ShapeKind::Box => {
                let mut gap = f64::INFINITY;
                for (x, h) in point.iter().zip(&self.sizes) {
                    let g = h - x.abs();
                    if g < 0.0 {
                        return Ok(SurfaceDistance::Outside);
                    }
                    gap = gap.min(g);
                }
                Some(gap)
            }
            ShapeKind::Ellipsoid => ellipsoid_distance(&self.sizes, point),
        };
        Ok(d.map_or(SurfaceDistance::Outside, SurfaceDistance::Inside))
    }
}

/// Result of a boundary-distance query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceDistance {
    /// Interior or boundary point, with its distance to the boundary.
    Inside(f64),
    Outside,
}

impl SurfaceDistance {
    pub fn inside(self) -> Option<f64> {
        match self {
            SurfaceDistance::Inside(d) => Some(d),
            SurfaceDistance::Outside => None,
        }
    }
}

/// `ln` of the volume of the unit n-ball, `(n/2) ln(pi) - ln Gamma(n/2 + 1)`.
pub fn log_unit_ball_volume(n: usize) -> f64 {
    let half = n as f64 / 2.0;
    half * std::f64::consts::PI.ln() - libm::lgamma(half + 1.0)
}

const ELLIPSOID_TOL: f64 = 1e-10;
const ELLIPSOID_MAX_ITER: usize = 200;

/// Distance from a point to the boundary of the ellipsoid `sum (x_i/a_i)^2 <= 1`,
/// or `None` when the point is outside.
///
/// The nearest boundary point is `z_i = a_i^2 x_i / (a_i^2 + t)` where `t` is
/// the root in `(-a_min^2, 0]` of
/// `F(t) = sum (a_i x_i / (a_i^2 + t))^2 - 1`. `F` is convex and decreasing
/// there, so Newton steps are kept inside a shrinking bracket and fall back to
/// bisection when they leave it. When every coordinate along the shortest
/// axes is exactly zero the root can sit at the pole `-a_min^2`, which is
/// handled in closed form.
pub fn ellipsoid_distance(semi_axes: &[f64], point: &[f64]) -> Option<f64> {
    let level: f64 = point.iter().zip(semi_axes).map(|(x, a)| (x / a).powi(2)).sum();
    if level > 1.0 {
        return None;
    }
    if level == 1.0 {
        return Some(0.0);
    }
    let y: Vec<f64> = point.iter().map(|x| x.abs()).collect();
    let a_min = semi_axes.iter().copied().fold(f64::INFINITY, f64::min);
    let a_min2 = a_min * a_min;

    let on_min_axes_zero = semi_axes.iter().zip(&y).all(|(a, yi)| *a != a_min || *yi == 0.0);
    if on_min_axes_zero {
        let mut reduced = 0.0;
        for (a, yi) in semi_axes.iter().zip(&y) {
            if *a != a_min {
                reduced += (a * yi / (a * a - a_min2)).powi(2);
            }
        }
        if reduced <= 1.0 {
            // Nearest point lies on the pole; put the remaining mass on one
            // shortest axis.
            let mut dist2 = 0.0;
            let mut placed = false;
            for (a, yi) in semi_axes.iter().zip(&y) {
                let z = if *a != a_min {
                    a * a * yi / (a * a - a_min2)
                } else if !placed {
                    placed = true;
                    a_min * (1.0 - reduced).sqrt()
                } else {
                    0.0
                };
                dist2 += (z - yi).powi(2);
            }
            return Some(dist2.sqrt());
        }
    }

    let f_and_df = |t: f64| {
        let mut f = -1.0;
        let mut df = 0.0;
        for (a, yi) in semi_axes.iter().zip(&y) {
            let denom = a * a + t;
            let q = a * yi / denom;
            f += q * q;
            df -= 2.0 * q * q / denom;
        }
        (f, df)
    };

    let mut lo = -a_min2;
    let mut hi = 0.0;
    let mut t = 0.0;
    for _ in 0..ELLIPSOID_MAX_ITER {
        let (f, df) = f_and_df(t);
        if f == 0.0 {
            break;
        }
        if f > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let mut next = t - f / df;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let step = (next - t).abs();
        t = next;
        // Newton converges quadratically, so run it down to rounding level;
        // the distance is then accurate far beyond ELLIPSOID_TOL.
        if step <= 4.0 * f64::EPSILON * a_min2.max(t.abs()) || hi - lo <= ELLIPSOID_TOL * a_min2 * 1e-6 {
            break;
        }
    }
    let s: f64 = semi_axes
        .iter()
        .zip(&y)
        .map(|(a, yi)| (yi / (a * a + t)).powi(2))
        .sum();
    Some(t.abs() * s.sqrt())
}

/// Relative perturbation bound `alpha` in `(0, 1]` with an optional absolute
/// bound `beta` in intensity units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellQuery {
    alpha: f64,
    beta: Option<f64>,
}

impl ShellQuery {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self { alpha, beta: None })
    }

    pub fn with_beta(self, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(invalid("beta", beta, "a finite value >= 0"));
        }
        Ok(Self { beta: Some(beta), ..self })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid("alpha", alpha, "0 < alpha <= 1"));
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("n", 0.0, "n >= 1"));
    }
    Ok(())
}

/// Probability that a uniform point of an n-ball lies within `alpha * R` of
/// its boundary: `1 - (1 - alpha)^n`.
///
/// Evaluated as `-expm1(n * log1p(-alpha))`, which keeps full relative
/// precision for tiny `alpha` and very large `n`.
pub fn shell_probability(n: usize, alpha: f64) -> Result<f64> {
    check_n(n)?;
    check_alpha(alpha)?;
    Ok(-(n as f64 * (-alpha).ln_1p()).exp_m1())
}

/// Mean distance from a uniform point of an n-ball of radius `r` to its
/// boundary: `r / (n + 1)`.
pub fn expected_surface_distance(n: usize, radius: f64) -> Result<f64> {
    check_n(n)?;
    if !(radius.is_finite() && radius > 0.0) {
        return Err(invalid("R", radius, "a finite value > 0"));
    }
    Ok(radius / (n as f64 + 1.0))
}

/// Shell probability for an absolute bound `beta <= R`.
pub fn relative_shell_probability(n: usize, beta: f64, radius: f64) -> Result<f64> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(invalid("R", radius, "a finite value > 0"));
    }
    if !(beta > 0.0 && beta <= radius) {
        return Err(invalid("beta", beta, "0 < beta <= R (clamp explicitly above R)"));
    }
    shell_probability(n, beta / radius)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DilationMode {
    /// Dilation radius `alpha * R / n`.
    InverseN,
    /// Dilation radius `alpha * R`.
    Proportional,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilationQuery {
    alpha: f64,
    mode: DilationMode,
}

impl DilationQuery {
    pub fn new(alpha: f64, mode: DilationMode) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(invalid("alpha", alpha, "a finite value > 0"));
        }
        Ok(Self { alpha, mode })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mode(&self) -> DilationMode {
        self.mode
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilationRatio {
    /// `Vol(M + B(0, r)) / Vol(M)`; `+inf` when saturated.
    pub ratio: f64,
    pub log_ratio: f64,
    /// The ratio overflowed `f64`; only `log_ratio` is meaningful.
    pub saturated: bool,
}

/// Volume ratio of an n-ball dilated by a ball of radius `r` to the original
/// ball, `(1 + r/R)^n`, computed in the log domain.
pub fn dilation_volume_ratio(n: usize, query: DilationQuery) -> Result<DilationRatio> {
    check_n(n)?;
    let nf = n as f64;
    let log_ratio = match query.mode {
        DilationMode::InverseN => nf * (query.alpha / nf).ln_1p(),
        DilationMode::Proportional => nf * query.alpha.ln_1p(),
    };
    let ratio = log_ratio.exp();
    Ok(DilationRatio { ratio, log_ratio, saturated: !ratio.is_finite() })
}

/// Log-domain image counts under resolution quadrupling.
///
/// Each step maps a resolution of `n` pixels to `4n`; every old pixel gains
/// three new pixels with `k` joint values in the universe and `t < k` joint
/// values inside the class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountingState {
    log_u: f64,
    log_c: f64,
    n: u64,
    k: u64,
    t: u64,
}

/// Joint values of three 8-bit pixels, `256^3`.
pub const EIGHT_BIT_TRIPLE_CHOICES: u64 = 256 * 256 * 256;

impl CountingState {
    pub fn new(log_u: f64, log_c: f64, n: u64, k: u64, t: u64) -> Result<Self> {
        if !log_u.is_finite() || !log_c.is_finite() {
            return Err(invalid("log count", if log_u.is_finite() { log_c } else { log_u }, "finite"));
        }
        if log_c > log_u {
            return Err(invalid("log_c", log_c, "log_c <= log_u"));
        }
        if n == 0 {
            return Err(invalid("n", 0.0, "n >= 1"));
        }
        if t == 0 || t >= k {
            return Err(invalid("t", t as f64, "1 <= t < k"));
        }
        Ok(Self { log_u, log_c, n, k, t })
    }

    pub fn log_u(&self) -> f64 {
        self.log_u
    }

    pub fn log_c(&self) -> f64 {
        self.log_c
    }

    pub fn pixels(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// `ln(c_n / u_n)`, the log of the class fraction of the universe.
    pub fn log_fraction(&self) -> f64 {
        self.log_c - self.log_u
    }

    /// Applies `u_{4n} = u_n k^n`, `c_{4n} = c_n t^n` `steps` times.
    pub fn advance(&self, steps: u32) -> Result<Self> {
        let (ln_k, ln_t) = ((self.k as f64).ln(), (self.t as f64).ln());
        let mut s = *self;
        for _ in 0..steps {
            let nf = s.n as f64;
            s.log_u += nf * ln_k;
            s.log_c += nf * ln_t;
            s.n = s.n.checked_mul(4).ok_or(GeometryError::Overflow)?;
        }
        Ok(s)
    }
}
