//! Constant-curvature model spaces and their exact metric geometry.
//!
//! Three families are supported, plus products with a line:
//!
//! * `Euclidean`  — ℝⁿ with the usual metric (κ = 0),
//! * `Sphere`     — 𝕊ⁿ as unit vectors in ℝⁿ⁺¹, distances scaled by 1/√κ (κ > 0),
//! * `Hyperbolic` — the hyperboloid ⟨x,x⟩_M = −1/|κ| in Minkowski ℝⁿ⁺¹ (κ < 0),
//! * `ProductWithLine` — X × ℝ with the metric
//!   d₂((x,s),(y,t)) = √(d(x,y)² + |s−t|²).
//!
//! Points carry their space; every metric operation checks that its operands
//! agree. Geodesics are unit speed. All closed forms below are exact up to
//! floating-point rounding.

use serde::Serialize;

use crate::error::{GeomError, Result};

/// Drift beyond this triggers renormalization of computed points.
pub const RENORM_DRIFT: f64 = 1e-12;

/// Largest constraint violation accepted when constructing a point directly.
const POINT_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// ModelSpace
// ---------------------------------------------------------------------------

/// A constant-curvature model space M_κ, or a product X × ℝ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ModelSpace {
    Euclidean { dim: usize },
    Sphere { curvature: f64, dim: usize },
    Hyperbolic { curvature: f64, dim: usize },
    ProductWithLine { inner: Box<ModelSpace> },
}

impl ModelSpace {
    pub fn euclidean(dim: usize) -> Self {
        ModelSpace::Euclidean { dim }
    }

    pub fn sphere(curvature: f64, dim: usize) -> Result<Self> {
        if !(curvature > 0.0) || !curvature.is_finite() {
            return Err(GeomError::InvalidInput(format!(
                "spherical space needs curvature > 0, got {curvature}"
            )));
        }
        if dim == 0 {
            return Err(GeomError::InvalidInput("dimension must be positive".into()));
        }
        Ok(ModelSpace::Sphere { curvature, dim })
    }

    /// The unit sphere 𝕊ⁿ (κ = 1).
    pub fn unit_sphere(dim: usize) -> Self {
        ModelSpace::Sphere { curvature: 1.0, dim }
    }

    pub fn hyperbolic(curvature: f64, dim: usize) -> Result<Self> {
        if !(curvature < 0.0) || !curvature.is_finite() {
            return Err(GeomError::InvalidInput(format!(
                "hyperbolic space needs curvature < 0, got {curvature}"
            )));
        }
        if dim == 0 {
            return Err(GeomError::InvalidInput("dimension must be positive".into()));
        }
        Ok(ModelSpace::Hyperbolic { curvature, dim })
    }

    pub fn product_with_line(inner: ModelSpace) -> Self {
        ModelSpace::ProductWithLine { inner: Box::new(inner) }
    }

    /// Sectional curvature κ (0 for Euclidean; products report the comparison
    /// bound of the inner factor, see [`ModelSpace::comparison_curvature`]).
    pub fn curvature(&self) -> f64 {
        match self {
            ModelSpace::Euclidean { .. } => 0.0,
            ModelSpace::Sphere { curvature, .. } => *curvature,
            ModelSpace::Hyperbolic { curvature, .. } => *curvature,
            ModelSpace::ProductWithLine { inner } => inner.curvature(),
        }
    }

    /// Smallest κ' such that the space is CAT(κ'). Products with a flat factor
    /// are never negatively curved, hence the clamp at zero.
    pub fn comparison_curvature(&self) -> f64 {
        match self {
            ModelSpace::Euclidean { .. } => 0.0,
            ModelSpace::Sphere { curvature, .. } => *curvature,
            ModelSpace::Hyperbolic { curvature, .. } => *curvature,
            ModelSpace::ProductWithLine { inner } => inner.comparison_curvature().max(0.0),
        }
    }

    /// Manifold dimension.
    pub fn dim(&self) -> usize {
        match self {
            ModelSpace::Euclidean { dim } => *dim,
            ModelSpace::Sphere { dim, .. } => *dim,
            ModelSpace::Hyperbolic { dim, .. } => *dim,
            ModelSpace::ProductWithLine { inner } => inner.dim() + 1,
        }
    }

    /// Length of the coordinate vector representing a point.
    pub fn ambient_len(&self) -> usize {
        match self {
            ModelSpace::Euclidean { dim } => *dim,
            ModelSpace::Sphere { dim, .. } => *dim + 1,
            ModelSpace::Hyperbolic { dim, .. } => *dim + 1,
            ModelSpace::ProductWithLine { inner } => inner.ambient_len() + 1,
        }
    }

    /// Diameter D_κ = π/√κ for κ > 0, +∞ otherwise.
    pub fn diameter(&self) -> f64 {
        let k = self.comparison_curvature();
        if k > 0.0 {
            std::f64::consts::PI / k.sqrt()
        } else {
            f64::INFINITY
        }
    }

    /// Construct a point of this space, validating its invariants.
    pub fn point(&self, coords: Vec<f64>) -> Result<Point> {
        Point::new(self.clone(), coords)
    }

    pub(crate) fn describe(&self) -> String {
        match self {
            ModelSpace::Euclidean { dim } => format!("Euclidean(dim={dim})"),
            ModelSpace::Sphere { curvature, dim } => format!("Sphere(k={curvature}, dim={dim})"),
            ModelSpace::Hyperbolic { curvature, dim } => {
                format!("Hyperbolic(k={curvature}, dim={dim})")
            }
            ModelSpace::ProductWithLine { inner } => format!("{} x R", inner.describe()),
        }
    }
}

// ---------------------------------------------------------------------------
// Vector helpers
// ---------------------------------------------------------------------------

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub(crate) fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub(crate) fn axpy(y: &[f64], alpha: f64, x: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(yi, xi)| yi + alpha * xi).collect()
}

/// Minkowski form ⟨x,y⟩_M = −x₀y₀ + Σ_{i≥1} xᵢyᵢ (first coordinate timelike).
pub(crate) fn minkowski_dot(a: &[f64], b: &[f64]) -> f64 {
    -a[0] * b[0] + dot(&a[1..], &b[1..])
}

pub(crate) fn clamp_unit(v: f64) -> f64 {
    v.clamp(-1.0, 1.0)
}

/// Angle between unit vectors, accurate for both tiny and near-π separations.
fn unit_vector_angle(a: &[f64], b: &[f64]) -> f64 {
    if dot(a, b) >= 0.0 {
        2.0 * (0.5 * norm(&sub(a, b))).min(1.0).asin()
    } else {
        std::f64::consts::PI - 2.0 * (0.5 * norm(&add(a, b))).min(1.0).asin()
    }
}

// ---------------------------------------------------------------------------
// Point
// ---------------------------------------------------------------------------

/// A point of a model space, stored in ambient coordinates.
///
/// Representation: ℝⁿ vector (Euclidean), unit vector in ℝⁿ⁺¹ (Sphere),
/// hyperboloid vector with ⟨x,x⟩_M = −1/|κ| and x₀ > 0 (Hyperbolic), inner
/// coordinates followed by the line coordinate (product).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Point {
    space: ModelSpace,
    coords: Vec<f64>,
}

impl Point {
    pub fn new(space: ModelSpace, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != space.ambient_len() {
            return Err(GeomError::InvalidInput(format!(
                "expected {} coordinates for {}, got {}",
                space.ambient_len(),
                space.describe(),
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(GeomError::InvalidInput("non-finite coordinate".into()));
        }
        let drift = constraint_drift(&space, &coords);
        if drift > POINT_TOL {
            return Err(GeomError::InvalidInput(format!(
                "coordinates violate the {} constraint by {drift:.3e}",
                space.describe()
            )));
        }
        let mut p = Point { space, coords };
        if drift > RENORM_DRIFT {
            renormalize(&p.space.clone(), &mut p.coords);
        }
        Ok(p)
    }

    /// Internal constructor for freshly computed coordinates: renormalizes
    /// whenever drift exceeds [`RENORM_DRIFT`].
    pub(crate) fn renormalized(space: ModelSpace, mut coords: Vec<f64>) -> Self {
        if constraint_drift(&space, &coords) > RENORM_DRIFT {
            renormalize(&space, &mut coords);
        }
        Point { space, coords }
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Inner-point coordinates and line coordinate of a product-space point.
    pub fn split_product(&self) -> Result<(&[f64], f64)> {
        match &self.space {
            ModelSpace::ProductWithLine { .. } => {
                let n = self.coords.len() - 1;
                Ok((&self.coords[..n], self.coords[n]))
            }
            _ => Err(GeomError::InvalidInput("not a product-space point".into())),
        }
    }
}

fn constraint_drift(space: &ModelSpace, coords: &[f64]) -> f64 {
    match space {
        ModelSpace::Euclidean { .. } => 0.0,
        ModelSpace::Sphere { .. } => (dot(coords, coords) - 1.0).abs(),
        ModelSpace::Hyperbolic { curvature, .. } => {
            if coords[0] <= 0.0 {
                return f64::INFINITY;
            }
            (minkowski_dot(coords, coords) + 1.0 / curvature.abs()).abs()
        }
        ModelSpace::ProductWithLine { inner } => {
            let n = coords.len() - 1;
            constraint_drift(inner, &coords[..n])
        }
    }
}

fn renormalize(space: &ModelSpace, coords: &mut [f64]) {
    match space {
        ModelSpace::Euclidean { .. } => {}
        ModelSpace::Sphere { .. } => {
            let n = norm(coords);
            if n > 0.0 {
                coords.iter_mut().for_each(|c| *c /= n);
            }
        }
        ModelSpace::Hyperbolic { curvature, .. } => {
            let q = -minkowski_dot(coords, coords);
            if q > 0.0 {
                let s = (1.0 / (curvature.abs() * q)).sqrt();
                coords.iter_mut().for_each(|c| *c *= s);
            }
        }
        ModelSpace::ProductWithLine { inner } => {
            let n = coords.len() - 1;
            renormalize(inner, &mut coords[..n]);
        }
    }
}

pub(crate) fn same_space(x: &Point, y: &Point) -> Result<()> {
    if x.space != y.space {
        return Err(GeomError::SpaceMismatch {
            left: x.space.describe(),
            right: y.space.describe(),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Distance
// ---------------------------------------------------------------------------

/// Geodesic distance between two points of the same space.
pub fn dist(x: &Point, y: &Point) -> Result<f64> {
    same_space(x, y)?;
    Ok(dist_coords(&x.space, &x.coords, &y.coords))
}

pub(crate) fn dist_coords(space: &ModelSpace, a: &[f64], b: &[f64]) -> f64 {
    match space {
        ModelSpace::Euclidean { .. } => norm(&sub(a, b)),
        ModelSpace::Sphere { curvature, .. } => unit_vector_angle(a, b) / curvature.sqrt(),
        ModelSpace::Hyperbolic { curvature, .. } => {
            // With q = −|κ|⟨x,y⟩_M ≥ 1, d = arccosh(q)/√|κ|. Evaluated through
            // the spacelike difference for accuracy at small separations:
            // sinh²(√|κ| d / 2) = |κ| ⟨x−y, x−y⟩_M / 4.
            let k = curvature.abs();
            let diff = sub(a, b);
            let q = (minkowski_dot(&diff, &diff) * k).max(0.0);
            2.0 * (0.5 * q.sqrt()).asinh() / k.sqrt()
        }
        ModelSpace::ProductWithLine { inner } => {
            let n = a.len() - 1;
            let di = dist_coords(inner, &a[..n], &b[..n]);
            (di * di + (a[n] - b[n]) * (a[n] - b[n])).sqrt()
        }
    }
}

// ---------------------------------------------------------------------------
// Tangent vectors
// ---------------------------------------------------------------------------

/// Norm of a tangent vector at `at`, in the representation used by
/// [`Geodesic::direction`] (Euclidean norm on spheres, Minkowski norm on
/// hyperboloids, combined norm on products).
pub(crate) fn tangent_norm(space: &ModelSpace, at: &[f64], v: &[f64]) -> f64 {
    tangent_inner(space, at, v, v).max(0.0).sqrt()
}

pub(crate) fn tangent_inner(space: &ModelSpace, _at: &[f64], u: &[f64], v: &[f64]) -> f64 {
    match space {
        ModelSpace::Euclidean { .. } | ModelSpace::Sphere { .. } => dot(u, v),
        ModelSpace::Hyperbolic { .. } => minkowski_dot(u, v),
        ModelSpace::ProductWithLine { inner } => {
            let n = u.len() - 1;
            tangent_inner(inner, &_at[..n], &u[..n], &v[..n]) + u[n] * v[n]
        }
    }
}

/// Project an ambient vector onto the tangent space at `at` (identity for
/// Euclidean factors).
pub(crate) fn project_to_tangent(space: &ModelSpace, at: &[f64], v: &[f64]) -> Vec<f64> {
    match space {
        ModelSpace::Euclidean { .. } => v.to_vec(),
        ModelSpace::Sphere { .. } => axpy(v, -dot(v, at), at),
        ModelSpace::Hyperbolic { curvature, .. } => {
            // Tangent space: ⟨x,v⟩_M = 0; subtract the x-component with the
            // Minkowski metric (⟨x,x⟩_M = −1/|κ|).
            let k = curvature.abs();
            axpy(v, minkowski_dot(v, at) * k, at)
        }
        ModelSpace::ProductWithLine { inner } => {
            let n = v.len() - 1;
            let mut out = project_to_tangent(inner, &at[..n], &v[..n]);
            out.push(v[n]);
            out
        }
    }
}

// ---------------------------------------------------------------------------
// Geodesic
// ---------------------------------------------------------------------------

/// A unit-speed geodesic segment γ: [0, l] → X.
///
/// `direction` is the initial velocity: a Euclidean-unit tangent for
/// Euclidean/Sphere, a Minkowski-unit tangent for Hyperbolic, and for products
/// the pair (inner tangent scaled by the inner speed fraction, line slope)
/// with total speed 1.
#[derive(Clone, Debug)]
pub struct Geodesic {
    start: Point,
    direction: Vec<f64>,
    length: f64,
}

impl Geodesic {
    /// Build from a start point, tangent direction (normalized internally),
    /// and length.
    pub fn new(start: Point, direction: Vec<f64>, length: f64) -> Result<Self> {
        if length < 0.0 || !length.is_finite() {
            return Err(GeomError::InvalidInput(format!("invalid geodesic length {length}")));
        }
        if direction.len() != start.space().ambient_len() {
            return Err(GeomError::InvalidInput("direction has wrong dimension".into()));
        }
        let tangent = project_to_tangent(start.space(), start.coords(), &direction);
        let n = tangent_norm(start.space(), start.coords(), &tangent);
        if n <= 0.0 || !n.is_finite() {
            return Err(GeomError::InvalidInput("direction is not a nonzero tangent".into()));
        }
        Ok(Geodesic { start, direction: scale(&tangent, 1.0 / n), length })
    }

    pub fn start(&self) -> &Point {
        &self.start
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// γ(t) for t ∈ [0, l].
    pub fn point_at(&self, t: f64) -> Result<Point> {
        let slack = 1e-12 * (1.0 + self.length);
        if !(t >= -slack && t <= self.length + slack) {
            return Err(GeomError::OutOfRange { t, length: self.length });
        }
        let t = t.clamp(0.0, self.length);
        Ok(eval_geodesic(&self.start, &self.direction, t))
    }

    /// γ(l), the far endpoint.
    pub fn end(&self) -> Point {
        eval_geodesic(&self.start, &self.direction, self.length)
    }

    /// The same segment traversed in reverse.
    pub fn reversed(&self) -> Result<Geodesic> {
        geodesic_between(&self.end(), &self.start)
    }
}

fn eval_geodesic(start: &Point, direction: &[f64], t: f64) -> Point {
    let space = start.space().clone();
    let x = start.coords();
    let coords = match &space {
        ModelSpace::Euclidean { .. } => axpy(x, t, direction),
        ModelSpace::Sphere { curvature, .. } => {
            let theta = curvature.sqrt() * t;
            let mut c = scale(x, theta.cos());
            c = axpy(&c, theta.sin(), direction);
            c
        }
        ModelSpace::Hyperbolic { curvature, .. } => {
            let sk = curvature.abs().sqrt();
            let mut c = scale(x, (sk * t).cosh());
            c = axpy(&c, (sk * t).sinh() / sk, direction);
            c
        }
        ModelSpace::ProductWithLine { inner } => {
            let n = x.len() - 1;
            let v_inner = &direction[..n];
            let slope = direction[n];
            let c1 = tangent_norm(inner, &x[..n], v_inner);
            let mut c = if c1 > 0.0 {
                let inner_start = Point::renormalized(inner.as_ref().clone(), x[..n].to_vec());
                let inner_dir = scale(v_inner, 1.0 / c1);
                eval_geodesic(&inner_start, &inner_dir, c1 * t).coords.clone()
            } else {
                x[..n].to_vec()
            };
            c.push(x[n] + slope * t);
            c
        }
    };
    Point::renormalized(space, coords)
}

/// The unique unit-speed geodesic from `x` to `y`.
///
/// Errors: coinciding endpoints (degenerate) and spherical pairs at distance
/// ≥ D_κ − 1e-12 (the segment is not unique).
pub fn geodesic_between(x: &Point, y: &Point) -> Result<Geodesic> {
    same_space(x, y)?;
    let d = dist(x, y)?;
    if d < 1e-14 {
        return Err(GeomError::DegenerateGeodesic);
    }
    let diameter = x.space().diameter();
    if d >= diameter - 1e-12 {
        return Err(GeomError::NonUniqueGeodesic { dist: d, diameter });
    }
    let direction = initial_direction(x.space(), x.coords(), y.coords(), d)?;
    Ok(Geodesic { start: x.clone(), direction, length: d })
}

fn initial_direction(space: &ModelSpace, a: &[f64], b: &[f64], d: f64) -> Result<Vec<f64>> {
    match space {
        ModelSpace::Euclidean { .. } => Ok(scale(&sub(b, a), 1.0 / d)),
        ModelSpace::Sphere { curvature, .. } => {
            let theta = curvature.sqrt() * d;
            // u = (y − cos θ x)/sin θ, Euclidean-unit and ⊥ x.
            let u = axpy(b, -theta.cos(), a);
            let n = norm(&u);
            if n <= 0.0 {
                return Err(GeomError::DegenerateGeodesic);
            }
            Ok(scale(&u, 1.0 / n))
        }
        ModelSpace::Hyperbolic { curvature, .. } => {
            let sk = curvature.abs().sqrt();
            let tau = sk * d;
            // y = cosh τ · x + sinh τ / √|κ| · u with ⟨u,u⟩_M = 1.
            let u = axpy(b, -tau.cosh(), a);
            let n = tangent_norm(space, a, &u);
            if n <= 0.0 {
                return Err(GeomError::DegenerateGeodesic);
            }
            Ok(scale(&u, 1.0 / n))
        }
        ModelSpace::ProductWithLine { inner } => {
            let n = a.len() - 1;
            let r = dist_coords(inner, &a[..n], &b[..n]);
            let s = b[n] - a[n];
            let mut v = if r > 1e-300 {
                let inner_unit = initial_direction(inner, &a[..n], &b[..n], r)?;
                scale(&inner_unit, r / d)
            } else {
                vec![0.0; n]
            };
            v.push(s / d);
            Ok(v)
        }
    }
}

// ---------------------------------------------------------------------------
// Comparison triangles
// ---------------------------------------------------------------------------

/// Side lengths of a geodesic triangle together with the curvature of the
/// model surface M²_κ in which it is compared.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ComparisonTriangle {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub curvature: f64,
}

impl ComparisonTriangle {
    pub fn new(a: f64, b: f64, c: f64, curvature: f64) -> Result<Self> {
        for (name, s) in [("a", a), ("b", b), ("c", c)] {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(GeomError::InvalidInput(format!("side {name} = {s} is invalid")));
            }
        }
        let slack = 1e-12 * (1.0 + a + b + c);
        if a > b + c + slack || b > a + c + slack || c > a + b + slack {
            return Err(GeomError::InvalidInput(format!(
                "triangle inequality violated for sides ({a}, {b}, {c})"
            )));
        }
        if curvature > 0.0 {
            let perimeter = a + b + c;
            let bound = 2.0 * std::f64::consts::PI / curvature.sqrt();
            if perimeter >= bound {
                return Err(GeomError::InvalidInput(format!(
                    "perimeter {perimeter} exceeds 2 D_k = {bound}"
                )));
            }
        }
        Ok(ComparisonTriangle { a, b, c, curvature })
    }

    /// Interior angle opposite side `a`.
    pub fn angle_opposite_a(&self) -> Result<f64> {
        crate::angle::comparison_angle(self.a, self.b, self.c, self.curvature)
    }
}
