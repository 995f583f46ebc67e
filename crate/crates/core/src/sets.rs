//! Closed-set descriptors and witness-curve generators.
//!
//! A [`SetDescriptor`] is a closed subset of a model space in one of the
//! tagged forms used throughout the crate. Function-valued data (epigraph
//! integrands, inequality constraints, smooth maps) are supplied as evaluator
//! callbacks with optional analytic derivatives; missing derivatives fall
//! back to central finite differences with step 1e-6.
//!
//! Witness curves certify uniform approximability by geodesics: a curve
//! f: [0,l] → A from x to x' together with a geodesic γ starting at x such
//! that d(γ(t), f(t))/t stays below a modulus ε for all t ∈ (0, l].

use std::fmt;
use std::sync::Arc;

use crate::error::{GeomError, Result};
use crate::space::{
    ModelSpace, Point, axpy, dist, dist_coords, dot, geodesic_between, norm, same_space,
    scale, sub, Geodesic,
};

const FD_STEP: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Callback wrappers
// ---------------------------------------------------------------------------

/// Scalar function of Euclidean coordinates with an optional analytic gradient.
#[derive(Clone)]
pub struct ScalarField {
    f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    grad: Option<Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField(analytic_grad={})", self.grad.is_some())
    }
}

impl ScalarField {
    pub fn new(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField { f: Arc::new(f), grad: None }
    }

    pub fn with_grad(
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        ScalarField { f: Arc::new(f), grad: Some(Arc::new(grad)) }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    /// Analytic gradient when supplied, central differences otherwise.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        if let Some(g) = &self.grad {
            return g(x);
        }
        let mut out = vec![0.0; x.len()];
        let mut probe = x.to_vec();
        for i in 0..x.len() {
            probe[i] = x[i] + FD_STEP;
            let hi = (self.f)(&probe);
            probe[i] = x[i] - FD_STEP;
            let lo = (self.f)(&probe);
            probe[i] = x[i];
            out[i] = (hi - lo) / (2.0 * FD_STEP);
        }
        out
    }
}

/// Scalar function on points of a model space (epigraph integrands).
#[derive(Clone)]
pub struct PointField {
    f: Arc<dyn Fn(&Point) -> f64 + Send + Sync>,
}

impl fmt::Debug for PointField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PointField")
    }
}

impl PointField {
    pub fn new(f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        PointField { f: Arc::new(f) }
    }

    pub fn eval(&self, x: &Point) -> f64 {
        (self.f)(x)
    }
}

/// C¹ map F: ℝⁿ → ℝᵐ with an optional analytic Jacobian (rows = outputs).
#[derive(Clone)]
pub struct SmoothMap {
    f: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    jac: Option<Arc<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>>,
    domain_dim: usize,
    codomain_dim: usize,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SmoothMap({} -> {})", self.domain_dim, self.codomain_dim)
    }
}

impl SmoothMap {
    pub fn new(
        domain_dim: usize,
        codomain_dim: usize,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        SmoothMap { f: Arc::new(f), jac: None, domain_dim, codomain_dim }
    }

    pub fn with_jacobian(
        domain_dim: usize,
        codomain_dim: usize,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        jac: impl Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        SmoothMap { f: Arc::new(f), jac: Some(Arc::new(jac)), domain_dim, codomain_dim }
    }

    pub fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    pub fn codomain_dim(&self) -> usize {
        self.codomain_dim
    }

    pub fn eval(&self, u: &[f64]) -> Vec<f64> {
        (self.f)(u)
    }

    pub fn jacobian(&self, u: &[f64]) -> Vec<Vec<f64>> {
        if let Some(j) = &self.jac {
            return j(u);
        }
        let mut cols = Vec::with_capacity(self.domain_dim);
        let mut probe = u.to_vec();
        for i in 0..self.domain_dim {
            probe[i] = u[i] + FD_STEP;
            let hi = (self.f)(&probe);
            probe[i] = u[i] - FD_STEP;
            let lo = (self.f)(&probe);
            probe[i] = u[i];
            cols.push(
                hi.iter().zip(&lo).map(|(a, b)| (a - b) / (2.0 * FD_STEP)).collect::<Vec<_>>(),
            );
        }
        (0..self.codomain_dim)
            .map(|r| (0..self.domain_dim).map(|c| cols[c][r]).collect())
            .collect()
    }

    /// DF(u)·v.
    pub fn apply_jacobian(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        self.jacobian(u).iter().map(|row| dot(row, v)).collect()
    }
}

/// Mangasarian–Fromovitz data for a constraint set: a feasible anchor point
/// and a direction d with Dg_j(anchor)(d) < 0 for every constraint.
#[derive(Clone, Debug)]
pub struct MfcqData {
    pub anchor: Vec<f64>,
    pub direction: Vec<f64>,
}

// ---------------------------------------------------------------------------
// SetDescriptor
// ---------------------------------------------------------------------------

/// A closed subset of a model space.
#[derive(Clone, Debug)]
pub enum SetDescriptor {
    /// {x ∈ 𝕊ⁿ : ⟨x, pole⟩ = 0}, a totally geodesic subsphere.
    GreatSubsphere { space: ModelSpace, pole: Vec<f64> },
    /// {x ∈ 𝕊ⁿ : ⟨x, axis⟩ = height}, |height| < 1.
    SmallSphere { space: ModelSpace, axis: Vec<f64>, height: f64 },
    /// {x ∈ ℝⁿ : ⟨normal, x⟩ ≤ offset}.
    Halfspace { space: ModelSpace, normal: Vec<f64>, offset: f64 },
    /// Closed ball in ℝⁿ.
    EuclideanBall { space: ModelSpace, center: Vec<f64>, radius: f64 },
    /// {(x, λ) ∈ X × ℝ : λ ≥ f(x)}.
    Epigraph { space: ModelSpace, function: PointField },
    /// {x ∈ ℝⁿ : g_j(x) ≤ 0 for all j}.
    ConstraintSet { space: ModelSpace, constraints: Vec<ScalarField>, mfcq: Option<MfcqData> },
    /// F(C) for a C¹ map F and a convex Euclidean set C.
    SmoothImage { space: ModelSpace, map: SmoothMap, domain: Box<SetDescriptor> },
    /// The graph of the tent function g on [0, 1/2] in ℝ².
    TentGraph { space: ModelSpace },
    /// A finite sample of a set.
    PointCloud { space: ModelSpace, points: Vec<Vec<f64>> },
}

impl SetDescriptor {
    pub fn great_subsphere(space: ModelSpace, pole: Vec<f64>) -> Result<Self> {
        require_sphere(&space)?;
        let pole = unitize(pole, "pole")?;
        Ok(SetDescriptor::GreatSubsphere { space, pole })
    }

    pub fn small_sphere(space: ModelSpace, axis: Vec<f64>, height: f64) -> Result<Self> {
        require_sphere(&space)?;
        let axis = unitize(axis, "axis")?;
        if !(height.abs() < 1.0) {
            return Err(GeomError::InvalidInput(format!(
                "small-sphere height must satisfy |h| < 1, got {height}"
            )));
        }
        Ok(SetDescriptor::SmallSphere { space, axis, height })
    }

    pub fn halfspace(space: ModelSpace, normal: Vec<f64>, offset: f64) -> Result<Self> {
        require_euclidean(&space)?;
        if norm(&normal) <= 0.0 {
            return Err(GeomError::InvalidInput("halfspace normal must be nonzero".into()));
        }
        Ok(SetDescriptor::Halfspace { space, normal, offset })
    }

    pub fn euclidean_ball(space: ModelSpace, center: Vec<f64>, radius: f64) -> Result<Self> {
        require_euclidean(&space)?;
        if !(radius >= 0.0) {
            return Err(GeomError::InvalidInput(format!("ball radius {radius} is negative")));
        }
        Ok(SetDescriptor::EuclideanBall { space, center, radius })
    }

    pub fn epigraph(inner: ModelSpace, function: PointField) -> Self {
        SetDescriptor::Epigraph { space: ModelSpace::product_with_line(inner), function }
    }

    pub fn constraint_set(
        space: ModelSpace,
        constraints: Vec<ScalarField>,
        mfcq: Option<MfcqData>,
    ) -> Result<Self> {
        require_euclidean(&space)?;
        if constraints.is_empty() {
            return Err(GeomError::InvalidInput("constraint set needs at least one g_j".into()));
        }
        if let Some(m) = &mfcq {
            for (j, g) in constraints.iter().enumerate() {
                let slope = dot(&g.gradient(&m.anchor), &m.direction);
                if slope >= 0.0 {
                    return Err(GeomError::InvalidInput(format!(
                        "MFCQ direction fails at constraint {j}: Dg({j})(d) = {slope} >= 0"
                    )));
                }
            }
        }
        Ok(SetDescriptor::ConstraintSet { space, constraints, mfcq })
    }

    pub fn smooth_image(map: SmoothMap, domain: SetDescriptor) -> Result<Self> {
        let dim = match domain.ambient() {
            ModelSpace::Euclidean { dim } => *dim,
            other => {
                return Err(GeomError::InvalidInput(format!(
                    "smooth-image domain must be Euclidean, got {}",
                    other.describe()
                )))
            }
        };
        if dim != map.domain_dim() {
            return Err(GeomError::InvalidInput(format!(
                "map expects dimension {}, domain has {dim}",
                map.domain_dim()
            )));
        }
        Ok(SetDescriptor::SmoothImage {
            space: ModelSpace::euclidean(map.codomain_dim()),
            map,
            domain: Box::new(domain),
        })
    }

    pub fn tent_graph() -> Self {
        SetDescriptor::TentGraph { space: ModelSpace::euclidean(2) }
    }

    pub fn point_cloud(space: ModelSpace, points: Vec<Vec<f64>>) -> Result<Self> {
        for p in &points {
            Point::new(space.clone(), p.clone())?;
        }
        Ok(SetDescriptor::PointCloud { space, points })
    }

    /// The ambient model space of the set.
    pub fn ambient(&self) -> &ModelSpace {
        match self {
            SetDescriptor::GreatSubsphere { space, .. }
            | SetDescriptor::SmallSphere { space, .. }
            | SetDescriptor::Halfspace { space, .. }
            | SetDescriptor::EuclideanBall { space, .. }
            | SetDescriptor::Epigraph { space, .. }
            | SetDescriptor::ConstraintSet { space, .. }
            | SetDescriptor::SmoothImage { space, .. }
            | SetDescriptor::TentGraph { space }
            | SetDescriptor::PointCloud { space, .. } => space,
        }
    }

    /// Short tag used in reports and CLI tables.
    pub fn kind(&self) -> &'static str {
        match self {
            SetDescriptor::GreatSubsphere { .. } => "great-subsphere",
            SetDescriptor::SmallSphere { .. } => "small-sphere",
            SetDescriptor::Halfspace { .. } => "halfspace",
            SetDescriptor::EuclideanBall { .. } => "ball",
            SetDescriptor::Epigraph { .. } => "epigraph",
            SetDescriptor::ConstraintSet { .. } => "constraint-set",
            SetDescriptor::SmoothImage { .. } => "smooth-image",
            SetDescriptor::TentGraph { .. } => "tent-graph",
            SetDescriptor::PointCloud { .. } => "point-cloud",
        }
    }

    /// Inner factor of the epigraph ambient X × ℝ.
    pub(crate) fn epigraph_inner(&self) -> Option<&ModelSpace> {
        match self {
            SetDescriptor::Epigraph { space: ModelSpace::ProductWithLine { inner }, .. } => {
                Some(inner)
            }
            _ => None,
        }
    }
}

fn require_sphere(space: &ModelSpace) -> Result<()> {
    match space {
        ModelSpace::Sphere { .. } => Ok(()),
        other => Err(GeomError::InvalidInput(format!(
            "set requires a spherical ambient space, got {}",
            other.describe()
        ))),
    }
}

fn require_euclidean(space: &ModelSpace) -> Result<()> {
    match space {
        ModelSpace::Euclidean { .. } => Ok(()),
        other => Err(GeomError::InvalidInput(format!(
            "set requires a Euclidean ambient space, got {}",
            other.describe()
        ))),
    }
}

fn unitize(mut v: Vec<f64>, what: &str) -> Result<Vec<f64>> {
    let n = norm(&v);
    if n <= 0.0 || !n.is_finite() {
        return Err(GeomError::InvalidInput(format!("{what} must be a nonzero vector")));
    }
    if (n - 1.0).abs() > 1e-9 {
        return Err(GeomError::InvalidInput(format!("{what} must be a unit vector, |v| = {n}")));
    }
    v.iter_mut().for_each(|c| *c /= n);
    Ok(v)
}

// ---------------------------------------------------------------------------
// Membership
// ---------------------------------------------------------------------------

/// Whether `x` satisfies the defining conditions of `set` within `tol`.
pub fn membership(set: &SetDescriptor, x: &Point, tol: f64) -> Result<bool> {
    if x.space() != set.ambient() {
        return Err(GeomError::SpaceMismatch {
            left: x.space().describe(),
            right: set.ambient().describe(),
        });
    }
    let c = x.coords();
    Ok(match set {
        SetDescriptor::GreatSubsphere { pole, .. } => dot(c, pole).abs() <= tol,
        SetDescriptor::SmallSphere { axis, height, .. } => (dot(c, axis) - height).abs() <= tol,
        SetDescriptor::Halfspace { normal, offset, .. } => {
            dot(c, normal) - offset <= tol * norm(normal)
        }
        SetDescriptor::EuclideanBall { center, radius, .. } => {
            norm(&sub(c, center)) - radius <= tol
        }
        SetDescriptor::Epigraph { function, .. } => {
            let (inner_coords, lambda) = x.split_product()?;
            let inner = set.epigraph_inner().expect("epigraph ambient is a product");
            let xp = Point::new(inner.clone(), inner_coords.to_vec())?;
            lambda >= function.eval(&xp) - tol
        }
        SetDescriptor::ConstraintSet { constraints, .. } => {
            constraints.iter().all(|g| g.eval(c) <= tol)
        }
        SetDescriptor::TentGraph { .. } => {
            crate::projection::distance_to_tent(c) <= tol
        }
        SetDescriptor::SmoothImage { .. } => {
            let res = crate::projection::project(set, x, &Default::default())?;
            res.distance <= tol
        }
        SetDescriptor::PointCloud { points, space } => points
            .iter()
            .any(|p| dist_coords(space, c, p) <= tol),
    })
}

// ---------------------------------------------------------------------------
// The tent function
// ---------------------------------------------------------------------------

/// The tent function g on [0, 1/2]: on (1/2ⁿ⁺¹, 1/2ⁿ] it rises from the valley
/// at 1/2ⁿ⁺¹ with slope 1/2ⁿ to the apex at 3/2ⁿ⁺², then falls back to zero
/// at 1/2ⁿ; g(0) = 0.
pub fn tent_g(t: f64) -> Result<f64> {
    if !((-1e-15..=0.5 + 1e-15).contains(&t)) {
        return Err(GeomError::OutOfRange { t, length: 0.5 });
    }
    let t = t.clamp(0.0, 0.5);
    if t == 0.0 {
        return Ok(0.0);
    }
    let n = tent_branch(t);
    let lo = 0.5f64.powi(n + 1);
    let apex = 3.0 * 0.5f64.powi(n + 2);
    let s = 0.5f64.powi(n);
    Ok(if t <= apex { s * (t - lo) } else { s * (s - t) })
}

/// Branch index n ≥ 1 with t ∈ (1/2ⁿ⁺¹, 1/2ⁿ].
pub(crate) fn tent_branch(t: f64) -> i32 {
    debug_assert!(t > 0.0 && t <= 0.5);
    let mut n = (-(t.log2())).floor() as i32;
    // log2 can land one off at dyadic boundaries.
    while t <= 0.5f64.powi(n + 1) {
        n += 1;
    }
    while t > 0.5f64.powi(n) {
        n -= 1;
    }
    n.max(1)
}

/// Breakpoints (valleys and apexes) of the tent graph inside [lo, hi],
/// in increasing order.
pub(crate) fn tent_kinks(lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if hi <= 0.0 || lo >= 0.5 {
        return out;
    }
    for n in 1..=TENT_MAX_BRANCH {
        let valley = 0.5f64.powi(n);
        let apex = 3.0 * 0.5f64.powi(n + 2);
        for v in [valley, apex] {
            if v > lo && v < hi {
                out.push(v);
            }
        }
        if valley < lo {
            break;
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Branches below 2⁻⁵⁴ are collapsed to the endpoint (0, 0).
pub(crate) const TENT_MAX_BRANCH: i32 = 53;

// ---------------------------------------------------------------------------
// Witness curves
// ---------------------------------------------------------------------------

/// A curve f: [0, l] → A from x to x' shadowing a geodesic γ starting at x.
#[derive(Clone)]
pub struct WitnessCurve {
    length: f64,
    curve: Arc<dyn Fn(f64) -> Point + Send + Sync>,
    geodesic: Geodesic,
    /// Extra evaluation times where the deviation ratio can peak (kinks of a
    /// piecewise construction); the supremum over grid ∪ criticals is exact
    /// for piecewise-linear deviations.
    critical_times: Vec<f64>,
    /// Closed-form deviation ratio, for constructions whose deviation is an
    /// explicit formula. Evaluating the formula avoids the catastrophic
    /// cancellation of subtracting two O(1) points whose gap is O(t).
    ratio_fn: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl fmt::Debug for WitnessCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WitnessCurve(l={}, criticals={})", self.length, self.critical_times.len())
    }
}

impl WitnessCurve {
    pub fn new(
        length: f64,
        curve: Arc<dyn Fn(f64) -> Point + Send + Sync>,
        geodesic: Geodesic,
        critical_times: Vec<f64>,
    ) -> Self {
        WitnessCurve { length, curve, geodesic, critical_times, ratio_fn: None }
    }

    fn with_exact_ratio(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.ratio_fn = Some(Arc::new(f));
        self
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn geodesic(&self) -> &Geodesic {
        &self.geodesic
    }

    pub fn eval(&self, t: f64) -> Result<Point> {
        if !(t >= -1e-12 && t <= self.length * (1.0 + 1e-12) + 1e-12) {
            return Err(GeomError::OutOfRange { t, length: self.length });
        }
        Ok((self.curve)(t.clamp(0.0, self.length)))
    }

    /// d(γ(t), f(t)) / t.
    pub fn deviation_ratio(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(GeomError::OutOfRange { t, length: self.length });
        }
        if let Some(f) = &self.ratio_fn {
            return Ok(f(t.min(self.length)));
        }
        let g = self.geodesic.point_at(t.min(self.geodesic.length()))?;
        Ok(dist(&g, &self.eval(t)?)? / t)
    }

    /// Supremum of the deviation ratio over a uniform grid of `grid` points,
    /// a geometric ladder toward t = 0, and the critical times. Returns the
    /// ratio and the achieving time.
    pub fn sup_deviation_ratio(&self, grid: usize) -> Result<(f64, f64)> {
        let l = self.length;
        let mut times: Vec<f64> = (1..=grid.max(1)).map(|i| l * i as f64 / grid.max(1) as f64).collect();
        times.extend((1..=30).map(|k| l * 0.5f64.powi(k)));
        times.extend(self.critical_times.iter().copied().filter(|t| *t > 0.0 && *t <= l));
        let mut best = (0.0f64, l);
        for t in times {
            let r = self.deviation_ratio(t)?;
            if r > best.0 {
                best = (r, t);
            }
        }
        Ok(best)
    }

    /// Worst membership violation of the curve against `set` over a sample of
    /// `samples` points (plus criticals): returns the largest distance-like
    /// defect observed, 0.0 when every sample is a member within `tol`.
    pub fn membership_defect(
        &self,
        set: &SetDescriptor,
        samples: usize,
        tol: f64,
    ) -> Result<f64> {
        let l = self.length;
        let mut worst = 0.0f64;
        let mut times: Vec<f64> =
            (0..=samples.max(1)).map(|i| l * i as f64 / samples.max(1) as f64).collect();
        times.extend(self.critical_times.iter().copied().filter(|t| *t >= 0.0 && *t <= l));
        for t in times {
            let p = self.eval(t)?;
            if !membership(set, &p, tol)? {
                let defect = membership_defect_at(set, &p)?;
                worst = worst.max(defect.max(tol));
            }
        }
        Ok(worst)
    }
}

/// Scalar measure of how far `x` is from satisfying the set's conditions.
fn membership_defect_at(set: &SetDescriptor, x: &Point) -> Result<f64> {
    let c = x.coords();
    Ok(match set {
        SetDescriptor::GreatSubsphere { pole, .. } => dot(c, pole).abs(),
        SetDescriptor::SmallSphere { axis, height, .. } => (dot(c, axis) - height).abs(),
        SetDescriptor::Halfspace { normal, offset, .. } => {
            (dot(c, normal) - offset).max(0.0) / norm(normal)
        }
        SetDescriptor::EuclideanBall { center, radius, .. } => {
            (norm(&sub(c, center)) - radius).max(0.0)
        }
        SetDescriptor::Epigraph { function, .. } => {
            let (inner_coords, lambda) = x.split_product()?;
            let inner = set.epigraph_inner().expect("epigraph ambient is a product");
            let xp = Point::new(inner.clone(), inner_coords.to_vec())?;
            (function.eval(&xp) - lambda).max(0.0)
        }
        SetDescriptor::ConstraintSet { constraints, .. } => constraints
            .iter()
            .map(|g| g.eval(c).max(0.0))
            .fold(0.0, f64::max),
        SetDescriptor::TentGraph { .. } => crate::projection::distance_to_tent(c),
        SetDescriptor::SmoothImage { .. } => {
            crate::projection::project(set, x, &Default::default())?.distance
        }
        SetDescriptor::PointCloud { points, space } => points
            .iter()
            .map(|p| dist_coords(space, c, p))
            .fold(f64::INFINITY, f64::min),
    })
}

/// Witness for the epigraph of an approximately convex function: the straight
/// product geodesic from (x,λ) to (x',λ') with the vertical bulge
/// ε (t/l)(1 − t/l) d(x,x') added to the line coordinate, which keeps the
/// curve inside the epigraph while the deviation ratio stays below ε.
pub fn epigraph_uag_witness(
    set: &SetDescriptor,
    p: &Point,
    q: &Point,
    eps: f64,
) -> Result<WitnessCurve> {
    let SetDescriptor::Epigraph { .. } = set else {
        return Err(GeomError::InvalidInput("not an epigraph descriptor".into()));
    };
    if !(eps >= 0.0) {
        return Err(GeomError::InvalidInput(format!("modulus must be nonnegative, got {eps}")));
    }
    for (name, pt) in [("first", p), ("second", q)] {
        if !membership(set, pt, 1e-9)? {
            return Err(GeomError::InvalidInput(format!(
                "{name} endpoint is not in the epigraph"
            )));
        }
    }
    let geodesic = geodesic_between(p, q)?;
    let l = geodesic.length();
    let inner = set.epigraph_inner().expect("epigraph ambient is a product").clone();
    let (pi, _) = p.split_product()?;
    let (qi, _) = q.split_product()?;
    let base_dist = dist_coords(&inner, pi, qi);
    let space = set.ambient().clone();
    let g = geodesic.clone();
    let curve = move |t: f64| {
        let on_geo = g.point_at(t.clamp(0.0, l)).expect("in-domain evaluation");
        let mut coords = on_geo.coords().to_vec();
        let n = coords.len() - 1;
        coords[n] += eps * (t / l) * (1.0 - t / l) * base_dist;
        Point::renormalized(space.clone(), coords)
    };
    // d₂(g(t), γ(t)) is the vertical bulge itself, so the ratio has the
    // explicit form ε (1 − t/l) d(x,x')/l.
    Ok(WitnessCurve::new(l, Arc::new(curve), geodesic, Vec::new())
        .with_exact_ratio(move |t| eps * (1.0 - t / l) * base_dist / l))
}

/// Witness for a constraint set satisfying the Mangasarian–Fromovitz
/// condition: the segment from x to y bulged into the feasible region along
/// the MFCQ direction, f(t) = (1−t/l)x + (t/l)y + ε′ (t/l)(1−t/l) ‖x−y‖ d
/// with ε′ = ε/‖d‖. Membership of the curve is verified by sampling; a
/// violation is reported as a certification failure, not silently.
pub fn mfcq_uag_witness(
    set: &SetDescriptor,
    x: &Point,
    y: &Point,
    eps: f64,
) -> Result<WitnessCurve> {
    let SetDescriptor::ConstraintSet { mfcq, .. } = set else {
        return Err(GeomError::InvalidInput("not a constraint-set descriptor".into()));
    };
    let Some(mfcq) = mfcq else {
        return Err(GeomError::InvalidInput("constraint set carries no MFCQ direction".into()));
    };
    if !(eps > 0.0) {
        return Err(GeomError::InvalidInput(format!("modulus must be positive, got {eps}")));
    }
    for (name, pt) in [("first", x), ("second", y)] {
        if !membership(set, pt, 1e-9)? {
            return Err(GeomError::InvalidInput(format!("{name} endpoint is not in the set")));
        }
    }
    same_space(x, y)?;
    let geodesic = geodesic_between(x, y)?;
    let l = geodesic.length();
    let eps_prime = eps / norm(&mfcq.direction);
    let space = set.ambient().clone();
    let (xc, yc) = (x.coords().to_vec(), y.coords().to_vec());
    let d = mfcq.direction.clone();
    let curve = move |t: f64| {
        let s = (t / l).clamp(0.0, 1.0);
        let mut coords = axpy(&scale(&xc, 1.0 - s), s, &yc);
        coords = axpy(&coords, eps_prime * s * (1.0 - s) * l, &d);
        Point::renormalized(space.clone(), coords)
    };
    // ‖f(t) − γ(t)‖/t = ε′ ‖d‖ (1 − t/l) in closed form.
    let witness = WitnessCurve::new(l, Arc::new(curve), geodesic, Vec::new())
        .with_exact_ratio(move |t| eps * (1.0 - t / l));
    let defect = witness.membership_defect(set, 1024, 1e-9)?;
    if defect > 0.0 {
        return Err(GeomError::CertificationFailure(format!(
            "MFCQ witness curve leaves the feasible region (defect {defect:.3e}); \
             the approximate-convexity radius does not cover these endpoints"
        )));
    }
    Ok(witness)
}

/// Value and Jacobian of the smooth map of `set` at a parameter point u ∈ C.
pub fn smooth_image_eval(set: &SetDescriptor, u: &[f64]) -> Result<(Point, Vec<Vec<f64>>)> {
    let SetDescriptor::SmoothImage { space, map, domain } = set else {
        return Err(GeomError::InvalidInput("not a smooth-image descriptor".into()));
    };
    let up = Point::new(domain.ambient().clone(), u.to_vec())?;
    if !membership(domain, &up, 1e-9)? {
        return Err(GeomError::InvalidInput("parameter point lies outside the domain C".into()));
    }
    let value = Point::new(space.clone(), map.eval(u))?;
    Ok((value, map.jacobian(u)))
}

/// Witness for a smooth image F(C): with y, y' the parameters of the
/// endpoints, v the unit parameter step and w = DF(y)v, the curve
/// f(t) = F(y + t v/‖w‖) shadows the ray γ(t) = F(y) + t w/‖w‖ on
/// [0, ‖y−y'‖·‖w‖].
pub fn smooth_image_uag_witness(
    set: &SetDescriptor,
    u_from: &[f64],
    u_to: &[f64],
) -> Result<WitnessCurve> {
    let SetDescriptor::SmoothImage { space, map, .. } = set else {
        return Err(GeomError::InvalidInput("not a smooth-image descriptor".into()));
    };
    let (start, jac) = smooth_image_eval(set, u_from)?;
    smooth_image_eval(set, u_to)?;
    let step = sub(u_to, u_from);
    let param_len = norm(&step);
    if param_len <= 0.0 {
        return Err(GeomError::DegenerateGeodesic);
    }
    let v = scale(&step, 1.0 / param_len);
    let w: Vec<f64> = jac.iter().map(|row| dot(row, &v)).collect();
    let wn = norm(&w);
    if wn <= 0.0 {
        return Err(GeomError::InvalidInput(
            "DF(y) annihilates the parameter direction; witness undefined".into(),
        ));
    }
    let l = param_len * wn;
    let geodesic = Geodesic::new(start, scale(&w, 1.0 / wn), l)?;
    let space = space.clone();
    let map = map.clone();
    let u0 = u_from.to_vec();
    let curve = move |t: f64| {
        let u = axpy(&u0, t / wn, &v);
        Point::renormalized(space.clone(), map.eval(&u))
    };
    Ok(WitnessCurve::new(l, Arc::new(curve), geodesic, Vec::new()))
}

/// Witness along the tent graph: walk the graph horizontally from x to x'
/// while the companion geodesic moves at height g(s). The deviation
/// |g(s ± t) − g(s)| is piecewise linear in t, so the kinks of g between the
/// endpoints are recorded as critical times and the ratio supremum over
/// grid ∪ kinks is exact.
pub fn tent_uag_witness(set: &SetDescriptor, x: &Point, xp: &Point) -> Result<WitnessCurve> {
    let SetDescriptor::TentGraph { space } = set else {
        return Err(GeomError::InvalidInput("not a tent-graph descriptor".into()));
    };
    for (name, pt) in [("first", x), ("second", xp)] {
        if !membership(set, pt, 1e-9)? {
            return Err(GeomError::InvalidInput(format!("{name} endpoint is not on the graph")));
        }
    }
    let s = x.coords()[0];
    let s2 = xp.coords()[0];
    if (s - s2).abs() < 1e-300 {
        return Err(GeomError::DegenerateGeodesic);
    }
    let l = (s2 - s).abs();
    let sign = if s2 > s { 1.0 } else { -1.0 };
    let h0 = tent_g(s)?;
    let geodesic = Geodesic::new(x.clone(), vec![sign, 0.0], l)?;
    let space = space.clone();
    let curve = move |t: f64| {
        let u = (s + sign * t).clamp(0.0, 0.5);
        Point::renormalized(space.clone(), vec![u, tent_g(u).expect("in-domain")])
    };
    let (lo, hi) = if sign > 0.0 { (s, s2) } else { (s2, s) };
    let criticals: Vec<f64> = tent_kinks(lo, hi).into_iter().map(|k| (k - s).abs()).collect();
    let _ = h0;
    Ok(WitnessCurve::new(l, Arc::new(curve), geodesic, criticals))
}

/// Exact supremum of the tent-witness deviation ratio |g(u) − g(s)| / |u − s|
/// over u between the endpoint abscissas.
///
/// The deviation is piecewise linear in u and the ratio is monotone on every
/// linearity piece, so the supremum is attained at a kink of g, at the far
/// endpoint, or in the limit u → s where it equals the local slope. Kinks are
/// dyadic, where g evaluates exactly in binary floating point, which makes
/// this a tolerance-free check of the slope bound.
pub fn tent_witness_sup_ratio(x: &Point, xp: &Point) -> Result<f64> {
    let s = x.coords()[0];
    let s2 = xp.coords()[0];
    if (tent_g(s)? - x.coords()[1]).abs() > 1e-9 || (tent_g(s2)? - xp.coords()[1]).abs() > 1e-9 {
        return Err(GeomError::InvalidInput("endpoints must lie on the tent graph".into()));
    }
    if s == s2 {
        return Err(GeomError::DegenerateGeodesic);
    }
    let (lo, hi) = if s < s2 { (s, s2) } else { (s2, s) };
    let gs = tent_g(s)?;
    let mut candidates = tent_kinks(lo, hi);
    candidates.push(s2);
    let mut sup = 0.0f64;
    for u in candidates {
        let ratio = (tent_g(u)? - gs).abs() / (u - s).abs();
        sup = sup.max(ratio);
    }
    if s > 0.0 {
        sup = sup.max(0.5f64.powi(tent_branch(s)));
    }
    Ok(sup)
}

/// Witness inside a small sphere: the in-set circular arc from x to x',
/// reparameterized at constant speed over [0, d(x, x')], shadowing the
/// ambient great-circle geodesic.
fn small_sphere_uag_witness(set: &SetDescriptor, x: &Point, xp: &Point) -> Result<WitnessCurve> {
    let SetDescriptor::SmallSphere { space, axis, height } = set else {
        return Err(GeomError::InvalidInput("not a small-sphere descriptor".into()));
    };
    for (name, pt) in [("first", x), ("second", xp)] {
        if !membership(set, pt, 1e-9)? {
            return Err(GeomError::InvalidInput(format!("{name} endpoint is not on the sphere")));
        }
    }
    let rho = (1.0 - height * height).sqrt();
    let p = scale(&axpy(x.coords(), -height, axis), 1.0 / rho);
    let p2 = scale(&axpy(xp.coords(), -height, axis), 1.0 / rho);
    let cos_theta = crate::space::clamp_unit(dot(&p, &p2));
    let theta = cos_theta.acos();
    if theta <= 0.0 {
        return Err(GeomError::DegenerateGeodesic);
    }
    if theta >= std::f64::consts::PI - 1e-9 {
        return Err(GeomError::NonUniqueGeodesic {
            dist: theta,
            diameter: std::f64::consts::PI,
        });
    }
    let e = scale(&axpy(&p2, -cos_theta, &p), 1.0 / theta.sin());
    let geodesic = geodesic_between(x, xp)?;
    let l = geodesic.length();
    let space = space.clone();
    let axis = axis.clone();
    let height = *height;
    let curve = move |t: f64| {
        let phi = theta * (t / l).clamp(0.0, 1.0);
        let radial = axpy(&scale(&p, phi.cos()), phi.sin(), &e);
        Point::renormalized(space.clone(), axpy(&scale(&axis, height), rho, &radial))
    };
    Ok(WitnessCurve::new(l, Arc::new(curve), geodesic, Vec::new()))
}

/// Witness for a weakly convex set: the ambient geodesic itself.
fn convex_uag_witness(x: &Point, xp: &Point) -> Result<WitnessCurve> {
    let geodesic = geodesic_between(x, xp)?;
    let g = geodesic.clone();
    let l = geodesic.length();
    let curve = move |t: f64| g.point_at(t.clamp(0.0, l)).expect("in-domain evaluation");
    Ok(WitnessCurve::new(l, Arc::new(curve), geodesic, Vec::new()))
}

/// Witness through a point cloud: the shortest path in the h-neighborhood
/// graph from x to x', reparameterized at constant speed over [0, d(x, x')].
fn cloud_uag_witness(
    set: &SetDescriptor,
    x: &Point,
    xp: &Point,
    h: f64,
) -> Result<WitnessCurve> {
    let SetDescriptor::PointCloud { space, points } = set else {
        return Err(GeomError::InvalidInput("not a point-cloud descriptor".into()));
    };
    let find = |p: &Point| -> Result<usize> {
        points
            .iter()
            .position(|q| dist_coords(space, p.coords(), q) <= 1e-9)
            .ok_or_else(|| GeomError::InvalidInput("endpoint is not a cloud member".into()))
    };
    let i = find(x)?;
    let j = find(xp)?;
    if i == j {
        return Err(GeomError::DegenerateGeodesic);
    }
    let graph = crate::regularity::NeighborhoodGraph::build(set, h)?;
    let path = graph.shortest_path(i, j).ok_or_else(|| {
        GeomError::InvalidInput("endpoints are disconnected in the h-neighborhood graph".into())
    })?;
    let verts: Vec<Point> = path
        .iter()
        .map(|&k| Point::renormalized(space.clone(), points[k].clone()))
        .collect();
    let mut cum = vec![0.0];
    for w in verts.windows(2) {
        let d = dist(&w[0], &w[1])?;
        cum.push(cum.last().unwrap() + d);
    }
    let total = *cum.last().unwrap();
    let geodesic = geodesic_between(x, xp)?;
    let l = geodesic.length();
    let criticals: Vec<f64> = cum.iter().map(|s| s / total * l).collect();
    let curve = move |t: f64| {
        let s = (t / l).clamp(0.0, 1.0) * total;
        let seg = match cum.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
            Ok(k) => k.min(verts.len() - 1),
            Err(k) => k - 1,
        };
        if seg + 1 >= verts.len() {
            return verts.last().unwrap().clone();
        }
        let span = cum[seg + 1] - cum[seg];
        if span <= 0.0 {
            return verts[seg].clone();
        }
        let frac = (s - cum[seg]) / span;
        match geodesic_between(&verts[seg], &verts[seg + 1]) {
            Ok(g) => g.point_at(frac * g.length()).expect("in-domain evaluation"),
            Err(_) => verts[seg].clone(),
        }
    };
    Ok(WitnessCurve::new(l, Arc::new(curve), geodesic, criticals))
}

/// Construct the UAG witness for a pair x, x' of set members, dispatching on
/// the descriptor variant. `eps` feeds the bulge modulus of the epigraph and
/// MFCQ constructions; `cloud_h` is the neighborhood radius for point clouds.
pub fn uag_witness(
    set: &SetDescriptor,
    x: &Point,
    xp: &Point,
    eps: f64,
    cloud_h: Option<f64>,
) -> Result<WitnessCurve> {
    match set {
        SetDescriptor::GreatSubsphere { .. }
        | SetDescriptor::Halfspace { .. }
        | SetDescriptor::EuclideanBall { .. } => convex_uag_witness(x, xp),
        SetDescriptor::SmallSphere { .. } => small_sphere_uag_witness(set, x, xp),
        SetDescriptor::Epigraph { .. } => epigraph_uag_witness(set, x, xp, eps),
        SetDescriptor::ConstraintSet { .. } => mfcq_uag_witness(set, x, xp, eps),
        SetDescriptor::SmoothImage { map, .. } => {
            let u_from = invert_smooth_image(set, map, x)?;
            let u_to = invert_smooth_image(set, map, xp)?;
            smooth_image_uag_witness(set, &u_from, &u_to)
        }
        SetDescriptor::TentGraph { .. } => tent_uag_witness(set, x, xp),
        SetDescriptor::PointCloud { .. } => {
            let h = cloud_h.ok_or_else(|| {
                GeomError::InvalidInput(
                    "point-cloud witness needs a neighborhood radius h".into(),
                )
            })?;
            cloud_uag_witness(set, x, xp, h)
        }
    }
}

/// Recover the parameter of a point of a smooth image via the projection
/// solver (the descriptor stores no inverse).
fn invert_smooth_image(set: &SetDescriptor, _map: &SmoothMap, x: &Point) -> Result<Vec<f64>> {
    let res = crate::projection::project(set, x, &Default::default())?;
    if res.distance > 1e-7 {
        return Err(GeomError::InvalidInput(format!(
            "point is {:.3e} away from the smooth image",
            res.distance
        )));
    }
    res.primary_params()
        .ok_or_else(|| GeomError::SolverFailure("solver returned no parameters".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ModelSpace;

    fn tent_point(t: f64) -> Point {
        ModelSpace::euclidean(2).point(vec![t, tent_g(t).unwrap()]).unwrap()
    }

    #[test]
    fn tent_values() {
        assert_eq!(tent_g(0.0).unwrap(), 0.0);
        assert!((tent_g(0.375).unwrap() - 1.0 / 16.0).abs() < 1e-15);
        assert!(tent_g(0.5).unwrap().abs() < 1e-15);
        // Valleys sit at dyadic points.
        assert!(tent_g(0.25).unwrap().abs() < 1e-15);
        assert!(tent_g(0.125).unwrap().abs() < 1e-15);
        // Apex of branch 2.
        assert!((tent_g(3.0 / 16.0).unwrap() - 1.0 / 64.0).abs() < 1e-15);
        assert!(tent_g(0.6).is_err());
        assert!(tent_g(-0.1).is_err());
    }

    #[test]
    fn tent_branch_boundaries() {
        assert_eq!(tent_branch(0.5), 1);
        assert_eq!(tent_branch(0.25), 2);
        assert_eq!(tent_branch(0.2500000001), 1);
        assert_eq!(tent_branch(0.1), 3);
    }

    #[test]
    fn membership_examples() {
        let s = ModelSpace::unit_sphere(2);
        let small = SetDescriptor::small_sphere(s.clone(), vec![1.0, 0.0, 0.0], 0.5).unwrap();
        let x = s.point(vec![0.5, 3.0f64.sqrt() / 2.0, 0.0]).unwrap();
        assert!(membership(&small, &x, 1e-9).unwrap());

        let great = SetDescriptor::great_subsphere(s.clone(), vec![1.0, 0.0, 0.0]).unwrap();
        let e1 = s.point(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(!membership(&great, &e1, 1e-9).unwrap());

        let tent = SetDescriptor::tent_graph();
        assert!(membership(&tent, &tent_point(0.375), 1e-9).unwrap());
    }

    #[test]
    fn epigraph_witness_of_convex_function_is_geodesic_at_zero_modulus() {
        let inner = ModelSpace::euclidean(1);
        let epi = SetDescriptor::epigraph(inner, PointField::new(|_| 0.0));
        let space = epi.ambient().clone();
        let p = space.point(vec![-1.0, 0.0]).unwrap();
        let q = space.point(vec![1.0, 0.0]).unwrap();
        let w = epigraph_uag_witness(&epi, &p, &q, 0.0).unwrap();
        let (ratio, _) = w.sup_deviation_ratio(64).unwrap();
        assert!(ratio < 1e-12);
    }

    #[test]
    fn epigraph_witness_bulge_matches_formula() {
        let inner = ModelSpace::euclidean(1);
        let epi = SetDescriptor::epigraph(inner, PointField::new(|p| p.coords()[0].abs()));
        let space = epi.ambient().clone();
        let p = space.point(vec![-1.0, 1.0]).unwrap();
        let q = space.point(vec![1.0, 1.0]).unwrap();
        let eps = 0.25;
        let w = epigraph_uag_witness(&epi, &p, &q, eps).unwrap();
        let l = w.length();
        for t in [0.2 * l, 0.5 * l, 0.9 * l] {
            let expected = eps * (1.0 - t / l) * 2.0 / l; // d(x,x') = 2
            assert!((w.deviation_ratio(t).unwrap() - expected * 1.0).abs() < 1e-10);
        }
        let (ratio, _) = w.sup_deviation_ratio(512).unwrap();
        assert!(ratio < eps);
    }

    #[test]
    fn epigraph_witness_stays_inside_lower_c1_sample() {
        // max(x, -2x) is convex, hence approximately convex with any modulus.
        let inner = ModelSpace::euclidean(1);
        let epi = SetDescriptor::epigraph(
            inner,
            PointField::new(|p| p.coords()[0].max(-2.0 * p.coords()[0])),
        );
        let space = epi.ambient().clone();
        let p = space.point(vec![-0.5, 1.0]).unwrap();
        let q = space.point(vec![0.4, 0.8]).unwrap();
        let w = epigraph_uag_witness(&epi, &p, &q, 0.1).unwrap();
        assert_eq!(w.membership_defect(&epi, 1024, 1e-9).unwrap(), 0.0);
        let endpoint = w.eval(w.length()).unwrap();
        assert!(dist(&endpoint, &q).unwrap() < 1e-9);
    }

    #[test]
    fn epigraph_witness_rejects_outside_endpoints() {
        let inner = ModelSpace::euclidean(1);
        let epi = SetDescriptor::epigraph(inner, PointField::new(|p| p.coords()[0].abs()));
        let space = epi.ambient().clone();
        let below = space.point(vec![0.5, 0.1]).unwrap();
        let above = space.point(vec![0.0, 1.0]).unwrap();
        assert!(epigraph_uag_witness(&epi, &below, &above, 0.1).is_err());
    }

    #[test]
    fn mfcq_witness_single_linear_constraint() {
        let space = ModelSpace::euclidean(2);
        let set = SetDescriptor::constraint_set(
            space.clone(),
            vec![ScalarField::with_grad(|x| x[0], |_| vec![1.0, 0.0])],
            Some(MfcqData { anchor: vec![-1.0, 0.0], direction: vec![-1.0, 0.0] }),
        )
        .unwrap();
        let x = space.point(vec![0.0, 0.0]).unwrap();
        let y = space.point(vec![0.0, 1.0]).unwrap();
        let eps = 0.2;
        let w = mfcq_uag_witness(&set, &x, &y, eps).unwrap();
        // Deviation ratio at t = l/2 equals ε′‖d‖/2.
        let mid = w.length() / 2.0;
        assert!((w.deviation_ratio(mid).unwrap() - eps / 2.0).abs() < 1e-10);
        assert_eq!(w.membership_defect(&set, 2048, 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn mfcq_witness_two_constraints() {
        let space = ModelSpace::euclidean(2);
        let r = 0.5f64.sqrt();
        let set = SetDescriptor::constraint_set(
            space.clone(),
            vec![
                ScalarField::with_grad(|x| x[0], |_| vec![1.0, 0.0]),
                ScalarField::with_grad(|x| x[1], |_| vec![0.0, 1.0]),
            ],
            Some(MfcqData { anchor: vec![-1.0, -1.0], direction: vec![-r, -r] }),
        )
        .unwrap();
        let x = space.point(vec![0.0, -1.0]).unwrap();
        let y = space.point(vec![-1.0, 0.0]).unwrap();
        let w = mfcq_uag_witness(&set, &x, &y, 0.3).unwrap();
        assert_eq!(w.membership_defect(&set, 2048, 1e-9).unwrap(), 0.0);
        let (ratio, _) = w.sup_deviation_ratio(512).unwrap();
        assert!(ratio < 0.3);
    }

    #[test]
    fn smooth_image_eval_examples() {
        let map = SmoothMap::new(1, 2, |u| vec![u[0], u[0].abs().powf(1.5)]);
        let domain = SetDescriptor::euclidean_ball(ModelSpace::euclidean(1), vec![0.0], 2.0)
            .unwrap();
        let set = SetDescriptor::smooth_image(map, domain).unwrap();
        let (p, j) = smooth_image_eval(&set, &[1.0]).unwrap();
        assert!(norm(&sub(p.coords(), &[1.0, 1.0])) < 1e-12);
        assert!((j[0][0] - 1.0).abs() < 1e-7);
        assert!((j[1][0] - 1.5).abs() < 1e-7);
        assert!(smooth_image_eval(&set, &[5.0]).is_err());

        let ident = SmoothMap::with_jacobian(2, 2, |u| u.to_vec(), |_| {
            vec![vec![1.0, 0.0], vec![0.0, 1.0]]
        });
        let dom2 = SetDescriptor::euclidean_ball(ModelSpace::euclidean(2), vec![0.0; 2], 1.0)
            .unwrap();
        let set2 = SetDescriptor::smooth_image(ident, dom2).unwrap();
        let (p2, j2) = smooth_image_eval(&set2, &[0.25, -0.5]).unwrap();
        assert!(norm(&sub(p2.coords(), &[0.25, -0.5])) < 1e-12);
        assert_eq!(j2[0][0], 1.0);

        let parab = SmoothMap::with_jacobian(1, 2, |u| vec![u[0], u[0] * u[0]], |u| {
            vec![vec![1.0], vec![2.0 * u[0]]]
        });
        let dom3 = SetDescriptor::euclidean_ball(ModelSpace::euclidean(1), vec![0.0], 1.0)
            .unwrap();
        let set3 = SetDescriptor::smooth_image(parab, dom3).unwrap();
        let (_, j3) = smooth_image_eval(&set3, &[0.0]).unwrap();
        assert_eq!(j3[0][0], 1.0);
        assert_eq!(j3[1][0], 0.0);
    }

    #[test]
    fn tent_witness_bound_on_dyadic_ball() {
        // Endpoints in B(0, 2⁻ⁿ) ∩ A keep ‖γ(t) − f(t)‖ ≤ t/2ⁿ.
        for n in 3..=6 {
            let set = SetDescriptor::tent_graph();
            let bound = 0.5f64.powi(n);
            let x = tent_point(bound * 0.9);
            let xp = tent_point(bound * 0.17);
            let sup = tent_witness_sup_ratio(&x, &xp).unwrap();
            assert!(sup <= bound + 1e-12, "n={n}: sup {sup} > {bound}");
            // The sampled witness agrees with the exact supremum up to the
            // quantization of s + t.
            let w = tent_uag_witness(&set, &x, &xp).unwrap();
            let (ratio, _) = w.sup_deviation_ratio(256).unwrap();
            assert!(ratio <= bound + 1e-7, "n={n}: ratio {ratio} > {bound}");
        }
    }

    #[test]
    fn small_sphere_witness_stays_in_set() {
        let s = ModelSpace::unit_sphere(2);
        let set = SetDescriptor::small_sphere(s.clone(), vec![1.0, 0.0, 0.0], 0.5).unwrap();
        let rho = 3.0f64.sqrt() / 2.0;
        let x = s.point(vec![0.5, rho, 0.0]).unwrap();
        let xp = s
            .point(vec![0.5, rho * 0.6f64.cos(), rho * 0.6f64.sin()])
            .unwrap();
        let w = small_sphere_uag_witness(&set, &x, &xp).unwrap();
        assert_eq!(w.membership_defect(&set, 512, 1e-9).unwrap(), 0.0);
        let endpoint = w.eval(w.length()).unwrap();
        assert!(dist(&endpoint, &xp).unwrap() < 1e-9);
    }
}
