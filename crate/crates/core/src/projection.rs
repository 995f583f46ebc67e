//! Metric projection P_C onto set descriptors.
//!
//! Closed forms cover the spherical and Euclidean convex sets and the tent
//! graph (per-segment projection); everything else runs through a
//! deterministic multistart solver over the set's parameterization: a coarse
//! grid (default 64 nodes per dimension), compass-search refinement to a
//! 1e-12 value tolerance, and clustering of minimizers. Minimizers within
//! 1e-8 of the best value and at pairwise distance ≥ 1e-5 are reported as
//! distinct, so multivalued projections surface instead of being silently
//! collapsed. Consumers that need a single point take the lexicographically
//! smallest minimizer.

use crate::error::{GeomError, Result};
use crate::sets::{membership, SetDescriptor};
use crate::space::{
    axpy, dist, dist_coords, dot, geodesic_between, norm, scale, sub, ModelSpace, Point,
};

/// Options for the numeric projection solver.
#[derive(Clone, Debug)]
pub struct ProjectOpts {
    /// Coarse grid nodes per parameter dimension.
    pub grid_per_dim: usize,
    /// Minimizers within this of the best value count as ties.
    pub value_tol: f64,
    /// Ties at pairwise ambient distance below this are merged.
    pub separation: f64,
    /// Refinement stops when the compass step falls below this.
    pub refine_tol: f64,
    /// Membership tolerance for the fixed-point shortcut.
    pub member_tol: f64,
}

impl Default for ProjectOpts {
    fn default() -> Self {
        ProjectOpts {
            grid_per_dim: 64,
            value_tol: 1e-8,
            separation: 1e-5,
            refine_tol: 1e-12,
            member_tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    pub restarts: usize,
    pub achieved_tol: f64,
}

/// The (possibly multivalued) nearest-point set.
#[derive(Clone, Debug)]
pub struct ProjectionResult {
    /// All minimizers found, sorted lexicographically by coordinates.
    pub nearest: Vec<Point>,
    /// Solver parameters of each minimizer, when solved parametrically.
    pub params: Vec<Option<Vec<f64>>>,
    pub distance: f64,
    pub multivalued: bool,
    pub diagnostics: SolveDiagnostics,
}

impl ProjectionResult {
    fn single(point: Point, distance: f64) -> Self {
        ProjectionResult {
            nearest: vec![point],
            params: vec![None],
            distance,
            multivalued: false,
            diagnostics: SolveDiagnostics::default(),
        }
    }

    /// Deterministic tie-break: the lexicographically smallest minimizer.
    pub fn primary(&self) -> &Point {
        &self.nearest[0]
    }

    pub fn primary_params(&self) -> Option<Vec<f64>> {
        self.params.first().and_then(|p| p.clone())
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// Metric projection of `y` onto `set`.
pub fn project(set: &SetDescriptor, y: &Point, opts: &ProjectOpts) -> Result<ProjectionResult> {
    if y.space() != set.ambient() {
        return Err(GeomError::SpaceMismatch {
            left: y.space().describe(),
            right: set.ambient().describe(),
        });
    }
    match set {
        SetDescriptor::GreatSubsphere { space, pole } => {
            project_great_subsphere(space, pole, y)
        }
        SetDescriptor::SmallSphere { space, axis, height } => {
            project_small_sphere(space, axis, *height, y)
        }
        SetDescriptor::Halfspace { space, normal, offset } => {
            let c = y.coords();
            let excess = dot(c, normal) - offset;
            if excess <= 0.0 {
                return Ok(ProjectionResult::single(y.clone(), 0.0));
            }
            let n2 = dot(normal, normal);
            let p = axpy(c, -excess / n2, normal);
            let d = excess / n2.sqrt();
            Ok(ProjectionResult::single(Point::renormalized(space.clone(), p), d))
        }
        SetDescriptor::EuclideanBall { space, center, radius } => {
            let c = y.coords();
            let off = sub(c, center);
            let d = norm(&off);
            if d <= *radius {
                return Ok(ProjectionResult::single(y.clone(), 0.0));
            }
            let p = axpy(center, *radius / d, &off);
            Ok(ProjectionResult::single(Point::renormalized(space.clone(), p), d - radius))
        }
        SetDescriptor::Epigraph { .. } => project_epigraph(set, y, opts),
        SetDescriptor::ConstraintSet { .. } => project_constraint_set(set, y, opts),
        SetDescriptor::SmoothImage { .. } => project_smooth_image(set, y, opts),
        SetDescriptor::TentGraph { space } => project_tent(space, y, opts),
        SetDescriptor::PointCloud { space, points } => {
            if points.is_empty() {
                return Err(GeomError::SolverFailure("point cloud is empty".into()));
            }
            let mut cands: Vec<(Vec<f64>, f64)> = points
                .iter()
                .map(|p| (p.clone(), dist_coords(space, y.coords(), p)))
                .collect();
            cands.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            let best = cands[0].1;
            let kept = cluster_candidates(space, cands, best, opts);
            Ok(assemble_result(space, kept, best, SolveDiagnostics::default()))
        }
    }
}

fn project_great_subsphere(
    space: &ModelSpace,
    pole: &[f64],
    y: &Point,
) -> Result<ProjectionResult> {
    let c = y.coords();
    let w = axpy(c, -dot(c, pole), pole);
    let wn = norm(&w);
    if wn <= 1e-12 {
        // y is a pole: the whole subsphere is equidistant.
        let (u, v) = orthonormal_pair(pole);
        return Err(GeomError::NonUniqueProjection {
            representatives: vec![
                Point::renormalized(space.clone(), u.clone()),
                Point::renormalized(space.clone(), scale(&u, -1.0)),
                Point::renormalized(space.clone(), v),
            ],
        });
    }
    let p = Point::renormalized(space.clone(), scale(&w, 1.0 / wn));
    let d = dist(y, &p)?;
    Ok(ProjectionResult::single(p, d))
}

fn project_small_sphere(
    space: &ModelSpace,
    axis: &[f64],
    height: f64,
    y: &Point,
) -> Result<ProjectionResult> {
    let rho = (1.0 - height * height).sqrt();
    let c = y.coords();
    let w = axpy(c, -dot(c, axis), axis);
    let wn = norm(&w);
    if wn <= 1e-12 {
        // y = ±axis: every meridian is a minimizer.
        let (u, v) = orthonormal_pair(axis);
        let mk = |dir: &[f64]| {
            Point::renormalized(space.clone(), axpy(&scale(axis, height), rho, dir))
        };
        return Err(GeomError::NonUniqueProjection {
            representatives: vec![mk(&u), mk(&scale(&u, -1.0)), mk(&v)],
        });
    }
    let p = Point::renormalized(
        space.clone(),
        axpy(&scale(axis, height), rho / wn, &w),
    );
    let d = dist(y, &p)?;
    Ok(ProjectionResult::single(p, d))
}

/// Two orthonormal vectors perpendicular to `b`.
fn orthonormal_pair(b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = b.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| b[i].abs().partial_cmp(&b[j].abs()).unwrap());
    let mut u = vec![0.0; n];
    u[idx[0]] = 1.0;
    u = axpy(&u, -dot(&u, b), b);
    let un = norm(&u);
    u = scale(&u, 1.0 / un);
    let mut v = vec![0.0; n];
    v[idx[1]] = 1.0;
    v = axpy(&v, -dot(&v, b), b);
    v = axpy(&v, -dot(&v, &u), &u);
    let vn = norm(&v);
    v = scale(&v, 1.0 / vn);
    (u, v)
}

// ---------------------------------------------------------------------------
// Tent graph
// ---------------------------------------------------------------------------

/// Segments of the tent graph down to branch [`crate::sets::TENT_MAX_BRANCH`].
fn tent_segments() -> Vec<([f64; 2], [f64; 2])> {
    let mut segs = Vec::new();
    for n in 1..=crate::sets::TENT_MAX_BRANCH {
        let lo = 0.5f64.powi(n + 1);
        let apex = 3.0 * 0.5f64.powi(n + 2);
        let hi = 0.5f64.powi(n);
        let apex_h = 0.5f64.powi(2 * n + 2);
        segs.push(([lo, 0.0], [apex, apex_h]));
        segs.push(([apex, apex_h], [hi, 0.0]));
    }
    segs
}

fn point_segment_nearest(y: &[f64], p: &[f64; 2], q: &[f64; 2]) -> ([f64; 2], f64) {
    let d = [q[0] - p[0], q[1] - p[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (((y[0] - p[0]) * d[0] + (y[1] - p[1]) * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let c = [p[0] + t * d[0], p[1] + t * d[1]];
    let dx = y[0] - c[0];
    let dy = y[1] - c[1];
    (c, (dx * dx + dy * dy).sqrt())
}

/// Exact distance from a plane point to the tent graph.
pub(crate) fn distance_to_tent(y: &[f64]) -> f64 {
    let mut best = {
        let dx = y[0];
        let dy = y[1];
        (dx * dx + dy * dy).sqrt()
    };
    for (p, q) in tent_segments() {
        let (_, d) = point_segment_nearest(y, &p, &q);
        if d < best {
            best = d;
        }
    }
    best
}

fn project_tent(space: &ModelSpace, y: &Point, opts: &ProjectOpts) -> Result<ProjectionResult> {
    let c = y.coords();
    let mut cands: Vec<(Vec<f64>, f64)> = vec![(vec![0.0, 0.0], norm(c))];
    for (p, q) in tent_segments() {
        let (pt, d) = point_segment_nearest(c, &p, &q);
        cands.push((pt.to_vec(), d));
    }
    cands.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let best = cands[0].1;
    let kept = cluster_candidates(space, cands, best, opts);
    Ok(assemble_result(space, kept, best, SolveDiagnostics::default()))
}

// ---------------------------------------------------------------------------
// Generic multistart machinery
// ---------------------------------------------------------------------------

/// Deduplicate near-equal minimizers; candidates must be sorted by value.
fn cluster_candidates(
    space: &ModelSpace,
    sorted: Vec<(Vec<f64>, f64)>,
    best: f64,
    opts: &ProjectOpts,
) -> Vec<(Vec<f64>, f64, Option<Vec<f64>>)> {
    cluster_candidates_with_params(
        space,
        sorted.into_iter().map(|(c, v)| (c, v, None)).collect(),
        best,
        opts,
    )
}

fn cluster_candidates_with_params(
    space: &ModelSpace,
    sorted: Vec<(Vec<f64>, f64, Option<Vec<f64>>)>,
    best: f64,
    opts: &ProjectOpts,
) -> Vec<(Vec<f64>, f64, Option<Vec<f64>>)> {
    let mut kept: Vec<(Vec<f64>, f64, Option<Vec<f64>>)> = Vec::new();
    for (coords, value, params) in sorted {
        if value > best + opts.value_tol {
            break;
        }
        if kept
            .iter()
            .all(|(kc, _, _)| dist_coords(space, kc, &coords) >= opts.separation)
        {
            kept.push((coords, value, params));
        }
    }
    kept
}

fn assemble_result(
    space: &ModelSpace,
    mut kept: Vec<(Vec<f64>, f64, Option<Vec<f64>>)>,
    best: f64,
    diagnostics: SolveDiagnostics,
) -> ProjectionResult {
    kept.sort_by(|a, b| {
        if lex_less(&a.0, &b.0) {
            std::cmp::Ordering::Less
        } else if lex_less(&b.0, &a.0) {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    });
    let multivalued = kept.len() > 1;
    let mut nearest = Vec::with_capacity(kept.len());
    let mut params = Vec::with_capacity(kept.len());
    for (coords, _, p) in kept {
        nearest.push(Point::renormalized(space.clone(), coords));
        params.push(p);
    }
    ProjectionResult { nearest, params, distance: best, multivalued, diagnostics }
}

/// Compass (pattern) search within a box, with a feasibility filter.
fn compass_search(
    start: &[f64],
    lower: &[f64],
    upper: &[f64],
    feasible: &dyn Fn(&[f64]) -> bool,
    objective: &dyn Fn(&[f64]) -> f64,
    step0: f64,
    min_step: f64,
) -> (Vec<f64>, f64, usize) {
    let mut x = start.to_vec();
    let mut v = objective(&x);
    let mut step = step0;
    let mut iters = 0usize;
    let dim = x.len();
    while step > min_step && iters < 200_000 {
        let mut improved = false;
        for i in 0..dim {
            for sgn in [1.0, -1.0] {
                let mut cand = x.clone();
                cand[i] = (cand[i] + sgn * step).clamp(lower[i], upper[i]);
                if cand[i] == x[i] {
                    continue;
                }
                iters += 1;
                if !feasible(&cand) {
                    continue;
                }
                let cv = objective(&cand);
                if cv < v {
                    x = cand;
                    v = cv;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, v, iters)
}

/// Multistart minimization of `objective` over a box with a feasibility
/// filter: coarse grid, refinement from every grid-local minimum.
fn multistart_minimize(
    lower: &[f64],
    upper: &[f64],
    feasible: &dyn Fn(&[f64]) -> bool,
    objective: &dyn Fn(&[f64]) -> f64,
    opts: &ProjectOpts,
) -> Result<(Vec<(Vec<f64>, f64)>, SolveDiagnostics)> {
    let dim = lower.len();
    let n = opts.grid_per_dim.max(2);
    let total: usize = n.pow(dim as u32);
    if total > 1_000_000 {
        return Err(GeomError::SolverFailure(format!(
            "parameter grid of {total} nodes is too large"
        )));
    }
    let coord = |i: usize, k: usize| lower[i] + (upper[i] - lower[i]) * k as f64 / (n - 1) as f64;
    let mut values = vec![f64::INFINITY; total];
    let unpack = |mut flat: usize| -> Vec<usize> {
        let mut idx = vec![0usize; dim];
        for i in (0..dim).rev() {
            idx[i] = flat % n;
            flat /= n;
        }
        idx
    };
    let mut iters = 0usize;
    for flat in 0..total {
        let idx = unpack(flat);
        let p: Vec<f64> = (0..dim).map(|i| coord(i, idx[i])).collect();
        if feasible(&p) {
            values[flat] = objective(&p);
            iters += 1;
        }
    }
    // Local minima of the grid (within the feasible subset) seed refinement.
    let mut starts: Vec<usize> = Vec::new();
    for flat in 0..total {
        if !values[flat].is_finite() {
            continue;
        }
        let idx = unpack(flat);
        let mut is_min = true;
        'outer: for i in 0..dim {
            for delta in [-1isize, 1] {
                let kk = idx[i] as isize + delta;
                if kk < 0 || kk >= n as isize {
                    continue;
                }
                let mut nidx = idx.clone();
                nidx[i] = kk as usize;
                let nflat = nidx.iter().fold(0usize, |acc, &k| acc * n + k);
                if values[nflat] < values[flat] {
                    is_min = false;
                    break 'outer;
                }
            }
        }
        if is_min {
            starts.push(flat);
        }
    }
    if starts.is_empty() {
        return Err(GeomError::SolverFailure(
            "no feasible candidates on the parameter grid".into(),
        ));
    }
    starts.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    starts.truncate(128);
    let cell = (0..dim)
        .map(|i| (upper[i] - lower[i]) / (n - 1) as f64)
        .fold(0.0f64, f64::max);
    let mut refined: Vec<(Vec<f64>, f64)> = Vec::new();
    for &flat in &starts {
        let idx = unpack(flat);
        let p: Vec<f64> = (0..dim).map(|i| coord(i, idx[i])).collect();
        let (x, v, it) = compass_search(
            &p,
            lower,
            upper,
            feasible,
            objective,
            cell.max(opts.refine_tol),
            opts.refine_tol,
        );
        iters += it;
        refined.push((x, v));
    }
    refined.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let diagnostics = SolveDiagnostics {
        iterations: iters,
        restarts: starts.len(),
        achieved_tol: opts.refine_tol,
    };
    Ok((refined, diagnostics))
}

fn project_epigraph(set: &SetDescriptor, y: &Point, opts: &ProjectOpts) -> Result<ProjectionResult> {
    let SetDescriptor::Epigraph { space, function } = set else { unreachable!() };
    if membership(set, y, opts.member_tol)? {
        return Ok(ProjectionResult::single(y.clone(), 0.0));
    }
    let inner = set.epigraph_inner().expect("epigraph ambient is a product");
    let ModelSpace::Euclidean { dim } = inner else {
        return Err(GeomError::SolverFailure(
            "numeric epigraph projection supports Euclidean bases only".into(),
        ));
    };
    let (base, mu) = y.split_product()?;
    let inner_space = inner.clone();
    let f = |x: &[f64]| -> f64 {
        function.eval(&Point::renormalized(inner_space.clone(), x.to_vec()))
    };
    // The minimizer lies within d((x₀, f(x₀)), y) of the base point.
    let d0 = {
        let fx = f(base);
        let gap = fx - mu;
        debug_assert!(gap > 0.0);
        gap
    };
    let half = d0 * 1.0001 + 1e-9;
    let lower: Vec<f64> = base.iter().map(|b| b - half).collect();
    let upper: Vec<f64> = base.iter().map(|b| b + half).collect();
    let objective = |x: &[f64]| -> f64 {
        let fx = f(x);
        let lam = fx.max(mu);
        let db = dist_coords(&inner_space, x, base);
        (db * db + (lam - mu) * (lam - mu)).sqrt()
    };
    let feasible = |_: &[f64]| true;
    let _ = dim;
    let (refined, diagnostics) = multistart_minimize(&lower, &upper, &feasible, &objective, opts)?;
    let best = refined[0].1;
    let enriched: Vec<(Vec<f64>, f64, Option<Vec<f64>>)> = refined
        .into_iter()
        .map(|(x, v)| {
            let mut coords = x.clone();
            coords.push(f(&x).max(mu));
            (coords, v, Some(x))
        })
        .collect();
    let kept = cluster_candidates_with_params(space, enriched, best, opts);
    Ok(assemble_result(space, kept, best, diagnostics))
}

fn project_constraint_set(
    set: &SetDescriptor,
    y: &Point,
    opts: &ProjectOpts,
) -> Result<ProjectionResult> {
    let SetDescriptor::ConstraintSet { space, constraints, mfcq } = set else { unreachable!() };
    if membership(set, y, opts.member_tol)? {
        return Ok(ProjectionResult::single(y.clone(), 0.0));
    }
    let Some(mfcq) = mfcq else {
        return Err(GeomError::SolverFailure(
            "projection onto a constraint set needs an MFCQ anchor as solver seed".into(),
        ));
    };
    let c = y.coords();
    let d_anchor = norm(&sub(c, &mfcq.anchor));
    let half = 2.0 * d_anchor + 1.0;
    let lower: Vec<f64> = c.iter().map(|v| v - half).collect();
    let upper: Vec<f64> = c.iter().map(|v| v + half).collect();
    let feasible = |x: &[f64]| constraints.iter().all(|g| g.eval(x) <= 0.0);
    let objective = |x: &[f64]| norm(&sub(x, c));
    let (mut refined, mut diagnostics) =
        multistart_minimize(&lower, &upper, &feasible, &objective, opts)?;
    // The anchor is always a valid start.
    let (xa, va, it) = compass_search(
        &mfcq.anchor,
        &lower,
        &upper,
        &feasible,
        &objective,
        0.5 * d_anchor.max(1e-6),
        opts.refine_tol,
    );
    diagnostics.iterations += it;
    diagnostics.restarts += 1;
    refined.push((xa, va));
    refined.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let best = refined[0].1;
    let enriched = refined.into_iter().map(|(x, v)| (x.clone(), v, Some(x))).collect();
    let kept = cluster_candidates_with_params(space, enriched, best, opts);
    Ok(assemble_result(space, kept, best, diagnostics))
}

/// Axis-aligned bounding box of a convex Euclidean parameter domain.
fn domain_box(domain: &SetDescriptor) -> Result<(Vec<f64>, Vec<f64>)> {
    match domain {
        SetDescriptor::EuclideanBall { center, radius, .. } => Ok((
            center.iter().map(|c| c - radius).collect(),
            center.iter().map(|c| c + radius).collect(),
        )),
        other => Err(GeomError::SolverFailure(format!(
            "smooth-image domain of kind {} has no bounded parameterization",
            other.kind()
        ))),
    }
}

fn project_smooth_image(
    set: &SetDescriptor,
    y: &Point,
    opts: &ProjectOpts,
) -> Result<ProjectionResult> {
    let SetDescriptor::SmoothImage { space, map, domain } = set else { unreachable!() };
    let (lower, upper) = domain_box(domain)?;
    let dom_space = domain.ambient().clone();
    let feasible = |u: &[f64]| {
        membership(domain, &Point::renormalized(dom_space.clone(), u.to_vec()), 1e-12)
            .unwrap_or(false)
    };
    let c = y.coords();
    let objective = |u: &[f64]| norm(&sub(&map.eval(u), c));
    let (refined, diagnostics) = multistart_minimize(&lower, &upper, &feasible, &objective, opts)?;
    let best = refined[0].1;
    let enriched = refined
        .into_iter()
        .map(|(u, v)| (map.eval(&u), v, Some(u)))
        .collect();
    let kept = cluster_candidates_with_params(space, enriched, best, opts);
    Ok(assemble_result(space, kept, best, diagnostics))
}

// ---------------------------------------------------------------------------
// Angle and uniqueness diagnostics
// ---------------------------------------------------------------------------

/// Angle ∠_{P_S(y)}(y, w) at the projection of `y`, for w ∈ S different from
/// the projection. For convex sets in a model space (with dist(y, S) < D_κ/2)
/// this angle is at least π/2.
pub fn project_obtuse_check(
    set: &SetDescriptor,
    y: &Point,
    w: &Point,
    opts: &ProjectOpts,
) -> Result<f64> {
    if membership(set, y, 1e-9)? {
        return Err(GeomError::Precondition("y must lie outside the set".into()));
    }
    if !membership(set, w, 1e-7)? {
        return Err(GeomError::Precondition("w must belong to the set".into()));
    }
    let res = project(set, y, opts)?;
    let p = res.primary();
    if dist(p, w)? <= 1e-9 {
        return Err(GeomError::Precondition("w coincides with the projection".into()));
    }
    let dk2 = set.ambient().diameter() / 2.0;
    if res.distance >= dk2 {
        return Err(GeomError::Precondition(format!(
            "dist(y, S) = {} is not below D_k/2 = {dk2}",
            res.distance
        )));
    }
    let g_y = geodesic_between(p, y)?;
    let g_w = geodesic_between(p, w)?;
    crate::angle::tangent_angle(&g_y, &g_w)
}

/// Monte-Carlo estimate of the fraction of query points in balls around `z`
/// whose projection is multivalued, per radius. Feeds the prox-regularity and
/// positive-reach style predicates.
pub fn projection_uniqueness_profile(
    set: &SetDescriptor,
    z: &Point,
    radii: &[f64],
    samples: usize,
    seed: u64,
    opts: &ProjectOpts,
) -> Result<Vec<(f64, f64)>> {
    if !membership(set, z, 1e-7)? {
        return Err(GeomError::Precondition("z must belong to the set".into()));
    }
    let mut out = Vec::with_capacity(radii.len());
    for (ri, &radius) in radii.iter().enumerate() {
        let mut rng = crate::sampling::rng(seed ^ (ri as u64).wrapping_mul(0x9e37_79b9));
        let mut multi = 0usize;
        let mut total = 0usize;
        for _ in 0..samples {
            let q = crate::sampling::sample_ambient_ball(z, radius, &mut rng)?;
            total += 1;
            match project(set, &q, opts) {
                Ok(res) => {
                    if res.multivalued {
                        multi += 1;
                    }
                }
                Err(GeomError::NonUniqueProjection { .. }) => multi += 1,
                Err(e) => return Err(e),
            }
        }
        out.push((radius, multi as f64 / total.max(1) as f64));
    }
    Ok(out)
}
