//! Sampling-based certifiers and refuters for the regularity notions that
//! drive local linear convergence of alternating projections.
//!
//! Verdicts are one-sided: `CertifiedOnSample` is evidence on a finite seeded
//! sample, never a proof, while `RefutedWithCounterexample` carries a concrete
//! point tuple that reproduces the violated inequality when replayed.
//! Intrinsic distances of point clouds are estimated by shortest paths in the
//! h-neighborhood graph; the mesh error is tracked separately as an additive
//! slack of h³ per path edge so that geometric failure is not confused with
//! discretization error.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::angle::vertex_angle;
use crate::error::{GeomError, Result};
use crate::projection::{project, ProjectOpts};
use crate::sampling::{rng, sample_query_near, SetSampler};
use crate::sets::{membership, uag_witness, SetDescriptor};
use crate::space::{dist, dist_coords, project_to_tangent, scale, tangent_norm, Geodesic, Point};

use std::f64::consts::FRAC_PI_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    CertifiedOnSample,
    RefutedWithCounterexample,
    Inconclusive,
}

/// Structured record of the points and scalars behind a verdict.
#[derive(Clone, Debug, Default, Serialize)]
pub struct WitnessRecord {
    pub points: Vec<(String, Vec<f64>)>,
    pub values: BTreeMap<String, f64>,
}

impl WitnessRecord {
    fn point(mut self, name: &str, p: &Point) -> Self {
        self.points.push((name.to_string(), p.coords().to_vec()));
        self
    }

    fn coords(mut self, name: &str, c: &[f64]) -> Self {
        self.points.push((name.to_string(), c.to_vec()));
        self
    }

    fn value(mut self, name: &str, v: f64) -> Self {
        self.values.insert(name.to_string(), v);
        self
    }

    pub fn get_point(&self, name: &str) -> Option<&[f64]> {
        self.points.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_slice())
    }

    pub fn get_value(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    pub check: String,
    pub verdict: Verdict,
    /// Inputs of the check (ε, r, σ, R, h, sample counts, seed).
    pub parameters: BTreeMap<String, f64>,
    /// Measured quantities (worst ratios, extremal angles).
    pub metrics: BTreeMap<String, f64>,
    /// Smallest slack observed against the defining inequality; negative
    /// exactly when the verdict is refuted.
    pub worst_margin: f64,
    pub witness: Option<WitnessRecord>,
    pub samples_evaluated: usize,
    /// Best constant the sample would support (e.g. the smallest σ for which
    /// every pair passes), when the check has one.
    pub empirical_best: Option<f64>,
    pub notes: Vec<String>,
}

impl RegularityReport {
    fn new(check: &str) -> Self {
        RegularityReport {
            check: check.to_string(),
            verdict: Verdict::Inconclusive,
            parameters: BTreeMap::new(),
            metrics: BTreeMap::new(),
            worst_margin: f64::INFINITY,
            witness: None,
            samples_evaluated: 0,
            empirical_best: None,
            notes: Vec::new(),
        }
    }

    fn param(mut self, k: &str, v: f64) -> Self {
        self.parameters.insert(k.to_string(), v);
        self
    }
}

/// Options shared by the sampling certifiers.
#[derive(Clone, Debug)]
pub struct CheckOpts {
    /// Target number of evaluated sample configurations.
    pub samples: usize,
    pub seed: u64,
    /// Membership tolerance.
    pub tol: f64,
    /// Grid resolution for witness-curve deviation suprema.
    pub grid: usize,
    /// Neighborhood radius for point-cloud witness curves.
    pub cloud_h: Option<f64>,
    /// Tolerance for identowing a point as a projection (|d(w,z) − dist|).
    pub proj_tol: f64,
    pub proj: ProjectOpts,
}

impl Default for CheckOpts {
    fn default() -> Self {
        CheckOpts {
            samples: 10_000,
            seed: 0,
            tol: 1e-9,
            grid: 256,
            cloud_h: None,
            proj_tol: 1e-8,
            proj: ProjectOpts::default(),
        }
    }
}

impl CheckOpts {
    pub fn seeded(seed: u64) -> Self {
        CheckOpts { seed, ..Default::default() }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }
}

// ---------------------------------------------------------------------------
// Neighborhood graph and intrinsic metric estimates
// ---------------------------------------------------------------------------

/// Graph on a point cloud with edges between points at ambient distance ≤ h,
/// weighted by that distance.
pub struct NeighborhoodGraph {
    space: crate::space::ModelSpace,
    points: Vec<Vec<f64>>,
    h: f64,
    adj: Vec<Vec<(usize, f64)>>,
}

#[derive(PartialEq)]
struct HeapItem {
    d: f64,
    edges: u32,
    node: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reverse for a min-heap; ties prefer fewer edges.
        other
            .d
            .partial_cmp(&self.d)
            .unwrap()
            .then_with(|| other.edges.cmp(&self.edges))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl NeighborhoodGraph {
    pub fn build(cloud: &SetDescriptor, h: f64) -> Result<Self> {
        let SetDescriptor::PointCloud { space, points } = cloud else {
            return Err(GeomError::InvalidInput("neighborhood graph needs a point cloud".into()));
        };
        if !(h > 0.0) {
            return Err(GeomError::InvalidInput(format!("neighborhood radius h = {h} invalid")));
        }
        let n = points.len();
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = dist_coords(space, &points[i], &points[j]);
                if d <= h {
                    adj[i].push((j, d));
                    adj[j].push((i, d));
                }
            }
        }
        Ok(NeighborhoodGraph { space: space.clone(), points: points.clone(), h, adj })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Shortest-path distances and edge counts from `src`; unreachable nodes
    /// report `f64::INFINITY`.
    pub fn dijkstra(&self, src: usize) -> Vec<(f64, u32)> {
        let n = self.points.len();
        let mut dist = vec![(f64::INFINITY, 0u32); n];
        let mut heap = BinaryHeap::new();
        dist[src] = (0.0, 0);
        heap.push(HeapItem { d: 0.0, edges: 0, node: src });
        while let Some(HeapItem { d, edges, node }) = heap.pop() {
            if d > dist[node].0 {
                continue;
            }
            for &(next, w) in &self.adj[node] {
                let nd = d + w;
                let ne = edges + 1;
                if nd < dist[next].0 || (nd == dist[next].0 && ne < dist[next].1) {
                    dist[next] = (nd, ne);
                    heap.push(HeapItem { d: nd, edges: ne, node: next });
                }
            }
        }
        dist
    }

    /// Vertex sequence of a shortest path, when one exists.
    pub fn shortest_path(&self, src: usize, dst: usize) -> Option<Vec<usize>> {
        let n = self.points.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        dist[src] = 0.0;
        heap.push(HeapItem { d: 0.0, edges: 0, node: src });
        while let Some(HeapItem { d, node, .. }) = heap.pop() {
            if d > dist[node] {
                continue;
            }
            if node == dst {
                break;
            }
            for &(next, w) in &self.adj[node] {
                let nd = d + w;
                if nd < dist[next] {
                    dist[next] = nd;
                    prev[next] = node;
                    heap.push(HeapItem { d: nd, edges: 0, node: next });
                }
            }
        }
        if !dist[dst].is_finite() {
            return None;
        }
        let mut path = vec![dst];
        let mut cur = dst;
        while cur != src {
            cur = prev[cur];
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }
}

/// Pairwise intrinsic-distance estimates d̂^A on a subset of a cloud.
pub struct IntrinsicMetricEstimate {
    graph: NeighborhoodGraph,
    subset: Vec<usize>,
    rows: Vec<Vec<(f64, u32)>>,
}

impl IntrinsicMetricEstimate {
    pub fn compute(cloud: &SetDescriptor, h: f64, subset: Option<Vec<usize>>) -> Result<Self> {
        let graph = NeighborhoodGraph::build(cloud, h)?;
        let subset = subset.unwrap_or_else(|| (0..graph.len()).collect());
        let rows = subset.iter().map(|&i| graph.dijkstra(i)).collect();
        Ok(IntrinsicMetricEstimate { graph, subset, rows })
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    /// d̂^A between the a-th and b-th subset members, with the edge count of
    /// the realizing path; `None` when disconnected.
    pub fn dist_hat(&self, a: usize, b: usize) -> Option<(f64, u32)> {
        let (d, e) = self.rows[a][self.subset[b]];
        d.is_finite().then_some((d, e))
    }

    /// Ambient distance between the same pair.
    pub fn dist_ambient(&self, a: usize, b: usize) -> f64 {
        dist_coords(
            &self.graph.space,
            &self.graph.points[self.subset[a]],
            &self.graph.points[self.subset[b]],
        )
    }

    pub fn point(&self, a: usize) -> &[f64] {
        &self.graph.points[self.subset[a]]
    }

    pub fn h(&self) -> f64 {
        self.graph.h
    }
}

// ---------------------------------------------------------------------------
// Extrinsic-curvature checks
// ---------------------------------------------------------------------------

fn extrinsic_core(
    name: &str,
    cloud: &SetDescriptor,
    z: &Point,
    sigma: f64,
    r: f64,
    h: f64,
) -> Result<RegularityReport> {
    let SetDescriptor::PointCloud { space, points } = cloud else {
        return Err(GeomError::InvalidInput("extrinsic-curvature checks need a point cloud".into()));
    };
    if z.space() != space {
        return Err(GeomError::SpaceMismatch {
            left: z.space().describe(),
            right: space.describe(),
        });
    }
    if !points.iter().any(|p| dist_coords(space, p, z.coords()) <= 1e-9) {
        return Err(GeomError::Precondition("z must be a member of the cloud".into()));
    }
    let mut report = RegularityReport::new(name)
        .param("sigma", sigma)
        .param("r", r)
        .param("h", h);

    let ball: Vec<usize> = (0..points.len())
        .filter(|&i| dist_coords(space, &points[i], z.coords()) <= r)
        .collect();
    let estimate = IntrinsicMetricEstimate::compute(cloud, h, Some(ball.clone()))?;

    let mut disconnected = 0usize;
    let mut max_ratio = 0.0f64;
    let mut best_sigma = 0.0f64;
    let mut worst_margin = f64::INFINITY;
    let mut worst: Option<WitnessRecord> = None;
    let mut pairs = 0usize;

    for a in 0..ball.len() {
        for b in (a + 1)..ball.len() {
            let d = estimate.dist_ambient(a, b);
            if d <= 0.0 {
                continue;
            }
            let Some((dhat, edges)) = estimate.dist_hat(a, b) else {
                disconnected += 1;
                continue;
            };
            pairs += 1;
            let slack = edges as f64 * h.powi(3);
            let ratio = (dhat - d) / d.powi(3);
            max_ratio = max_ratio.max(ratio);
            best_sigma = best_sigma.max((dhat - d - slack) / d.powi(3));
            let margin = sigma * d.powi(3) + slack - (dhat - d);
            if margin < worst_margin {
                worst_margin = margin;
                worst = Some(
                    WitnessRecord::default()
                        .coords("p", estimate.point(a))
                        .coords("q", estimate.point(b))
                        .value("d", d)
                        .value("d_hat", dhat)
                        .value("edges", edges as f64)
                        .value("slack", slack)
                        .value("sigma", sigma)
                        .value("ratio", ratio),
                );
            }
        }
    }

    report.samples_evaluated = pairs;
    report.metrics.insert("max_ratio".into(), max_ratio);
    report.metrics.insert("pairs".into(), pairs as f64);
    report.empirical_best = Some(best_sigma.max(0.0));
    report.worst_margin = worst_margin;
    report.witness = worst;
    if disconnected > 0 {
        report.verdict = Verdict::Inconclusive;
        report.notes.push(format!(
            "{disconnected} pair(s) in B(z, {r}) are disconnected in the h-neighborhood graph"
        ));
    } else if pairs == 0 {
        report.verdict = Verdict::Inconclusive;
        report.notes.push("no distinct pairs inside the ball".into());
    } else if worst_margin < 0.0 {
        report.verdict = Verdict::RefutedWithCounterexample;
    } else {
        report.verdict = Verdict::CertifiedOnSample;
    }
    Ok(report)
}

/// Check the cubic bound d̂^A(p,q) − d(p,q) ≤ σ d(p,q)³ (plus discretization
/// slack) over all cloud pairs in B(z, r).
pub fn check_finite_extrinsic_curvature(
    cloud: &SetDescriptor,
    z: &Point,
    sigma: f64,
    r: f64,
    h: f64,
) -> Result<RegularityReport> {
    extrinsic_core("finite-extrinsic-curvature", cloud, z, sigma, r, h)
}

/// Same cubic bound read as (σ, 2, 2R)-convexity of B(z, R) ∩ A: every pair
/// in the ball qualifies, with no base-point restriction.
pub fn check_two_convexity_ball(
    cloud: &SetDescriptor,
    z: &Point,
    sigma: f64,
    big_r: f64,
    h: f64,
) -> Result<RegularityReport> {
    extrinsic_core("two-convexity-ball", cloud, z, sigma, big_r, h)
}

/// Replay an extrinsic-curvature counterexample: recompute the ambient
/// distance from the recorded coordinates and test the recorded d̂ against it.
pub fn replay_extrinsic_curvature(cloud: &SetDescriptor, report: &RegularityReport) -> Result<bool> {
    let SetDescriptor::PointCloud { space, .. } = cloud else {
        return Err(GeomError::InvalidInput("replay needs the original cloud".into()));
    };
    let w = report
        .witness
        .as_ref()
        .ok_or_else(|| GeomError::InvalidInput("report carries no witness".into()))?;
    let p = w.get_point("p").ok_or_else(|| GeomError::InvalidInput("missing p".into()))?;
    let q = w.get_point("q").ok_or_else(|| GeomError::InvalidInput("missing q".into()))?;
    let d = dist_coords(space, p, q);
    let dhat = w.get_value("d_hat").unwrap_or(f64::NAN);
    let slack = w.get_value("slack").unwrap_or(f64::NAN);
    let sigma = w.get_value("sigma").unwrap_or(f64::NAN);
    Ok(dhat - d > sigma * d.powi(3) + slack)
}

// ---------------------------------------------------------------------------
// Uniform approximability by geodesics
// ---------------------------------------------------------------------------

fn witness_membership_is_cheap(set: &SetDescriptor) -> bool {
    matches!(
        set,
        SetDescriptor::GreatSubsphere { .. }
            | SetDescriptor::SmallSphere { .. }
            | SetDescriptor::Halfspace { .. }
            | SetDescriptor::EuclideanBall { .. }
            | SetDescriptor::Epigraph { .. }
            | SetDescriptor::ConstraintSet { .. }
    )
}

/// Certify sup_t d(γ(t), f(t))/t < ε for witness curves of sampled pairs
/// x, x' ∈ B(z, R) ∩ S.
pub fn check_uag(
    set: &SetDescriptor,
    z: &Point,
    eps: f64,
    big_r: f64,
    opts: &CheckOpts,
) -> Result<RegularityReport> {
    let mut report = RegularityReport::new("uag")
        .param("epsilon", eps)
        .param("R", big_r)
        .param("samples", opts.samples as f64)
        .param("seed", opts.seed as f64);
    if !membership(set, z, 1e-7)? {
        return Err(GeomError::Precondition("z must belong to the set".into()));
    }
    if matches!(set, SetDescriptor::PointCloud { .. }) && opts.cloud_h.is_none() {
        report.verdict = Verdict::Inconclusive;
        report.notes.push("no witness generator: point clouds need a neighborhood radius h".into());
        return Ok(report);
    }
    let sampler = SetSampler::new(set, z, big_r)?;
    let mut rand = rng(opts.seed);
    let check_membership = witness_membership_is_cheap(set);
    if !check_membership {
        report.notes.push("witness membership holds by construction for this variant".into());
    }

    let mut worst_ratio = -f64::INFINITY;
    let mut worst: Option<WitnessRecord> = None;
    let mut evaluated = 0usize;
    let mut attempts = 0usize;
    let mut defects = 0usize;

    while evaluated < opts.samples && attempts < opts.samples * 4 {
        attempts += 1;
        let Some(x) = sampler.sample(&mut rand) else { continue };
        let Some(xp) = sampler.sample(&mut rand) else { continue };
        let sep = dist(&x, &xp)?;
        if sep < 1e-12 {
            continue;
        }
        let witness = match uag_witness(set, &x, &xp, eps, opts.cloud_h) {
            Ok(w) => w,
            Err(GeomError::DegenerateGeodesic) | Err(GeomError::NonUniqueGeodesic { .. }) => {
                continue
            }
            Err(GeomError::CertificationFailure(msg)) => {
                report.verdict = Verdict::RefutedWithCounterexample;
                report.worst_margin = -1.0;
                report.notes.push(msg);
                report.witness =
                    Some(WitnessRecord::default().point("x", &x).point("x_prime", &xp));
                return Ok(report);
            }
            Err(e) => return Err(e),
        };
        let (ratio, t_at) = witness.sup_deviation_ratio(opts.grid)?;
        let defect = if check_membership {
            witness.membership_defect(set, opts.grid.min(128), opts.tol)?
        } else {
            0.0
        };
        evaluated += 1;
        if defect > 0.0 {
            defects += 1;
        }
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst = Some(
                WitnessRecord::default()
                    .point("x", &x)
                    .point("x_prime", &xp)
                    .value("t", t_at)
                    .value("ratio", ratio)
                    .value("epsilon", eps)
                    .value("membership_defect", defect),
            );
        }
    }

    report.samples_evaluated = evaluated;
    if evaluated == 0 {
        report.verdict = Verdict::Inconclusive;
        report.notes.push("no sampled pairs inside B(z, R)".into());
        return Ok(report);
    }
    report.metrics.insert("worst_ratio".into(), worst_ratio);
    report.empirical_best = Some(worst_ratio);
    report.worst_margin = eps - worst_ratio;
    report.witness = worst;
    report.verdict = if worst_ratio < eps && defects == 0 {
        Verdict::CertifiedOnSample
    } else {
        if defects > 0 {
            report.notes.push(format!("{defects} witness curve(s) left the set"));
        }
        Verdict::RefutedWithCounterexample
    };
    Ok(report)
}

/// Replay a UAG counterexample: rebuild the witness for the recorded pair and
/// re-evaluate the deviation ratio at the recorded time.
pub fn replay_uag(set: &SetDescriptor, report: &RegularityReport, opts: &CheckOpts) -> Result<bool> {
    let w = report
        .witness
        .as_ref()
        .ok_or_else(|| GeomError::InvalidInput("report carries no witness".into()))?;
    let space = set.ambient().clone();
    let x = Point::new(space.clone(), w.get_point("x").unwrap().to_vec())?;
    let xp = Point::new(space, w.get_point("x_prime").unwrap().to_vec())?;
    let eps = w.get_value("epsilon").unwrap_or(f64::NAN);
    let t = w.get_value("t").unwrap_or(f64::NAN);
    let witness = uag_witness(set, &x, &xp, eps, opts.cloud_h)?;
    Ok(witness.deviation_ratio(t)? >= eps)
}

// ---------------------------------------------------------------------------
// Super-regularity
// ---------------------------------------------------------------------------

/// Certify ∠ₓ(y, x') ≥ π/2 − ε for sampled y ∈ B(z, r/2) ∖ S, x ∈ P_S(y),
/// and x' ∈ S ∩ B(z, r).
pub fn check_super_regularity(
    set: &SetDescriptor,
    z: &Point,
    eps: f64,
    r: f64,
    opts: &CheckOpts,
) -> Result<RegularityReport> {
    let mut report = RegularityReport::new("super-regularity")
        .param("epsilon", eps)
        .param("r", r)
        .param("samples", opts.samples as f64)
        .param("seed", opts.seed as f64);
    if !membership(set, z, 1e-7)? {
        return Err(GeomError::Precondition("z must belong to the set".into()));
    }
    let diameter = set.ambient().diameter();
    if r >= diameter {
        return Err(GeomError::Precondition(format!(
            "r = {r} must be below the diameter {diameter}"
        )));
    }
    let threshold = FRAC_PI_2 - eps;
    let sampler = SetSampler::new(set, z, r)?;
    let mut rand = rng(opts.seed);

    let mut evaluated = 0usize;
    let mut attempts = 0usize;
    let mut proj_failures = 0usize;
    let mut min_margin = f64::INFINITY;
    let mut worst: Option<WitnessRecord> = None;

    while evaluated < opts.samples && attempts < opts.samples * 8 {
        attempts += 1;
        let Ok(y) = sample_query_near(Some(&sampler), z, r / 2.0, &mut rand) else { continue };
        if dist(&y, z)? >= r / 2.0 || membership(set, &y, opts.tol)? {
            continue;
        }
        let feet: Vec<Point> = match project(set, &y, &opts.proj) {
            Ok(res) => res.nearest,
            Err(GeomError::NonUniqueProjection { representatives }) => representatives,
            Err(_) => {
                proj_failures += 1;
                continue;
            }
        };
        for x in feet.iter().take(4) {
            if dist(x, &y)? < 1e-12 {
                continue;
            }
            for _ in 0..4 {
                let Some(xp) = sampler.sample(&mut rand) else { break };
                if dist(&xp, x)? <= 1e-9 {
                    continue;
                }
                let Ok(angle) = vertex_angle(x, &y, &xp) else { continue };
                evaluated += 1;
                let margin = angle - threshold;
                if margin < min_margin {
                    min_margin = margin;
                    worst = Some(
                        WitnessRecord::default()
                            .point("y", &y)
                            .point("x", x)
                            .point("x_prime", &xp)
                            .value("angle", angle)
                            .value("threshold", threshold)
                            .value("epsilon", eps),
                    );
                }
                if evaluated >= opts.samples {
                    break;
                }
            }
        }
    }

    report.samples_evaluated = evaluated;
    if proj_failures > 0 {
        report.notes.push(format!("{proj_failures} projection failure(s) while sampling"));
    }
    if evaluated == 0 {
        report.verdict = Verdict::Inconclusive;
        report.notes.push("no valid (y, x, x') configurations sampled".into());
        return Ok(report);
    }
    report.metrics.insert("min_angle".into(), min_margin + threshold);
    report.worst_margin = min_margin;
    report.witness = worst;
    report.empirical_best = Some(FRAC_PI_2 - (min_margin + threshold));
    report.verdict = if min_margin >= 0.0 {
        Verdict::CertifiedOnSample
    } else {
        Verdict::RefutedWithCounterexample
    };
    Ok(report)
}

/// Replay a super-regularity counterexample: recompute both the angle at the
/// recorded foot and the fact that the foot is a metric projection of y.
pub fn replay_super_regularity(
    set: &SetDescriptor,
    report: &RegularityReport,
    opts: &CheckOpts,
) -> Result<bool> {
    let w = report
        .witness
        .as_ref()
        .ok_or_else(|| GeomError::InvalidInput("report carries no witness".into()))?;
    let space = set.ambient().clone();
    let y = Point::new(space.clone(), w.get_point("y").unwrap().to_vec())?;
    let x = Point::new(space.clone(), w.get_point("x").unwrap().to_vec())?;
    let xp = Point::new(space, w.get_point("x_prime").unwrap().to_vec())?;
    let threshold = w.get_value("threshold").unwrap_or(f64::NAN);
    let angle = vertex_angle(&x, &y, &xp)?;
    let foot_dist = dist(&y, &x)?;
    let nearest = match project(set, &y, &opts.proj) {
        Ok(res) => res.distance,
        Err(GeomError::NonUniqueProjection { representatives }) => dist(&y, &representatives[0])?,
        Err(e) => return Err(e),
    };
    Ok(angle < threshold && (foot_dist - nearest).abs() <= opts.proj_tol)
}

// ---------------------------------------------------------------------------
// Separable intersection
// ---------------------------------------------------------------------------

/// Certify ∠_y(x, x') ≥ α for sampled x ∈ (A ∩ B(z, r)) ∖ B, y ∈ P_B(x) ∖ A
/// with max{d(y,x), d(y,z)} < r/2, and x' ∈ P_A(y).
pub fn check_separable_intersection(
    set_a: &SetDescriptor,
    set_b: &SetDescriptor,
    z: &Point,
    alpha: f64,
    r: f64,
    opts: &CheckOpts,
) -> Result<RegularityReport> {
    let mut report = RegularityReport::new("separable-intersection")
        .param("alpha", alpha)
        .param("r", r)
        .param("samples", opts.samples as f64)
        .param("seed", opts.seed as f64);
    if !membership(set_a, z, 1e-7)? || !membership(set_b, z, 1e-7)? {
        return Err(GeomError::Precondition("z must belong to A ∩ B".into()));
    }
    let sampler_a = SetSampler::new(set_a, z, r)?;
    let mut rand = rng(opts.seed);

    let mut evaluated = 0usize;
    let mut attempts = 0usize;
    let mut x_outside_b = 0usize;
    let mut proj_failures = 0usize;
    let mut min_margin = f64::INFINITY;
    let mut worst: Option<WitnessRecord> = None;

    while evaluated < opts.samples && attempts < opts.samples * 8 {
        attempts += 1;
        let Some(x) = sampler_a.sample(&mut rand) else { continue };
        if membership(set_b, &x, opts.tol)? {
            continue;
        }
        x_outside_b += 1;
        let feet_b: Vec<Point> = match project(set_b, &x, &opts.proj) {
            Ok(res) => res.nearest,
            Err(GeomError::NonUniqueProjection { representatives }) => representatives,
            Err(_) => {
                proj_failures += 1;
                continue;
            }
        };
        for y in feet_b.iter().take(4) {
            if membership(set_a, y, opts.tol)? {
                continue;
            }
            let dyx = dist(y, &x)?;
            let dyz = dist(y, z)?;
            if dyx.max(dyz) >= r / 2.0 || dyx < 1e-12 {
                continue;
            }
            let feet_a: Vec<Point> = match project(set_a, y, &opts.proj) {
                Ok(res) => res.nearest,
                Err(GeomError::NonUniqueProjection { representatives }) => representatives,
                Err(_) => {
                    proj_failures += 1;
                    continue;
                }
            };
            for xp in feet_a.iter().take(4) {
                if dist(xp, y)? < 1e-12 {
                    continue;
                }
                let Ok(angle) = vertex_angle(y, &x, xp) else { continue };
                evaluated += 1;
                let margin = angle - alpha;
                if margin < min_margin {
                    min_margin = margin;
                    worst = Some(
                        WitnessRecord::default()
                            .point("x", &x)
                            .point("y", y)
                            .point("x_prime", xp)
                            .value("angle", angle)
                            .value("alpha", alpha),
                    );
                }
                if evaluated >= opts.samples {
                    break;
                }
            }
        }
    }

    report.samples_evaluated = evaluated;
    if proj_failures > 0 {
        report.notes.push(format!("{proj_failures} projection failure(s) while sampling"));
    }
    if evaluated == 0 {
        if x_outside_b == 0 && attempts >= opts.samples {
            report.verdict = Verdict::CertifiedOnSample;
            report.worst_margin = f64::INFINITY;
            report.notes.push("vacuous: no sampled point of A lies outside B".into());
        } else {
            report.verdict = Verdict::Inconclusive;
            report.notes.push("no valid (x, y, x') configurations sampled".into());
        }
        return Ok(report);
    }
    report.metrics.insert("min_angle".into(), min_margin + alpha);
    report.worst_margin = min_margin;
    report.witness = worst;
    report.empirical_best = Some(min_margin + alpha);
    report.verdict = if min_margin >= 0.0 {
        Verdict::CertifiedOnSample
    } else {
        Verdict::RefutedWithCounterexample
    };
    Ok(report)
}

/// Replay a separable-intersection counterexample.
pub fn replay_separable_intersection(
    set_a: &SetDescriptor,
    set_b: &SetDescriptor,
    report: &RegularityReport,
    opts: &CheckOpts,
) -> Result<bool> {
    let w = report
        .witness
        .as_ref()
        .ok_or_else(|| GeomError::InvalidInput("report carries no witness".into()))?;
    let space = set_a.ambient().clone();
    let x = Point::new(space.clone(), w.get_point("x").unwrap().to_vec())?;
    let y = Point::new(space.clone(), w.get_point("y").unwrap().to_vec())?;
    let xp = Point::new(space, w.get_point("x_prime").unwrap().to_vec())?;
    let alpha = w.get_value("alpha").unwrap_or(f64::NAN);
    let angle = vertex_angle(&y, &x, &xp)?;
    let y_is_foot =
        (dist(&y, &x)? - project(set_b, &x, &opts.proj)?.distance).abs() <= opts.proj_tol;
    let xp_is_foot =
        (dist(&xp, &y)? - project(set_a, &y, &opts.proj)?.distance).abs() <= opts.proj_tol;
    Ok(angle < alpha && y_is_foot && xp_is_foot)
}

// ---------------------------------------------------------------------------
// Intersection angle and transversality
// ---------------------------------------------------------------------------

/// Infimum of ∠_z(p, q) over sampled p ∈ (B(z,R) ∩ A) ∖ B and
/// q ∈ (B(z,R) ∩ B) ∖ A; `None` when either sample class is empty.
pub fn angle_at_intersection(
    set_a: &SetDescriptor,
    set_b: &SetDescriptor,
    z: &Point,
    big_r: f64,
    opts: &CheckOpts,
) -> Result<Option<f64>> {
    if !membership(set_a, z, 1e-7)? || !membership(set_b, z, 1e-7)? {
        return Err(GeomError::Precondition("z must belong to A ∩ B".into()));
    }
    let sampler_a = SetSampler::new(set_a, z, big_r)?;
    let sampler_b = SetSampler::new(set_b, z, big_r)?;
    let mut rand = rng(opts.seed);
    let mut inf: Option<f64> = None;
    let mut evaluated = 0usize;
    let mut attempts = 0usize;
    while evaluated < opts.samples && attempts < opts.samples * 8 {
        attempts += 1;
        let Some(p) = sampler_a.sample(&mut rand) else { continue };
        if membership(set_b, &p, opts.tol)? || dist(&p, z)? < 1e-10 {
            continue;
        }
        let Some(q) = sampler_b.sample(&mut rand) else { continue };
        if membership(set_a, &q, opts.tol)? || dist(&q, z)? < 1e-10 {
            continue;
        }
        let Ok(angle) = vertex_angle(z, &p, &q) else { continue };
        evaluated += 1;
        inf = Some(inf.map_or(angle, |v: f64| v.min(angle)));
    }
    Ok(inf)
}

/// Search sampled geodesics through z for one whose endpoints both project
/// back onto z; a hit refutes transversality, exhausting the samples yields
/// `CertifiedOnSample` only.
pub fn refute_transversality(
    set_a: &SetDescriptor,
    set_b: &SetDescriptor,
    z: &Point,
    directions: &[Vec<f64>],
    lengths: &[f64],
    opts: &CheckOpts,
) -> Result<RegularityReport> {
    let mut report = RegularityReport::new("transversality")
        .param("directions", directions.len() as f64)
        .param("lengths", lengths.len() as f64);
    if !membership(set_a, z, 1e-7)? || !membership(set_b, z, 1e-7)? {
        return Err(GeomError::Precondition("z must belong to A ∩ B".into()));
    }
    let space = z.space();
    let mut min_gap = f64::INFINITY;
    let mut evaluated = 0usize;
    for dir in directions {
        let tangent = project_to_tangent(space, z.coords(), dir);
        let n = tangent_norm(space, z.coords(), &tangent);
        if n <= 1e-12 {
            continue;
        }
        let unit = scale(&tangent, 1.0 / n);
        let back = scale(&unit, -1.0);
        for &l in lengths {
            if !(l > 0.0) || l >= space.diameter() {
                continue;
            }
            let wa = Geodesic::new(z.clone(), back.clone(), l / 2.0)?.end();
            let wb = Geodesic::new(z.clone(), unit.clone(), l / 2.0)?.end();
            let da = match project(set_a, &wa, &opts.proj) {
                Ok(res) => res.distance,
                Err(GeomError::NonUniqueProjection { representatives }) => {
                    dist(&wa, &representatives[0])?
                }
                Err(_) => continue,
            };
            let db = match project(set_b, &wb, &opts.proj) {
                Ok(res) => res.distance,
                Err(GeomError::NonUniqueProjection { representatives }) => {
                    dist(&wb, &representatives[0])?
                }
                Err(_) => continue,
            };
            evaluated += 1;
            let gap_a = dist(&wa, z)? - da;
            let gap_b = dist(&wb, z)? - db;
            let gap = gap_a.max(gap_b);
            min_gap = min_gap.min(gap);
            if gap <= opts.proj_tol {
                report.verdict = Verdict::RefutedWithCounterexample;
                report.worst_margin = -gap;
                report.samples_evaluated = evaluated;
                report.witness = Some(
                    WitnessRecord::default()
                        .point("gamma_0", &wa)
                        .point("gamma_l", &wb)
                        .point("z", z)
                        .coords("direction", &unit)
                        .value("length", l)
                        .value("gap_a", gap_a)
                        .value("gap_b", gap_b),
                );
                return Ok(report);
            }
        }
    }
    report.samples_evaluated = evaluated;
    report.worst_margin = min_gap;
    report.verdict =
        if evaluated > 0 { Verdict::CertifiedOnSample } else { Verdict::Inconclusive };
    if evaluated == 0 {
        report.notes.push("no usable geodesics among the supplied directions".into());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{MfcqData, ScalarField, SmoothMap};
    use crate::space::ModelSpace;
    use std::f64::consts::PI;

    fn unit_circle_cloud(n: usize) -> SetDescriptor {
        let e2 = ModelSpace::euclidean(2);
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
        SetDescriptor::point_cloud(e2, pts).unwrap()
    }

    #[test]
    fn circle_ratio_approaches_one_over_24() {
        // Chord/arc expansion: (s − 2 sin(s/2)) / (2 sin(s/2))³ → 1/24.
        let oracle = |s: f64| (s - 2.0 * (s / 2.0).sin()) / (2.0 * (s / 2.0).sin()).powi(3);
        assert!((oracle(1e-3) - 1.0 / 24.0).abs() < 1e-6);

        let cloud = unit_circle_cloud(2048);
        let z = ModelSpace::euclidean(2).point(vec![1.0, 0.0]).unwrap();
        let h = 2.0 * (PI / 2048.0).sin() * 3.0;
        let report =
            check_finite_extrinsic_curvature(&cloud, &z, 1.0 / 20.0, 0.2, h).unwrap();
        assert_eq!(report.verdict, Verdict::CertifiedOnSample);
        let ratio = report.metrics["max_ratio"];
        let expected = oracle(0.4);
        assert!(
            (ratio - expected).abs() < 0.1 * expected,
            "ratio {ratio} vs oracle {expected}"
        );
    }

    #[test]
    fn straight_segment_has_zero_curvature() {
        let e2 = ModelSpace::euclidean(2);
        let pts: Vec<Vec<f64>> = (0..200).map(|i| vec![i as f64 / 100.0, 0.0]).collect();
        let cloud = SetDescriptor::point_cloud(e2.clone(), pts).unwrap();
        let z = e2.point(vec![1.0, 0.0]).unwrap();
        let report = check_finite_extrinsic_curvature(&cloud, &z, 0.0, 0.5, 0.035).unwrap();
        assert_eq!(report.verdict, Verdict::CertifiedOnSample);
        assert!(report.metrics["max_ratio"] <= 1e-9);
    }

    #[test]
    fn disconnected_graph_is_inconclusive() {
        let e2 = ModelSpace::euclidean(2);
        let cloud = SetDescriptor::point_cloud(
            e2.clone(),
            vec![vec![0.0, 0.0], vec![1.0, 0.0]],
        )
        .unwrap();
        let z = e2.point(vec![0.0, 0.0]).unwrap();
        let report = check_finite_extrinsic_curvature(&cloud, &z, 1.0, 2.0, 0.1).unwrap();
        assert_eq!(report.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn x32_graph_refutes_fixed_sigma() {
        // Sampled graph of |x|^{3/2} near 0: the pair (∓ε, ε^{3/2}) makes the
        // cubic ratio blow up like 9ε²/8 / (8ε³).
        let eps = 2e-3;
        let e2 = ModelSpace::euclidean(2);
        let m = 400usize;
        let pts: Vec<Vec<f64>> = (0..=2 * m)
            .map(|i| {
                let x = (i as f64 / m as f64 - 1.0) * eps;
                vec![x, x.abs().powf(1.5)]
            })
            .collect();
        let cloud = SetDescriptor::point_cloud(e2.clone(), pts).unwrap();
        let z = e2.point(vec![0.0, 0.0]).unwrap();
        let h = 3.5 * eps / m as f64;
        let report =
            check_finite_extrinsic_curvature(&cloud, &z, 10.0, 1.5 * eps, h).unwrap();
        assert_eq!(report.verdict, Verdict::RefutedWithCounterexample);
        assert!(replay_extrinsic_curvature(&cloud, &report).unwrap());
    }

    #[test]
    fn uag_certifies_convex_ball() {
        let e2 = ModelSpace::euclidean(2);
        let ball = SetDescriptor::euclidean_ball(e2.clone(), vec![0.0, 0.0], 1.0).unwrap();
        let z = e2.point(vec![1.0, 0.0]).unwrap();
        let opts = CheckOpts::seeded(11).with_samples(300);
        let report = check_uag(&ball, &z, 1e-6, 0.5, &opts).unwrap();
        assert_eq!(report.verdict, Verdict::CertifiedOnSample);
        assert!(report.metrics["worst_ratio"] < 1e-12);
    }

    #[test]
    fn uag_certifies_tent_at_origin() {
        let tent = SetDescriptor::tent_graph();
        let z = ModelSpace::euclidean(2).point(vec![0.0, 0.0]).unwrap();
        let n = 4;
        let eps = 0.5f64.powi(n) + 1e-6;
        let big_r = 0.5f64.powi(n);
        let opts = CheckOpts::seeded(5).with_samples(500);
        let report = check_uag(&tent, &z, eps, big_r, &opts).unwrap();
        assert_eq!(report.verdict, Verdict::CertifiedOnSample);
    }

    #[test]
    fn uag_certifies_smooth_image_x32() {
        let map = SmoothMap::new(1, 2, |u| vec![u[0], u[0].abs().powf(1.5)]);
        let domain =
            SetDescriptor::euclidean_ball(ModelSpace::euclidean(1), vec![0.0], 1.0).unwrap();
        let set = SetDescriptor::smooth_image(map, domain).unwrap();
        let z = ModelSpace::euclidean(2).point(vec![0.0, 0.0]).unwrap();
        let eps = 0.5;
        let big_r = (eps / 12.0) * (eps / 12.0);
        let opts = CheckOpts::seeded(9).with_samples(150);
        let report = check_uag(&set, &z, eps, big_r, &opts).unwrap();
        assert_eq!(report.verdict, Verdict::CertifiedOnSample, "{:?}", report.notes);
    }

    #[test]
    fn super_regularity_certifies_halfspace() {
        let e2 = ModelSpace::euclidean(2);
        let hs = SetDescriptor::halfspace(e2.clone(), vec![0.0, 1.0], 0.0).unwrap();
        let z = e2.point(vec![0.0, 0.0]).unwrap();
        let opts = CheckOpts::seeded(3).with_samples(500);
        let report = check_super_regularity(&hs, &z, 1e-7, 1.0, &opts).unwrap();
        assert_eq!(report.verdict, Verdict::CertifiedOnSample);
    }

    #[test]
    fn super_regularity_refutes_tent_apex() {
        let tent = SetDescriptor::tent_graph();
        let n: i32 = 3;
        let z = ModelSpace::euclidean(2)
            .point(vec![3.0 * 0.5f64.powi(n + 2), 0.5f64.powi(2 * n + 2)])
            .unwrap();
        let eps = 0.5f64.powi(n + 1).atan();
        let r = 0.5f64.powi(n + 2);
        let opts = CheckOpts::seeded(17).with_samples(4000);
        let report = check_super_regularity(&tent, &z, eps, r, &opts).unwrap();
        assert_eq!(report.verdict, Verdict::RefutedWithCounterexample);
        assert!(replay_super_regularity(&tent, &report, &opts).unwrap());
        // The offending angle sits at π/2 − arctan(1/2ⁿ) up to sampling noise.
        let angle = report.witness.as_ref().unwrap().get_value("angle").unwrap();
        assert!(angle < FRAC_PI_2 - eps);
    }

    #[test]
    fn separable_intersection_of_crossing_lines() {
        let e2 = ModelSpace::euclidean(2);
        let line = |angle: f64| {
            let (s, c) = angle.sin_cos();
            let map = SmoothMap::with_jacobian(
                1,
                2,
                move |u| vec![u[0] * c, u[0] * s],
                move |_| vec![vec![c], vec![s]],
            );
            let dom =
                SetDescriptor::euclidean_ball(ModelSpace::euclidean(1), vec![0.0], 2.0).unwrap();
            SetDescriptor::smooth_image(map, dom).unwrap()
        };
        let a = line(0.0);
        let b = line(PI / 6.0);
        let z = e2.point(vec![0.0, 0.0]).unwrap();
        let opts = CheckOpts::seeded(23).with_samples(60);
        let sigma = angle_at_intersection(&a, &b, &z, 0.5, &opts).unwrap().unwrap();
        assert!((sigma - PI / 6.0).abs() < 0.02, "sigma = {sigma}");
        let report =
            check_separable_intersection(&a, &b, &z, sigma / 4.0, 0.5, &opts).unwrap();
        assert_eq!(report.verdict, Verdict::CertifiedOnSample, "{:?}", report.notes);
    }

    #[test]
    fn separable_intersection_vacuous_for_equal_convex_sets() {
        let e2 = ModelSpace::euclidean(2);
        let ball = SetDescriptor::euclidean_ball(e2.clone(), vec![0.0, 0.0], 1.0).unwrap();
        let z = e2.point(vec![1.0, 0.0]).unwrap();
        let opts = CheckOpts::seeded(2).with_samples(100);
        let report =
            check_separable_intersection(&ball, &ball, &z, 0.5, 0.4, &opts).unwrap();
        assert_eq!(report.verdict, Verdict::CertifiedOnSample);
        assert!(report.notes.iter().any(|n| n.contains("vacuous")));
    }

    #[test]
    fn orthogonal_lines_meet_at_right_angle() {
        let e2 = ModelSpace::euclidean(2);
        let axis = |vertical: bool| {
            let map = SmoothMap::new(1, 2, move |u| {
                if vertical { vec![0.0, u[0]] } else { vec![u[0], 0.0] }
            });
            let dom =
                SetDescriptor::euclidean_ball(ModelSpace::euclidean(1), vec![0.0], 2.0).unwrap();
            SetDescriptor::smooth_image(map, dom).unwrap()
        };
        let z = e2.point(vec![0.0, 0.0]).unwrap();
        let opts = CheckOpts::seeded(8).with_samples(40);
        let sigma = angle_at_intersection(&axis(false), &axis(true), &z, 0.5, &opts)
            .unwrap()
            .unwrap();
        assert!((sigma - FRAC_PI_2).abs() < 1e-6, "sigma = {sigma}");
    }

    #[test]
    fn transversality_refuted_for_coincident_lines() {
        let e2 = ModelSpace::euclidean(2);
        let map = SmoothMap::new(1, 2, |u| vec![u[0], 0.0]);
        let dom = SetDescriptor::euclidean_ball(ModelSpace::euclidean(1), vec![0.0], 2.0).unwrap();
        let line = SetDescriptor::smooth_image(map, dom).unwrap();
        let z = e2.point(vec![0.0, 0.0]).unwrap();
        let dirs: Vec<Vec<f64>> = (0..16)
            .map(|i| {
                let t = PI * i as f64 / 16.0;
                vec![t.cos(), t.sin()]
            })
            .collect();
        let report =
            refute_transversality(&line, &line, &z, &dirs, &[0.2], &CheckOpts::seeded(1))
                .unwrap();
        assert_eq!(report.verdict, Verdict::RefutedWithCounterexample);
    }

    #[test]
    fn transversality_holds_for_crossing_lines() {
        let e2 = ModelSpace::euclidean(2);
        let line = |vertical: bool| {
            let map = SmoothMap::new(1, 2, move |u| {
                if vertical { vec![0.0, u[0]] } else { vec![u[0], 0.0] }
            });
            let dom =
                SetDescriptor::euclidean_ball(ModelSpace::euclidean(1), vec![0.0], 2.0).unwrap();
            SetDescriptor::smooth_image(map, dom).unwrap()
        };
        let z = e2.point(vec![0.0, 0.0]).unwrap();
        let dirs: Vec<Vec<f64>> = (0..180)
            .map(|i| {
                let t = PI * i as f64 / 180.0;
                vec![t.cos(), t.sin()]
            })
            .collect();
        let report = refute_transversality(
            &line(false),
            &line(true),
            &z,
            &dirs,
            &[0.1, 0.3],
            &CheckOpts::seeded(1),
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::CertifiedOnSample);
    }

    #[test]
    fn transversality_refuted_for_facing_parabolas() {
        let e2 = ModelSpace::euclidean(2);
        let upper = SetDescriptor::constraint_set(
            e2.clone(),
            vec![ScalarField::with_grad(
                |x| x[0] * x[0] - x[1],
                |x| vec![2.0 * x[0], -1.0],
            )],
            Some(MfcqData { anchor: vec![0.0, 1.0], direction: vec![0.0, 1.0] }),
        )
        .unwrap();
        let lower = SetDescriptor::constraint_set(
            e2.clone(),
            vec![ScalarField::with_grad(
                |x| x[1] + x[0] * x[0],
                |x| vec![2.0 * x[0], 1.0],
            )],
            Some(MfcqData { anchor: vec![0.0, -1.0], direction: vec![0.0, -1.0] }),
        )
        .unwrap();
        let z = e2.point(vec![0.0, 0.0]).unwrap();
        let dirs = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let opts = CheckOpts::seeded(1);
        let report =
            refute_transversality(&upper, &lower, &z, &dirs, &[0.2], &opts).unwrap();
        assert_eq!(report.verdict, Verdict::RefutedWithCounterexample);
        let w = report.witness.unwrap();
        // The refuting geodesic is the vertical axis.
        let dir = w.get_point("direction").unwrap();
        assert!(dir[0].abs() < 1e-12 && (dir[1].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn intrinsic_estimate_invariants() {
        let cloud = unit_circle_cloud(64);
        let h = 2.0 * (PI / 64.0).sin() * 1.5;
        let est = IntrinsicMetricEstimate::compute(&cloud, h, None).unwrap();
        let n = est.subset().len();
        for a in 0..n.min(20) {
            for b in 0..n.min(20) {
                if a == b {
                    continue;
                }
                let (dhat, _) = est.dist_hat(a, b).unwrap();
                let d = est.dist_ambient(a, b);
                assert!(dhat >= d - 1e-12, "graph distance below ambient");
                let (dhat_back, _) = est.dist_hat(b, a).unwrap();
                assert!((dhat - dhat_back).abs() < 1e-12, "asymmetric estimate");
            }
        }
        // Monotone in h: finer graphs never shorten paths.
        let coarse = IntrinsicMetricEstimate::compute(&cloud, 2.0 * h, None).unwrap();
        for a in 0..10 {
            for b in 10..20 {
                let (fine, _) = est.dist_hat(a, b).unwrap();
                let (wide, _) = coarse.dist_hat(a, b).unwrap();
                assert!(wide <= fine + 1e-12);
            }
        }
    }
}
