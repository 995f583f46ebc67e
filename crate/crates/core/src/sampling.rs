//! Seeded, reproducible sampling helpers.
//!
//! Every certifier draws from a `ChaCha8Rng` seeded by the caller, so reports
//! are deterministic for a fixed seed. Samplers are rejection-based: uniform
//! over the set's parameterization for closed-form sets, ambient Gaussian
//! steps otherwise.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{GeomError, Result};
use crate::projection::project;
use crate::sets::{membership, tent_g, SetDescriptor};
use crate::space::{
    axpy, dist, dot, norm, project_to_tangent, scale, tangent_norm, Geodesic, Point,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// A random unit tangent at `at`.
pub(crate) fn random_tangent(at: &Point, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    for _ in 0..16 {
        let g = gaussian_vec(rng, at.space().ambient_len());
        let t = project_to_tangent(at.space(), at.coords(), &g);
        let n = tangent_norm(at.space(), at.coords(), &t);
        if n > 1e-9 {
            return Some(scale(&t, 1.0 / n));
        }
    }
    None
}

/// A Gaussian step of scale `sigma` away from `center` along a random
/// geodesic, truncated to `max_dist`.
pub(crate) fn gaussian_step(
    center: &Point,
    sigma: f64,
    max_dist: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Point> {
    let dir = random_tangent(center, rng)
        .ok_or_else(|| GeomError::SolverFailure("could not draw a tangent direction".into()))?;
    let raw: f64 = StandardNormal.sample(rng);
    let cap = max_dist.min(0.45 * center.space().diameter());
    let len = (raw.abs() * sigma).min(cap);
    if len <= 0.0 {
        return Ok(center.clone());
    }
    let g = Geodesic::new(center.clone(), dir, len)?;
    g.point_at(len)
}

/// Roughly uniform sample of the metric ball B(center, radius).
pub fn sample_ambient_ball(
    center: &Point,
    radius: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Point> {
    let dir = random_tangent(center, rng)
        .ok_or_else(|| GeomError::SolverFailure("could not draw a tangent direction".into()))?;
    let u: f64 = rng.random();
    let d = center.space().dim() as f64;
    let len = radius.min(0.45 * center.space().diameter()) * u.powf(1.0 / d.max(1.0));
    if len <= 0.0 {
        return Ok(center.clone());
    }
    let g = Geodesic::new(center.clone(), dir, len)?;
    g.point_at(len)
}

// ---------------------------------------------------------------------------
// On-set sampling
// ---------------------------------------------------------------------------

/// Draws points of a set inside B(z, radius). Construction work that should
/// happen once per check (e.g. inverting the parameter of `z` for a smooth
/// image) is done in `new`.
pub struct SetSampler {
    set: SetDescriptor,
    z: Point,
    radius: f64,
    param_anchor: Option<Vec<f64>>,
    cloud_candidates: Vec<usize>,
}

impl SetSampler {
    pub fn new(set: &SetDescriptor, z: &Point, radius: f64) -> Result<Self> {
        if !membership(set, z, 1e-7)? {
            return Err(GeomError::Precondition("sampler base point must lie in the set".into()));
        }
        let param_anchor = match set {
            SetDescriptor::SmoothImage { .. } => {
                let res = project(set, z, &Default::default())?;
                Some(res.primary_params().ok_or_else(|| {
                    GeomError::SolverFailure("smooth-image solver returned no parameters".into())
                })?)
            }
            _ => None,
        };
        let cloud_candidates = match set {
            SetDescriptor::PointCloud { space, points } => points
                .iter()
                .enumerate()
                .filter(|(_, p)| {
                    crate::space::dist_coords(space, z.coords(), p) <= radius
                })
                .map(|(i, _)| i)
                .collect(),
            _ => Vec::new(),
        };
        Ok(SetSampler {
            set: set.clone(),
            z: z.clone(),
            radius,
            param_anchor,
            cloud_candidates,
        })
    }

    /// One draw; `None` when rejection sampling failed to land in
    /// B(z, radius) ∩ S.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Option<Point> {
        for _ in 0..64 {
            if let Some(p) = self.try_sample(rng) {
                if dist(&p, &self.z).ok()? <= self.radius
                    && membership(&self.set, &p, 1e-9).ok()?
                {
                    return Some(p);
                }
            }
        }
        None
    }

    fn try_sample(&self, rng: &mut ChaCha8Rng) -> Option<Point> {
        let z = &self.z;
        let r = self.radius;
        match &self.set {
            SetDescriptor::GreatSubsphere { space, pole } => {
                let kappa = space.curvature();
                let mut u = gaussian_vec(rng, z.coords().len());
                u = axpy(&u, -dot(&u, pole), pole);
                u = axpy(&u, -dot(&u, z.coords()), z.coords());
                let n = norm(&u);
                if n <= 1e-9 {
                    return None;
                }
                u = scale(&u, 1.0 / n);
                let t: f64 = rng.random::<f64>() * r.min(0.999 * space.diameter());
                let theta = t * kappa.sqrt();
                let coords = axpy(&scale(z.coords(), theta.cos()), theta.sin(), &u);
                Some(Point::renormalized(space.clone(), coords))
            }
            SetDescriptor::SmallSphere { space, axis, height } => {
                let kappa = space.curvature();
                let rho = (1.0 - height * height).sqrt();
                let p = scale(&axpy(z.coords(), -height, axis), 1.0 / rho);
                let mut u = gaussian_vec(rng, z.coords().len());
                u = axpy(&u, -dot(&u, axis), axis);
                u = axpy(&u, -dot(&u, &p), &p);
                let n = norm(&u);
                if n <= 1e-9 {
                    return None;
                }
                u = scale(&u, 1.0 / n);
                // Ambient distance d on the sphere corresponds to the in-set
                // turn φ with sin(φ/2) = sin(√κ d/2)/ρ.
                let half = (kappa.sqrt() * r.min(0.999 * space.diameter()) / 2.0).sin() / rho;
                let phi_max = 2.0 * half.min(1.0).asin();
                let phi = (rng.random::<f64>() * 2.0 - 1.0) * phi_max;
                let radial = axpy(&scale(&p, phi.cos()), phi.sin(), &u);
                Some(Point::renormalized(
                    space.clone(),
                    axpy(&scale(axis, *height), rho, &radial),
                ))
            }
            SetDescriptor::Halfspace { space, normal, offset } => {
                let g = gaussian_step(z, r / 2.0, r, rng).ok()?;
                let c = g.coords();
                let excess = dot(c, normal) - offset;
                let coords = if excess > 0.0 {
                    axpy(c, -excess / dot(normal, normal), normal)
                } else {
                    c.to_vec()
                };
                Some(Point::renormalized(space.clone(), coords))
            }
            SetDescriptor::EuclideanBall { space, center, radius } => {
                let g = gaussian_step(z, r / 2.0, r, rng).ok()?;
                let off = crate::space::sub(g.coords(), center);
                let d = norm(&off);
                let coords = if d > *radius {
                    axpy(center, *radius / d, &off)
                } else {
                    g.coords().to_vec()
                };
                Some(Point::renormalized(space.clone(), coords))
            }
            SetDescriptor::Epigraph { space, function } => {
                let inner = self.set.epigraph_inner().expect("product ambient");
                let (zi, _) = z.split_product().ok()?;
                let inner_z = Point::renormalized(inner.clone(), zi.to_vec());
                let step = gaussian_step(&inner_z, r / 2.0, r, rng).ok()?;
                let fx = function.eval(&step);
                let above: f64 = if rng.random::<f64>() < 0.5 {
                    0.0
                } else {
                    rng.random::<f64>() * r / 2.0
                };
                let mut coords = step.coords().to_vec();
                coords.push(fx + above);
                Some(Point::renormalized(space.clone(), coords))
            }
            SetDescriptor::ConstraintSet { space, constraints, .. } => {
                let g = gaussian_step(z, r / 2.0, r, rng).ok()?;
                if constraints.iter().all(|c| c.eval(g.coords()) <= 0.0) {
                    Some(Point::renormalized(space.clone(), g.coords().to_vec()))
                } else {
                    None
                }
            }
            SetDescriptor::SmoothImage { space, map, domain } => {
                let anchor = self.param_anchor.as_ref()?;
                let dim = anchor.len();
                let offs: Vec<f64> =
                    (0..dim).map(|_| (rng.random::<f64>() * 2.0 - 1.0) * r).collect();
                let u = crate::space::add(anchor, &offs);
                let up = Point::renormalized(domain.ambient().clone(), u.clone());
                if !membership(domain, &up, 1e-12).ok()? {
                    return None;
                }
                Some(Point::renormalized(space.clone(), map.eval(&u)))
            }
            SetDescriptor::TentGraph { space } => {
                let zt = z.coords()[0];
                let lo = (zt - 1.2 * r).max(0.0);
                let hi = (zt + 1.2 * r).min(0.5);
                let t = lo + rng.random::<f64>() * (hi - lo);
                Some(Point::renormalized(space.clone(), vec![t, tent_g(t).ok()?]))
            }
            SetDescriptor::PointCloud { space, points } => {
                if self.cloud_candidates.is_empty() {
                    return None;
                }
                let i = self.cloud_candidates
                    [rng.random_range(0..self.cloud_candidates.len())];
                Some(Point::renormalized(space.clone(), points[i].clone()))
            }
        }
    }
}

/// Deterministic point of the set at (approximately) a prescribed distance
/// from `z`, used for reproducible run starts. Supported for the closed-form
/// variants whose local parameterization is explicit.
pub fn point_on_set_at_distance(set: &SetDescriptor, z: &Point, d: f64) -> Result<Point> {
    if !membership(set, z, 1e-7)? {
        return Err(GeomError::Precondition("base point must lie in the set".into()));
    }
    if !(d >= 0.0) {
        return Err(GeomError::InvalidInput(format!("distance {d} is negative")));
    }
    if d == 0.0 {
        return Ok(z.clone());
    }
    match set {
        SetDescriptor::GreatSubsphere { space, pole } => {
            let kappa = space.curvature();
            let u = deterministic_tangent(z.coords(), &[pole.clone()])?;
            let theta = d * kappa.sqrt();
            Ok(Point::renormalized(
                space.clone(),
                axpy(&scale(z.coords(), theta.cos()), theta.sin(), &u),
            ))
        }
        SetDescriptor::SmallSphere { space, axis, height } => {
            let kappa = space.curvature();
            let rho = (1.0 - height * height).sqrt();
            let p = scale(&axpy(z.coords(), -height, axis), 1.0 / rho);
            let u = deterministic_tangent(&p, &[axis.clone()])?;
            // sin(φ/2) = sin(√κ d/2)/ρ, accurate down to tiny distances.
            let half = (kappa.sqrt() * d / 2.0).sin() / rho;
            if !(0.0..=1.0).contains(&half) {
                return Err(GeomError::InvalidInput(format!(
                    "no point of the small sphere lies at distance {d} from z"
                )));
            }
            let phi = 2.0 * half.asin();
            let radial = axpy(&scale(&p, phi.cos()), phi.sin(), &u);
            Ok(Point::renormalized(space.clone(), axpy(&scale(axis, *height), rho, &radial)))
        }
        SetDescriptor::Halfspace { space, normal, .. } => {
            let u = deterministic_tangent_euclidean(&[scale(normal, 1.0 / norm(normal))])?;
            Ok(Point::renormalized(space.clone(), axpy(z.coords(), d, &u)))
        }
        SetDescriptor::EuclideanBall { space, center, radius } => {
            // Walk along the boundary circle through z when z is on the
            // boundary, else straight toward the boundary.
            let off = crate::space::sub(z.coords(), center);
            let rz = norm(&off);
            if rz < 1e-12 {
                let mut u = vec![0.0; center.len()];
                u[0] = 1.0;
                if d > *radius {
                    return Err(GeomError::InvalidInput("distance exceeds the ball".into()));
                }
                return Ok(Point::renormalized(space.clone(), axpy(center, d, &u)));
            }
            let u = deterministic_tangent_euclidean(&[scale(&off, 1.0 / rz)])?;
            let cand = axpy(z.coords(), d, &u);
            let off2 = crate::space::sub(&cand, center);
            let d2 = norm(&off2);
            let coords =
                if d2 > *radius { axpy(center, *radius / d2, &off2) } else { cand };
            Ok(Point::renormalized(space.clone(), coords))
        }
        SetDescriptor::TentGraph { space } => {
            // Bisect on the abscissa: ambient distance grows monotonically.
            let zt = z.coords()[0];
            let target = |t: f64| -> Result<f64> {
                let p = Point::renormalized(space.clone(), vec![t, tent_g(t)?]);
                dist(&p, z)
            };
            let (mut lo, mut hi) = (zt, 0.5f64.min(zt + 2.0 * d + 1e-3));
            if target(hi)? < d {
                return Err(GeomError::InvalidInput(format!(
                    "no tent point at distance {d} to the right of z"
                )));
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if target(mid)? < d {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(Point::renormalized(space.clone(), vec![hi, tent_g(hi)?]))
        }
        other => Err(GeomError::InvalidInput(format!(
            "no deterministic distance recipe for a {} set",
            other.kind()
        ))),
    }
}

/// First coordinate direction orthogonalized against `z` and the given
/// normals (spherical tangents).
fn deterministic_tangent(z: &[f64], normals: &[Vec<f64>]) -> Result<Vec<f64>> {
    for i in 0..z.len() {
        let mut u = vec![0.0; z.len()];
        u[i] = 1.0;
        u = axpy(&u, -dot(&u, z), z);
        for n in normals {
            u = axpy(&u, -dot(&u, n), n);
        }
        let nn = norm(&u);
        if nn > 1e-6 {
            return Ok(scale(&u, 1.0 / nn));
        }
    }
    Err(GeomError::SolverFailure("no tangent direction found".into()))
}

fn deterministic_tangent_euclidean(normals: &[Vec<f64>]) -> Result<Vec<f64>> {
    let dim = normals[0].len();
    for i in 0..dim {
        let mut u = vec![0.0; dim];
        u[i] = 1.0;
        for n in normals {
            u = axpy(&u, -dot(&u, n), n);
        }
        let nn = norm(&u);
        if nn > 1e-6 {
            return Ok(scale(&u, 1.0 / nn));
        }
    }
    Err(GeomError::SolverFailure("no tangent direction found".into()))
}

/// Multi-scale ambient sampler for query points near `z`: a Gaussian step
/// whose scale is drawn log-uniformly from radius·2⁻ʲ, j = 0..20, optionally
/// based at a point of `set` near `z`. The scale mixture covers sets that are
/// thin relative to `radius`.
pub(crate) fn sample_query_near(
    set: Option<&SetSampler>,
    z: &Point,
    radius: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Point> {
    let base = match set {
        Some(s) if rng.random::<f64>() < 0.5 => s.sample(rng).unwrap_or_else(|| z.clone()),
        _ => z.clone(),
    };
    let j: u32 = rng.random_range(0..=20);
    let sigma = radius * 0.5f64.powi(j as i32);
    gaussian_step(&base, sigma, radius, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ModelSpace;

    #[test]
    fn seeded_sampling_is_reproducible() {
        let s = ModelSpace::unit_sphere(2);
        let z = s.point(vec![1.0, 0.0, 0.0]).unwrap();
        let mut r1 = rng(42);
        let mut r2 = rng(42);
        for _ in 0..20 {
            let a = sample_ambient_ball(&z, 0.3, &mut r1).unwrap();
            let b = sample_ambient_ball(&z, 0.3, &mut r2).unwrap();
            assert_eq!(a.coords(), b.coords());
        }
    }

    #[test]
    fn ball_samples_stay_in_ball() {
        let e = ModelSpace::euclidean(3);
        let z = e.point(vec![1.0, 2.0, 3.0]).unwrap();
        let mut r = rng(7);
        for _ in 0..200 {
            let p = sample_ambient_ball(&z, 0.5, &mut r).unwrap();
            assert!(dist(&p, &z).unwrap() <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn set_sampler_respects_membership_and_ball() {
        let s = ModelSpace::unit_sphere(2);
        let set = SetDescriptor::small_sphere(s.clone(), vec![1.0, 0.0, 0.0], 0.5).unwrap();
        let z = s.point(vec![0.5, 3.0f64.sqrt() / 2.0, 0.0]).unwrap();
        let sampler = SetSampler::new(&set, &z, 0.4).unwrap();
        let mut r = rng(3);
        for _ in 0..100 {
            let p = sampler.sample(&mut r).expect("sampler should succeed");
            assert!(membership(&set, &p, 1e-9).unwrap());
            assert!(dist(&p, &z).unwrap() <= 0.4 + 1e-9);
        }
    }

    #[test]
    fn distance_recipe_on_small_sphere() {
        let s = ModelSpace::unit_sphere(2);
        let set = SetDescriptor::small_sphere(s.clone(), vec![1.0, 0.0, 0.0], 0.5).unwrap();
        let z = s.point(vec![0.5, 3.0f64.sqrt() / 2.0, 0.0]).unwrap();
        for d in [1e-1, 1e-2, 1e-3, 1e-4] {
            let x = point_on_set_at_distance(&set, &z, d).unwrap();
            assert!((dist(&x, &z).unwrap() - d).abs() < 1e-12);
            assert!(membership(&set, &x, 1e-9).unwrap());
        }
    }

    #[test]
    fn distance_recipe_on_tent() {
        let set = SetDescriptor::tent_graph();
        let e2 = ModelSpace::euclidean(2);
        let z = e2.point(vec![0.375, tent_g(0.375).unwrap()]).unwrap();
        let x = point_on_set_at_distance(&set, &z, 0.05).unwrap();
        assert!((dist(&x, &z).unwrap() - 0.05).abs() < 1e-9);
        assert!(membership(&set, &x, 1e-9).unwrap());
    }
}
