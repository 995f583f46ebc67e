//! Cosine laws in M²_κ, comparison angles, and Alexandrov angles.
//!
//! The spherical law (κ > 0) is
//!
//! ```text
//! cos(√κ a) = cos(√κ b) cos(√κ c) + sin(√κ b) sin(√κ c) cos α,
//! ```
//!
//! with the Euclidean law a² = b² + c² − 2bc cos α at κ = 0 and the hyperbolic
//! law cosh(√−κ a) = cosh(√−κ b) cosh(√−κ c) − sinh(√−κ b) sinh(√−κ c) cos α
//! at κ < 0. Cosine arguments are clamped to [−1, 1] before inversion so that
//! nearly degenerate triangles (a ≈ |b−c| or a ≈ b+c) stay inside the domain.

use crate::error::{GeomError, Result};
use crate::space::{
    clamp_unit, dist, dot, geodesic_between, same_space, tangent_inner, ModelSpace, Geodesic,
    Point,
};

use std::f64::consts::PI;

/// Side opposite the angle `alpha` enclosed by sides `b` and `c` in M²_κ.
pub fn cosine_law_side(b: f64, c: f64, alpha: f64, kappa: f64) -> Result<f64> {
    if !(b >= 0.0 && c >= 0.0) || !b.is_finite() || !c.is_finite() {
        return Err(GeomError::InvalidInput(format!("sides must be nonnegative, got ({b}, {c})")));
    }
    if !(-1e-12..=PI + 1e-12).contains(&alpha) {
        return Err(GeomError::InvalidInput(format!("angle {alpha} outside [0, pi]")));
    }
    let alpha = alpha.clamp(0.0, PI);
    if kappa > 0.0 {
        let dk = PI / kappa.sqrt();
        if b >= dk || c >= dk {
            return Err(GeomError::InvalidInput(format!(
                "sides ({b}, {c}) must be below the diameter {dk}"
            )));
        }
        let sk = kappa.sqrt();
        let cosa =
            (sk * b).cos() * (sk * c).cos() + (sk * b).sin() * (sk * c).sin() * alpha.cos();
        Ok(clamp_unit(cosa).acos() / sk)
    } else if kappa == 0.0 {
        Ok((b * b + c * c - 2.0 * b * c * alpha.cos()).max(0.0).sqrt())
    } else {
        let sk = (-kappa).sqrt();
        let cosha =
            (sk * b).cosh() * (sk * c).cosh() - (sk * b).sinh() * (sk * c).sinh() * alpha.cos();
        Ok(cosha.max(1.0).acosh() / sk)
    }
}

/// Interior angle opposite side `a` in the M²_κ triangle with sides (a, b, c);
/// the inverse of [`cosine_law_side`] in its angle argument.
pub fn comparison_angle(a: f64, b: f64, c: f64, kappa: f64) -> Result<f64> {
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
    if b < 1e-300 || c < 1e-300 {
        return Err(GeomError::InvalidInput(
            "angle is undefined when an adjacent side vanishes".into(),
        ));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    // Half-angle forms: sin²(α/2) and cos²(α/2) are products of small
    // quantities, so tiny triangles (the scale ladder of the Alexandrov
    // angle) do not suffer the 1 − O(t²) cancellation of the raw laws.
    if kappa > 0.0 {
        if a + b + c >= 2.0 * PI / kappa.sqrt() {
            return Err(GeomError::InvalidInput(format!(
                "perimeter {} exceeds 2 D_k for curvature {kappa}",
                a + b + c
            )));
        }
        let sk = kappa.sqrt();
        let (a, b, c) = (sk * a, sk * b, sk * c);
        let p = ((a + b - c) / 2.0).sin() * ((a - b + c) / 2.0).sin();
        let q = ((a + b + c) / 2.0).sin() * ((b + c - a) / 2.0).sin();
        Ok(2.0 * p.max(0.0).sqrt().atan2(q.max(0.0).sqrt()))
    } else if kappa == 0.0 {
        let p = (a + b - c) * (a - b + c);
        let q = (a + b + c) * (b + c - a);
        Ok(2.0 * p.max(0.0).sqrt().atan2(q.max(0.0).sqrt()))
    } else {
        let sk = (-kappa).sqrt();
        let (a, b, c) = (sk * a, sk * b, sk * c);
        let p = ((a + b - c) / 2.0).sinh() * ((a - b + c) / 2.0).sinh();
        let q = ((a + b + c) / 2.0).sinh() * ((b + c - a) / 2.0).sinh();
        Ok(2.0 * p.max(0.0).sqrt().atan2(q.max(0.0).sqrt()))
    }
}

/// Default scale ladder l·2⁻ᵏ, k = 4..=20, for [`alexandrov_angle`].
pub fn default_angle_scales(max_len: f64) -> Vec<f64> {
    (4..=20).map(|k| max_len * 0.5f64.powi(k)).collect()
}

/// Alexandrov angle between two geodesics issuing from the same point,
/// estimated as the supremum of comparison angles over the given scale ladder
/// (symmetric scales t = t′, clamped to both lengths).
///
/// In a model space the comparison angle is independent of the scale, so any
/// ladder returns the exact tangent angle up to rounding; see
/// [`tangent_angle`] for the closed form.
pub fn alexandrov_angle(g1: &Geodesic, g2: &Geodesic, scales: &[f64]) -> Result<f64> {
    same_space(g1.start(), g2.start())?;
    if dist(g1.start(), g2.start())? > 1e-12 {
        return Err(GeomError::InvalidInput("geodesics start at different points".into()));
    }
    if g1.length() <= 0.0 || g2.length() <= 0.0 {
        return Err(GeomError::InvalidInput("geodesics must be nonconstant".into()));
    }
    let kappa = g1.start().space().comparison_curvature();
    let cap = g1.length().min(g2.length());
    let mut best: Option<f64> = None;
    for &s in scales {
        if !(s > 0.0) {
            continue;
        }
        let t = s.min(cap);
        let d = dist(&g1.point_at(t)?, &g2.point_at(t)?)?;
        let ang = comparison_angle(d, t, t, kappa)?;
        best = Some(best.map_or(ang, |b: f64| b.max(ang)));
    }
    best.ok_or_else(|| GeomError::InvalidInput("no positive scales supplied".into()))
}

/// Exact angle between the initial directions of two geodesics with a common
/// start, from the tangent-space inner product.
pub fn tangent_angle(g1: &Geodesic, g2: &Geodesic) -> Result<f64> {
    same_space(g1.start(), g2.start())?;
    if dist(g1.start(), g2.start())? > 1e-12 {
        return Err(GeomError::InvalidInput("geodesics start at different points".into()));
    }
    let space = g1.start().space();
    let at = g1.start().coords();
    let inner = tangent_inner(space, at, g1.direction(), g2.direction());
    Ok(clamp_unit(inner).acos())
}

/// Angle ∠ₓ(y, z) at the common vertex `x`, via [`tangent_angle`].
pub fn vertex_angle(x: &Point, y: &Point, z: &Point) -> Result<f64> {
    let gy = geodesic_between(x, y)?;
    let gz = geodesic_between(x, z)?;
    tangent_angle(&gy, &gz)
}

/// Constructive form of the small-angle descent property on a sphere: given
/// ∠ₓ(y, z) < π/2 (with d(y,x) < D_κ/2 and d(z,x) < D_κ), returns a point
/// u ∈ [x, z] with d(x, u) < t and d(y, u) < d(y, x).
///
/// The point is taken halfway to the foot of `y` on the segment [x, z], which
/// satisfies both bounds because the angle at the foot is obtuse.
pub fn small_angle_descent_witness(x: &Point, y: &Point, z: &Point, t: f64) -> Result<Point> {
    let space = x.space().clone();
    let kappa = match &space {
        ModelSpace::Sphere { curvature, .. } => *curvature,
        other => {
            return Err(GeomError::InvalidInput(format!(
                "descent witness requires a spherical space, got {}",
                other.describe()
            )))
        }
    };
    same_space(x, y)?;
    same_space(x, z)?;
    if !(t > 0.0) {
        return Err(GeomError::Precondition(format!("t must be positive, got {t}")));
    }
    let diameter = space.diameter();
    let dyx = dist(y, x)?;
    let dzx = dist(z, x)?;
    if dyx >= diameter / 2.0 {
        return Err(GeomError::Precondition(format!(
            "d(y,x) = {dyx} must be below D_k/2 = {}",
            diameter / 2.0
        )));
    }
    if dzx >= diameter {
        return Err(GeomError::Precondition(format!("d(z,x) = {dzx} must be below D_k")));
    }
    let angle = vertex_angle(x, y, z)?;
    if angle >= PI / 2.0 - 1e-10 {
        return Err(GeomError::Precondition(format!(
            "angle at x is {angle}, not below pi/2"
        )));
    }

    let gz = geodesic_between(x, z)?;
    // Foot of y on [x, z]: maximize ⟨y, γ(s)⟩ = A cos(√κ s) + B sin(√κ s).
    let sk = kappa.sqrt();
    let a = dot(y.coords(), x.coords());
    let b = dot(y.coords(), gz.direction());
    let theta_star = b.atan2(a).clamp(0.0, sk * gz.length());
    let s_foot = theta_star / sk;
    if s_foot <= 0.0 {
        // The angle precondition guarantees a strictly interior foot.
        return Err(GeomError::Precondition(
            "foot of y on [x,z] coincides with x despite acute angle".into(),
        ));
    }
    let s_u = 0.5 * t.min(s_foot);
    let u = gz.point_at(s_u)?;
    debug_assert!(dist(y, &u)? < dyx);
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ModelSpace;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    fn s2() -> ModelSpace {
        ModelSpace::unit_sphere(2)
    }

    fn sp(coords: [f64; 3]) -> Point {
        s2().point(coords.to_vec()).unwrap()
    }

    #[test]
    fn spherical_octant_cosine_law() {
        let a = cosine_law_side(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2, 1.0).unwrap();
        assert!((a - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn collinear_spherical_sides_subtract() {
        let a = cosine_law_side(FRAC_PI_3, FRAC_PI_4, 0.0, 1.0).unwrap();
        assert!((a - (FRAC_PI_3 - FRAC_PI_4)).abs() < 1e-12);
    }

    #[test]
    fn euclidean_pythagoras() {
        let a = cosine_law_side(3.0, 4.0, FRAC_PI_2, 0.0).unwrap();
        assert!((a - 5.0).abs() < 1e-12);
    }

    #[test]
    fn comparison_angles_euclidean() {
        assert!((comparison_angle(5.0, 3.0, 4.0, 0.0).unwrap() - FRAC_PI_2).abs() < 1e-12);
        assert!((comparison_angle(1.0, 1.0, 1.0, 0.0).unwrap() - FRAC_PI_3).abs() < 1e-12);
    }

    #[test]
    fn comparison_angle_spherical_octant() {
        let ang = comparison_angle(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2, 1.0).unwrap();
        assert!((ang - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn triangle_inequality_guard() {
        assert!(comparison_angle(10.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn cosine_law_rejects_bad_domain() {
        assert!(cosine_law_side(-1.0, 1.0, 0.5, 0.0).is_err());
        assert!(cosine_law_side(1.0, 1.0, 4.0, 0.0).is_err());
        assert!(cosine_law_side(3.2, 1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn alexandrov_matches_orthogonal_directions_on_sphere() {
        let x = sp([1.0, 0.0, 0.0]);
        let g1 = Geodesic::new(x.clone(), vec![0.0, 1.0, 0.0], 1.0).unwrap();
        let g2 = Geodesic::new(x, vec![0.0, 0.0, 1.0], 1.0).unwrap();
        let ang = alexandrov_angle(&g1, &g2, &default_angle_scales(1.0)).unwrap();
        assert!((ang - FRAC_PI_2).abs() < 1e-8);
        assert!((tangent_angle(&g1, &g2).unwrap() - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn same_geodesic_has_zero_angle() {
        let x = sp([1.0, 0.0, 0.0]);
        let g = Geodesic::new(x, vec![0.0, 1.0, 0.0], 1.0).unwrap();
        let ang = alexandrov_angle(&g, &g, &default_angle_scales(1.0)).unwrap();
        assert!(ang.abs() < 1e-8);
    }

    #[test]
    fn opposite_euclidean_directions_make_pi() {
        let eu = ModelSpace::euclidean(2);
        let x = eu.point(vec![0.0, 0.0]).unwrap();
        let g1 = Geodesic::new(x.clone(), vec![1.0, 0.0], 1.0).unwrap();
        let g2 = Geodesic::new(x, vec![-1.0, 0.0], 1.0).unwrap();
        let ang = alexandrov_angle(&g1, &g2, &default_angle_scales(1.0)).unwrap();
        assert!((ang - PI).abs() < 1e-8);
    }

    #[test]
    fn different_start_points_error() {
        let g1 = Geodesic::new(sp([1.0, 0.0, 0.0]), vec![0.0, 1.0, 0.0], 1.0).unwrap();
        let g2 = Geodesic::new(sp([0.0, 1.0, 0.0]), vec![1.0, 0.0, 0.0], 1.0).unwrap();
        assert!(alexandrov_angle(&g1, &g2, &[0.5]).is_err());
    }

    #[test]
    fn descent_witness_collinear_case() {
        let x = sp([1.0, 0.0, 0.0]);
        let z = sp([0.0, 1.0, 0.0]);
        let y = sp([0.3f64.cos(), 0.3f64.sin(), 0.0]);
        let u = small_angle_descent_witness(&x, &y, &z, 0.2).unwrap();
        assert!(dist(&x, &u).unwrap() < 0.2);
        assert!(dist(&y, &u).unwrap() < dist(&y, &x).unwrap());
    }

    #[test]
    fn descent_witness_quarter_angle() {
        let x = sp([1.0, 0.0, 0.0]);
        let z = sp([0.0, 1.0, 0.0]);
        // y at distance 0.3 from x, at angle π/4 between the e2 and e3 tangents.
        let dir = [0.0, FRAC_PI_4.cos(), FRAC_PI_4.sin()];
        let y = sp([
            0.3f64.cos(),
            0.3f64.sin() * dir[1],
            0.3f64.sin() * dir[2],
        ]);
        let u = small_angle_descent_witness(&x, &y, &z, 0.1).unwrap();
        assert!(dist(&x, &u).unwrap() < 0.1);
        assert!(dist(&y, &u).unwrap() < dist(&y, &x).unwrap());
    }

    #[test]
    fn descent_witness_rejects_right_angle() {
        let x = sp([1.0, 0.0, 0.0]);
        let z = sp([0.0, 1.0, 0.0]);
        let y = sp([0.3f64.cos(), 0.0, 0.3f64.sin()]);
        assert!(matches!(
            small_angle_descent_witness(&x, &y, &z, 0.1),
            Err(GeomError::Precondition(_))
        ));
    }
}
