//! Property-based invariants of the metric layer, projections, and witnesses.

use proptest::prelude::*;

use catproj::sets::{PointField, SetDescriptor};
use catproj::space::{dist, geodesic_between, Geodesic, ModelSpace, Point};
use catproj::{
    alexandrov_angle, comparison_angle, cosine_law_side, default_angle_scales, membership,
    project, tangent_angle, vertex_angle, ProjectOpts,
};

use std::f64::consts::PI;

const METRIC_TOL: f64 = 1e-9;

fn normalize(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (n > 0.1).then(|| [v[0] / n, v[1] / n, v[2] / n])
}

fn unit3() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.0f64..1.0)
        .prop_filter_map("nonzero direction", normalize)
}

fn sphere_point(s: &ModelSpace, v: [f64; 3]) -> Point {
    s.point(v.to_vec()).unwrap()
}

fn hyperbolic_point(h: &ModelSpace, polar: (f64, f64)) -> Point {
    let (r, theta) = polar;
    h.point(vec![r.cosh(), r.sinh() * theta.cos(), r.sinh() * theta.sin()]).unwrap()
}

fn triple_triangle_ok(a: f64, b: f64, c: f64) -> bool {
    a <= b + c + METRIC_TOL && b <= a + c + METRIC_TOL && c <= a + b + METRIC_TOL
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn metric_axioms_sphere(u in unit3(), v in unit3(), w in unit3()) {
        let s = ModelSpace::unit_sphere(2);
        let (x, y, z) = (sphere_point(&s, u), sphere_point(&s, v), sphere_point(&s, w));
        let dxy = dist(&x, &y).unwrap();
        let dyx = dist(&y, &x).unwrap();
        prop_assert!(dxy >= 0.0);
        prop_assert!((dxy - dyx).abs() < METRIC_TOL);
        prop_assert!(dist(&x, &x).unwrap() < METRIC_TOL);
        let (dxz, dyz) = (dist(&x, &z).unwrap(), dist(&y, &z).unwrap());
        prop_assert!(triple_triangle_ok(dxy, dxz, dyz));
    }

    #[test]
    fn metric_axioms_euclidean(
        a in prop::array::uniform3(-5.0f64..5.0),
        b in prop::array::uniform3(-5.0f64..5.0),
        c in prop::array::uniform3(-5.0f64..5.0),
    ) {
        let e = ModelSpace::euclidean(3);
        let (x, y, z) = (
            e.point(a.to_vec()).unwrap(),
            e.point(b.to_vec()).unwrap(),
            e.point(c.to_vec()).unwrap(),
        );
        let dxy = dist(&x, &y).unwrap();
        prop_assert!((dxy - dist(&y, &x).unwrap()).abs() < METRIC_TOL);
        prop_assert!(triple_triangle_ok(dxy, dist(&x, &z).unwrap(), dist(&y, &z).unwrap()));
    }

    #[test]
    fn metric_axioms_hyperbolic(
        p1 in (0.0f64..2.0, 0.0f64..(2.0 * PI)),
        p2 in (0.0f64..2.0, 0.0f64..(2.0 * PI)),
        p3 in (0.0f64..2.0, 0.0f64..(2.0 * PI)),
    ) {
        let h = ModelSpace::hyperbolic(-1.0, 2).unwrap();
        let (x, y, z) = (
            hyperbolic_point(&h, p1),
            hyperbolic_point(&h, p2),
            hyperbolic_point(&h, p3),
        );
        let dxy = dist(&x, &y).unwrap();
        prop_assert!((dxy - dist(&y, &x).unwrap()).abs() < METRIC_TOL);
        prop_assert!(dist(&x, &x).unwrap() < METRIC_TOL);
        prop_assert!(triple_triangle_ok(dxy, dist(&x, &z).unwrap(), dist(&y, &z).unwrap()));
    }

    #[test]
    fn metric_axioms_product(
        a in (0.0f64..1.5, 0.0f64..(2.0 * PI), -2.0f64..2.0),
        b in (0.0f64..1.5, 0.0f64..(2.0 * PI), -2.0f64..2.0),
        c in (0.0f64..1.5, 0.0f64..(2.0 * PI), -2.0f64..2.0),
    ) {
        let h = ModelSpace::hyperbolic(-1.0, 2).unwrap();
        let p = ModelSpace::product_with_line(h.clone());
        let lift = |(r, th, t): (f64, f64, f64)| {
            let mut coords = hyperbolic_point(&h, (r, th)).coords().to_vec();
            coords.push(t);
            p.point(coords).unwrap()
        };
        let (x, y, z) = (lift(a), lift(b), lift(c));
        let dxy = dist(&x, &y).unwrap();
        prop_assert!((dxy - dist(&y, &x).unwrap()).abs() < METRIC_TOL);
        prop_assert!(triple_triangle_ok(dxy, dist(&x, &z).unwrap(), dist(&y, &z).unwrap()));
    }

    /// Unit speed: dist(γ(t₁), γ(t₂)) = |t₁ − t₂| along every geodesic.
    #[test]
    fn geodesic_unit_speed(
        u in unit3(),
        v in unit3(),
        kappa_sel in 0usize..3,
        ts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 100),
    ) {
        let space = match kappa_sel {
            0 => ModelSpace::euclidean(3),
            1 => ModelSpace::unit_sphere(2),
            _ => ModelSpace::hyperbolic(-1.0, 2).unwrap(),
        };
        let x = match kappa_sel {
            0 => space.point(vec![u[0], u[1], u[2]]).unwrap(),
            1 => sphere_point(&space, u),
            _ => hyperbolic_point(&space, (u[0].abs(), u[1] * PI)),
        };
        let Ok(g) = Geodesic::new(x.clone(), v.to_vec(), 1.0) else {
            return Ok(()); // direction parallel to the point: no tangent
        };
        for (a, b) in ts {
            let (t1, t2) = (a * g.length(), b * g.length());
            let d = dist(&g.point_at(t1).unwrap(), &g.point_at(t2).unwrap()).unwrap();
            prop_assert!((d - (t1 - t2).abs()).abs() < METRIC_TOL);
        }
    }

    /// In a model space the comparison angle of a geodesic triangle equals
    /// the tangent angle at the vertex, and the scale-ladder estimate agrees.
    #[test]
    fn comparison_equals_alexandrov_in_model_spaces(
        u in unit3(),
        d1 in unit3(),
        d2 in unit3(),
        l1 in 0.05f64..1.0,
        l2 in 0.05f64..1.0,
        kappa_sel in 0usize..3,
    ) {
        let space = match kappa_sel {
            0 => ModelSpace::euclidean(3),
            1 => ModelSpace::unit_sphere(2),
            _ => ModelSpace::hyperbolic(-1.0, 2).unwrap(),
        };
        let x = match kappa_sel {
            0 => space.point(vec![u[0], u[1], u[2]]).unwrap(),
            1 => sphere_point(&space, u),
            _ => hyperbolic_point(&space, (u[0].abs(), u[1] * PI)),
        };
        let (Ok(g1), Ok(g2)) = (
            Geodesic::new(x.clone(), d1.to_vec(), l1),
            Geodesic::new(x.clone(), d2.to_vec(), l2),
        ) else {
            return Ok(());
        };
        let exact = tangent_angle(&g1, &g2).unwrap();
        // Skip ill-conditioned nearly collinear configurations.
        prop_assume!(exact > 0.05 && exact < PI - 0.05);
        let (y, z) = (g1.end(), g2.end());
        let a = dist(&y, &z).unwrap();
        let cmp = comparison_angle(a, l1, l2, space.comparison_curvature()).unwrap();
        prop_assert!((cmp - exact).abs() < 1e-7, "comparison {cmp} vs tangent {exact}");
        let ladder = alexandrov_angle(&g1, &g2, &default_angle_scales(l1.min(l2))).unwrap();
        prop_assert!((ladder - exact).abs() < 1e-7, "ladder {ladder} vs tangent {exact}");
    }

    /// Adjacent angles at an interior point of a geodesic sum to π.
    #[test]
    fn adjacent_angles_sum_to_pi(
        u in unit3(),
        d in unit3(),
        d3 in unit3(),
        split in 0.2f64..0.8,
        kappa_sel in 0usize..3,
    ) {
        let space = match kappa_sel {
            0 => ModelSpace::euclidean(3),
            1 => ModelSpace::unit_sphere(2),
            _ => ModelSpace::hyperbolic(-1.0, 2).unwrap(),
        };
        let x = match kappa_sel {
            0 => space.point(vec![u[0], u[1], u[2]]).unwrap(),
            1 => sphere_point(&space, u),
            _ => hyperbolic_point(&space, (u[0].abs(), u[1] * PI)),
        };
        let Ok(g) = Geodesic::new(x, d.to_vec(), 1.0) else { return Ok(()) };
        let mid = g.point_at(split).unwrap();
        let back = geodesic_between(&mid, g.start()).unwrap();
        let forward = geodesic_between(&mid, &g.end()).unwrap();
        let Ok(g3) = Geodesic::new(mid.clone(), d3.to_vec(), 0.5) else { return Ok(()) };
        let a1 = tangent_angle(&back, &g3).unwrap();
        let a2 = tangent_angle(&g3, &forward).unwrap();
        prop_assert!((a1 + a2 - PI).abs() < 1e-7, "{a1} + {a2} != pi");
    }

    /// cosine_law_side ∘ comparison_angle is the identity on valid triangles.
    #[test]
    fn cosine_law_roundtrip(
        b in 0.05f64..1.2,
        c in 0.05f64..1.2,
        alpha in 0.05f64..3.0,
        kappa in prop::sample::select(vec![-2.0f64, -1.0, 0.0, 1.0, 2.5]),
    ) {
        let a = cosine_law_side(b, c, alpha, kappa).unwrap();
        prop_assume!(a > 1e-6);
        let back = comparison_angle(a, b, c, kappa).unwrap();
        prop_assert!((back - alpha).abs() < 1e-9, "alpha {alpha} -> a {a} -> {back}");
    }

    /// Projections are idempotent: a returned point projects to itself.
    #[test]
    fn projection_idempotence(
        u in unit3(),
        q in prop::array::uniform2(-2.0f64..2.0),
        h in -0.8f64..0.8,
    ) {
        let s2 = ModelSpace::unit_sphere(2);
        let e2 = ModelSpace::euclidean(2);
        let opts = ProjectOpts::default();
        let sets: Vec<(SetDescriptor, Point)> = vec![
            (
                SetDescriptor::great_subsphere(s2.clone(), vec![0.0, 0.0, 1.0]).unwrap(),
                sphere_point(&s2, u),
            ),
            (
                SetDescriptor::small_sphere(s2.clone(), vec![1.0, 0.0, 0.0], h).unwrap(),
                sphere_point(&s2, u),
            ),
            (
                SetDescriptor::halfspace(e2.clone(), vec![1.0, 0.5], 0.3).unwrap(),
                e2.point(q.to_vec()).unwrap(),
            ),
            (
                SetDescriptor::euclidean_ball(e2.clone(), vec![0.2, -0.1], 0.7).unwrap(),
                e2.point(q.to_vec()).unwrap(),
            ),
            (
                SetDescriptor::tent_graph(),
                e2.point(vec![q[0].abs().min(0.5), q[1] * 0.1]).unwrap(),
            ),
        ];
        for (set, y) in sets {
            let first = match project(&set, &y, &opts) {
                Ok(res) => res,
                Err(_) => continue, // poles and other non-unique queries
            };
            for p in first.nearest.iter().take(3) {
                prop_assert!(membership(&set, p, 1e-9).unwrap());
                let again = project(&set, p, &opts).unwrap();
                prop_assert!(again.distance < 1e-9);
                prop_assert!(dist(again.primary(), p).unwrap() < 1e-9);
            }
        }
    }

    /// Projections onto convex sets in a model space see obtuse angles, and
    /// are nonexpansive toward set members within the comparison radius.
    #[test]
    fn convex_projection_obtuse_and_nonexpansive(
        u in unit3(),
        w in unit3(),
        pole in unit3(),
    ) {
        let s2 = ModelSpace::unit_sphere(2);
        let set = SetDescriptor::great_subsphere(s2.clone(), pole.to_vec()).unwrap();
        let x = sphere_point(&s2, u);
        prop_assume!(!membership(&set, &x, 1e-6).unwrap());
        let res = match project(&set, &x, &ProjectOpts::default()) {
            Ok(r) => r,
            Err(_) => return Ok(()), // pole query
        };
        let p = res.primary();
        // Nonexpansiveness: d(P(x), y) ≤ d(x, y) for members y in range.
        let yres = match project(&set, &sphere_point(&s2, w), &ProjectOpts::default()) {
            Ok(r) => r,
            Err(_) => return Ok(()),
        };
        let y = yres.primary();
        prop_assume!(dist(p, y).unwrap() <= PI / 2.0);
        prop_assert!(dist(p, y).unwrap() <= dist(&x, y).unwrap() + 1e-9);
        // Obtuse angle at the projection foot.
        prop_assume!(dist(p, y).unwrap() > 1e-6);
        let ang = vertex_angle(p, &x, y).unwrap();
        prop_assert!(ang >= PI / 2.0 - 1e-7, "angle {ang} below right angle");
    }

    /// Generated epigraph witnesses satisfy the deviation bound and stay in
    /// the set on a dense sample.
    #[test]
    fn epigraph_witness_ratio_bound(
        x1 in -1.0f64..1.0,
        x2 in -1.0f64..1.0,
        lift1 in 0.0f64..0.5,
        lift2 in 0.0f64..0.5,
        eps in 0.01f64..0.5,
    ) {
        prop_assume!((x1 - x2).abs() > 1e-3);
        let epi = SetDescriptor::epigraph(
            ModelSpace::euclidean(1),
            PointField::new(|p| p.coords()[0].abs()),
        );
        let space = epi.ambient().clone();
        let p = space.point(vec![x1, x1.abs() + lift1]).unwrap();
        let q = space.point(vec![x2, x2.abs() + lift2]).unwrap();
        let w = catproj::epigraph_uag_witness(&epi, &p, &q, eps).unwrap();
        let (ratio, _) = w.sup_deviation_ratio(1024).unwrap();
        prop_assert!(ratio < eps, "deviation ratio {ratio} reached eps {eps}");
        prop_assert!(w.membership_defect(&epi, 1024, 1e-9).unwrap() == 0.0);
    }
}
