//! Built-in experiment presets.
//!
//! Presets can use callback-backed sets (smooth images, epigraphs) that the
//! TOML config cannot express. Each preset is deterministic for a fixed base
//! seed.

use std::collections::BTreeMap;

use catproj::sets::{SetDescriptor, SmoothMap};
use catproj::space::ModelSpace;

use crate::error::CliError;
use crate::plan::{
    AlphaSpec, CertificateSpec, CertifyKind, CertifyRequest, ExperimentPlan, RunRequest,
    StartSpec,
};

pub fn list() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            "sphere-example",
            "latitude circle vs great circle on the 2-sphere: certified hypotheses, \
             four runs with shrinking start distance, rate fits against the certificate",
        ),
        (
            "tent-function",
            "the tent graph: approximability by geodesics certified at the origin, \
             super-regularity refuted at a tooth apex",
        ),
        (
            "smooth-image-x32",
            "the curve (x, |x|^{3/2}): approximable by geodesics at the origin yet of \
             unbounded extrinsic curvature there",
        ),
        (
            "circle-curvature",
            "unit-circle point clouds at three mesh levels: the cubic distance-defect \
             ratio approaches 1/24",
        ),
    ]
}

pub fn build(name: &str, seed: u64) -> Result<ExperimentPlan, CliError> {
    match name {
        "sphere-example" => Ok(sphere_example(seed)),
        "tent-function" => Ok(tent_function(seed)),
        "smooth-image-x32" => Ok(smooth_image_x32(seed)),
        "circle-curvature" => Ok(circle_curvature(seed)),
        other => Err(CliError::Validation(format!(
            "unknown preset {other:?}; see `catproj list-presets`"
        ))),
    }
}

fn sphere_example(seed: u64) -> ExperimentPlan {
    let s2 = ModelSpace::unit_sphere(2);
    let axis = vec![1.0, 0.0, 0.0];
    let pole = vec![0.5, 3.0f64.sqrt() / 2.0, 0.0];
    let z = vec![0.5, -(3.0f64.sqrt()) / 6.0, 6.0f64.sqrt() / 3.0];

    let mut sets = BTreeMap::new();
    sets.insert(
        "A".to_string(),
        SetDescriptor::small_sphere(s2.clone(), axis, 0.5).expect("valid small sphere"),
    );
    sets.insert(
        "B".to_string(),
        SetDescriptor::great_subsphere(s2.clone(), pole).expect("valid great subsphere"),
    );

    let eps = 0.05f64;
    let r_super_a = (eps.cos() * eps.cos()).acos() / 2.0;
    let certify = vec![
        CertifyRequest {
            id: "angle-at-z".into(),
            seed,
            samples: 400,
            kind: CertifyKind::AngleAtIntersection {
                a: "A".into(),
                b: "B".into(),
                z: z.clone(),
                radius: 0.02,
            },
        },
        CertifyRequest {
            id: "super-regular-A".into(),
            seed: seed ^ 1,
            samples: 2000,
            kind: CertifyKind::SuperRegularity {
                set: "A".into(),
                z: z.clone(),
                epsilon: eps,
                r: r_super_a,
            },
        },
        CertifyRequest {
            id: "super-regular-B".into(),
            seed: seed ^ 2,
            samples: 2000,
            kind: CertifyKind::SuperRegularity {
                set: "B".into(),
                z: z.clone(),
                epsilon: eps,
                r: 0.4,
            },
        },
        CertifyRequest {
            id: "separable-BA".into(),
            seed: seed ^ 3,
            samples: 2000,
            kind: CertifyKind::SeparableIntersection {
                a: "B".into(),
                b: "A".into(),
                z: z.clone(),
                alpha: 0.23,
                r: 0.3,
            },
        },
    ];

    let runs = (1..=4)
        .map(|k| RunRequest {
            id: format!("run-1e-{k}"),
            a: "A".into(),
            b: "B".into(),
            start: StartSpec::AlongA { z: z.clone(), distance: 10f64.powi(-k) },
            tol: 1e-12,
            max_iters: 100_000,
            certificate: Some(CertificateSpec {
                epsilon: eps,
                r: 0.4,
                z: z.clone(),
                alpha: AlphaSpec::FromAngle {
                    radius: 0.02,
                    fraction: 0.9,
                    samples: 400,
                    seed,
                },
            }),
        })
        .collect();

    ExperimentPlan { space: s2, sets, certify, runs }
}

fn tent_function(seed: u64) -> ExperimentPlan {
    let e2 = ModelSpace::euclidean(2);
    let n: i32 = 4;
    let mut sets = BTreeMap::new();
    sets.insert("tent".to_string(), SetDescriptor::tent_graph());
    let apex = vec![3.0 * 0.5f64.powi(n + 2), 0.5f64.powi(2 * n + 2)];
    let certify = vec![
        CertifyRequest {
            id: "uag-origin".into(),
            seed,
            samples: 4000,
            kind: CertifyKind::Uag {
                set: "tent".into(),
                z: vec![0.0, 0.0],
                epsilon: 0.5f64.powi(n) + 1e-6,
                radius: 0.5f64.powi(n),
            },
        },
        CertifyRequest {
            id: "super-regularity-apex".into(),
            seed: seed ^ 1,
            samples: 20_000,
            kind: CertifyKind::SuperRegularity {
                set: "tent".into(),
                z: apex,
                epsilon: 0.5f64.powi(n + 1).atan(),
                r: 0.5f64.powi(n + 2),
            },
        },
    ];
    ExperimentPlan { space: e2, sets, certify, runs: Vec::new() }
}

fn smooth_image_x32(seed: u64) -> ExperimentPlan {
    let e2 = ModelSpace::euclidean(2);
    let map = SmoothMap::new(1, 2, |u| vec![u[0], u[0].abs().powf(1.5)]);
    let domain = SetDescriptor::euclidean_ball(ModelSpace::euclidean(1), vec![0.0], 1.0)
        .expect("valid ball");
    let image = SetDescriptor::smooth_image(map, domain).expect("valid smooth image");

    // Dense sample of the same curve near the origin for the intrinsic
    // distance estimate.
    let extent = 2e-3;
    let m = 400usize;
    let cloud_pts: Vec<Vec<f64>> = (0..=2 * m)
        .map(|i| {
            let x = (i as f64 / m as f64 - 1.0) * extent;
            vec![x, x.abs().powf(1.5)]
        })
        .collect();
    let cloud = SetDescriptor::point_cloud(e2.clone(), cloud_pts).expect("valid cloud");
    let h = 3.5 * extent / m as f64;

    let mut sets = BTreeMap::new();
    sets.insert("x32-curve".to_string(), image);
    sets.insert("x32-cloud".to_string(), cloud);

    let eps = 0.5f64;
    let certify = vec![
        CertifyRequest {
            id: "uag-at-origin".into(),
            seed,
            samples: 150,
            kind: CertifyKind::Uag {
                set: "x32-curve".into(),
                z: vec![0.0, 0.0],
                epsilon: eps,
                radius: (eps / 12.0) * (eps / 12.0),
            },
        },
        CertifyRequest {
            id: "extrinsic-curvature-refuted".into(),
            seed: seed ^ 1,
            samples: 0,
            kind: CertifyKind::ExtrinsicCurvature {
                cloud: "x32-cloud".into(),
                z: vec![0.0, 0.0],
                sigma: 10.0,
                r: 1.5 * extent,
                h,
            },
        },
        CertifyRequest {
            id: "two-convexity-refuted".into(),
            seed: seed ^ 2,
            samples: 0,
            kind: CertifyKind::TwoConvexity {
                cloud: "x32-cloud".into(),
                z: vec![0.0, 0.0],
                sigma: 10.0,
                radius: 1.5 * extent,
                h,
            },
        },
    ];
    ExperimentPlan { space: e2, sets, certify, runs: Vec::new() }
}

fn circle_curvature(seed: u64) -> ExperimentPlan {
    let e2 = ModelSpace::euclidean(2);
    let mut sets = BTreeMap::new();
    let mut certify = Vec::new();
    for (level, count) in [(0usize, 256usize), (1, 512), (2, 1024)] {
        let pts: Vec<Vec<f64>> = (0..count)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
        let name = format!("circle-{count}");
        sets.insert(
            name.clone(),
            SetDescriptor::point_cloud(e2.clone(), pts).expect("valid cloud"),
        );
        let chord = 2.0 * (std::f64::consts::PI / count as f64).sin();
        certify.push(CertifyRequest {
            id: format!("curvature-level-{level}"),
            seed: seed ^ level as u64,
            samples: 0,
            kind: CertifyKind::ExtrinsicCurvature {
                cloud: name,
                z: vec![1.0, 0.0],
                sigma: 1.0 / 20.0,
                r: 0.2,
                h: 3.0 * chord,
            },
        });
    }
    ExperimentPlan { space: e2, sets, certify, runs: Vec::new() }
}
