//! TOML experiment configuration.
//!
//! The schema is strict: unknown keys anywhere in the file are errors, so a
//! typoed parameter fails the run instead of silently falling back to a
//! default. Only closed-form set variants are constructible from a config;
//! callback-backed sets (epigraphs, constraint sets, smooth images) are
//! library-only and appear in the built-in presets instead.

use std::collections::BTreeMap;

use serde::Deserialize;

use catproj::sets::SetDescriptor;
use catproj::space::ModelSpace;

use crate::error::CliError;
use crate::plan::{
    AlphaSpec, CertificateSpec, CertifyKind, CertifyRequest, ExperimentPlan, RunRequest,
    StartSpec,
};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub space: SpaceConfig,
    #[serde(default)]
    pub sets: BTreeMap<String, SetConfig>,
    #[serde(default)]
    pub certify: Vec<CertifyConfig>,
    #[serde(default, rename = "run")]
    pub runs: Vec<RunConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub kind: String,
    #[serde(default)]
    pub curvature: Option<f64>,
    pub dim: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "kebab-case")]
pub enum SetConfig {
    GreatSubsphere { pole: Vec<f64> },
    SmallSphere { axis: Vec<f64>, height: f64 },
    Halfspace { normal: Vec<f64>, offset: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    TentGraph {},
    PointCloud {
        #[serde(default)]
        points: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        circle: Option<CircleGen>,
    },
}

/// Uniform sample of a circle in the plane, for point-cloud sets.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleGen {
    #[serde(default)]
    pub center: Option<[f64; 2]>,
    pub radius: f64,
    pub count: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "check", rename_all = "kebab-case")]
pub enum CertifyConfig {
    Uag {
        id: String,
        set: String,
        z: Vec<f64>,
        epsilon: f64,
        radius: f64,
        #[serde(default = "default_samples")]
        samples: usize,
        seed: u64,
    },
    SuperRegularity {
        id: String,
        set: String,
        z: Vec<f64>,
        epsilon: f64,
        r: f64,
        #[serde(default = "default_samples")]
        samples: usize,
        seed: u64,
    },
    SeparableIntersection {
        id: String,
        a: String,
        b: String,
        z: Vec<f64>,
        alpha: f64,
        r: f64,
        #[serde(default = "default_samples")]
        samples: usize,
        seed: u64,
    },
    AngleAtIntersection {
        id: String,
        a: String,
        b: String,
        z: Vec<f64>,
        radius: f64,
        #[serde(default = "default_samples")]
        samples: usize,
        seed: u64,
    },
    ExtrinsicCurvature {
        id: String,
        cloud: String,
        z: Vec<f64>,
        sigma: f64,
        r: f64,
        h: f64,
        seed: u64,
    },
    TwoConvexity {
        id: String,
        cloud: String,
        z: Vec<f64>,
        sigma: f64,
        radius: f64,
        h: f64,
        seed: u64,
    },
    Transversality {
        id: String,
        a: String,
        b: String,
        z: Vec<f64>,
        directions: usize,
        lengths: Vec<f64>,
        seed: u64,
    },
    UniquenessProfile {
        id: String,
        set: String,
        z: Vec<f64>,
        radii: Vec<f64>,
        #[serde(default = "default_samples")]
        samples: usize,
        seed: u64,
    },
}

fn default_samples() -> usize {
    10_000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub id: String,
    pub a: String,
    pub b: String,
    pub start: StartConfig,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub certificate: Option<CertificateConfig>,
}

fn default_tol() -> f64 {
    1e-12
}

fn default_max_iters() -> usize {
    100_000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "kebab-case")]
pub enum StartConfig {
    Coords { coords: Vec<f64> },
    AlongA { z: Vec<f64>, distance: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateConfig {
    pub epsilon: f64,
    pub r: f64,
    pub z: Vec<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub alpha_from_angle: Option<FromAngleConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FromAngleConfig {
    pub radius: f64,
    pub fraction: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<String>,
}

// ---------------------------------------------------------------------------
// Parsing and validation
// ---------------------------------------------------------------------------

pub fn parse(text: &str) -> Result<ConfigFile, CliError> {
    toml::from_str(text).map_err(|e| CliError::Validation(format!("config parse error: {e}")))
}

fn build_space(cfg: &SpaceConfig) -> Result<ModelSpace, CliError> {
    let field = |msg: String| CliError::Validation(msg);
    match cfg.kind.as_str() {
        "euclidean" => {
            if let Some(k) = cfg.curvature {
                if k != 0.0 {
                    return Err(field(format!(
                        "space.curvature: euclidean space must have curvature 0, got {k}"
                    )));
                }
            }
            Ok(ModelSpace::euclidean(cfg.dim))
        }
        "sphere" => {
            let k = cfg
                .curvature
                .ok_or_else(|| field("space.curvature: required for kind = \"sphere\"".into()))?;
            if !(k > 0.0) {
                return Err(field(format!(
                    "space.curvature: sphere requires curvature > 0, got {k}"
                )));
            }
            ModelSpace::sphere(k, cfg.dim)
                .map_err(|e| field(format!("space: {e}")))
        }
        "hyperbolic" => {
            let k = cfg.curvature.ok_or_else(|| {
                field("space.curvature: required for kind = \"hyperbolic\"".into())
            })?;
            if !(k < 0.0) {
                return Err(field(format!(
                    "space.curvature: hyperbolic requires curvature < 0, got {k}"
                )));
            }
            ModelSpace::hyperbolic(k, cfg.dim)
                .map_err(|e| field(format!("space: {e}")))
        }
        other => Err(field(format!(
            "space.kind: unknown kind {other:?} (euclidean | sphere | hyperbolic)"
        ))),
    }
}

fn build_set(name: &str, cfg: &SetConfig, space: &ModelSpace) -> Result<SetDescriptor, CliError> {
    let wrap = |e: catproj::GeomError| CliError::Validation(format!("sets.{name}: {e}"));
    match cfg {
        SetConfig::GreatSubsphere { pole } => {
            SetDescriptor::great_subsphere(space.clone(), pole.clone()).map_err(wrap)
        }
        SetConfig::SmallSphere { axis, height } => {
            SetDescriptor::small_sphere(space.clone(), axis.clone(), *height).map_err(wrap)
        }
        SetConfig::Halfspace { normal, offset } => {
            SetDescriptor::halfspace(space.clone(), normal.clone(), *offset).map_err(wrap)
        }
        SetConfig::Ball { center, radius } => {
            SetDescriptor::euclidean_ball(space.clone(), center.clone(), *radius).map_err(wrap)
        }
        SetConfig::TentGraph {} => {
            if *space != ModelSpace::euclidean(2) {
                return Err(CliError::Validation(format!(
                    "sets.{name}: the tent graph lives in euclidean dim 2"
                )));
            }
            Ok(SetDescriptor::tent_graph())
        }
        SetConfig::PointCloud { points, circle } => {
            let pts = match (points, circle) {
                (Some(p), None) => p.clone(),
                (None, Some(gen)) => {
                    if *space != ModelSpace::euclidean(2) {
                        return Err(CliError::Validation(format!(
                            "sets.{name}.circle: circle generator needs euclidean dim 2"
                        )));
                    }
                    let c = gen.center.unwrap_or([0.0, 0.0]);
                    (0..gen.count)
                        .map(|i| {
                            let t = 2.0 * std::f64::consts::PI * i as f64 / gen.count as f64;
                            vec![c[0] + gen.radius * t.cos(), c[1] + gen.radius * t.sin()]
                        })
                        .collect()
                }
                _ => {
                    return Err(CliError::Validation(format!(
                        "sets.{name}: give exactly one of `points` or `circle`"
                    )))
                }
            };
            SetDescriptor::point_cloud(space.clone(), pts).map_err(wrap)
        }
    }
}

pub fn into_plan(cfg: &ConfigFile) -> Result<ExperimentPlan, CliError> {
    let space = build_space(&cfg.space)?;
    let mut sets = BTreeMap::new();
    for (name, sc) in &cfg.sets {
        sets.insert(name.clone(), build_set(name, sc, &space)?);
    }
    let need_set = |id: &str, name: &str| -> Result<(), CliError> {
        if sets.contains_key(name) {
            Ok(())
        } else {
            Err(CliError::Validation(format!("{id}: unknown set {name:?}")))
        }
    };
    let positive = |id: &str, field: &str, v: f64| -> Result<(), CliError> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(CliError::Validation(format!("{id}.{field}: must be positive, got {v}")))
        }
    };

    let mut certify = Vec::new();
    for c in &cfg.certify {
        let req = match c {
            CertifyConfig::Uag { id, set, z, epsilon, radius, samples, seed } => {
                need_set(id, set)?;
                positive(id, "epsilon", *epsilon)?;
                positive(id, "radius", *radius)?;
                CertifyRequest {
                    id: id.clone(),
                    seed: *seed,
                    samples: *samples,
                    kind: CertifyKind::Uag {
                        set: set.clone(),
                        z: z.clone(),
                        epsilon: *epsilon,
                        radius: *radius,
                    },
                }
            }
            CertifyConfig::SuperRegularity { id, set, z, epsilon, r, samples, seed } => {
                need_set(id, set)?;
                positive(id, "epsilon", *epsilon)?;
                positive(id, "r", *r)?;
                CertifyRequest {
                    id: id.clone(),
                    seed: *seed,
                    samples: *samples,
                    kind: CertifyKind::SuperRegularity {
                        set: set.clone(),
                        z: z.clone(),
                        epsilon: *epsilon,
                        r: *r,
                    },
                }
            }
            CertifyConfig::SeparableIntersection { id, a, b, z, alpha, r, samples, seed } => {
                need_set(id, a)?;
                need_set(id, b)?;
                positive(id, "alpha", *alpha)?;
                positive(id, "r", *r)?;
                CertifyRequest {
                    id: id.clone(),
                    seed: *seed,
                    samples: *samples,
                    kind: CertifyKind::SeparableIntersection {
                        a: a.clone(),
                        b: b.clone(),
                        z: z.clone(),
                        alpha: *alpha,
                        r: *r,
                    },
                }
            }
            CertifyConfig::AngleAtIntersection { id, a, b, z, radius, samples, seed } => {
                need_set(id, a)?;
                need_set(id, b)?;
                positive(id, "radius", *radius)?;
                CertifyRequest {
                    id: id.clone(),
                    seed: *seed,
                    samples: *samples,
                    kind: CertifyKind::AngleAtIntersection {
                        a: a.clone(),
                        b: b.clone(),
                        z: z.clone(),
                        radius: *radius,
                    },
                }
            }
            CertifyConfig::ExtrinsicCurvature { id, cloud, z, sigma, r, h, seed } => {
                need_set(id, cloud)?;
                positive(id, "r", *r)?;
                positive(id, "h", *h)?;
                CertifyRequest {
                    id: id.clone(),
                    seed: *seed,
                    samples: 0,
                    kind: CertifyKind::ExtrinsicCurvature {
                        cloud: cloud.clone(),
                        z: z.clone(),
                        sigma: *sigma,
                        r: *r,
                        h: *h,
                    },
                }
            }
            CertifyConfig::TwoConvexity { id, cloud, z, sigma, radius, h, seed } => {
                need_set(id, cloud)?;
                positive(id, "radius", *radius)?;
                positive(id, "h", *h)?;
                CertifyRequest {
                    id: id.clone(),
                    seed: *seed,
                    samples: 0,
                    kind: CertifyKind::TwoConvexity {
                        cloud: cloud.clone(),
                        z: z.clone(),
                        sigma: *sigma,
                        radius: *radius,
                        h: *h,
                    },
                }
            }
            CertifyConfig::Transversality { id, a, b, z, directions, lengths, seed } => {
                need_set(id, a)?;
                need_set(id, b)?;
                if *directions == 0 {
                    return Err(CliError::Validation(format!(
                        "{id}.directions: must be positive"
                    )));
                }
                CertifyRequest {
                    id: id.clone(),
                    seed: *seed,
                    samples: *directions,
                    kind: CertifyKind::Transversality {
                        a: a.clone(),
                        b: b.clone(),
                        z: z.clone(),
                        directions: *directions,
                        lengths: lengths.clone(),
                    },
                }
            }
            CertifyConfig::UniquenessProfile { id, set, z, radii, samples, seed } => {
                need_set(id, set)?;
                for r in radii {
                    positive(id, "radii", *r)?;
                }
                CertifyRequest {
                    id: id.clone(),
                    seed: *seed,
                    samples: *samples,
                    kind: CertifyKind::UniquenessProfile {
                        set: set.clone(),
                        z: z.clone(),
                        radii: radii.clone(),
                    },
                }
            }
        };
        certify.push(req);
    }

    let mut runs = Vec::new();
    for r in &cfg.runs {
        need_set(&r.id, &r.a)?;
        need_set(&r.id, &r.b)?;
        positive(&r.id, "tol", r.tol)?;
        let start = match &r.start {
            StartConfig::Coords { coords } => StartSpec::Coords(coords.clone()),
            StartConfig::AlongA { z, distance } => {
                positive(&r.id, "start.distance", *distance)?;
                StartSpec::AlongA { z: z.clone(), distance: *distance }
            }
        };
        let certificate = match &r.certificate {
            None => None,
            Some(cc) => {
                positive(&r.id, "certificate.epsilon", cc.epsilon)?;
                positive(&r.id, "certificate.r", cc.r)?;
                let alpha = match (&cc.alpha, &cc.alpha_from_angle) {
                    (Some(a), None) => {
                        positive(&r.id, "certificate.alpha", *a)?;
                        AlphaSpec::Fixed(*a)
                    }
                    (None, Some(fa)) => {
                        positive(&r.id, "certificate.alpha_from_angle.radius", fa.radius)?;
                        if !(fa.fraction > 0.0 && fa.fraction <= 1.0) {
                            return Err(CliError::Validation(format!(
                                "{}.certificate.alpha_from_angle.fraction: must be in (0, 1]",
                                r.id
                            )));
                        }
                        AlphaSpec::FromAngle {
                            radius: fa.radius,
                            fraction: fa.fraction,
                            samples: fa.samples,
                            seed: fa.seed,
                        }
                    }
                    _ => {
                        return Err(CliError::Validation(format!(
                            "{}.certificate: give exactly one of `alpha` or `alpha_from_angle`",
                            r.id
                        )))
                    }
                };
                Some(CertificateSpec { epsilon: cc.epsilon, r: cc.r, z: cc.z.clone(), alpha })
            }
        };
        runs.push(RunRequest {
            id: r.id.clone(),
            a: r.a.clone(),
            b: r.b.clone(),
            start,
            tol: r.tol,
            max_iters: r.max_iters,
            certificate,
        });
    }

    let mut ids: Vec<&str> =
        certify.iter().map(|c| c.id.as_str()).chain(runs.iter().map(|r| r.id.as_str())).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() != certify.len() + runs.len() {
        return Err(CliError::Validation("request ids must be unique".into()));
    }

    Ok(ExperimentPlan { space, sets, certify, runs })
}
