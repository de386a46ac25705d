//! Scene configuration files (TOML) and run settings for the CLI.
//!
//! Example:
//!
//! ```toml
//! core_radius = 0.5
//! core_kind = "PMC"            # "PEC" | "PMC" | "penetrable"
//! k = 2.0
//! R = 1.5
//! eta0 = 1.0
//! tau0 = 1.0
//! delta_ladder = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3]
//!
//! [[shells]]
//! radius = 1.0
//! mu = [1.0, 0.0]
//! eps = [2.0, 0.5]
//!
//! [incidence]
//! d = [0.0, 0.0, 1.0]
//! p = [1.0, 0.0, 0.0]
//! ```

use num_complex::Complex64;
use serde::Deserialize;
use std::path::Path;

use crate::scene::{CoreKind, IncidentWave, LayeredScene, Material, MaterialBounds, Shell};
use crate::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
pub struct ShellFile {
    pub radius: f64,
    pub mu: [f64; 2],
    pub eps: [f64; 2],
}

#[derive(Debug, Clone, Deserialize)]
pub struct IncidenceFile {
    pub d: [f64; 3],
    pub p: [f64; 3],
}

#[derive(Debug, Clone, Deserialize)]
pub struct SceneFile {
    pub core_radius: f64,
    pub core_kind: String,
    /// Required when `core_kind = "penetrable"`.
    pub core_mu: Option<[f64; 2]>,
    pub core_eps: Option<[f64; 2]>,
    pub k: f64,
    #[serde(rename = "R")]
    pub calderon_radius: f64,
    #[serde(default)]
    pub shells: Vec<ShellFile>,
    pub incidence: IncidenceFile,
    pub delta_ladder: Option<Vec<f64>>,
    pub eta0: Option<f64>,
    pub tau0: Option<f64>,
    pub material_bounds: Option<MaterialBoundsFile>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct MaterialBoundsFile {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma: f64,
}

/// Validated run inputs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scene: LayeredScene,
    pub incidence: IncidentWave,
    pub delta_ladder: Option<Vec<f64>>,
    pub eta0: f64,
    pub tau0: f64,
    pub seed: u64,
    pub n_max_override: Option<u32>,
    pub quad_order_override: Option<usize>,
    pub tolerances: Tolerances,
}

/// Check tolerances; CLI flags may adjust them but never beyond 1e-2.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub energy: f64,
    pub weak_form: f64,
    pub cross_route: f64,
    pub radius_independence: f64,
    pub farfield_relations: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            energy: 1e-7,
            weak_form: 1e-5,
            cross_route: 1e-6,
            radius_independence: 1e-7,
            farfield_relations: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("energy", self.energy),
            ("weak-form", self.weak_form),
            ("cross-route", self.cross_route),
            ("radius-independence", self.radius_independence),
            ("farfield-relations", self.farfield_relations),
        ] {
            if !(v > 0.0 && v <= 1e-2) {
                return Err(Error::Config(format!(
                    "tolerance {name} = {v:.3e} outside (0, 1e-2]"
                )));
            }
        }
        Ok(())
    }
}

pub fn parse_scene_file(text: &str) -> Result<SceneFile> {
    toml::from_str(text).map_err(|e| Error::Config(format!("scene file: {e}")))
}

pub fn load_scene_file(path: &Path) -> Result<SceneFile> {
    let text = std::fs::read_to_string(path)?;
    parse_scene_file(&text)
}

impl SceneFile {
    pub fn build(&self) -> Result<(LayeredScene, IncidentWave)> {
        let core = match self.core_kind.as_str() {
            "PEC" => CoreKind::Pec,
            "PMC" => CoreKind::Pmc,
            "penetrable" => {
                let mu = self.core_mu.ok_or_else(|| {
                    Error::Config("penetrable core needs core_mu = [re, im]".into())
                })?;
                let eps = self.core_eps.ok_or_else(|| {
                    Error::Config("penetrable core needs core_eps = [re, im]".into())
                })?;
                CoreKind::Penetrable(
                    Material::new(
                        Complex64::new(mu[0], mu[1]),
                        Complex64::new(eps[0], eps[1]),
                    )
                    .map_err(|e| Error::Config(format!("core material: {e}")))?,
                )
            }
            other => {
                return Err(Error::Config(format!(
                    "core_kind = {other:?} (expected \"PEC\", \"PMC\" or \"penetrable\")"
                )))
            }
        };
        let shells = self
            .shells
            .iter()
            .enumerate()
            .map(|(i, s)| {
                Ok(Shell {
                    outer_radius: s.radius,
                    material: Material::new(
                        Complex64::new(s.mu[0], s.mu[1]),
                        Complex64::new(s.eps[0], s.eps[1]),
                    )
                    .map_err(|e| Error::Config(format!("shell {i}: {e}")))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut scene = LayeredScene::new(
            self.core_radius,
            core,
            shells,
            self.k,
            self.calderon_radius,
        )
        .map_err(|e| Error::Config(e.to_string()))?;
        if let Some(b) = self.material_bounds {
            scene.bounds = MaterialBounds {
                gamma1: b.gamma1,
                gamma2: b.gamma2,
                gamma: b.gamma,
            };
            scene.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        let incidence = IncidentWave::new(self.incidence.d, self.incidence.p, self.k)
            .map_err(|e| Error::Config(format!("incidence: {e}")))?;
        Ok((scene, incidence))
    }
}
