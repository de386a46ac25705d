//! Scene and incidence data model, and the effective-core constructors.
//!
//! A scene is a concentric stack: core ball of radius `core_radius`, then
//! shells out to the obstacle radius `r_omega`, vacuum outside, and an
//! artificial sphere of radius `calderon_radius` enclosing everything.
//! Lengths are dimensionless; the wavenumber `k` carries the inverse unit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::vec3::{cross, dot, norm, Vec3};
use crate::{Error, Result};

/// Relative material parameters of one isotropic region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub mu_r: Complex64,
    pub eps_r: Complex64,
}

impl Material {
    pub fn new(mu_r: Complex64, eps_r: Complex64) -> Result<Self> {
        let m = Material { mu_r, eps_r };
        m.validate()?;
        Ok(m)
    }

    pub fn vacuum() -> Self {
        Material {
            mu_r: Complex64::new(1.0, 0.0),
            eps_r: Complex64::new(1.0, 0.0),
        }
    }

    /// Passivity bounds: positive real parts, non-negative imaginary parts.
    pub fn validate(&self) -> Result<()> {
        let ok = |v: Complex64| v.re.is_finite() && v.im.is_finite() && v.re > 0.0 && v.im >= 0.0;
        if !ok(self.mu_r) {
            return Err(Error::InvalidArgument(format!(
                "mu_r = {} must have Re > 0, Im >= 0",
                self.mu_r
            )));
        }
        if !ok(self.eps_r) {
            return Err(Error::InvalidArgument(format!(
                "eps_r = {} must have Re > 0, Im >= 0",
                self.eps_r
            )));
        }
        Ok(())
    }

    /// Wavenumber in this material for background wavenumber `k`
    /// (principal branch keeps Re >= 0 and Im >= 0 for passive media).
    pub fn wavenumber(&self, k: f64) -> Complex64 {
        k * (self.mu_r * self.eps_r).sqrt()
    }

    /// Relative admittance sqrt(eps_r / mu_r).
    pub fn admittance(&self) -> Complex64 {
        (self.eps_r / self.mu_r).sqrt()
    }
}

/// What fills the innermost ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CoreKind {
    /// Perfect electric conductor: nu x E = 0 on the core surface.
    Pec,
    /// Perfect magnetic conductor: nu x H = 0 on the core surface.
    Pmc,
    Penetrable(Material),
}

impl CoreKind {
    pub fn is_obstacle(&self) -> bool {
        matches!(self, CoreKind::Pec | CoreKind::Pmc)
    }
}

/// One shell: everything between the previous radius and `outer_radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub outer_radius: f64,
    pub material: Material,
}

/// Ellipticity bounds on the shell materials, kept as scene metadata:
/// `gamma1 <= Re(mu_r) <= gamma2` and `Re(eps_r) >= gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialBounds {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma: f64,
}

impl Default for MaterialBounds {
    fn default() -> Self {
        MaterialBounds {
            gamma1: 1e-6,
            gamma2: 1e6,
            gamma: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredScene {
    pub core_radius: f64,
    pub core: CoreKind,
    pub shells: Vec<Shell>,
    /// Background wavenumber of the vacuum exterior.
    pub background_k: f64,
    /// Radius of the artificial sphere carrying the Calderon operator.
    pub calderon_radius: f64,
    pub bounds: MaterialBounds,
}

impl LayeredScene {
    pub fn new(
        core_radius: f64,
        core: CoreKind,
        shells: Vec<Shell>,
        background_k: f64,
        calderon_radius: f64,
    ) -> Result<Self> {
        let sc = LayeredScene {
            core_radius,
            core,
            shells,
            background_k,
            calderon_radius,
            bounds: MaterialBounds::default(),
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.core_radius.is_finite() && self.core_radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "core_radius = {} must be positive",
                self.core_radius
            )));
        }
        if !(self.background_k.is_finite() && self.background_k > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "k = {} must be positive",
                self.background_k
            )));
        }
        let mut prev = self.core_radius;
        for (i, sh) in self.shells.iter().enumerate() {
            if !(sh.outer_radius > prev) {
                return Err(Error::InvalidArgument(format!(
                    "shell {i}: outer_radius {} must exceed core_radius/previous radius {prev}",
                    sh.outer_radius
                )));
            }
            sh.material.validate()?;
            if sh.material.mu_r.re < self.bounds.gamma1
                || sh.material.mu_r.re > self.bounds.gamma2
                || sh.material.eps_r.re < self.bounds.gamma
            {
                return Err(Error::InvalidArgument(format!(
                    "shell {i} material outside the declared gamma bounds"
                )));
            }
            prev = sh.outer_radius;
        }
        if let CoreKind::Penetrable(m) = self.core {
            m.validate()?;
        }
        if !(self.calderon_radius > prev) {
            return Err(Error::InvalidArgument(format!(
                "calderon_radius {} must exceed the obstacle radius {prev}",
                self.calderon_radius
            )));
        }
        Ok(())
    }

    /// Radius of the outermost material interface (the obstacle boundary).
    pub fn r_omega(&self) -> f64 {
        self.shells
            .last()
            .map(|s| s.outer_radius)
            .unwrap_or(self.core_radius)
    }

    /// Material regions inward-out: `(r_inner, r_outer, material)`.
    /// A PEC/PMC core contributes no region.
    pub fn regions(&self) -> Vec<(f64, f64, Material)> {
        let mut out = Vec::new();
        if let CoreKind::Penetrable(m) = self.core {
            out.push((0.0, self.core_radius, m));
        }
        let mut prev = self.core_radius;
        for sh in &self.shells {
            out.push((prev, sh.outer_radius, sh.material));
            prev = sh.outer_radius;
        }
        out
    }

    /// All interface radii, core boundary first.
    pub fn interface_radii(&self) -> Vec<f64> {
        let mut r = vec![self.core_radius];
        r.extend(self.shells.iter().map(|s| s.outer_radius));
        r
    }
}

/// Plane-wave incidence `E^i = p exp(i k x.d)`, `H^i = (d x p) exp(i k x.d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncidentWave {
    pub direction: Vec3,
    pub polarization: Vec3,
    pub k: f64,
}

impl IncidentWave {
    pub fn new(direction: Vec3, polarization: Vec3, k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidArgument(format!("k = {k} must be positive")));
        }
        let tol = 1e-12;
        if (norm(direction) - 1.0).abs() > tol || (norm(polarization) - 1.0).abs() > tol {
            return Err(Error::InvalidArgument(
                "direction and polarization must be unit vectors".into(),
            ));
        }
        if dot(direction, polarization).abs() > tol {
            return Err(Error::InvalidArgument(
                "polarization must be orthogonal to the propagation direction".into(),
            ));
        }
        Ok(IncidentWave {
            direction,
            polarization,
            k,
        })
    }

    pub fn magnetic_polarization(&self) -> Vec3 {
        cross(self.direction, self.polarization)
    }
}

/// Parameters of the effective-core construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaParams {
    pub delta: f64,
    pub eta0: f64,
    pub tau0: f64,
}

impl DeltaParams {
    pub fn new(delta: f64, eta0: f64, tau0: f64) -> Result<Self> {
        for (name, v) in [("delta", delta), ("eta0", eta0), ("tau0", tau0)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} = {v} must be positive"
                )));
            }
        }
        if delta < 1e-8 {
            // interior Bessel arguments leave the stable evaluation range
            return Err(Error::Range(format!(
                "delta = {delta:.3e} below the supported minimum 1e-8"
            )));
        }
        Ok(DeltaParams { delta, eta0, tau0 })
    }
}

/// Obstacle kind being imitated by a penetrable core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObstacleKind {
    Pec,
    Pmc,
}

/// Effective-core material imitating a PEC or PMC obstacle:
/// PMC: `mu = 1/delta`, `eps = eta0 + i tau0`;
/// PEC: `mu = delta`, `eps = eta0 + i tau0/delta`.
pub fn effective_material(kind: ObstacleKind, params: DeltaParams) -> Result<Material> {
    let DeltaParams { delta, eta0, tau0 } = params;
    let m = match kind {
        ObstacleKind::Pmc => Material {
            mu_r: Complex64::new(1.0 / delta, 0.0),
            eps_r: Complex64::new(eta0, tau0),
        },
        ObstacleKind::Pec => Material {
            mu_r: Complex64::new(delta, 0.0),
            eps_r: Complex64::new(eta0, tau0 / delta),
        },
    };
    m.validate()?;
    Ok(m)
}

/// Replace a PEC/PMC core by its effective penetrable material; shells,
/// radii and everything else stay untouched.
pub fn realize_scene(scene: &LayeredScene, params: DeltaParams) -> Result<LayeredScene> {
    let kind = match scene.core {
        CoreKind::Pec => ObstacleKind::Pec,
        CoreKind::Pmc => ObstacleKind::Pmc,
        CoreKind::Penetrable(_) => {
            return Err(Error::Precondition(
                "realize_scene needs a PEC or PMC core".into(),
            ))
        }
    };
    let mut out = scene.clone();
    out.core = CoreKind::Penetrable(effective_material(kind, params)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(d: f64, e: f64, t: f64) -> DeltaParams {
        DeltaParams::new(d, e, t).unwrap()
    }

    #[test]
    fn effective_pmc_example() {
        let m = effective_material(ObstacleKind::Pmc, params(0.01, 1.0, 1.0)).unwrap();
        assert_eq!(m.mu_r, Complex64::new(100.0, 0.0));
        assert_eq!(m.eps_r, Complex64::new(1.0, 1.0));
    }

    #[test]
    fn effective_pec_example() {
        let m = effective_material(ObstacleKind::Pec, params(0.1, 2.0, 3.0)).unwrap();
        assert_eq!(m.mu_r, Complex64::new(0.1, 0.0));
        assert_eq!(m.eps_r, Complex64::new(2.0, 30.0));
    }

    #[test]
    fn effective_identity_delta() {
        let m = effective_material(ObstacleKind::Pmc, params(1.0, 1.0, 1.0)).unwrap();
        assert_eq!(m.mu_r, Complex64::new(1.0, 0.0));
        assert_eq!(m.eps_r, Complex64::new(1.0, 1.0));
    }

    #[test]
    fn mu_product_is_one() {
        for d in [1e-2, 0.3, 1.0, 2.0] {
            let a = effective_material(ObstacleKind::Pmc, params(d, 1.0, 1.0)).unwrap();
            let b = effective_material(ObstacleKind::Pec, params(d, 1.0, 1.0)).unwrap();
            assert!((a.mu_r * b.mu_r - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn realize_leaves_shells_untouched() {
        let shells = vec![Shell {
            outer_radius: 1.0,
            material: Material::new(Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.5)).unwrap(),
        }];
        let sc = LayeredScene::new(0.5, CoreKind::Pmc, shells.clone(), 2.0, 1.5).unwrap();
        let r1 = realize_scene(&sc, params(0.01, 1.0, 1.0)).unwrap();
        let r2 = realize_scene(&sc, params(0.5, 1.0, 1.0)).unwrap();
        assert_eq!(r1.shells, shells);
        assert_eq!(r1.shells, r2.shells);
        match r1.core {
            CoreKind::Penetrable(m) => {
                assert_eq!(m.mu_r, Complex64::new(100.0, 0.0));
                assert_eq!(m.eps_r, Complex64::new(1.0, 1.0));
            }
            _ => panic!("core not realized"),
        }
        // PEC variant from the construction at delta = 0.5
        let sc_pec = LayeredScene::new(0.5, CoreKind::Pec, shells, 2.0, 1.5).unwrap();
        let r = realize_scene(&sc_pec, params(0.5, 1.0, 1.0)).unwrap();
        match r.core {
            CoreKind::Penetrable(m) => assert_eq!(m.eps_r, Complex64::new(1.0, 2.0)),
            _ => panic!(),
        }
    }

    #[test]
    fn realize_rejects_penetrable_core() {
        let sc = LayeredScene::new(
            0.5,
            CoreKind::Penetrable(Material::vacuum()),
            vec![],
            2.0,
            1.5,
        )
        .unwrap();
        assert!(matches!(
            realize_scene(&sc, params(0.1, 1.0, 1.0)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn degenerate_delta_rejected() {
        assert!(matches!(
            DeltaParams::new(1e-9, 1.0, 1.0),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn scene_ordering_enforced() {
        let bad = LayeredScene::new(
            1.2,
            CoreKind::Pec,
            vec![Shell {
                outer_radius: 1.0,
                material: Material::vacuum(),
            }],
            2.0,
            1.5,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn incidence_validation() {
        assert!(IncidentWave::new([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], 2.0).is_ok());
        assert!(IncidentWave::new([0.0, 0.0, 1.0], [0.0, 0.0, 1.0], 2.0).is_err());
        assert!(IncidentWave::new([0.0, 0.0, 2.0], [1.0, 0.0, 0.0], 2.0).is_err());
    }
}
