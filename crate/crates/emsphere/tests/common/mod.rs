//! Shared helpers for the integration suites.

use num_complex::Complex64;

use emsphere::scene::{CoreKind, IncidentWave, LayeredScene, Material, Shell};

pub fn zhat_xhat(k: f64) -> IncidentWave {
    IncidentWave::new([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], k).unwrap()
}

/// The reference obstacle scene of the convergence studies: core r = 0.5,
/// one shell to r = 1 with mu = 1, eps = 2 + 0.5i, k = 2, R = 1.5.
pub fn reference_scene(core: CoreKind) -> LayeredScene {
    LayeredScene::new(
        0.5,
        core,
        vec![Shell {
            outer_radius: 1.0,
            material: Material::new(Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.5)).unwrap(),
        }],
        2.0,
        1.5,
    )
    .unwrap()
}

pub const REFERENCE_LADDER: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
