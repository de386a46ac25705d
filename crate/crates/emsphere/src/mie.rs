//! Per-mode solution of the layered-sphere scattering problem.
//!
//! All modal work happens in the rotated frame where the propagation
//! direction is +z and the polarization is +x, so only the two azimuthal
//! families of order one appear. The incident wave is expanded as
//!
//! ```text
//! E^i = sum_n i^n (2n+1)/(n(n+1)) (M^(1)_o1n - i N^(1)_e1n)
//! ```
//!
//! and per mode the exterior total field is `E_n (regular + s * outgoing)`;
//! this single sign convention for the scattering coefficient `s` is shared
//! by the field-evaluation and Calderon modules. For a lossless scene
//! `|1 + 2 s_n| = 1`.
//!
//! Across each interface the tangential fields are matched by a 2x2
//! transfer matrix per parity acting on the (regular, outgoing) coefficient
//! pair; the exponentially scaled Riccati functions keep every matrix entry
//! representable, with the log-scale carried in a separate accumulator. The
//! matched rows are
//!
//! ```text
//! TE:  u = psi_or_xi(k_j r)/k_j     v = psi_or_xi'(k_j r)/mu_j
//! TM:  u = psi_or_xi'(k_j r)/k_j    v = psi_or_xi(k_j r)/mu_j
//! ```
//!
//! whose continuity is tangential-E and tangential-H continuity.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::scene::{CoreKind, IncidentWave, LayeredScene, Material};
use crate::specfun::{riccati_seq_scaled, RiccatiKind};
use crate::vec3::{cross, norm, Rotation, Vec3};
use crate::{Error, Result, N_CAP};

/// Mode parity: TE modes have M-type electric field, TM modes N-type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Te,
    Tm,
}

/// Spectral index of the modal series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mode {
    pub n: u32,
    pub parity: Parity,
}

/// Coefficient pair of one material region, scaled: the true values are
/// `reg * exp(log_scale)` and `out * exp(log_scale)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LayerCoeff {
    pub reg: Complex64,
    pub out: Complex64,
    pub log_scale: f64,
}

/// One mode's solve result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeSolution {
    /// Exterior scattering coefficient: exterior field = regular + s*outgoing.
    pub s: Complex64,
    /// Per material region, innermost first (same order as `scene.regions()`).
    pub layers: Vec<LayerCoeff>,
    /// log of the largest coefficient magnitude across regions
    /// (exterior normalized to 1); the solve condition estimate is
    /// exp(2 * log_amplification).
    pub log_amplification: f64,
}

/// Full modal solution for one scene and incidence.
#[derive(Debug, Clone)]
pub struct ModalSolution {
    pub scene: LayeredScene,
    pub incidence: IncidentWave,
    pub n_max: u32,
    /// Lab -> frame rotation taking d to +z and p to +x.
    pub rotation: Rotation,
    te: Vec<ModeSolution>,
    tm: Vec<ModeSolution>,
}

impl ModalSolution {
    pub fn mode(&self, n: u32, parity: Parity) -> &ModeSolution {
        let i = (n - 1) as usize;
        match parity {
            Parity::Te => &self.te[i],
            Parity::Tm => &self.tm[i],
        }
    }

    pub fn s(&self, n: u32, parity: Parity) -> Complex64 {
        self.mode(n, parity).s
    }

    /// Largest condition estimate over all modes.
    pub fn condition(&self) -> f64 {
        let worst = self
            .te
            .iter()
            .chain(self.tm.iter())
            .map(|m| m.log_amplification)
            .fold(f64::NEG_INFINITY, f64::max);
        (2.0 * worst).exp()
    }
}

impl ModalSolution {
    /// Replace one mode's data; used by sensitivity probes in tests.
    #[doc(hidden)]
    pub fn set_mode_for_test(&mut self, n: u32, parity: Parity, m: ModeSolution) {
        let i = (n - 1) as usize;
        match parity {
            Parity::Te => self.te[i] = m,
            Parity::Tm => self.tm[i] = m,
        }
    }
}

/// Rotation with rows (p, d x p, d): maps d to +z and p to +x, det +1.
pub fn rotation_frame(d: Vec3, p: Vec3) -> Result<Rotation> {
    let tol = 1e-12;
    if (norm(d) - 1.0).abs() > tol || (norm(p) - 1.0).abs() > tol {
        return Err(Error::InvalidArgument(
            "rotation_frame needs unit vectors".into(),
        ));
    }
    if d.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>().abs() > tol {
        return Err(Error::InvalidArgument(
            "rotation_frame needs d orthogonal to p".into(),
        ));
    }
    Ok(Rotation::from_rows(p, cross(d, p), d))
}

/// Series truncation order: `ceil(kr + 4 (kr)^(1/3)) + safety`, capped.
pub fn truncation_order(k: f64, r: f64, safety: u32) -> u32 {
    let x = k * r;
    let n = (x + 4.0 * x.cbrt()).ceil() as i64 + safety as i64;
    (n.max(1) as u32).min(N_CAP)
}

/// Interface matrix columns for one parity at radius r in material
/// (kj, mu): column j maps a unit regular/outgoing coefficient to the
/// continuity pair (u, v), scaled by `exp(scale[j])`.
struct InterfaceCols {
    u: [Complex64; 2],
    v: [Complex64; 2],
    scale: [f64; 2],
}

fn interface_cols(
    parity: Parity,
    n: u32,
    kj: Complex64,
    mu: Complex64,
    r: f64,
) -> Result<InterfaceCols> {
    let rho = kj * r;
    let (pv, pd, lsp) = riccati_seq_scaled(RiccatiKind::Psi, n, rho)?;
    let (xv, xd, lsx) = riccati_seq_scaled(RiccatiKind::Xi, n, rho)?;
    let i = n as usize;
    let (u, v) = match parity {
        Parity::Te => ([pv[i] / kj, xv[i] / kj], [pd[i] / mu, xd[i] / mu]),
        Parity::Tm => ([pd[i] / kj, xd[i] / kj], [pv[i] / mu, xv[i] / mu]),
    };
    Ok(InterfaceCols {
        u,
        v,
        scale: [lsp, lsx],
    })
}

/// Chain of propagation regions: material regions, then the vacuum exterior.
fn chain(scene: &LayeredScene) -> Vec<(Option<f64>, Material)> {
    let mut out: Vec<(Option<f64>, Material)> = scene
        .regions()
        .into_iter()
        .map(|(_, ro, m)| (Some(ro), m))
        .collect();
    out.push((None, Material::vacuum()));
    out
}

fn solve_mode(scene: &LayeredScene, n: u32, parity: Parity) -> Result<ModeSolution> {
    let k = scene.background_k;
    let regions = chain(scene);
    // start state (c_reg, c_out) * exp(lw) in regions[0]
    let (mut w, mut lw) = match scene.core {
        CoreKind::Penetrable(_) => ([Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], 0.0),
        core => {
            let mat = regions[0].1;
            let kj = mat.wavenumber(k);
            let rho = kj * scene.core_radius;
            let (pv, pd, lsp) = riccati_seq_scaled(RiccatiKind::Psi, n, rho)?;
            let (xv, xd, lsx) = riccati_seq_scaled(RiccatiKind::Xi, n, rho)?;
            let i = n as usize;
            // PEC kills tangential E (value row for TE, derivative row for TM);
            // PMC kills tangential H (the other row).
            let pec = matches!(core, CoreKind::Pec);
            let (a, b) = if (pec && parity == Parity::Te) || (!pec && parity == Parity::Tm) {
                (xv[i], -pv[i])
            } else {
                (xd[i], -pd[i])
            };
            let m = lsx.max(lsp);
            ([a * (lsx - m).exp(), b * (lsp - m).exp()], m)
        }
    };
    let renorm = |w: &mut [Complex64; 2], lw: &mut f64| -> Result<()> {
        let s = w[0].norm().max(w[1].norm());
        if s == 0.0 || !s.is_finite() {
            return Err(Error::Range(format!(
                "mode (n={n}, {parity:?}) coefficient state degenerated"
            )));
        }
        w[0] /= s;
        w[1] /= s;
        *lw += s.ln();
        Ok(())
    };
    renorm(&mut w, &mut lw)?;

    let mut states = vec![(w, lw)];
    for i in 0..regions.len() - 1 {
        let r = regions[i].0.expect("inner regions have an outer radius");
        let inner = regions[i].1;
        let outer = regions[i + 1].1;
        let a = interface_cols(parity, n, inner.wavenumber(k), inner.mu_r, r)?;
        let d = interface_cols(parity, n, outer.wavenumber(k), outer.mu_r, r)?;
        // continuity pair from the inner side
        let m = a.scale[0].max(a.scale[1]);
        let e0 = (a.scale[0] - m).exp();
        let e1 = (a.scale[1] - m).exp();
        let u = a.u[0] * w[0] * e0 + a.u[1] * w[1] * e1;
        let v = a.v[0] * w[0] * e0 + a.v[1] * w[1] * e1;
        let luv = lw + m;
        // invert the outer-side matrix; det carries exp(scale0+scale1)
        let det = d.u[0] * d.v[1] - d.u[1] * d.v[0];
        if det.norm() == 0.0 {
            return Err(Error::Range(format!(
                "mode (n={n}, {parity:?}) interface matrix singular"
            )));
        }
        let n0 = (d.v[1] * u - d.u[1] * v) / det;
        let n1 = (-d.v[0] * u + d.u[0] * v) / det;
        let g0 = luv - d.scale[0];
        let g1 = luv - d.scale[1];
        let m2 = g0.max(g1);
        w = [n0 * (g0 - m2).exp(), n1 * (g1 - m2).exp()];
        lw = m2;
        renorm(&mut w, &mut lw)?;
        states.push((w, lw));
    }

    // exterior state: total = t (alpha regular + beta outgoing), t normalizes
    // the regular part to the incident coefficient.
    let (ext, l_ext) = *states.last().unwrap();
    let (alpha, beta) = (ext[0], ext[1]);
    if alpha.norm() == 0.0 {
        return Err(Error::NumericalResonance {
            n,
            parity,
            condition: f64::INFINITY,
        });
    }
    let s = beta / alpha;
    let n_material = regions.len() - 1;
    let mut layers = Vec::with_capacity(n_material);
    let mut log_amp = s.norm().max(1.0).ln();
    for (wv, lv) in states.iter().take(n_material) {
        let c = LayerCoeff {
            reg: wv[0] / alpha,
            out: wv[1] / alpha,
            log_scale: lv - l_ext,
        };
        let mag = c.reg.norm().max(c.out.norm()).max(1e-300).ln() + c.log_scale;
        log_amp = log_amp.max(mag);
        layers.push(c);
    }
    let sol = ModeSolution {
        s,
        layers,
        log_amplification: log_amp,
    };
    // parametric condition estimate ~ amplification^2
    if 2.0 * log_amp > 1e12f64.ln() {
        return Err(Error::NumericalResonance {
            n,
            parity,
            condition: (2.0 * log_amp).exp(),
        });
    }
    Ok(sol)
}

/// Solve all modes up to `n_max` for a scene and incidence.
pub fn solve_modes(
    scene: &LayeredScene,
    incidence: &IncidentWave,
    n_max: u32,
) -> Result<ModalSolution> {
    scene.validate()?;
    if incidence.k != scene.background_k {
        return Err(Error::InvalidArgument(format!(
            "incidence k = {} does not match scene k = {}",
            incidence.k, scene.background_k
        )));
    }
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be >= 1".into()));
    }
    if n_max > N_CAP {
        return Err(Error::UnsupportedOrder(n_max));
    }
    let rotation = rotation_frame(incidence.direction, incidence.polarization)?;
    let mut te = Vec::with_capacity(n_max as usize);
    let mut tm = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        te.push(solve_mode(scene, n, Parity::Te)?);
        tm.push(solve_mode(scene, n, Parity::Tm)?);
    }
    Ok(ModalSolution {
        scene: scene.clone(),
        incidence: *incidence,
        n_max,
        rotation,
        te,
        tm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Shell;
    use approx::assert_relative_eq;

    fn zhat_xhat(k: f64) -> IncidentWave {
        IncidentWave::new([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], k).unwrap()
    }

    #[test]
    fn truncation_examples() {
        assert_eq!(truncation_order(2.0, 1.0, 8), 16);
        assert_eq!(truncation_order(1e-9, 1.0, 8), 9);
        for s in [0u32, 4, 8, 16] {
            assert!(truncation_order(2.0, 1.0, 2 * s) >= truncation_order(2.0, 1.0, s));
        }
        assert_eq!(truncation_order(1e6, 1.0, 8), N_CAP);
    }

    #[test]
    fn rotation_identity_and_properties() {
        let r = rotation_frame([0.0, 0.0, 1.0], [1.0, 0.0, 0.0]).unwrap();
        assert_eq!(r, Rotation::identity());
        let r = rotation_frame([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).unwrap();
        assert_eq!(r.apply([1.0, 0.0, 0.0]), [0.0, 0.0, 1.0]);
        assert_eq!(r.apply([0.0, 1.0, 0.0]), [1.0, 0.0, 0.0]);
        let d = [0.36, 0.48, 0.8];
        let p = [0.8, 0.0, -0.36];
        let p = crate::vec3::scale(p, 1.0 / norm(p));
        let r = rotation_frame(d, p).unwrap();
        assert!(r.orthogonality_defect() < 1e-14);
        assert_relative_eq!(r.det(), 1.0, max_relative = 1e-13);
        let dz = r.apply(d);
        assert!((dz[0].abs() + dz[1].abs() + (dz[2] - 1.0).abs()) < 1e-12);
    }

    #[test]
    fn rotation_rejects_bad_input() {
        assert!(rotation_frame([0.0, 0.0, 2.0], [1.0, 0.0, 0.0]).is_err());
        assert!(rotation_frame([0.0, 0.0, 1.0], [0.0, 0.1, 1.0]).is_err());
    }

    #[test]
    fn vacuum_scene_scatters_nothing() {
        let sc = LayeredScene::new(
            0.4,
            CoreKind::Penetrable(Material::vacuum()),
            vec![Shell {
                outer_radius: 0.8,
                material: Material::vacuum(),
            }],
            2.0,
            1.5,
        )
        .unwrap();
        let sol = solve_modes(&sc, &zhat_xhat(2.0), 10).unwrap();
        for n in 1..=10 {
            assert!(sol.s(n, Parity::Te).norm() < 1e-13);
            assert!(sol.s(n, Parity::Tm).norm() < 1e-13);
        }
    }

    #[test]
    fn unitarity_for_lossless_obstacle() {
        let sc = LayeredScene::new(
            1.0,
            CoreKind::Pec,
            vec![Shell {
                outer_radius: 1.5,
                material: Material::new(Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0))
                    .unwrap(),
            }],
            2.0,
            2.5,
        )
        .unwrap();
        let sol = solve_modes(&sc, &zhat_xhat(2.0), 14).unwrap();
        for n in 1..=14 {
            for p in [Parity::Te, Parity::Tm] {
                let s = sol.s(n, p);
                assert!(
                    ((Complex64::new(1.0, 0.0) + 2.0 * s).norm() - 1.0).abs() < 1e-9,
                    "unitarity violated at n={n} {p:?}"
                );
            }
        }
    }

    #[test]
    fn scattering_coefficients_decay() {
        let sc = LayeredScene::new(
            0.5,
            CoreKind::Pmc,
            vec![Shell {
                outer_radius: 1.0,
                material: Material::new(Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.5))
                    .unwrap(),
            }],
            2.0,
            1.5,
        )
        .unwrap();
        let n_max = truncation_order(2.0, 1.0, 8);
        let sol = solve_modes(&sc, &zhat_xhat(2.0), n_max).unwrap();
        let max_s = (1..=n_max)
            .flat_map(|n| [sol.s(n, Parity::Te).norm(), sol.s(n, Parity::Tm).norm()])
            .fold(0.0, f64::max);
        let tail = sol
            .s(n_max, Parity::Te)
            .norm()
            .max(sol.s(n_max, Parity::Tm).norm());
        assert!(tail <= 1e-10 * max_s, "tail {tail:.3e} vs max {max_s:.3e}");
    }

    #[test]
    fn mismatched_incidence_k_rejected() {
        let sc = LayeredScene::new(0.5, CoreKind::Pec, vec![], 2.0, 1.5).unwrap();
        assert!(solve_modes(&sc, &zhat_xhat(1.0), 4).is_err());
    }

    #[test]
    fn extreme_effective_core_stays_finite() {
        // realized PMC core at the smallest supported delta
        let params = crate::scene::DeltaParams::new(1e-8, 1.0, 1.0).unwrap();
        let sc = LayeredScene::new(
            0.5,
            CoreKind::Pmc,
            vec![Shell {
                outer_radius: 1.0,
                material: Material::new(Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.5))
                    .unwrap(),
            }],
            2.0,
            1.5,
        )
        .unwrap();
        let re = crate::scene::realize_scene(&sc, params).unwrap();
        let sol = solve_modes(&re, &zhat_xhat(2.0), 12).unwrap();
        for n in 1..=12 {
            for p in [Parity::Te, Parity::Tm] {
                let m = sol.mode(n, p);
                assert!(m.s.re.is_finite() && m.s.im.is_finite());
                for l in &m.layers {
                    assert!(l.reg.is_finite() && l.out.is_finite() && l.log_scale.is_finite());
                }
            }
        }
    }
}
