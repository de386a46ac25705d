//! Pointwise field evaluation, far-field patterns by two independent
//! routes, and the region norms used by the verification harness.
//!
//! Far-field route one synthesizes the pattern from the scattering
//! coefficients and the angular functions; route two evaluates the
//! Stratton-Chu surface integral
//!
//! ```text
//! E_inf(x) = (ik/4pi) x cross int { nu cross E^s + (nu cross H^s) cross x } e^{-ik x.y} dsigma(y)
//! ```
//!
//! over any sphere strictly outside the obstacle. The two routes share no
//! code beyond the modal coefficients, so their agreement checks the whole
//! synthesis chain.

use num_complex::Complex64;
use std::io::Write;

use crate::mie::{ModalSolution, Parity};
use crate::quad::{integrate_gk, SphereQuadrature};
use crate::scene::{CoreKind, IncidentWave, Material};
use crate::specfun::{mie_angular_seq, riccati_seq_scaled, RiccatiKind};
use crate::vec3::{ccross_rc, cnorm_sq, cscale, czero, CVec3, Vec3};
use crate::{Error, Result};

/// Which field to evaluate at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldRegion {
    /// Total field: interior fields inside the scatterer, incident plus
    /// scattered outside.
    Total,
    /// Scattered field only; defined outside the obstacle.
    Scattered,
}

/// Far-field samples on a direction quadrature.
#[derive(Debug, Clone)]
pub struct FarFieldSamples {
    pub directions: Vec<Vec3>,
    /// Solid-angle weights, summing to 4 pi.
    pub weights: Vec<f64>,
    pub values: Vec<CVec3>,
}

impl FarFieldSamples {
    /// CSV rows: theta, phi, weight, Re/Im of the three Cartesian components.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "theta,phi,weight,re_ex,im_ex,re_ey,im_ey,re_ez,im_ez")?;
        for (d, (wt, v)) in self
            .directions
            .iter()
            .zip(self.weights.iter().zip(&self.values))
        {
            let theta = d[2].clamp(-1.0, 1.0).acos();
            let phi = d[1].atan2(d[0]);
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                theta, phi, wt, v[0].re, v[0].im, v[1].re, v[1].im, v[2].re, v[2].im
            )?;
        }
        Ok(())
    }
}

/// `sqrt( sum_i w_i |f_i|^2 )`.
pub fn l2_s2_norm(f: &FarFieldSamples) -> f64 {
    f.weights
        .iter()
        .zip(&f.values)
        .map(|(w, v)| w * cnorm_sq(*v))
        .sum::<f64>()
        .sqrt()
}

/// L2(S^2) norm of the difference of two sample sets on the same quadrature.
pub fn l2_s2_diff(a: &FarFieldSamples, b: &FarFieldSamples) -> Result<f64> {
    if a.directions.len() != b.directions.len() {
        return Err(Error::InvalidArgument(
            "far-field sample sets use different quadratures".into(),
        ));
    }
    Ok(a
        .weights
        .iter()
        .zip(a.values.iter().zip(&b.values))
        .map(|(w, (x, y))| {
            w * ((x[0] - y[0]).norm_sqr() + (x[1] - y[1]).norm_sqr() + (x[2] - y[2]).norm_sqr())
        })
        .sum::<f64>()
        .sqrt())
}

/// Incident plane-wave fields at a lab point.
pub fn incident_e(inc: &IncidentWave, x: Vec3) -> CVec3 {
    let phase = Complex64::new(0.0, inc.k * crate::vec3::dot(x, inc.direction)).exp();
    cscale(crate::vec3::from_real(inc.polarization), phase)
}

pub fn incident_h(inc: &IncidentWave, x: Vec3) -> CVec3 {
    let phase = Complex64::new(0.0, inc.k * crate::vec3::dot(x, inc.direction)).exp();
    cscale(crate::vec3::from_real(inc.magnetic_polarization()), phase)
}

/// Where a radius falls inside the scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RegionRef {
    /// Index into `scene.regions()`.
    Material(usize),
    Exterior,
}

pub(crate) fn classify(sol: &ModalSolution, r: f64) -> Result<RegionRef> {
    let scene = &sol.scene;
    for ri in scene.interface_radii() {
        if (r - ri).abs() <= 1e-12 * ri.max(1.0) {
            return Err(Error::AmbiguousRegion(r));
        }
    }
    if r > scene.r_omega() {
        return Ok(RegionRef::Exterior);
    }
    if r < scene.core_radius && scene.core.is_obstacle() {
        return Err(Error::InvalidArgument(format!(
            "point at radius {r} lies inside the impenetrable core"
        )));
    }
    for (i, (ri, ro, _)) in scene.regions().iter().enumerate() {
        if *ri <= r && r <= *ro {
            return Ok(RegionRef::Material(i));
        }
    }
    Err(Error::InvalidArgument(format!("radius {r} unclassifiable")))
}

fn i_pow(n: u32) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Evaluate (E, H) of the modal sum in one region at a frame point.
///
/// `coeff(n, parity)` returns the (regular, outgoing, log_scale) mixture for
/// the region; `kj`, `z_rel` are the region wavenumber and admittance.
pub(crate) fn eval_modes_frame<F>(
    n_max: u32,
    coeff: F,
    kj: Complex64,
    z_rel: Complex64,
    x: Vec3,
) -> Result<(CVec3, CVec3)>
where
    F: Fn(u32, Parity) -> (Complex64, Complex64, f64),
{
    let r = crate::vec3::norm(x);
    if r == 0.0 {
        return Err(Error::InvalidArgument(
            "field evaluation at the origin is not supported".into(),
        ));
    }
    let xhat = crate::vec3::scale(x, 1.0 / r);
    let ct = xhat[2].clamp(-1.0, 1.0);
    let st = (1.0 - ct * ct).sqrt();
    let phi = xhat[1].atan2(xhat[0]);
    let (cphi, sphi) = (phi.cos(), phi.sin());
    let th_hat = [ct * cphi, ct * sphi, -st];
    let ph_hat = [-sphi, cphi, 0.0];
    let rho = kj * r;
    let (pv, pd, lsp) = riccati_seq_scaled(RiccatiKind::Psi, n_max, rho)?;
    let (xv, xd, lsx) = riccati_seq_scaled(RiccatiKind::Xi, n_max, rho)?;
    let (pi, tau) = mie_angular_seq(n_max, ct)?;
    let mut e = czero();
    let mut h = czero();
    for n in 1..=n_max {
        let i = n as usize;
        let nn1 = (n * (n + 1)) as f64;
        let en = i_pow(n) * ((2 * n + 1) as f64 / nn1);
        let (pin, taun) = (pi[i - 1], tau[i - 1]);
        for parity in [Parity::Te, Parity::Tm] {
            let (reg, out, lsc) = coeff(n, parity);
            if reg.norm() == 0.0 && out.norm() == 0.0 {
                continue;
            }
            let m1 = lsp + lsc;
            let m2 = lsx + lsc;
            let mm = m1.max(m2);
            if mm > 700.0 {
                return Err(Error::Range(format!(
                    "field synthesis overflow at n={n}: log-scale {mm:.1}"
                )));
            }
            let sc = mm.exp();
            let zeta = (reg * pv[i] * (m1 - mm).exp() + out * xv[i] * (m2 - mm).exp()) * sc;
            let dzeta = (reg * pd[i] * (m1 - mm).exp() + out * xd[i] * (m2 - mm).exp()) * sc;
            let zn = zeta / rho;
            let dzn = dzeta / rho;
            match parity {
                Parity::Te => {
                    // E gets M_o1n, H gets -i Z N_o1n
                    let m_ang = |v: &mut CVec3| {
                        for c in 0..3 {
                            v[c] += en * zn * (cphi * pin * th_hat[c] - sphi * taun * ph_hat[c]);
                        }
                    };
                    m_ang(&mut e);
                    let pref = en * Complex64::new(0.0, -1.0) * z_rel;
                    let nrad = nn1 * (zn / rho) * st * pin * sphi;
                    for c in 0..3 {
                        h[c] += pref
                            * (nrad * xhat[c]
                                + dzn * (sphi * taun * th_hat[c] + cphi * pin * ph_hat[c]));
                    }
                }
                Parity::Tm => {
                    // E gets -i N_e1n, H gets -Z M_e1n
                    let pref = en * Complex64::new(0.0, -1.0);
                    let nrad = nn1 * (zn / rho) * st * pin * cphi;
                    for c in 0..3 {
                        e[c] += pref
                            * (nrad * xhat[c]
                                + dzn * (cphi * taun * th_hat[c] - sphi * pin * ph_hat[c]));
                    }
                    let prefh = en * (-z_rel);
                    for c in 0..3 {
                        h[c] += prefh * zn * (-(sphi * pin * th_hat[c] + cphi * taun * ph_hat[c]));
                    }
                }
            }
        }
    }
    Ok((e, h))
}

pub(crate) fn eval_in_region(
    sol: &ModalSolution,
    region: RegionRef,
    x_lab: Vec3,
    add_incident: bool,
) -> Result<(CVec3, CVec3)> {
    let xf = sol.rotation.apply(x_lab);
    let k = sol.scene.background_k;
    let (e_f, h_f) = match region {
        RegionRef::Exterior => {
            let (mut e, mut h) = eval_modes_frame(
                sol.n_max,
                |n, p| (Complex64::new(0.0, 0.0), sol.s(n, p), 0.0),
                Complex64::new(k, 0.0),
                Complex64::new(1.0, 0.0),
                xf,
            )?;
            if add_incident {
                let phase = Complex64::new(0.0, k * xf[2]).exp();
                e[0] += phase;
                h[1] += phase;
            }
            (e, h)
        }
        RegionRef::Material(idx) => {
            let (_, _, mat) = sol.scene.regions()[idx];
            eval_modes_frame(
                sol.n_max,
                |n, p| {
                    let c = sol.mode(n, p).layers[idx];
                    (c.reg, c.out, c.log_scale)
                },
                mat.wavenumber(k),
                mat.admittance(),
                xf,
            )?
        }
    };
    Ok((
        sol.rotation.apply_transpose_c(e_f),
        sol.rotation.apply_transpose_c(h_f),
    ))
}

fn eval_eh(sol: &ModalSolution, x: Vec3, which: FieldRegion) -> Result<(CVec3, CVec3)> {
    let r = crate::vec3::norm(x);
    match which {
        FieldRegion::Scattered => {
            if r <= sol.scene.r_omega() * (1.0 + 1e-12) {
                return Err(Error::InvalidArgument(format!(
                    "scattered field requested at radius {r} inside the obstacle radius {}",
                    sol.scene.r_omega()
                )));
            }
            eval_in_region(sol, RegionRef::Exterior, x, false)
        }
        FieldRegion::Total => {
            let region = classify(sol, r)?;
            eval_in_region(sol, region, x, true)
        }
    }
}

/// Electric field at a lab-frame point.
pub fn eval_e(sol: &ModalSolution, x: Vec3, which: FieldRegion) -> Result<CVec3> {
    Ok(eval_eh(sol, x, which)?.0)
}

/// Magnetic field at a lab-frame point (`H = (ik mu_r)^(-1) curl E`).
pub fn eval_h(sol: &ModalSolution, x: Vec3, which: FieldRegion) -> Result<CVec3> {
    Ok(eval_eh(sol, x, which)?.1)
}

fn series_sums(sol: &ModalSolution, ct: f64) -> Result<(Complex64, Complex64)> {
    let (pi, tau) = mie_angular_seq(sol.n_max, ct)?;
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut s2 = Complex64::new(0.0, 0.0);
    for n in 1..=sol.n_max {
        let cn = (2 * n + 1) as f64 / (n * (n + 1)) as f64;
        let ste = sol.s(n, Parity::Te);
        let stm = sol.s(n, Parity::Tm);
        let (p, t) = (pi[n as usize - 1], tau[n as usize - 1]);
        s2 += cn * (ste * p + stm * t);
        s1 += cn * (ste * t + stm * p);
    }
    Ok((s1, s2))
}

fn frame_angles(sol: &ModalSolution, dir_lab: Vec3) -> (Vec3, f64, f64, f64) {
    let d = sol.rotation.apply(dir_lab);
    let ct = d[2].clamp(-1.0, 1.0);
    let phi = d[1].atan2(d[0]);
    (d, ct, phi.cos(), phi.sin())
}

/// Electric far field synthesized from the scattering coefficients.
pub fn farfield_series(sol: &ModalSolution, quad: &SphereQuadrature) -> Result<FarFieldSamples> {
    let k = sol.scene.background_k;
    let mut values = Vec::with_capacity(quad.len());
    for dir in &quad.nodes {
        let (_, ct, cphi, sphi) = frame_angles(sol, *dir);
        let st = (1.0 - ct * ct).sqrt();
        let th_hat = [ct * cphi, ct * sphi, -st];
        let ph_hat = [-sphi, cphi, 0.0];
        let (s1, s2) = series_sums(sol, ct)?;
        let pref = Complex64::new(0.0, -1.0 / k);
        let mut v = czero();
        for c in 0..3 {
            v[c] = pref * (cphi * s2 * th_hat[c] - sphi * s1 * ph_hat[c]);
        }
        values.push(sol.rotation.apply_transpose_c(v));
    }
    Ok(FarFieldSamples {
        directions: quad.nodes.clone(),
        weights: quad.weights.clone(),
        values,
    })
}

/// Magnetic far field from the modal magnetic series (independent of the
/// electric route; used to check `H_inf = xhat cross E_inf`).
pub fn farfield_series_h(sol: &ModalSolution, quad: &SphereQuadrature) -> Result<FarFieldSamples> {
    let k = sol.scene.background_k;
    let mut values = Vec::with_capacity(quad.len());
    for dir in &quad.nodes {
        let (_, ct, cphi, sphi) = frame_angles(sol, *dir);
        let st = (1.0 - ct * ct).sqrt();
        let th_hat = [ct * cphi, ct * sphi, -st];
        let ph_hat = [-sphi, cphi, 0.0];
        let (s1, s2) = series_sums(sol, ct)?;
        let pref = Complex64::new(0.0, -1.0 / k);
        let mut v = czero();
        for c in 0..3 {
            v[c] = pref * (sphi * s1 * th_hat[c] + cphi * s2 * ph_hat[c]);
        }
        values.push(sol.rotation.apply_transpose_c(v));
    }
    Ok(FarFieldSamples {
        directions: quad.nodes.clone(),
        weights: quad.weights.clone(),
        values,
    })
}

/// Electric far field from the Stratton-Chu surface integral over the
/// sphere of radius `r_surf` (strictly outside the obstacle), sampled at
/// the directions of `out_quad`.
pub fn farfield_stratton_chu(
    sol: &ModalSolution,
    r_surf: f64,
    out_quad: &SphereQuadrature,
) -> Result<FarFieldSamples> {
    let scene = &sol.scene;
    let k = scene.background_k;
    if r_surf <= scene.r_omega() {
        return Err(Error::InvalidArgument(format!(
            "surface radius {r_surf} must lie strictly outside the obstacle radius {}",
            scene.r_omega()
        )));
    }
    // surface rule dense enough for the plane-wave factor times the modal
    // band limit
    let n_t = (sol.n_max as usize + (k * r_surf).ceil() as usize + 12).max(16);
    let surf = SphereQuadrature::new(n_t, 2 * n_t);
    let mut nx_e = Vec::with_capacity(surf.len());
    let mut nx_h = Vec::with_capacity(surf.len());
    for node in &surf.nodes {
        let y = crate::vec3::scale(*node, r_surf);
        let (e, h) = eval_in_region(sol, RegionRef::Exterior, y, false)?;
        nx_e.push(ccross_rc(*node, e));
        nx_h.push(ccross_rc(*node, h));
    }
    let mut values = Vec::with_capacity(out_quad.len());
    for xhat in &out_quad.nodes {
        let mut acc = czero();
        for (i, node) in surf.nodes.iter().enumerate() {
            let phase =
                Complex64::new(0.0, -k * r_surf * crate::vec3::dot(*node, *xhat)).exp();
            let hx = [
                nx_h[i][1] * xhat[2] - nx_h[i][2] * xhat[1],
                nx_h[i][2] * xhat[0] - nx_h[i][0] * xhat[2],
                nx_h[i][0] * xhat[1] - nx_h[i][1] * xhat[0],
            ];
            let w = surf.weights[i] * r_surf * r_surf;
            for c in 0..3 {
                acc[c] += phase * w * (nx_e[i][c] + hx[c]);
            }
        }
        let pref = Complex64::new(0.0, k / (4.0 * std::f64::consts::PI));
        let v = ccross_rc(*xhat, acc);
        values.push(cscale(v, pref));
    }
    Ok(FarFieldSamples {
        directions: out_quad.nodes.clone(),
        weights: out_quad.weights.clone(),
        values,
    })
}

/// A radial region of the scene for norm computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormRegion {
    Core,
    Shell(usize),
    /// The vacuum annulus between the obstacle and the Calderon sphere.
    Annulus,
}

pub(crate) struct RegionL2 {
    pub e_sq: f64,
    pub curl_sq: f64,
    pub h_sq: f64,
}

fn angular_weight_w(n: u32) -> f64 {
    let nf = n as f64;
    2.0 * std::f64::consts::PI * nf * nf * (nf + 1.0) * (nf + 1.0) / (2.0 * nf + 1.0)
}

fn angular_weight_v(n: u32) -> f64 {
    let nf = n as f64;
    2.0 * std::f64::consts::PI * nf.powi(3) * (nf + 1.0).powi(3) / (2.0 * nf + 1.0)
}

/// Radial mixture integrals for one mode over [a, b]:
/// `(int |zeta/rho|^2 r^2, int |zeta/rho^2|^2 r^2, int |zeta'/rho|^2 r^2)`.
fn mixture_integrals(
    n: u32,
    kj: Complex64,
    a: f64,
    b: f64,
    reg: Complex64,
    out: Complex64,
    lsc: f64,
) -> Result<(f64, f64, f64)> {
    let i = n as usize;
    let panels = ((kj.norm() * (b - a) / 3.0) as usize + 2).max(2);
    let mut failed = None;
    let mut eval = |r: f64, pick: u8| -> f64 {
        let rho = kj * r;
        let both = (|| -> Result<(Complex64, Complex64)> {
            let (pv, pd, lsp) = riccati_seq_scaled(RiccatiKind::Psi, n, rho)?;
            let (xv, xd, lsx) = riccati_seq_scaled(RiccatiKind::Xi, n, rho)?;
            let m1 = lsp + lsc;
            let m2 = lsx + lsc;
            let mm = m1.max(m2).min(700.0);
            let sc = mm.exp();
            let zeta = (reg * pv[i] * (m1 - mm).exp() + out * xv[i] * (m2 - mm).exp()) * sc;
            let dzeta = (reg * pd[i] * (m1 - mm).exp() + out * xd[i] * (m2 - mm).exp()) * sc;
            Ok((zeta, dzeta))
        })();
        match both {
            Ok((zeta, dzeta)) => {
                let rho2 = rho.norm_sqr();
                match pick {
                    0 => zeta.norm_sqr() / rho2 * r * r,
                    1 => zeta.norm_sqr() / (rho2 * rho2) * r * r,
                    _ => dzeta.norm_sqr() / rho2 * r * r,
                }
            }
            Err(e) => {
                failed = Some(e);
                0.0
            }
        }
    };
    let im = integrate_gk(|r| eval(r, 0), a, b, 1e-9, panels);
    let inr = integrate_gk(|r| eval(r, 1), a, b, 1e-9, panels);
    let int = integrate_gk(|r| eval(r, 2), a, b, 1e-9, panels);
    if let Some(e) = failed {
        return Err(e);
    }
    Ok((im, inr, int))
}

pub(crate) fn region_l2(sol: &ModalSolution, region: NormRegion) -> Result<RegionL2> {
    let scene = &sol.scene;
    let regions = scene.regions();
    let core_offset = usize::from(matches!(scene.core, CoreKind::Penetrable(_)));
    let (a, b, mat, coeff_idx): (f64, f64, Material, Option<usize>) = match region {
        NormRegion::Core => match scene.core {
            CoreKind::Penetrable(m) => (0.0, scene.core_radius, m, Some(0)),
            _ => {
                return Err(Error::Precondition(
                    "core norm requested for an impenetrable core".into(),
                ))
            }
        },
        NormRegion::Shell(j) => {
            let idx = core_offset + j;
            if idx >= regions.len() {
                return Err(Error::InvalidArgument(format!("no shell {j} in scene")));
            }
            let (ri, ro, m) = regions[idx];
            (ri, ro, m, Some(idx))
        }
        NormRegion::Annulus => (
            scene.r_omega(),
            scene.calderon_radius,
            Material::vacuum(),
            None,
        ),
    };
    let k = scene.background_k;
    let kj = mat.wavenumber(k);
    let z2 = mat.admittance().norm_sqr();
    let kj2 = kj.norm_sqr();
    let mut out = RegionL2 {
        e_sq: 0.0,
        curl_sq: 0.0,
        h_sq: 0.0,
    };
    for n in 1..=sol.n_max {
        let en2 = ((2 * n + 1) as f64 / (n * (n + 1)) as f64).powi(2);
        let (te, tm) = match coeff_idx {
            Some(idx) => {
                let a_ = sol.mode(n, Parity::Te).layers[idx];
                let b_ = sol.mode(n, Parity::Tm).layers[idx];
                ((a_.reg, a_.out, a_.log_scale), (b_.reg, b_.out, b_.log_scale))
            }
            None => (
                (Complex64::new(1.0, 0.0), sol.s(n, Parity::Te), 0.0),
                (Complex64::new(1.0, 0.0), sol.s(n, Parity::Tm), 0.0),
            ),
        };
        let (im_te, inr_te, int_te) = mixture_integrals(n, kj, a, b, te.0, te.1, te.2)?;
        let (im_tm, inr_tm, int_tm) = mixture_integrals(n, kj, a, b, tm.0, tm.1, tm.2)?;
        let w = angular_weight_w(n);
        let v = angular_weight_v(n);
        out.e_sq += en2 * (w * im_te + v * inr_tm + w * int_tm);
        out.curl_sq += kj2 * en2 * (v * inr_te + w * int_te + w * im_tm);
        out.h_sq += z2 * en2 * (w * im_tm + v * inr_te + w * int_te);
    }
    Ok(out)
}

/// `(||E||^2_{L2} + ||curl E||^2_{L2})^(1/2)` of the total field over a
/// radial region, via angular orthogonality and radial quadrature.
pub fn hcurl_norm(sol: &ModalSolution, region: NormRegion) -> Result<f64> {
    let l2 = region_l2(sol, region)?;
    Ok((l2.e_sq + l2.curl_sq).sqrt())
}

/// Incident-field L2 quantities over a ball of radius R for a unit plane
/// wave: `||E^i|| = ||H^i|| = sqrt(|B_R|)` and `||curl E^i|| = k sqrt(|B_R|)`.
pub fn ball_volume(radius: f64) -> f64 {
    4.0 / 3.0 * std::f64::consts::PI * radius.powi(3)
}
