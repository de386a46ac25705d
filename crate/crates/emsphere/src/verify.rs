//! Verification harness: energy identity, weak-form residual,
//! delta-ladder convergence studies, rate fitting and the interior
//! estimate checks.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::calderon::{apply_ge, project_from_samples, synthesize};
use crate::fields::{
    ball_volume, eval_in_region, farfield_series, incident_e, incident_h, l2_s2_diff,
    region_l2, FarFieldSamples, NormRegion, RegionRef,
};
use crate::mie::{solve_modes, truncation_order, ModalSolution, Parity};
use crate::quad::{gauss_legendre, SphereQuadrature};
use crate::scene::{realize_scene, CoreKind, DeltaParams, IncidentWave, LayeredScene};
use crate::specfun::{riccati_seq_scaled, RiccatiKind};
use crate::vec3::{ccross_rc, cdot_conj, cscale, CVec3};
use crate::{Error, Result};

/// Both sides of the energy identity and their mismatch.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnergyBalance {
    /// `Re int_{dB_R} (nu x conj E) . H dsigma` of the total field,
    /// evaluated spectrally through the Calderon-sphere coefficients.
    pub flux: f64,
    /// `-k sum_regions (Im(eps)||E||^2 + Im(mu)||H||^2)`.
    pub absorption: f64,
    /// `|flux - absorption| / max(|flux|, |absorption|, scale)`.
    pub residual: f64,
}

fn angular_weight_w(n: u32) -> f64 {
    let nf = n as f64;
    2.0 * std::f64::consts::PI * nf * nf * (nf + 1.0) * (nf + 1.0) / (2.0 * nf + 1.0)
}

/// Energy identity of the total field: surface flux vs volume absorption.
///
/// For passive materials the flux is non-positive; it vanishes for
/// lossless scenes.
pub fn energy_identity_residual(sol: &ModalSolution) -> Result<EnergyBalance> {
    let scene = &sol.scene;
    let k = scene.background_k;
    let r = scene.calderon_radius;
    let rho = Complex64::new(k * r, 0.0);
    let (pv, pd, _) = riccati_seq_scaled(RiccatiKind::Psi, sol.n_max, rho)?;
    let (xv, xd, _) = riccati_seq_scaled(RiccatiKind::Xi, sol.n_max, rho)?;
    let mut flux = 0.0;
    for n in 1..=sol.n_max {
        let i = n as usize;
        let en2 = ((2 * n + 1) as f64 / (n * (n + 1)) as f64).powi(2);
        let ste = sol.s(n, Parity::Te);
        let stm = sol.s(n, Parity::Tm);
        let z_te = (pv[i] + ste * xv[i]) / rho;
        let w_te = (pd[i] + ste * xd[i]) / rho;
        let z_tm = (pv[i] + stm * xv[i]) / rho;
        let w_tm = (pd[i] + stm * xd[i]) / rho;
        flux += angular_weight_w(n) * en2 * (z_te.conj() * w_te - w_tm.conj() * z_tm).im;
    }
    flux *= r * r;

    let mut absorption = 0.0;
    let regions = scene.regions();
    let core_offset = usize::from(matches!(scene.core, CoreKind::Penetrable(_)));
    for (idx, (_, _, mat)) in regions.iter().enumerate() {
        if mat.eps_r.im == 0.0 && mat.mu_r.im == 0.0 {
            continue;
        }
        let region = if core_offset == 1 && idx == 0 {
            NormRegion::Core
        } else {
            NormRegion::Shell(idx - core_offset)
        };
        let l2 = region_l2(sol, region)?;
        absorption += -k * (mat.eps_r.im * l2.e_sq + mat.mu_r.im * l2.h_sq);
    }
    let scale = 4.0 * std::f64::consts::PI * r * r;
    let residual = (flux - absorption).abs() / flux.abs().max(absorption.abs()).max(scale);
    Ok(EnergyBalance {
        flux,
        absorption,
        residual,
    })
}

/// Test-field band limit for the weak form.
const PHI_N_MAX: u32 = 4;

struct CachedSolution {
    /// (point weight, E, curl E) at every volume node, plus point coords.
    nodes: Vec<([f64; 3], f64)>,
    e: Vec<CVec3>,
    curl: Vec<CVec3>,
    mu_inv: Vec<Complex64>,
    eps: Vec<Complex64>,
    /// surface quadrature at R, and there: G_e(xhat x U), G_e(xhat x E^i),
    /// xhat x curl E^i
    squad: SphereQuadrature,
    ge_u: Vec<CVec3>,
    ge_i: Vec<CVec3>,
    xci: Vec<CVec3>,
    u_norm: f64,
}

fn radial_nodes(a: f64, b: f64, k_mag: f64) -> Vec<(f64, f64)> {
    let panels = ((k_mag * (b - a) / 3.0) as usize + 2).max(2);
    let (xs, ws) = gauss_legendre(16);
    let mut out = Vec::with_capacity(panels * 16);
    for p in 0..panels {
        let pa = a + (b - a) * p as f64 / panels as f64;
        let pb = a + (b - a) * (p + 1) as f64 / panels as f64;
        let mid = 0.5 * (pa + pb);
        let half = 0.5 * (pb - pa);
        for (x, w) in xs.iter().zip(&ws) {
            out.push((mid + half * x, half * w));
        }
    }
    out
}

fn cache_solution(sol: &ModalSolution) -> Result<CachedSolution> {
    let scene = &sol.scene;
    let k = scene.background_k;
    let r_cal = scene.calderon_radius;
    let n_t = (sol.n_max as usize + PHI_N_MAX as usize + 8).max(16);
    let vol_quad = SphereQuadrature::new(n_t, 2 * n_t);
    let mut nodes = Vec::new();
    let mut e_vals = Vec::new();
    let mut curl_vals = Vec::new();
    let mut mu_inv = Vec::new();
    let mut eps = Vec::new();
    let mut u_norm_sq = 0.0;
    let mut chunks: Vec<(f64, f64, Complex64, Complex64, RegionRef)> = Vec::new();
    for (idx, (ri, ro, m)) in scene.regions().iter().enumerate() {
        chunks.push((*ri, *ro, m.mu_r, m.eps_r, RegionRef::Material(idx)));
    }
    chunks.push((
        scene.r_omega(),
        r_cal,
        Complex64::new(1.0, 0.0),
        Complex64::new(1.0, 0.0),
        RegionRef::Exterior,
    ));
    for (a, b, mu, ep, region) in chunks {
        let kj = k * (mu * ep).sqrt().norm();
        for (r, wr) in radial_nodes(a, b, kj) {
            if r == 0.0 {
                continue;
            }
            for (node, ws) in vol_quad.nodes.iter().zip(&vol_quad.weights) {
                let x = crate::vec3::scale(*node, r);
                let (e, h) = eval_in_region(sol, region, x, true)?;
                let curl = cscale(h, Complex64::new(0.0, k) * mu);
                let w = wr * ws * r * r;
                u_norm_sq += w * (crate::vec3::cnorm_sq(e) + crate::vec3::cnorm_sq(curl));
                nodes.push((x, w));
                e_vals.push(e);
                curl_vals.push(curl);
                mu_inv.push(1.0 / mu);
                eps.push(ep);
            }
        }
    }
    // surface data at the Calderon sphere
    let sq_n = (sol.n_max as usize * 2 + 8).max(2 * PHI_N_MAX as usize + 8);
    let squad = SphereQuadrature::new(sq_n, 2 * sq_n);
    let inc = &sol.incidence;
    let mut lam_u = Vec::with_capacity(squad.len());
    let mut lam_i = Vec::with_capacity(squad.len());
    let mut xci = Vec::with_capacity(squad.len());
    for node in &squad.nodes {
        let x = crate::vec3::scale(*node, r_cal);
        let (e, _) = eval_in_region(sol, RegionRef::Exterior, x, true)?;
        lam_u.push(ccross_rc(*node, e));
        lam_i.push(ccross_rc(*node, incident_e(inc, x)));
        // curl E^i = ik H^i
        let ci = cscale(incident_h(inc, x), Complex64::new(0.0, k));
        xci.push(ccross_rc(*node, ci));
    }
    let nm = sol.n_max.max(PHI_N_MAX);
    let ge_u = synthesize(
        &apply_ge(&project_from_samples(&lam_u, &squad, r_cal, nm)?, k, r_cal)?,
        &squad,
    )?;
    let ge_i = synthesize(
        &apply_ge(&project_from_samples(&lam_i, &squad, r_cal, nm)?, k, r_cal)?,
        &squad,
    )?;
    Ok(CachedSolution {
        nodes,
        e: e_vals,
        curl: curl_vals,
        mu_inv,
        eps,
        squad,
        ge_u,
        ge_i,
        xci,
        u_norm: u_norm_sq.sqrt(),
    })
}

/// Residual of the variational identity `M(U, Phi) = F(Phi)` for `n_tests`
/// seeded pseudo-random smooth test fields built from regular modes up to
/// order four; returns the largest relative residual.
///
/// Supports penetrable-core scenes (the medium problem) and PMC obstacles
/// (whose boundary term vanishes naturally); a PEC obstacle would constrain
/// the test space and is rejected.
pub fn weak_form_residual(sol: &ModalSolution, n_tests: u32, seed: u64) -> Result<f64> {
    if matches!(sol.scene.core, CoreKind::Pec) {
        return Err(Error::Precondition(
            "weak-form residual needs a penetrable or PMC core".into(),
        ));
    }
    let cache = cache_solution(sol)?;
    let k = sol.scene.background_k;
    let r_cal = sol.scene.calderon_radius;
    let ik = Complex64::new(0.0, k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n_tests.max(1) {
        let mut gamma = Vec::new();
        for _ in 0..PHI_N_MAX {
            let te = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            let tm = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            gamma.push((te, tm));
        }
        let coeff = |n: u32, p: Parity| -> (Complex64, Complex64, f64) {
            if (1..=PHI_N_MAX).contains(&n) {
                let g = gamma[(n - 1) as usize];
                let c = match p {
                    Parity::Te => g.0,
                    Parity::Tm => g.1,
                };
                (c, Complex64::new(0.0, 0.0), 0.0)
            } else {
                (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.0)
            }
        };
        let phi_at = |x: [f64; 3]| -> Result<(CVec3, CVec3)> {
            let (e, h) = crate::fields::eval_modes_frame(
                PHI_N_MAX,
                coeff,
                Complex64::new(k, 0.0),
                Complex64::new(1.0, 0.0),
                x,
            )?;
            Ok((e, cscale(h, ik)))
        };
        // volume term and the test-field norm
        let mut m_vol = Complex64::new(0.0, 0.0);
        let mut phi_norm_sq = 0.0;
        for (i, (x, w)) in cache.nodes.iter().enumerate() {
            let (phi, curl_phi) = phi_at(*x)?;
            m_vol += *w
                * (cache.mu_inv[i] * cdot_conj(cache.curl[i], curl_phi)
                    - k * k * cache.eps[i] * cdot_conj(cache.e[i], phi));
            phi_norm_sq +=
                *w * (crate::vec3::cnorm_sq(phi) + crate::vec3::cnorm_sq(curl_phi));
        }
        // surface terms
        let mut s_u = Complex64::new(0.0, 0.0);
        let mut s_i = Complex64::new(0.0, 0.0);
        let mut s_c = Complex64::new(0.0, 0.0);
        for (i, (node, w)) in cache
            .squad
            .nodes
            .iter()
            .zip(&cache.squad.weights)
            .enumerate()
        {
            let x = crate::vec3::scale(*node, r_cal);
            let (phi, _) = phi_at(x)?;
            let w2 = w * r_cal * r_cal;
            s_u += w2 * cdot_conj(cache.ge_u[i], phi);
            s_i += w2 * cdot_conj(cache.ge_i[i], phi);
            s_c += w2 * cdot_conj(cache.xci[i], phi);
        }
        let m = m_vol + ik * s_u;
        let f = ik * s_i - s_c;
        let resid = (m - f).norm() / (cache.u_norm * phi_norm_sq.sqrt()).max(1e-300);
        worst = worst.max(resid);
    }
    Ok(worst)
}

/// Least-squares slope and intercept of `log y` against `log x`.
pub fn fit_rate(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::InvalidArgument(
            "rate fit needs at least 3 matching points".into(),
        ));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidArgument(
            "rate fit needs strictly positive data".into(),
        ));
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Result of one delta-ladder convergence study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub kind: crate::scene::ObstacleKind,
    pub deltas: Vec<f64>,
    /// `||E_inf(delta) - E_inf(obstacle)||_{L2(S^2)}` per delta.
    pub far_errs: Vec<f64>,
    pub core_hcurl: Vec<f64>,
    pub outside_hcurl: Vec<f64>,
    pub energy_residuals: Vec<f64>,
    /// Weak-form residuals at the coarsest and finest delta.
    pub weak_form_first: f64,
    pub weak_form_last: f64,
    pub fitted_slope: f64,
    pub fitted_log_c: f64,
    /// `(1 + k) sqrt(|B_R|)`: the incident-data norm proxy for a unit wave.
    pub incident_scale: f64,
}

impl ConvergenceReport {
    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)
            .map_err(|e| Error::Config(format!("report serialization failed: {e}")))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "delta,far_err,core_hcurl,outside_hcurl")?;
        for i in 0..self.deltas.len() {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e}",
                self.deltas[i], self.far_errs[i], self.core_hcurl[i], self.outside_hcurl[i]
            )?;
        }
        Ok(())
    }

    /// Bound form of the square-root error law: every far error lies under
    /// `exp(fitted_log_c) * sqrt(delta) * incident_scale`.
    pub fn bound_form_holds(&self) -> bool {
        self.fitted_log_c.is_finite()
            && self
                .deltas
                .iter()
                .zip(&self.far_errs)
                .all(|(d, e)| *e <= self.fitted_log_c.exp() * d.sqrt() * self.incident_scale)
    }

    pub fn far_errs_strictly_decreasing(&self) -> bool {
        self.far_errs.windows(2).all(|w| w[1] < w[0])
    }
}

/// Options for the ladder study.
#[derive(Debug, Clone, Copy)]
pub struct LadderOptions {
    pub n_max: Option<u32>,
    pub quad_order: Option<usize>,
    pub weak_form_tests: u32,
    pub seed: u64,
}

impl Default for LadderOptions {
    fn default() -> Self {
        LadderOptions {
            n_max: None,
            quad_order: None,
            weak_form_tests: 3,
            seed: 7,
        }
    }
}

/// Solve the obstacle scene and each effective realization along the
/// delta ladder; collect far-field errors, interior/exterior norms and
/// the fitted convergence rate.
pub fn delta_ladder_study(
    scene_obstacle: &LayeredScene,
    incidence: &IncidentWave,
    deltas: &[f64],
    eta0: f64,
    tau0: f64,
    opts: LadderOptions,
) -> Result<ConvergenceReport> {
    let kind = match scene_obstacle.core {
        CoreKind::Pec => crate::scene::ObstacleKind::Pec,
        CoreKind::Pmc => crate::scene::ObstacleKind::Pmc,
        CoreKind::Penetrable(_) => {
            return Err(Error::Precondition(
                "ladder study needs a PEC or PMC core".into(),
            ))
        }
    };
    if deltas.len() < 2 || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "deltas must be strictly decreasing".into(),
        ));
    }
    let k = scene_obstacle.background_k;
    let n_max = opts
        .n_max
        .unwrap_or_else(|| truncation_order(k, scene_obstacle.r_omega(), 8));
    let quad = match opts.quad_order {
        Some(q) => SphereQuadrature::new(q, 2 * q),
        None => SphereQuadrature::for_band_limit(n_max),
    };
    let sol_obs = solve_modes(scene_obstacle, incidence, n_max)?;
    let einf_obs = farfield_series(&sol_obs, &quad)?;
    let mut far_errs = Vec::new();
    let mut core_h = Vec::new();
    let mut out_h = Vec::new();
    let mut energy = Vec::new();
    let mut weak_first = 0.0;
    let mut weak_last = 0.0;
    for (i, &d) in deltas.iter().enumerate() {
        let params = DeltaParams::new(d, eta0, tau0)
            .map_err(|e| Error::Range(format!("delta = {d}: {e}")))?;
        let realized = realize_scene(scene_obstacle, params)?;
        let sol = solve_modes(&realized, incidence, n_max)
            .map_err(|e| Error::Range(format!("solve at delta = {d} failed: {e}")))?;
        let einf: FarFieldSamples = farfield_series(&sol, &quad)?;
        far_errs.push(l2_s2_diff(&einf, &einf_obs)?);
        let core = region_l2(&sol, NormRegion::Core)?;
        core_h.push((core.e_sq + core.curl_sq).sqrt());
        let mut outside_sq = 0.0;
        for j in 0..realized.shells.len() {
            let s = region_l2(&sol, NormRegion::Shell(j))?;
            outside_sq += s.e_sq + s.curl_sq;
        }
        let a = region_l2(&sol, NormRegion::Annulus)?;
        outside_sq += a.e_sq + a.curl_sq;
        out_h.push(outside_sq.sqrt());
        energy.push(energy_identity_residual(&sol)?.residual);
        if i == 0 {
            weak_first = weak_form_residual(&sol, opts.weak_form_tests, opts.seed)?;
        }
        if i == deltas.len() - 1 {
            weak_last = weak_form_residual(&sol, opts.weak_form_tests, opts.seed)?;
        }
    }
    let (slope, log_c) = fit_rate(deltas, &far_errs)?;
    let incident_scale = (1.0 + k) * ball_volume(scene_obstacle.calderon_radius).sqrt();
    Ok(ConvergenceReport {
        kind,
        deltas: deltas.to_vec(),
        far_errs,
        core_hcurl: core_h,
        outside_hcurl: out_h,
        energy_residuals: energy,
        weak_form_first: weak_first,
        weak_form_last: weak_last,
        fitted_slope: slope,
        fitted_log_c: log_c,
        incident_scale,
    })
}

/// Diagnostic outcome of the interior-estimate checks.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InteriorCheck {
    pub pass: bool,
    /// max/min of `sqrt(delta) * core` (PMC) or `core / sqrt(delta)` (PEC).
    pub core_ratio: f64,
    /// max/min of the outside norm across the ladder.
    pub outside_ratio: f64,
    pub core_decreasing: bool,
}

/// Check the interior estimates along a ladder: the scaled core norm must
/// stay uniformly bounded (max/min <= 10) and the outside norm must vary
/// by at most a factor 2.
pub fn interior_estimate_check(
    report: &ConvergenceReport,
    kind: crate::scene::ObstacleKind,
) -> InteriorCheck {
    let scaled: Vec<f64> = report
        .deltas
        .iter()
        .zip(&report.core_hcurl)
        .map(|(d, c)| match kind {
            crate::scene::ObstacleKind::Pmc => d.sqrt() * c / report.incident_scale,
            crate::scene::ObstacleKind::Pec => c / d.sqrt() / report.incident_scale,
        })
        .collect();
    let rmax = scaled.iter().cloned().fold(f64::MIN, f64::max);
    let rmin = scaled.iter().cloned().fold(f64::MAX, f64::min);
    let omax = report.outside_hcurl.iter().cloned().fold(f64::MIN, f64::max);
    let omin = report.outside_hcurl.iter().cloned().fold(f64::MAX, f64::min);
    let core_ratio = rmax / rmin;
    let outside_ratio = omax / omin;
    let core_decreasing = report.core_hcurl.windows(2).all(|w| w[1] < w[0]);
    InteriorCheck {
        pass: core_ratio <= 10.0 && outside_ratio <= 2.0,
        core_ratio,
        outside_ratio,
        core_decreasing,
    }
}
