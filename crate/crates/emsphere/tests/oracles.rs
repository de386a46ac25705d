//! Frozen high-precision reference values and independent re-derivations
//! of the modal coefficients.
//!
//! The fixture file carries values computed with 50-digit arithmetic from
//! closed forms (ascending series for j_n, the finite Hankel sum for xi_n,
//! Cramer solves of the per-mode interface systems). The in-test oracle
//! below re-assembles and solves the same 2x2 systems directly from raw
//! Riccati values, independent of the solver's transfer-matrix path.

use num_complex::Complex64;
use serde_json::Value;

use emsphere::mie::{solve_modes, Parity};
use emsphere::scene::{CoreKind, IncidentWave, LayeredScene, Material};
use emsphere::specfun::{
    mie_angular, riccati, sph_bessel_j, sph_hankel1, RiccatiKind,
};

fn fixtures() -> Value {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/coefficients.json"
    ))
    .expect("fixture file");
    serde_json::from_str(&text).expect("fixture json")
}

fn cx(v: &Value) -> Complex64 {
    let re: f64 = v[0].as_str().unwrap().parse().unwrap();
    let im: f64 = v[1].as_str().unwrap().parse().unwrap();
    Complex64::new(re, im)
}

fn assert_close(a: Complex64, b: Complex64, rel: f64, what: &str) {
    let scale = b.norm().max(1e-300);
    assert!(
        (a - b).norm() <= rel * scale,
        "{what}: {a} vs {b} (rel {:.3e})",
        (a - b).norm() / scale
    );
}

fn zhat_xhat(k: f64) -> IncidentWave {
    IncidentWave::new([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], k).unwrap()
}

#[test]
fn bessel_j_against_series_oracle() {
    let fx = fixtures();
    let v = sph_bessel_j(2, Complex64::new(2.0, 1.0)).unwrap();
    assert_close(v, cx(&fx["sph_j_2_2p1i"]), 1e-13, "j_2(2+1i)");
    let v = sph_bessel_j(0, Complex64::new(1.0, 0.0)).unwrap();
    assert_close(v, cx(&fx["sph_j_0_1"]), 1e-14, "j_0(1)");
}

#[test]
fn riccati_against_oracle_composition() {
    let fx = fixtures();
    let z = Complex64::new(1.0, 0.0);
    let psi = riccati(RiccatiKind::Psi, 1, z).unwrap();
    let xi = riccati(RiccatiKind::Xi, 1, z).unwrap();
    let r = &fx["riccati_1_at_1"];
    assert_close(psi.value, cx(&r["psi"]), 1e-13, "psi_1(1)");
    assert_close(psi.derivative, cx(&r["dpsi"]), 1e-13, "psi_1'(1)");
    assert_close(xi.value, cx(&r["xi"]), 1e-13, "xi_1(1)");
    assert_close(xi.derivative, cx(&r["dxi"]), 1e-13, "xi_1'(1)");
    // composition with the j and h oracles: psi_1(1) = 1*j_1(1), xi_1 = 1*h_1(1)
    let j1 = sph_bessel_j(1, z).unwrap();
    let h1 = sph_hankel1(1, z).unwrap();
    assert_close(psi.value, j1, 1e-14, "psi = z j");
    assert_close(xi.value, h1, 1e-14, "xi = z h");
}

#[test]
fn angular_functions_against_oracle() {
    let fx = fixtures();
    let pi_ref: f64 = fx["mie_angular_5_0p3"][0].as_str().unwrap().parse().unwrap();
    let tau_ref: f64 = fx["mie_angular_5_0p3"][1].as_str().unwrap().parse().unwrap();
    let (p, t) = mie_angular(5, 0.3).unwrap();
    assert!((p - pi_ref).abs() <= 1e-13 * pi_ref.abs());
    assert!((t - tau_ref).abs() <= 1e-13 * tau_ref.abs());
}

/// Direct per-mode solve of the PEC boundary condition from raw Riccati
/// values: s_TE = -psi/xi, s_TM = -psi'/xi' at ka.
fn pec_oracle(n: u32, ka: f64) -> (Complex64, Complex64) {
    let z = Complex64::new(ka, 0.0);
    let p = riccati(RiccatiKind::Psi, n, z).unwrap();
    let x = riccati(RiccatiKind::Xi, n, z).unwrap();
    (-p.value / x.value, -p.derivative / x.derivative)
}

/// Dense 2x2 interface solve for a homogeneous sphere of refractive index
/// m (relative permeability mu1): unknowns are the interior coefficient and
/// the scattering coefficient; Cramer's rule on the tangential continuity
/// rows.
fn dielectric_oracle(n: u32, ka: f64, m: Complex64, mu1: Complex64) -> (Complex64, Complex64) {
    let x = Complex64::new(ka, 0.0);
    let mx = m * x;
    let pi_ = riccati(RiccatiKind::Psi, n, x).unwrap();
    let pm = riccati(RiccatiKind::Psi, n, mx).unwrap();
    let xi_ = riccati(RiccatiKind::Xi, n, x).unwrap();
    let solve2 = |a11: Complex64,
                  a12: Complex64,
                  a21: Complex64,
                  a22: Complex64,
                  b1: Complex64,
                  b2: Complex64| {
        let det = a11 * a22 - a12 * a21;
        (
            (b1 * a22 - a12 * b2) / det,
            (a11 * b2 - b1 * a21) / det,
        )
    };
    // TE rows: value/m continuity and derivative/mu continuity
    let (_, s_te) = solve2(
        pm.value / m,
        -xi_.value,
        pm.derivative / mu1,
        -xi_.derivative,
        pi_.value,
        pi_.derivative,
    );
    // TM rows: derivative/m and value/mu
    let (_, s_tm) = solve2(
        pm.derivative / m,
        -xi_.derivative,
        pm.value / mu1,
        -xi_.value,
        pi_.derivative,
        pi_.value,
    );
    (s_te, s_tm)
}

#[test]
fn pec_sphere_matches_fixture_and_oracle() {
    let fx = fixtures();
    for (ka, key) in [(0.5, "pec_ka_0.5"), (1.0, "pec_ka_1.0"), (5.0, "pec_ka_5.0")] {
        let scene = LayeredScene::new(1.0, CoreKind::Pec, vec![], ka, 2.0).unwrap();
        let sol = solve_modes(&scene, &zhat_xhat(ka), 12).unwrap();
        for row in fx[key].as_array().unwrap() {
            let n = row["n"].as_u64().unwrap() as u32;
            let te_ref = cx(&row["s_te"]);
            let tm_ref = cx(&row["s_tm"]);
            assert_close(sol.s(n, Parity::Te), te_ref, 1e-10, &format!("{key} n={n} TE"));
            assert_close(sol.s(n, Parity::Tm), tm_ref, 1e-10, &format!("{key} n={n} TM"));
            let (o_te, o_tm) = pec_oracle(n, ka);
            assert_close(sol.s(n, Parity::Te), o_te, 1e-10, "vs direct PEC oracle TE");
            assert_close(sol.s(n, Parity::Tm), o_tm, 1e-10, "vs direct PEC oracle TM");
        }
    }
}

#[test]
fn dielectric_sphere_matches_fixture_and_oracle() {
    let fx = fixtures();
    let eps = Complex64::new(2.25, 0.0);
    let m = eps.sqrt();
    for (ka, key) in [(1.0, "dielectric_2p25_ka_1.0"), (2.0, "dielectric_2p25_ka_2.0")] {
        let scene = LayeredScene::new(
            1.0,
            CoreKind::Penetrable(Material::new(Complex64::new(1.0, 0.0), eps).unwrap()),
            vec![],
            ka,
            2.0,
        )
        .unwrap();
        let sol = solve_modes(&scene, &zhat_xhat(ka), 12).unwrap();
        for row in fx[key].as_array().unwrap() {
            let n = row["n"].as_u64().unwrap() as u32;
            assert_close(
                sol.s(n, Parity::Te),
                cx(&row["s_te"]),
                1e-10,
                &format!("{key} n={n} TE"),
            );
            assert_close(
                sol.s(n, Parity::Tm),
                cx(&row["s_tm"]),
                1e-10,
                &format!("{key} n={n} TM"),
            );
            let (o_te, o_tm) = dielectric_oracle(n, ka, m, Complex64::new(1.0, 0.0));
            assert_close(sol.s(n, Parity::Te), o_te, 1e-10, "vs 2x2 oracle TE");
            assert_close(sol.s(n, Parity::Tm), o_tm, 1e-10, "vs 2x2 oracle TM");
        }
    }
}

#[test]
fn layered_solver_matches_two_interface_oracle() {
    // one penetrable core + one shell: assemble the dense 4x4 system from
    // raw Riccati values and Cramer-solve; compare the scattering
    // coefficient against the transfer-matrix path.
    let k = 2.0;
    let core = Material::new(Complex64::new(1.5, 0.2), Complex64::new(3.0, 0.7)).unwrap();
    let shell = Material::new(Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.5)).unwrap();
    let (r0, r1) = (0.5, 1.0);
    let scene = LayeredScene::new(
        r0,
        CoreKind::Penetrable(core),
        vec![emsphere::scene::Shell {
            outer_radius: r1,
            material: shell,
        }],
        k,
        1.5,
    )
    .unwrap();
    let sol = solve_modes(&scene, &zhat_xhat(k), 10).unwrap();
    let k0 = core.wavenumber(k);
    let k1 = shell.wavenumber(k);
    for parity in [Parity::Te, Parity::Tm] {
        for n in 1..=10u32 {
            // unknowns: d (core reg), a, b (shell reg/out), s (scattered)
            let row = |kj: Complex64, mu: Complex64, r: f64, kind: RiccatiKind| {
                let p = riccati(kind, n, kj * r).unwrap();
                match parity {
                    Parity::Te => (p.value / kj, p.derivative / mu),
                    Parity::Tm => (p.derivative / kj, p.value / mu),
                }
            };
            let (u_c, v_c) = row(k0, core.mu_r, r0, RiccatiKind::Psi);
            let (u_s1p, v_s1p) = row(k1, shell.mu_r, r0, RiccatiKind::Psi);
            let (u_s1x, v_s1x) = row(k1, shell.mu_r, r0, RiccatiKind::Xi);
            let (u_s2p, v_s2p) = row(k1, shell.mu_r, r1, RiccatiKind::Psi);
            let (u_s2x, v_s2x) = row(k1, shell.mu_r, r1, RiccatiKind::Xi);
            let kv = Complex64::new(k, 0.0);
            let one = Complex64::new(1.0, 0.0);
            let (u_vp, v_vp) = row(kv, one, r1, RiccatiKind::Psi);
            let (u_vx, v_vx) = row(kv, one, r1, RiccatiKind::Xi);
            // 4x4 system: [d, a, b, s]
            let mut a = [
                [u_c, -u_s1p, -u_s1x, Complex64::new(0.0, 0.0)],
                [v_c, -v_s1p, -v_s1x, Complex64::new(0.0, 0.0)],
                [
                    Complex64::new(0.0, 0.0),
                    u_s2p,
                    u_s2x,
                    -u_vx,
                ],
                [
                    Complex64::new(0.0, 0.0),
                    v_s2p,
                    v_s2x,
                    -v_vx,
                ],
            ];
            let mut b = [
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                u_vp,
                v_vp,
            ];
            // Gaussian elimination with partial pivoting
            for col in 0..4 {
                let piv = (col..4)
                    .max_by(|i, j| a[*i][col].norm().total_cmp(&a[*j][col].norm()))
                    .unwrap();
                a.swap(col, piv);
                b.swap(col, piv);
                for r in col + 1..4 {
                    let f = a[r][col] / a[col][col];
                    for c in col..4 {
                        let v = a[col][c];
                        a[r][c] -= f * v;
                    }
                    let v = b[col];
                    b[r] -= f * v;
                }
            }
            let mut x = [Complex64::new(0.0, 0.0); 4];
            for r in (0..4).rev() {
                let mut acc = b[r];
                for c in r + 1..4 {
                    acc -= a[r][c] * x[c];
                }
                x[r] = acc / a[r][r];
            }
            let s_oracle = x[3];
            let s = sol.s(n, parity);
            assert!(
                (s - s_oracle).norm() <= 1e-9 * s_oracle.norm().max(1e-14),
                "n={n} {parity:?}: {s} vs {s_oracle}"
            );
        }
    }
}
