//! Spherical Bessel/Hankel and Riccati-Bessel functions for complex
//! arguments, plus the Mie angular functions.
//!
//! Conventions:
//! - `psi_n(z) = z j_n(z)`, `xi_n(z) = z h_n^(1)(z)`, Wronskian
//!   `psi xi' - psi' xi = i`.
//! - Scaled variants factor out the exponential growth: a returned pair
//!   `(value, log_scale)` represents `value * exp(log_scale)`. For `psi`
//!   the scale is `|Im z|`, for `xi` it is `-Im z` (plus any renormalization
//!   picked up by the recurrence), so products `psi * xi` carry no net
//!   exponential for passive media (`Im z >= 0`).
//!
//! `j_n` is computed by Miller's downward recurrence normalized against
//! `j_0 = sin z / z` or `j_1` (whichever is larger in magnitude); upward
//! recurrence for `j_n` is unstable for n > |z|. `h_n^(1)` runs upward from
//! the closed forms for orders 0 and 1, which is stable for `Im z >= 0`
//! because `h` dominates the minimal solution `j` there.

use num_complex::Complex64;

use crate::{Error, Result, N_CAP};

/// Value/derivative pair of a radial function at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPair {
    pub value: Complex64,
    pub derivative: Complex64,
}

/// Scaled value/derivative pair: the true values are
/// `value * exp(log_scale)` and `derivative * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledRadialPair {
    pub value: Complex64,
    pub derivative: Complex64,
    pub log_scale: f64,
}

impl ScaledRadialPair {
    pub fn unscaled(&self) -> RadialPair {
        let s = self.log_scale.exp();
        RadialPair {
            value: self.value * s,
            derivative: self.derivative * s,
        }
    }
}

/// Which Riccati-Bessel function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiccatiKind {
    /// `psi_n(z) = z j_n(z)` (regular at the origin).
    Psi,
    /// `xi_n(z) = z h_n^(1)(z)` (outgoing).
    Xi,
}

fn check_order(n: u32) -> Result<()> {
    if n > N_CAP {
        return Err(Error::UnsupportedOrder(n));
    }
    Ok(())
}

fn check_finite(z: Complex64) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidArgument(format!("argument {z} is not finite")));
    }
    Ok(())
}

/// `sin z` and `cos z` scaled by `exp(-|Im z|)`; returns `(sin, cos, |Im z|)`.
pub fn scaled_sin_cos(z: Complex64) -> (Complex64, Complex64, f64) {
    let (x, y) = (z.re, z.im);
    let ay = y.abs();
    let em = (-2.0 * ay).exp();
    let ch = 0.5 * (1.0 + em);
    let sh = if y == 0.0 { 0.0 } else { 0.5 * (1.0 - em) * y.signum() };
    let s = Complex64::new(x.sin() * ch, x.cos() * sh);
    let c = Complex64::new(x.cos() * ch, -x.sin() * sh);
    (s, c, ay)
}

/// `j_0..j_nmax` scaled by `exp(-log_scale)`; Miller downward recurrence.
pub fn sph_j_seq_scaled(nmax: u32, z: Complex64) -> Result<(Vec<Complex64>, f64)> {
    check_finite(z)?;
    check_order(nmax)?;
    let nmax = nmax as usize;
    if z == Complex64::new(0.0, 0.0) {
        let mut out = vec![Complex64::new(0.0, 0.0); nmax + 1];
        out[0] = Complex64::new(1.0, 0.0);
        return Ok((out, 0.0));
    }
    let az = z.norm();
    let start = nmax.max(az.ceil() as usize) + 16 + (40.0 * (nmax.max(1) as f64)).sqrt().ceil() as usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); start + 2];
    buf[start + 1] = Complex64::new(0.0, 0.0);
    buf[start] = Complex64::new(1e-280, 0.0);
    for m in (1..=start).rev() {
        let f = (2 * m + 1) as f64 / z * buf[m] - buf[m + 1];
        buf[m - 1] = f;
        let am = f.norm();
        if am > 1e250 {
            for v in buf[m - 1..].iter_mut() {
                *v /= am;
            }
        }
    }
    // bring the unnormalized pass to O(1) before dividing: complex division
    // squares the denominator magnitude and underflows for tiny entries
    let pre = buf[0].norm().max(buf[1].norm());
    if !(pre > 0.0 && pre.is_finite()) {
        return Err(Error::Range(format!(
            "downward recurrence degenerated at z = {z}"
        )));
    }
    for v in buf.iter_mut() {
        *v /= pre;
    }
    let (s, c, ls) = scaled_sin_cos(z);
    let j0s = s / z;
    let j1s = s / (z * z) - c / z;
    let ratio = if j0s.norm() >= j1s.norm() {
        j0s / buf[0]
    } else {
        j1s / buf[1]
    };
    buf.truncate(nmax + 1);
    for v in buf.iter_mut() {
        *v *= ratio;
    }
    Ok((buf, ls))
}

/// `h^(1)_0..h^(1)_nmax` scaled by `exp(-log_scale)`; upward recurrence.
pub fn sph_h_seq_scaled(nmax: u32, z: Complex64) -> Result<(Vec<Complex64>, f64)> {
    check_finite(z)?;
    check_order(nmax)?;
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularArgument("h_n^(1) at z = 0"));
    }
    let nmax = nmax as usize;
    // e^{iz} = e^{i Re z} * e^{-Im z}: keep the unimodular factor only.
    let eiz = Complex64::new(0.0, z.re).exp();
    let mut out = vec![Complex64::new(0.0, 0.0); nmax + 1];
    let mut extra = 0.0;
    out[0] = -Complex64::i() * eiz / z;
    if nmax >= 1 {
        out[1] = -eiz * (z + Complex64::i()) / (z * z);
    }
    for m in 1..nmax {
        let next = (2 * m + 1) as f64 / z * out[m] - out[m - 1];
        out[m + 1] = next;
        let am = next.norm();
        if am > 1e250 {
            for v in out[..=m + 1].iter_mut() {
                *v /= am;
            }
            extra += am.ln();
        }
    }
    Ok((out, -z.im + extra))
}

/// Spherical Bessel `j_n(z)` as `value * exp(log_scale)`.
pub fn sph_bessel_j_scaled(n: u32, z: Complex64) -> Result<(Complex64, f64)> {
    let (seq, ls) = sph_j_seq_scaled(n, z)?;
    Ok((seq[n as usize], ls))
}

/// Spherical Bessel function of the first kind `j_n(z)`.
pub fn sph_bessel_j(n: u32, z: Complex64) -> Result<Complex64> {
    let (v, ls) = sph_bessel_j_scaled(n, z)?;
    unscale(v, ls, "j_n")
}

/// Spherical Hankel `h_n^(1)(z)` as `value * exp(log_scale)`.
pub fn sph_hankel1_scaled(n: u32, z: Complex64) -> Result<(Complex64, f64)> {
    let (seq, ls) = sph_h_seq_scaled(n, z)?;
    Ok((seq[n as usize], ls))
}

/// Spherical Hankel function of the first kind `h_n^(1)(z) = j_n + i y_n`.
pub fn sph_hankel1(n: u32, z: Complex64) -> Result<Complex64> {
    let (v, ls) = sph_hankel1_scaled(n, z)?;
    unscale(v, ls, "h_n")
}

fn unscale(v: Complex64, ls: f64, what: &str) -> Result<Complex64> {
    // exp(709) is the approximate f64 overflow boundary.
    if ls + v.norm().max(1e-300).ln() > 709.0 {
        return Err(Error::Range(format!(
            "{what} overflows f64: scaled magnitude {:.3e} with log-scale {ls:.1}",
            v.norm()
        )));
    }
    Ok(v * ls.exp())
}

/// Riccati sequences `(values, derivatives, log_scale)` for n = 0..nmax.
///
/// Derivatives follow `f_n'(z) = f_{n-1}(z) - (n/z) f_n(z)`, with
/// `psi_0' = cos z` and `xi_0' = i xi_0`.
pub fn riccati_seq_scaled(
    kind: RiccatiKind,
    nmax: u32,
    z: Complex64,
) -> Result<(Vec<Complex64>, Vec<Complex64>, f64)> {
    check_finite(z)?;
    check_order(nmax)?;
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularArgument("riccati functions at z = 0"));
    }
    let m = nmax as usize;
    let (vals, ls) = match kind {
        RiccatiKind::Psi => {
            let (j, ls) = sph_j_seq_scaled(nmax, z)?;
            (j.into_iter().map(|v| v * z).collect::<Vec<_>>(), ls)
        }
        RiccatiKind::Xi => {
            let (h, ls) = sph_h_seq_scaled(nmax, z)?;
            (h.into_iter().map(|v| v * z).collect::<Vec<_>>(), ls)
        }
    };
    let mut ders = vec![Complex64::new(0.0, 0.0); m + 1];
    ders[0] = match kind {
        RiccatiKind::Psi => {
            let (_, c, _) = scaled_sin_cos(z);
            c
        }
        RiccatiKind::Xi => Complex64::i() * vals[0],
    };
    for n in 1..=m {
        ders[n] = vals[n - 1] - n as f64 / z * vals[n];
    }
    Ok((vals, ders, ls))
}

/// Scaled Riccati-Bessel pair at a single order.
pub fn riccati_scaled(kind: RiccatiKind, n: u32, z: Complex64) -> Result<ScaledRadialPair> {
    let (vals, ders, ls) = riccati_seq_scaled(kind, n, z)?;
    Ok(ScaledRadialPair {
        value: vals[n as usize],
        derivative: ders[n as usize],
        log_scale: ls,
    })
}

/// Riccati-Bessel function with derivative: `psi_n` or `xi_n` at `z`.
pub fn riccati(kind: RiccatiKind, n: u32, z: Complex64) -> Result<RadialPair> {
    let p = riccati_scaled(kind, n, z)?;
    Ok(RadialPair {
        value: unscale(p.value, p.log_scale, "riccati value")?,
        derivative: unscale(p.derivative, p.log_scale, "riccati derivative")?,
    })
}

/// Mie angular function sequences `pi_1..pi_nmax`, `tau_1..tau_nmax` at
/// `x = cos(theta)`.
///
/// `pi_n = P_n^1 / sin(theta)` and `tau_n = dP_n^1/dtheta` are polynomials
/// in x, so the recurrence covers the poles x = +-1 exactly.
pub fn mie_angular_seq(nmax: u32, x: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !x.is_finite() || x.abs() > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "cos(theta) = {x} outside [-1, 1]"
        )));
    }
    check_order(nmax)?;
    let m = nmax as usize;
    let mut pi = vec![0.0; m];
    let mut tau = vec![0.0; m];
    let mut pi_prev = 0.0; // pi_0
    let mut pi_cur = 1.0; // pi_1
    for n in 1..=m {
        pi[n - 1] = pi_cur;
        tau[n - 1] = n as f64 * x * pi_cur - (n + 1) as f64 * pi_prev;
        let next = ((2 * n + 1) as f64 * x * pi_cur - (n + 1) as f64 * pi_prev) / n as f64;
        pi_prev = pi_cur;
        pi_cur = next;
    }
    Ok((pi, tau))
}

/// Mie angular functions `(pi_n, tau_n)` at `x = cos(theta)`, n >= 1.
pub fn mie_angular(n: u32, x: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::InvalidArgument("mie_angular needs n >= 1".into()));
    }
    let (pi, tau) = mie_angular_seq(n, x)?;
    Ok((pi[n as usize - 1], tau[n as usize - 1]))
}
