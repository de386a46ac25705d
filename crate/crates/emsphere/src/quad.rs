//! Gauss-Legendre rules, an adaptive Gauss-Kronrod radial integrator, and
//! the product quadrature on the unit sphere.

use crate::vec3::Vec3;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let m = n.div_ceil(2);
    for j in 0..m {
        let mut x = (std::f64::consts::PI * (j as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and P_n'(x) by the three-term recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        xs[j] = -x;
        xs[n - 1 - j] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        ws[j] = w;
        ws[n - 1 - j] = w;
    }
    (xs, ws)
}

// 15-point Kronrod extension of 7-point Gauss (positive half).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, (kron - gauss).abs() * h)
}

/// Adaptive Gauss-Kronrod integration of a real integrand over [a, b].
///
/// `panels_hint` presplits the interval (use the local oscillation count);
/// each panel is then bisected until the 7/15 error estimate meets the
/// relative tolerance.
pub fn integrate_gk<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    panels_hint: usize,
) -> f64 {
    if a == b {
        return 0.0;
    }
    let npan = panels_hint.max(1);
    let mut stack: Vec<(f64, f64, u32)> = (0..npan)
        .map(|i| {
            (
                a + (b - a) * i as f64 / npan as f64,
                a + (b - a) * (i + 1) as f64 / npan as f64,
                0u32,
            )
        })
        .collect();
    // first pass to estimate the scale
    let mut total = 0.0;
    let mut est: Vec<(f64, f64, u32, f64, f64)> = Vec::new();
    for (pa, pb, d) in stack.drain(..) {
        let (v, e) = gk15(&mut f, pa, pb);
        total += v;
        est.push((pa, pb, d, v, e));
    }
    let mut result = 0.0;
    let scale = total.abs().max(1e-300);
    while let Some((pa, pb, depth, v, e)) = est.pop() {
        if e <= rel_tol * scale * ((pb - pa) / (b - a)).max(1e-6) || depth >= 28 {
            result += v;
            continue;
        }
        let mid = 0.5 * (pa + pb);
        let (v1, e1) = gk15(&mut f, pa, mid);
        let (v2, e2) = gk15(&mut f, mid, pb);
        est.push((pa, mid, depth + 1, v1, e1));
        est.push((mid, pb, depth + 1, v2, e2));
    }
    result
}

/// Product quadrature on the unit sphere: Gauss-Legendre in cos(theta)
/// tensor uniform in phi. Exact for spherical harmonics of degree below
/// `n_theta` (and azimuthal order below `n_phi/2`).
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    pub n_theta: usize,
    pub n_phi: usize,
    /// Unit direction per node.
    pub nodes: Vec<Vec3>,
    /// Solid-angle weights; they sum to 4 pi.
    pub weights: Vec<f64>,
    pub cos_theta: Vec<f64>,
    pub phi: Vec<f64>,
}

impl SphereQuadrature {
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        let (xs, ws) = gauss_legendre(n_theta);
        let wphi = 2.0 * std::f64::consts::PI / n_phi as f64;
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        let mut cts = Vec::with_capacity(n_theta * n_phi);
        let mut phis = Vec::with_capacity(n_theta * n_phi);
        for (ct, w) in xs.iter().zip(&ws) {
            let st = (1.0 - ct * ct).sqrt();
            for j in 0..n_phi {
                let phi = wphi * j as f64;
                nodes.push([st * phi.cos(), st * phi.sin(), *ct]);
                weights.push(w * wphi);
                cts.push(*ct);
                phis.push(phi);
            }
        }
        SphereQuadrature {
            n_theta,
            n_phi,
            nodes,
            weights,
            cos_theta: cts,
            phi: phis,
        }
    }

    /// Rule tied to a modal band limit: exact for products of two fields
    /// truncated at `n_max`.
    pub fn for_band_limit(n_max: u32) -> Self {
        let q = 2 * n_max as usize + 8;
        SphereQuadrature::new(q, 2 * q)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}
