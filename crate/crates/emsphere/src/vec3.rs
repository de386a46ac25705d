//! Minimal real/complex 3-vector helpers and 3x3 rotations.

use num_complex::Complex64;

pub type Vec3 = [f64; 3];
pub type CVec3 = [Complex64; 3];

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn czero() -> CVec3 {
    [Complex64::new(0.0, 0.0); 3]
}

pub fn cadd(a: CVec3, b: CVec3) -> CVec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn csub(a: CVec3, b: CVec3) -> CVec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn cscale(a: CVec3, s: Complex64) -> CVec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn from_real(a: Vec3) -> CVec3 {
    [a[0].into(), a[1].into(), a[2].into()]
}

/// Complex bilinear dot product (no conjugation).
pub fn cdot(a: CVec3, b: CVec3) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Hermitian product: sum a_i * conj(b_i).
pub fn cdot_conj(a: CVec3, b: CVec3) -> Complex64 {
    a[0] * b[0].conj() + a[1] * b[1].conj() + a[2] * b[2].conj()
}

pub fn ccross_rc(a: Vec3, b: CVec3) -> CVec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn ccross(a: CVec3, b: CVec3) -> CVec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn cnorm_sq(a: CVec3) -> f64 {
    a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr()
}

pub fn cnorm(a: CVec3) -> f64 {
    cnorm_sq(a).sqrt()
}

/// Row-major 3x3 rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(pub [[f64; 3]; 3]);

impl Rotation {
    pub fn identity() -> Self {
        Rotation([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn from_rows(r0: Vec3, r1: Vec3, r2: Vec3) -> Self {
        Rotation([r0, r1, r2])
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        [
            dot(self.0[0], v),
            dot(self.0[1], v),
            dot(self.0[2], v),
        ]
    }

    /// Transpose action (inverse for orthogonal matrices).
    pub fn apply_transpose(&self, v: Vec3) -> Vec3 {
        [
            self.0[0][0] * v[0] + self.0[1][0] * v[1] + self.0[2][0] * v[2],
            self.0[0][1] * v[0] + self.0[1][1] * v[1] + self.0[2][1] * v[2],
            self.0[0][2] * v[0] + self.0[1][2] * v[1] + self.0[2][2] * v[2],
        ]
    }

    pub fn apply_transpose_c(&self, v: CVec3) -> CVec3 {
        [
            v[0] * self.0[0][0] + v[1] * self.0[1][0] + v[2] * self.0[2][0],
            v[0] * self.0[0][1] + v[1] * self.0[1][1] + v[2] * self.0[2][1],
            v[0] * self.0[0][2] + v[1] * self.0[1][2] + v[2] * self.0[2][2],
        ]
    }

    pub fn apply_c(&self, v: CVec3) -> CVec3 {
        [
            v[0] * self.0[0][0] + v[1] * self.0[0][1] + v[2] * self.0[0][2],
            v[0] * self.0[1][0] + v[1] * self.0[1][1] + v[2] * self.0[1][2],
            v[0] * self.0[2][0] + v[1] * self.0[2][1] + v[2] * self.0[2][2],
        ]
    }

    pub fn det(&self) -> f64 {
        dot(self.0[0], cross(self.0[1], self.0[2]))
    }

    /// Max-abs entry of R R^T - I.
    pub fn orthogonality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let g = dot(self.0[i], self.0[j]) - if i == j { 1.0 } else { 0.0 };
                worst = worst.max(g.abs());
            }
        }
        worst
    }
}
