//! Small-strain isotropic elasticity in 3D and the Peach-Koehler force on a
//! dislocation line.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Tolerance on `|v| - 1` for direction arguments.
pub const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    pub fn dot(&self, o: &Vec3) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = o.0;
        Vec3([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(&self) -> Vec3 {
        *self * (1.0 / self.norm())
    }

    fn require_unit(&self, name: &str) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() > UNIT_TOL || !n.is_finite() {
            return Err(Error::Argument(format!("{name} must be a unit vector, |{name}| = {n}")));
        }
        Ok(())
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

/// Symmetric 3x3 tensor stored as `(s11, s22, s33, s12, s13, s23)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor3 {
    pub s11: f64,
    pub s22: f64,
    pub s33: f64,
    pub s12: f64,
    pub s13: f64,
    pub s23: f64,
}

impl SymTensor3 {
    pub const ZERO: SymTensor3 = SymTensor3 {
        s11: 0.0,
        s22: 0.0,
        s33: 0.0,
        s12: 0.0,
        s13: 0.0,
        s23: 0.0,
    };

    pub fn identity() -> Self {
        SymTensor3 {
            s11: 1.0,
            s22: 1.0,
            s33: 1.0,
            ..Self::ZERO
        }
    }

    pub fn new(s11: f64, s22: f64, s33: f64, s12: f64, s13: f64, s23: f64) -> Self {
        SymTensor3 {
            s11,
            s22,
            s33,
            s12,
            s13,
            s23,
        }
    }

    /// Entry `(i, j)` with zero-based indices.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 0) => self.s11,
            (1, 1) => self.s22,
            (2, 2) => self.s33,
            (0, 1) => self.s12,
            (0, 2) => self.s13,
            (1, 2) => self.s23,
            _ => panic!("index ({i}, {j}) out of range"),
        }
    }

    pub fn trace(&self) -> f64 {
        self.s11 + self.s22 + self.s33
    }

    /// Full contraction `A : B`.
    pub fn contract(&self, o: &SymTensor3) -> f64 {
        self.s11 * o.s11
            + self.s22 * o.s22
            + self.s33 * o.s33
            + 2.0 * (self.s12 * o.s12 + self.s13 * o.s13 + self.s23 * o.s23)
    }

    pub fn norm_sq(&self) -> f64 {
        self.contract(self)
    }

    pub fn scale(&self, s: f64) -> SymTensor3 {
        SymTensor3::new(
            self.s11 * s,
            self.s22 * s,
            self.s33 * s,
            self.s12 * s,
            self.s13 * s,
            self.s23 * s,
        )
    }

    pub fn add(&self, o: &SymTensor3) -> SymTensor3 {
        SymTensor3::new(
            self.s11 + o.s11,
            self.s22 + o.s22,
            self.s33 + o.s33,
            self.s12 + o.s12,
            self.s13 + o.s13,
            self.s23 + o.s23,
        )
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        let [x, y, z] = v.0;
        Vec3([
            self.s11 * x + self.s12 * y + self.s13 * z,
            self.s12 * x + self.s22 * y + self.s23 * z,
            self.s13 * x + self.s23 * y + self.s33 * z,
        ])
    }
}

/// Isotropic stiffness given by the Lamé constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicElasticity {
    lambda: f64,
    mu: f64,
}

impl IsotropicElasticity {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Argument(format!("lambda must be non-negative, got {lambda}")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Argument(format!("mu must be positive, got {mu}")));
        }
        Ok(Self { lambda, mu })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Coercivity constant `c*` in `σ[e] : e >= c* |e|^2`.
    pub fn coercivity(&self) -> f64 {
        2.0 * self.mu
    }
}

/// Symmetric part of a displacement gradient, `grad_u[i][j] = ∂_j u_i`.
pub fn strain(grad_u: &[[f64; 3]; 3]) -> SymTensor3 {
    let e = |i: usize, j: usize| 0.5 * (grad_u[i][j] + grad_u[j][i]);
    SymTensor3::new(e(0, 0), e(1, 1), e(2, 2), e(0, 1), e(0, 2), e(1, 2))
}

/// `σ = λ tr(e) I + 2μ e`.
pub fn isotropic_stress(e: &SymTensor3, c: &IsotropicElasticity) -> SymTensor3 {
    SymTensor3::identity()
        .scale(c.lambda * e.trace())
        .add(&e.scale(2.0 * c.mu))
}

/// `w = λ tr(e)^2 / 2 + μ |e|^2`, which equals `σ[e] : e / 2`.
pub fn strain_energy_density(e: &SymTensor3, c: &IsotropicElasticity) -> f64 {
    let tr = e.trace();
    0.5 * c.lambda * tr * tr + c.mu * e.norm_sq()
}

/// Peach-Koehler force `τ × (σ b)` per unit length of a line with unit tangent `tau`.
pub fn pk_force(sigma: &SymTensor3, b: &Vec3, tau: &Vec3) -> Result<Vec3> {
    tau.require_unit("tau")?;
    Ok(tau.cross(&sigma.mul_vec(b)))
}

/// Glide component `(σ ν) · b` for slip-plane normal `nu`.
pub fn glide_force(sigma: &SymTensor3, b: &Vec3, nu: &Vec3) -> Result<f64> {
    nu.require_unit("nu")?;
    Ok(sigma.mul_vec(nu).dot(b))
}
