//! Dirac matrices in the standard representation and the momentum-space
//! spectral projectors of the free Dirac operator.

use nalgebra::{Matrix4, Vector3};

use crate::error::{Error, Result};
use crate::linalg::C64;

pub type Spin4 = Matrix4<C64>;

/// `γ⁰..γ³` together with `α_a = γ⁰γ^a` and `β = γ⁰`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSet {
    pub gamma: [Spin4; 4],
    pub alpha: [Spin4; 3],
    pub beta: Spin4,
}

/// A momentum (wave-number) vector, `ħ = c = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Momentum(pub Vector3<f64>);

impl Momentum {
    pub fn new(p1: f64, p2: f64, p3: f64) -> Self {
        Momentum(Vector3::new(p1, p2, p3))
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.norm_squared()
    }
}

impl std::ops::Neg for Momentum {
    type Output = Momentum;
    fn neg(self) -> Momentum {
        Momentum(-self.0)
    }
}

/// `λ(p) = sqrt(‖p‖² + m²)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Energy(pub f64);

impl Energy {
    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Standard Dirac representation, `β = diag(1, 1, −1, −1)`.
pub fn gamma_matrices() -> GammaSet {
    let o = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    #[rustfmt::skip]
    let g0 = Spin4::new(
        one, o, o, o,
        o, one, o, o,
        o, o, -one, o,
        o, o, o, -one,
    );
    #[rustfmt::skip]
    let g1 = Spin4::new(
        o, o, o, one,
        o, o, one, o,
        o, -one, o, o,
        -one, o, o, o,
    );
    #[rustfmt::skip]
    let g2 = Spin4::new(
        o, o, o, -i,
        o, o, i, o,
        o, i, o, o,
        -i, o, o, o,
    );
    #[rustfmt::skip]
    let g3 = Spin4::new(
        o, o, one, o,
        o, o, o, -one,
        -one, o, o, o,
        o, one, o, o,
    );
    let alpha = [g0 * g1, g0 * g2, g0 * g3];
    GammaSet {
        gamma: [g0, g1, g2, g3],
        alpha,
        beta: g0,
    }
}

pub fn energy(p: Momentum, m: f64) -> Result<Energy> {
    if !(m >= 0.0) {
        return Err(Error::NegativeMass(m));
    }
    Ok(Energy((p.norm_squared() + m * m).sqrt()))
}

/// `Λ±(p) = ½ ± (mβ + α·p) / (2λ(p))`.
pub fn spectral_projector(p: Momentum, m: f64, sign: Sign) -> Result<Spin4> {
    let lambda = energy(p, m)?.value();
    if lambda == 0.0 {
        return Err(Error::SingularPoint);
    }
    let g = gamma_matrices();
    let mut h = g.beta * C64::from(m);
    for a in 0..3 {
        h += g.alpha[a] * C64::from(p.0[a]);
    }
    let half = C64::from(0.5);
    Ok(Spin4::identity() * half + h * C64::from(sign.factor() / (2.0 * lambda)))
}

/// The matrix `iγ²`, so that `C f = iγ² conj(f)`.
pub fn conjugation_matrix() -> Matrix4<f64> {
    let g2 = gamma_matrices().gamma[2];
    let ig2 = g2 * c(0.0, 1.0);
    ig2.map(|z| z.re)
}

/// `iγ²` as a complex matrix.
pub fn conjugation_matrix_complex() -> Spin4 {
    conjugation_matrix().map(C64::from)
}
