//! Modified Bessel functions `K₀`, `K₁` of real positive argument and the
//! position-space kernel `4πm K₁(mr)/r` of the operator `1/λ`.
//!
//! Small arguments (`z ≤ 2`) use the logarithmic power series. Larger
//! arguments use the trapezoidal rule on `K_ν(z) = ∫₀^∞ e^{−z cosh t} cosh(νt) dt`,
//! which converges geometrically in the step and is accurate to rounding for
//! every `z > 2`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_CROSSOVER: f64 = 2.0;

fn check_arg(z: f64) -> Result<()> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::OutOfRange {
            what: "Bessel argument",
            detail: format!("z = {z} must be positive and finite"),
        });
    }
    Ok(())
}

pub fn k0(z: f64) -> Result<f64> {
    check_arg(z)?;
    Ok(if z <= SERIES_CROSSOVER {
        k0_series(z)
    } else {
        k_trapezoid(0.0, z)
    })
}

pub fn k1(z: f64) -> Result<f64> {
    check_arg(z)?;
    Ok(if z <= SERIES_CROSSOVER {
        k1_series(z)
    } else {
        k_trapezoid(1.0, z)
    })
}

/// `K₀(z) = −(ln(z/2) + γ) I₀(z) + Σ_{k≥1} H_k (z²/4)^k / (k!)²`.
fn k0_series(z: f64) -> f64 {
    let y = 0.25 * z * z;
    let mut term = 1.0;
    let mut i0 = 1.0;
    let mut rest = 0.0;
    let mut harmonic = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= y / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        rest += harmonic * term;
        if term < 1e-18 * i0 {
            break;
        }
    }
    -((0.5 * z).ln() + EULER_GAMMA) * i0 + rest
}

/// `K₁(z) = 1/z + ln(z/2) I₁(z) − (z/4) Σ_k (ψ(k+1) + ψ(k+2)) (z²/4)^k / (k!(k+1)!)`.
fn k1_series(z: f64) -> f64 {
    let y = 0.25 * z * z;
    let mut term = 1.0;
    let mut i1_sum = 0.0;
    let mut psi_sum = 0.0;
    let mut harmonic = 0.0;
    for k in 0..60 {
        let kf = k as f64;
        if k > 0 {
            term *= y / (kf * (kf + 1.0));
            harmonic += 1.0 / kf;
        }
        let psi1 = harmonic - EULER_GAMMA;
        let psi2 = psi1 + 1.0 / (kf + 1.0);
        i1_sum += term;
        psi_sum += (psi1 + psi2) * term;
        if term < 1e-18 * i1_sum {
            break;
        }
    }
    let i1 = 0.5 * z * i1_sum;
    1.0 / z + (0.5 * z).ln() * i1 - 0.25 * z * psi_sum
}

/// Trapezoidal rule for `∫₀^∞ e^{−z cosh t} cosh(νt) dt`, evaluated as
/// `e^{−z} ∫ e^{−z(cosh t − 1)} cosh(νt) dt` to stay in range.
fn k_trapezoid(nu: f64, z: f64) -> f64 {
    let h = 0.1;
    let mut sum = 0.5;
    let mut k = 1;
    loop {
        let t = k as f64 * h;
        let term = (-z * (t.cosh() - 1.0)).exp() * (nu * t).cosh();
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
        k += 1;
    }
    h * sum * (-z).exp()
}

/// `K₀(z) = ∫₀^∞ cos(zt)/√(t²+1) dt`, computed independently of [`k0`].
///
/// The integral is split at the zeros of `cos(zt)`, each half period is
/// integrated with Gauss–Legendre panels of length at most one, and the
/// alternating tail of partial sums is summed by repeated averaging.
pub fn k0_oscillatory(z: f64) -> Result<f64> {
    check_arg(z)?;
    const SEGMENTS: usize = 64;
    const AVERAGED: usize = 24;
    let (x, w) = gauss_legendre(20);
    let integrand = |t: f64| (z * t).cos() / (t * t + 1.0).sqrt();
    let panel = |a: f64, b: f64| {
        let n = ((b - a).ceil() as usize).max(1);
        let step = (b - a) / n as f64;
        let mut s = 0.0;
        for j in 0..n {
            let mid = a + (j as f64 + 0.5) * step;
            for (xi, wi) in x.iter().zip(&w) {
                s += wi * integrand(mid + 0.5 * step * xi);
            }
        }
        0.5 * step * s
    };
    let zero = |n: usize| (n as f64 + 0.5) * PI / z;
    let mut partial = Vec::with_capacity(SEGMENTS + 1);
    let mut acc = panel(0.0, zero(0));
    partial.push(acc);
    for n in 0..SEGMENTS {
        acc += panel(zero(n), zero(n + 1));
        partial.push(acc);
    }
    let mut tail: Vec<f64> = partial[partial.len() - AVERAGED..].to_vec();
    while tail.len() > 1 {
        tail = tail.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    }
    Ok(tail[0])
}

/// `(2π)^{3/2} 𝓕⁻¹(1/λ)(x) = 4πm K₁(m‖x‖)/‖x‖`.
pub fn inverse_energy_kernel(m: f64, r: f64) -> Result<f64> {
    Ok(4.0 * PI * m * k1(m * r)? / r)
}

/// `−(4π/r) d/dr K₀(mr)` by a five-point difference of [`k0_oscillatory`].
pub fn inverse_energy_kernel_fd(m: f64, r: f64) -> Result<f64> {
    let h = 1e-2 * r;
    let f = |x: f64| k0_oscillatory(m * x);
    let d = (f(r - 2.0 * h)? - 8.0 * f(r - h)? + 8.0 * f(r + h)? - f(r + 2.0 * h)?) / (12.0 * h);
    Ok(-4.0 * PI / r * d)
}

/// Largest relative deviation between the finite-difference reduction and the
/// closed kernel on `r_samples` evenly spaced radii in `[0.1, 5]`.
pub fn verify_inverse_energy_kernel(m: f64, r_samples: usize) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::OutOfRange {
            what: "mass",
            detail: format!("m = {m} must be positive"),
        });
    }
    if r_samples == 0 {
        return Err(Error::OutOfRange {
            what: "sample count",
            detail: "need at least one radius".into(),
        });
    }
    let mut dev = 0.0_f64;
    for i in 0..r_samples {
        let r = if r_samples == 1 {
            1.0
        } else {
            0.1 + 4.9 * i as f64 / (r_samples - 1) as f64
        };
        let exact = inverse_energy_kernel(m, r)?;
        let fd = inverse_energy_kernel_fd(m, r)?;
        dev = dev.max(((fd - exact) / exact).abs());
    }
    Ok(dev)
}

#[cfg(test)]
mod tests {
    use super::*;

    const K0_1: f64 = 0.421_024_438_240_708_34;
    const K1_1: f64 = 0.601_907_230_197_234_6;
    const K0_2: f64 = 0.113_893_872_749_533_44;
    const K1_2: f64 = 0.139_865_881_816_522_43;
    const K0_5: f64 = 0.003_691_098_334_042_594;
    const K1_5: f64 = 0.004_044_613_445_452_164;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn reference_values() {
        assert!(rel(k0(1.0).unwrap(), K0_1) < 1e-14);
        assert!(rel(k1(1.0).unwrap(), K1_1) < 1e-14);
        assert!(rel(k0(2.0).unwrap(), K0_2) < 1e-14);
        assert!(rel(k1(2.0).unwrap(), K1_2) < 1e-14);
        assert!(rel(k0(5.0).unwrap(), K0_5) < 1e-13);
        assert!(rel(k1(5.0).unwrap(), K1_5) < 1e-13);
    }

    #[test]
    fn branches_agree_at_crossover() {
        for z in [1.5, 2.0, 2.5] {
            assert!(rel(k0_series(z), k_trapezoid(0.0, z)) < 1e-13);
            assert!(rel(k1_series(z), k_trapezoid(1.0, z)) < 1e-13);
        }
    }

    #[test]
    fn small_argument_limit() {
        let z = 0.02;
        assert!((z * k1(z).unwrap() - 1.0).abs() < 0.01);
    }

    #[test]
    fn derivative_relation() {
        let (z, h) = (1.0, 1e-5);
        let d = (k0(z + h).unwrap() - k0(z - h).unwrap()) / (2.0 * h);
        assert!((d + k1(z).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn oscillatory_representation() {
        assert!(rel(k0_oscillatory(1.0).unwrap(), K0_1) < 1e-10);
        for z in [0.1, 0.5, 3.0, 10.0] {
            assert!(rel(k0_oscillatory(z).unwrap(), k0(z).unwrap()) < 1e-8, "z={z}");
        }
    }

    #[test]
    fn positivity_and_monotonicity() {
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for i in 0..200 {
            let z = 1e-3 * 1.05f64.powi(i);
            let (a, b) = (k0(z).unwrap(), k1(z).unwrap());
            assert!(a > 0.0 && b > 0.0);
            assert!(a < prev.0 && b < prev.1);
            prev = (a, b);
        }
    }

    #[test]
    fn kernel_scaling_and_decay() {
        let (m, r) = (2.5, 0.7);
        let lhs = inverse_energy_kernel(m, r).unwrap();
        let rhs = m * m * inverse_energy_kernel(1.0, m * r).unwrap();
        assert!(rel(lhs, rhs) < 1e-14);
        let ratio = inverse_energy_kernel(1.0, 10.0).unwrap() / inverse_energy_kernel(1.0, 5.0).unwrap();
        assert!(ratio < 0.25);
    }

    #[test]
    fn kernel_reduction_at_unit_radius() {
        let exact = inverse_energy_kernel(1.0, 1.0).unwrap();
        let fd = inverse_energy_kernel_fd(1.0, 1.0).unwrap();
        assert!(rel(fd, exact) < 1e-6);
    }

    #[test]
    fn invalid_arguments() {
        assert!(k0(0.0).is_err());
        assert!(k1(-1.0).is_err());
        assert!(verify_inverse_energy_kernel(0.0, 3).is_err());
    }
}
