//! Plane-wave modes `φ_k = (2π)^{−3/2} e^{ik·(x−x₀)} χ_A` on the cube
//! `A = x₀ + [−π, π]³` and the spinor modes `φ_k ⊗ e_s`.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::involution::{AntiUnitary, SparseVec};
use crate::linalg::C64;
use crate::spinor::{conjugation_matrix, Momentum};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxRegion {
    pub center: Vector3<f64>,
}

impl BoxRegion {
    pub const HALF_SIDE: f64 = PI;

    pub fn centered() -> Self {
        BoxRegion {
            center: Vector3::zeros(),
        }
    }
}

pub type ModeIndex = [i32; 3];

/// `sin(πx)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    }
}

/// `D(q) = ∫_{−π}^{π} e^{iqy} dy = 2 sin(πq)/q`, with `D(0) = 2π`.
pub fn d_factor(q: f64) -> f64 {
    if q.abs() < 1e-6 {
        let t = (PI * q).powi(2);
        2.0 * PI * (1.0 - t / 6.0 + t * t / 120.0 - t * t * t / 5040.0)
    } else {
        2.0 * sin_pi(q) / q
    }
}

/// `φ̂_k(p) = e^{−ip·x₀} (2π)^{−3} ∏_s D(k_s − p_s)`.
pub fn mode_ft(k: ModeIndex, p: Momentum, region: &BoxRegion) -> C64 {
    let amp = mode_ft_centered(k, p);
    let phase = -p.0.dot(&region.center);
    C64::from_polar(amp, phase)
}

/// Real transform of the mode centered at the origin.
pub fn mode_ft_centered(k: ModeIndex, p: Momentum) -> f64 {
    let mut v = (2.0 * PI).powi(-3);
    for s in 0..3 {
        v *= d_factor(k[s] as f64 - p.0[s]);
    }
    v
}

pub fn max_norm(k: ModeIndex) -> u32 {
    k.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
}

/// An ordered list of scalar modes.
#[derive(Debug, Clone, PartialEq)]
pub struct Shell {
    k_max: u32,
    modes: Vec<ModeIndex>,
}

/// All `k` with `‖k‖_∞ ≤ K`, ordered by `‖k‖_∞` and then lexicographically, so
/// that the modes of every smaller shell form a prefix.
pub fn enumerate_shell(k_max: u32) -> Shell {
    let r = k_max as i32;
    let mut modes = Vec::with_capacity((2 * k_max as usize + 1).pow(3));
    for shell in 0..=r {
        for a in -shell..=shell {
            for b in -shell..=shell {
                for c in -shell..=shell {
                    let k = [a, b, c];
                    if max_norm(k) == shell as u32 {
                        modes.push(k);
                    }
                }
            }
        }
    }
    Shell { k_max, modes }
}

impl Shell {
    /// Arbitrary mode list, e.g. for testing negation closure.
    pub fn from_modes(modes: Vec<ModeIndex>) -> Shell {
        let k_max = modes.iter().map(|k| max_norm(*k)).max().unwrap_or(0);
        Shell { k_max, modes }
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn spinor_dim(&self) -> usize {
        4 * self.modes.len()
    }

    /// Position of the spinor mode `φ_{k_i} ⊗ e_s` (`s = 0..4`).
    pub fn spinor_index(mode: usize, s: usize) -> usize {
        4 * mode + s
    }

    /// Number of modes with `‖k‖_∞ ≤ K`, for `K = 0..=k_max`, in a prefix-ordered shell.
    pub fn prefix_counts(&self) -> Vec<usize> {
        (0..=self.k_max).map(|k| (2 * k as usize + 1).pow(3)).collect()
    }

    /// Index of `−k` for every mode.
    pub fn negation_map(&self) -> Result<Vec<usize>> {
        let pos: HashMap<ModeIndex, usize> = self.modes.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        self.modes
            .iter()
            .map(|k| {
                pos.get(&[-k[0], -k[1], -k[2]])
                    .copied()
                    .ok_or(Error::ShellNotNegationClosed)
            })
            .collect()
    }

    /// Distinct integer values of one coordinate, ascending.
    pub fn axis_values(&self) -> Vec<i32> {
        let mut v: Vec<i32> = self.modes.iter().flat_map(|k| k.iter().copied()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// `C(φ_k ⊗ e_s) = φ_{−k} ⊗ (iγ²) e_s`, i.e. `U = Perm(k → −k) ⊗ iγ²`.
pub fn shell_conjugation(shell: &Shell) -> Result<AntiUnitary> {
    let neg = shell.negation_map()?;
    let m = conjugation_matrix();
    let mut columns: Vec<SparseVec> = Vec::with_capacity(shell.spinor_dim());
    for j in neg.iter() {
        for s in 0..4 {
            let col = (0..4)
                .filter(|&r| m[(r, s)] != 0.0)
                .map(|r| (Shell::spinor_index(*j, r), C64::from(m[(r, s)])))
                .collect();
            columns.push(col);
        }
    }
    AntiUnitary::from_columns(shell.spinor_dim(), columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::involution::c_invariant_onb;

    #[test]
    fn shell_sizes_and_order() {
        assert_eq!(enumerate_shell(0).modes(), &[[0, 0, 0]]);
        assert_eq!(enumerate_shell(1).len(), 27);
        let s2 = enumerate_shell(2);
        assert_eq!(s2.len(), 125);
        assert_eq!(s2.modes()[0], [0, 0, 0]);
        assert_eq!(&s2.modes()[..27], enumerate_shell(1).modes());
        assert_eq!(s2.modes()[1], [-1, -1, -1]);
        assert_eq!(s2.prefix_counts(), vec![1, 27, 125]);
    }

    #[test]
    fn transform_at_own_momentum_is_one() {
        let k = [2, -1, 3];
        let p = Momentum::new(2.0, -1.0, 3.0);
        let v = mode_ft(k, p, &BoxRegion::centered());
        assert!((v - C64::from(1.0)).norm() < 1e-15);
    }

    #[test]
    fn transform_vanishes_at_other_integers() {
        let v = mode_ft([1, 0, 0], Momentum::new(3.0, -2.0, 5.0), &BoxRegion::centered());
        assert_eq!(v.norm(), 0.0);
    }

    #[test]
    fn translation_is_a_phase() {
        let region = BoxRegion {
            center: Vector3::new(0.3, -1.1, 2.0),
        };
        let p = Momentum::new(0.37, 1.9, -2.25);
        let centered = mode_ft([1, -2, 0], p, &BoxRegion::centered());
        let shifted = mode_ft([1, -2, 0], p, &region);
        let phase = C64::from_polar(1.0, -p.0.dot(&region.center));
        assert_eq!(shifted, C64::from_polar(centered.re, -p.0.dot(&region.center)));
        assert!((shifted - centered * phase).norm() < 1e-16);
    }

    #[test]
    fn taylor_branch_is_continuous() {
        for q in [9.9e-7, 1e-6, 1.01e-6, -1e-6] {
            let series = d_factor(q);
            let direct = 2.0 * (PI * q).sin() / q;
            assert!((series - direct).abs() < 1e-12);
        }
        assert_eq!(d_factor(0.0), 2.0 * PI);
        assert_eq!(sin_pi(7.0), 0.0);
        assert_eq!(sin_pi(-3.0), 0.0);
        assert!((sin_pi(0.5) - 1.0).abs() < 1e-16);
        assert!((sin_pi(2.25) - (PI * 0.25).sin()).abs() < 1e-15);
    }

    #[test]
    fn conjugation_on_shell_is_valid_involution() {
        let shell = enumerate_shell(1);
        let c = shell_conjugation(&shell).unwrap();
        let (unitary, inv) = c.deviations();
        assert_eq!(unitary, 0.0);
        assert_eq!(inv, 0.0);
        let b = c_invariant_onb(&c, None).unwrap();
        assert_eq!(b.len(), 108);
        assert!(b.invariance_deviation(&c) < 1e-14);
        assert!(b.gram_deviation() < 1e-14);
    }

    #[test]
    fn open_shell_rejected() {
        let shell = Shell::from_modes(vec![[0, 0, 0], [1, 0, 0]]);
        assert!(matches!(shell_conjugation(&shell), Err(Error::ShellNotNegationClosed)));
    }
}
