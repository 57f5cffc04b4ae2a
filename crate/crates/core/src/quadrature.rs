//! Gauss–Legendre tensor grids on `[−P, P]³` and the weighted Gram matrices
//! `⟨φ̂_i, w φ̂_j⟩` of the cube modes.
//!
//! The transforms of the centered modes are real and factor over the axes, so
//! `conj(φ̂_i) φ̂_j` is a product of one-dimensional factors that depend only on
//! the pair `(k_s, k'_s)`. The Gram tensor is contracted axis by axis over
//! those pairs, with the grid folded onto the positive octant using the parity
//! of each weight. Phases from a shifted center cancel in every entry.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::modes::{d_factor, Shell};
use crate::spinor::gamma_matrices;

/// Largest accepted number of tensor-grid nodes.
pub const MAX_NODES: f64 = 1e9;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Tensor-product grid with integer-aligned panels of width `1/panels_per_unit`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadGrid {
    pub cutoff: u32,
    pub panels_per_unit: u32,
    pub order: usize,
    /// Positive half of the symmetric 1D rule, ascending.
    positive_nodes: Vec<f64>,
    positive_weights: Vec<f64>,
}

pub fn build_grid(cutoff: u32, panels_per_unit: u32, order: usize) -> Result<QuadGrid> {
    if cutoff == 0 {
        return Err(Error::InvalidGrid("cutoff must be positive".into()));
    }
    if panels_per_unit == 0 {
        return Err(Error::InvalidGrid("need at least one panel per unit".into()));
    }
    if order < 2 {
        return Err(Error::InvalidGrid(format!("Gauss order {order} < 2")));
    }
    let per_axis = 2.0 * cutoff as f64 * panels_per_unit as f64 * order as f64;
    if per_axis.powi(3) > MAX_NODES {
        return Err(Error::InvalidGrid(format!(
            "{per_axis}³ nodes exceeds the limit of {MAX_NODES:e}"
        )));
    }
    let (x, w) = gauss_legendre(order);
    let h = 1.0 / panels_per_unit as f64;
    let panels = (cutoff * panels_per_unit) as usize;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for j in 0..panels {
        let mid = (j as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(mid + 0.5 * h * xi);
            weights.push(0.5 * h * wi);
        }
    }
    Ok(QuadGrid {
        cutoff,
        panels_per_unit,
        order,
        positive_nodes: nodes,
        positive_weights: weights,
    })
}

impl QuadGrid {
    pub fn nodes_per_axis(&self) -> usize {
        2 * self.positive_nodes.len()
    }

    pub fn total_nodes(&self) -> f64 {
        (self.nodes_per_axis() as f64).powi(3)
    }

    /// Full symmetric 1D rule `(nodes, weights)`, ascending.
    pub fn axis(&self) -> (Vec<f64>, Vec<f64>) {
        let mut nodes: Vec<f64> = self.positive_nodes.iter().rev().map(|x| -x).collect();
        nodes.extend(&self.positive_nodes);
        let mut weights: Vec<f64> = self.positive_weights.iter().rev().copied().collect();
        weights.extend(&self.positive_weights);
        (nodes, weights)
    }

    pub fn integrate_1d(&self, f: impl Fn(f64) -> f64) -> f64 {
        let (x, w) = self.axis();
        x.iter().zip(&w).map(|(x, w)| w * f(*x)).sum()
    }

    /// Estimated mass of `|φ̂_k|²/‖φ̂_k‖²` outside `[−P, P]` along one axis for
    /// `|k| = k`: `(1/(2π²))·(1/(P−k) + 1/(P+k))`, from `sin² → ½` in the tail.
    pub fn tail_estimate_1d(&self, k: u32) -> f64 {
        let p = self.cutoff as f64;
        let k = k as f64;
        if k >= p {
            return f64::INFINITY;
        }
        (1.0 / (2.0 * PI * PI)) * (1.0 / (p - k) + 1.0 / (p + k))
    }

    /// Three-axis estimate for the outermost modes of a shell.
    pub fn tail_estimate(&self, k_max: u32) -> f64 {
        let t = self.tail_estimate_1d(k_max);
        1.0 - (1.0 - t.min(1.0)).powi(3)
    }

    /// Errors when the tail estimate for `k_max` exceeds 10%.
    pub fn check_shell(&self, k_max: u32) -> Result<f64> {
        let t = self.tail_estimate(k_max);
        if t > 0.1 {
            return Err(Error::GridTooSmall {
                estimate: t,
                limit: 0.1,
            });
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    Unit,
    InvLambda,
    /// `p_s/λ` for axis `s = 0, 1, 2`.
    POverLambda(usize),
}

/// Scalar Gram matrices of a shell; all are real symmetric.
#[derive(Debug, Clone)]
pub struct GramMatrices {
    pub m: f64,
    pub cutoff: u32,
    pub panels_per_unit: u32,
    pub order: usize,
    pub k_max: u32,
    pub unit: DMatrix<f64>,
    pub g0: DMatrix<f64>,
    pub g: [DMatrix<f64>; 3],
}

/// Per-axis pair bookkeeping.
struct AxisPairs {
    count: usize,
    /// `index[a][b]` for value positions `a, b`.
    index: Vec<Vec<usize>>,
    /// Position of each shell mode's coordinates among the axis values.
    coords: Vec<[usize; 3]>,
}

impl AxisPairs {
    fn new(shell: &Shell, values: &[i32]) -> AxisPairs {
        let l = values.len();
        let mut index = vec![vec![0; l]; l];
        let mut count = 0;
        for a in 0..l {
            for b in a..l {
                index[a][b] = count;
                index[b][a] = count;
                count += 1;
            }
        }
        let pos = |v: i32| values.iter().position(|&x| x == v).unwrap();
        let coords = shell.modes().iter().map(|k| [pos(k[0]), pos(k[1]), pos(k[2])]).collect();
        AxisPairs { count, index, coords }
    }

    fn pair(&self, i: usize, j: usize, s: usize) -> usize {
        self.index[self.coords[i][s]][self.coords[j][s]]
    }
}

/// Folded per-axis factors: rows are value pairs, columns positive nodes.
/// `even = w(F(p) + F(−p))`, `odd = w·p·(F(p) − F(−p))` with
/// `F(p) = D(a − p) D(b − p)/(2π)²`.
fn axis_factors(values: &[i32], pairs: &AxisPairs, grid: &QuadGrid) -> (DMatrix<f64>, DMatrix<f64>) {
    let h = grid.positive_nodes.len();
    let mut even = DMatrix::zeros(pairs.count, h);
    let mut odd = DMatrix::zeros(pairs.count, h);
    let norm = 1.0 / (4.0 * PI * PI);
    for (n, (&p, &w)) in grid.positive_nodes.iter().zip(&grid.positive_weights).enumerate() {
        let dp: Vec<f64> = values.iter().map(|&a| d_factor(a as f64 - p)).collect();
        let dm: Vec<f64> = values.iter().map(|&a| d_factor(a as f64 + p)).collect();
        for a in 0..values.len() {
            for b in a..values.len() {
                let r = pairs.index[a][b];
                let fp = dp[a] * dp[b] * norm;
                let fm = dm[a] * dm[b] * norm;
                even[(r, n)] = w * (fp + fm);
                odd[(r, n)] = w * p * (fp - fm);
            }
        }
    }
    (even, odd)
}

/// Assembles the unit, `1/λ` and `p_s/λ` Grams in one pass over the grid.
///
/// The outer axis is split into independent slabs evaluated in parallel and
/// merged in slab order, so the result does not depend on the thread count.
pub fn gram_matrices(shell: &Shell, m: f64, grid: &QuadGrid) -> Result<GramMatrices> {
    if !(m >= 0.0) {
        return Err(Error::NegativeMass(m));
    }
    let values = shell.axis_values();
    let pairs = AxisPairs::new(shell, &values);
    let (even, odd) = axis_factors(&values, &pairs, grid);
    let even_t = even.transpose();
    let odd_t = odd.transpose();
    let nodes = &grid.positive_nodes;
    let h = nodes.len();
    let np = pairs.count;
    let m2 = m * m;

    let slabs: Vec<[DMatrix<f64>; 3]> = (0..h)
        .into_par_iter()
        .map(|n1| {
            let p1 = nodes[n1] * nodes[n1] + m2;
            let slab = DMatrix::from_fn(h, h, |n2, n3| {
                1.0 / (p1 + nodes[n2] * nodes[n2] + nodes[n3] * nodes[n3]).sqrt()
            });
            let x0 = &slab * &even_t;
            let x3 = &slab * &odd_t;
            let y0 = &even * &x0;
            let y2 = &odd * &x0;
            let y3 = &even * x3;
            [y0, y2, y3]
        })
        .collect();

    // Stack slab results as rows (outer node) × (pair2 + np·pair3).
    let stack = |which: usize| DMatrix::from_fn(h, np * np, |n1, c| slabs[n1][which][(c % np, c / np)]);
    let y0 = stack(0);
    let y2 = stack(1);
    let y3 = stack(2);
    let t0 = &even * &y0;
    let t1 = &odd * &y0;
    let t2 = &even * &y2;
    let t3 = &even * &y3;
    let unit_axis: Vec<f64> = (0..np).map(|r| even.row(r).sum()).collect();

    let j = shell.len();
    let extract = |t: &DMatrix<f64>| {
        DMatrix::from_fn(j, j, |a, b| {
            t[(pairs.pair(a, b, 0), pairs.pair(a, b, 1) + np * pairs.pair(a, b, 2))]
        })
    };
    let unit = DMatrix::from_fn(j, j, |a, b| (0..3).map(|s| unit_axis[pairs.pair(a, b, s)]).product());
    Ok(GramMatrices {
        m,
        cutoff: grid.cutoff,
        panels_per_unit: grid.panels_per_unit,
        order: grid.order,
        k_max: shell.k_max(),
        unit,
        g0: extract(&t0),
        g: [extract(&t1), extract(&t2), extract(&t3)],
    })
}

/// A single weighted Gram matrix.
pub fn gram_weighted(shell: &Shell, m: f64, grid: &QuadGrid, weight: Weight) -> Result<DMatrix<f64>> {
    let g = gram_matrices(shell, m, grid)?;
    Ok(match weight {
        Weight::Unit => g.unit,
        Weight::InvLambda => g.g0,
        Weight::POverLambda(s) if s < 3 => g.g[s].clone(),
        Weight::POverLambda(s) => {
            return Err(Error::OutOfRange {
                what: "axis",
                detail: format!("{s} not in 0..3"),
            })
        }
    })
}

/// Reference assembly `B·diag(w)·B*` over the full tensor grid, where `B`
/// holds the mode transforms at every node. Only practical for small grids.
pub fn gram_naive(shell: &Shell, m: f64, grid: &QuadGrid, weight: Weight) -> DMatrix<f64> {
    let (x, w) = grid.axis();
    let n = x.len();
    let j = shell.len();
    let mut out = DMatrix::zeros(j, j);
    let mut col = vec![0.0; j];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let p = [x[a], x[b], x[c]];
                let lambda = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + m * m).sqrt();
                let wt = w[a] * w[b] * w[c]
                    * match weight {
                        Weight::Unit => 1.0,
                        Weight::InvLambda => 1.0 / lambda,
                        Weight::POverLambda(s) => p[s] / lambda,
                    };
                for (i, k) in shell.modes().iter().enumerate() {
                    col[i] = crate::modes::mode_ft_centered(*k, crate::spinor::Momentum::new(p[0], p[1], p[2]));
                }
                for i in 0..j {
                    for l in 0..j {
                        out[(i, l)] += wt * col[i] * col[l];
                    }
                }
            }
        }
    }
    out
}

impl GramMatrices {
    pub fn len(&self) -> usize {
        self.g0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `max |G_unit − I|`, the Plancherel defect of the truncated grid.
    pub fn plancherel_deviation(&self) -> f64 {
        let j = self.len();
        (&self.unit - DMatrix::<f64>::identity(j, j)).amax()
    }

    pub fn symmetry_deviation(&self) -> f64 {
        let mut dev = (&self.g0 - self.g0.transpose()).amax();
        for g in &self.g {
            dev = dev.max((g - g.transpose()).amax());
        }
        dev
    }

    /// Entry `⟨φ_i ⊗ e_s, Λ⁺ φ_j ⊗ e_t⟩ = ½δ_{ij}δ_{st} + ½(m β G⁰ + Σ_a α_a G^a)_{(is),(jt)}`.
    pub fn m_plus_entry(&self, gamma: &SpinTables, i: usize, s: usize, j: usize, t: usize) -> C64 {
        let mut z = gamma.beta[s][t] * (self.m * self.g0[(i, j)]);
        for a in 0..3 {
            z += gamma.alpha[a][s][t] * self.g[a][(i, j)];
        }
        let mut z = z * 0.5;
        if i == j && s == t {
            z += 0.5;
        }
        z
    }

    /// Spinor-level `M⁺` over spin index `4·i + s`.
    pub fn m_plus(&self) -> CMatrix {
        let tables = SpinTables::new();
        let j = self.len();
        CMatrix::from_fn(4 * j, 4 * j, |r, c| self.m_plus_entry(&tables, r / 4, r % 4, c / 4, c % 4))
    }
}

/// `β` and `α_a` as plain arrays for entrywise evaluation.
#[derive(Debug, Clone)]
pub struct SpinTables {
    pub beta: [[C64; 4]; 4],
    pub alpha: [[[C64; 4]; 4]; 3],
}

impl SpinTables {
    pub fn new() -> SpinTables {
        let g = gamma_matrices();
        let mut beta = [[C64::from(0.0); 4]; 4];
        let mut alpha = [[[C64::from(0.0); 4]; 4]; 3];
        for s in 0..4 {
            for t in 0..4 {
                beta[s][t] = g.beta[(s, t)];
                for a in 0..3 {
                    alpha[a][s][t] = g.alpha[a][(s, t)];
                }
            }
        }
        SpinTables { beta, alpha }
    }
}

impl Default for SpinTables {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{enumerate_shell, mode_ft, BoxRegion};
    use crate::spinor::Momentum;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 2..=12 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
                let num: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert!((num - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn grid_sizes_and_errors() {
        let g = build_grid(8, 1, 8).unwrap();
        assert_eq!(g.nodes_per_axis(), 128);
        let (x, w) = g.axis();
        assert!(w.iter().all(|w| *w > 0.0));
        assert!(x.iter().all(|x| x.abs() <= 8.0));
        assert!(build_grid(0, 1, 4).is_err());
        assert!(build_grid(10, 1, 1).is_err());
        assert!(build_grid(40, 2, 12).is_err());
        assert!(build_grid(40, 2, 6).is_ok());
    }

    #[test]
    fn one_dimensional_normalization() {
        for p in [16, 32, 40] {
            let g = build_grid(p, 2, 6).unwrap();
            let mass = g.integrate_1d(|q| d_factor(q).powi(2) / (4.0 * PI * PI));
            assert!(mass >= 0.99, "P={p}: {mass}");
            let defect = 1.0 - mass;
            let est = g.tail_estimate_1d(0);
            assert!((defect - est).abs() < 0.05 * est, "defect {defect} vs estimate {est}");
        }
    }

    #[test]
    fn factorized_assembly_matches_naive() {
        let shell = enumerate_shell(1);
        let grid = build_grid(3, 1, 4).unwrap();
        let fast = gram_matrices(&shell, 0.7, &grid).unwrap();
        for (w, m) in [
            (Weight::Unit, &fast.unit),
            (Weight::InvLambda, &fast.g0),
            (Weight::POverLambda(0), &fast.g[0]),
            (Weight::POverLambda(1), &fast.g[1]),
            (Weight::POverLambda(2), &fast.g[2]),
        ] {
            let slow = gram_naive(&shell, 0.7, &grid, w);
            assert!((m - &slow).amax() < 1e-13, "{w:?}");
        }
    }

    #[test]
    fn naive_assembly_matches_complex_transforms() {
        // Gram from the complex transforms of a shifted cube equals the real one.
        let shell = enumerate_shell(1);
        let grid = build_grid(2, 1, 3).unwrap();
        let region = BoxRegion {
            center: nalgebra::Vector3::new(0.4, -0.2, 1.3),
        };
        let (x, w) = grid.axis();
        let (i, j) = (3, 17);
        let (ki, kj) = (shell.modes()[i], shell.modes()[j]);
        let mut acc = C64::from(0.0);
        for a in 0..x.len() {
            for b in 0..x.len() {
                for c in 0..x.len() {
                    let p = Momentum::new(x[a], x[b], x[c]);
                    let lambda = (p.norm_squared() + 1.0).sqrt();
                    acc += mode_ft(ki, p, &region).conj() * mode_ft(kj, p, &region) * (w[a] * w[b] * w[c] / lambda);
                }
            }
        }
        let g0 = gram_naive(&shell, 1.0, &grid, Weight::InvLambda);
        assert!((acc - C64::from(g0[(i, j)])).norm() < 1e-15);
    }

    #[test]
    fn symmetry_and_parity() {
        let shell = enumerate_shell(1);
        let grid = build_grid(6, 1, 4).unwrap();
        let g = gram_matrices(&shell, 1.0, &grid).unwrap();
        assert!(g.symmetry_deviation() < 1e-15);
        let neg = shell.negation_map().unwrap();
        for a in 0..shell.len() {
            for b in 0..shell.len() {
                assert!((g.g0[(a, b)] - g.g0[(neg[a], neg[b])]).abs() < 1e-15);
                assert!((g.g[0][(a, b)] + g.g[0][(neg[a], neg[b])]).abs() < 1e-15);
            }
        }
        // p_s/λ vanishes on the k = 0 mode by parity.
        for s in 0..3 {
            assert_eq!(g.g[s][(0, 0)], 0.0);
        }
    }

    #[test]
    fn inverse_energy_gram_scales_like_inverse_mass() {
        let shell = enumerate_shell(0);
        let grid = build_grid(24, 1, 6).unwrap();
        let g10 = gram_matrices(&shell, 10.0, &grid).unwrap().g0[(0, 0)];
        let g20 = gram_matrices(&shell, 20.0, &grid).unwrap().g0[(0, 0)];
        let ratio = g10 / g20;
        assert!((ratio - 2.0).abs() < 0.04, "{ratio}");
    }

    #[test]
    fn order_refinement_is_small() {
        let shell = enumerate_shell(1);
        let a = gram_matrices(&shell, 1.0, &build_grid(10, 1, 8).unwrap()).unwrap();
        let b = gram_matrices(&shell, 1.0, &build_grid(10, 1, 12).unwrap()).unwrap();
        assert!((a.g0[(0, 5)] - b.g0[(0, 5)]).abs() < 1e-6);
        assert!((a.g0[(0, 0)] - b.g0[(0, 0)]).abs() < 1e-6);
    }

    #[test]
    fn m_plus_is_a_contraction() {
        let shell = enumerate_shell(1);
        let grid = build_grid(8, 1, 4).unwrap();
        let g = gram_matrices(&shell, 1.0, &grid).unwrap();
        let mp = g.m_plus();
        assert!(crate::linalg::max_abs_diff(&mp, &mp.adjoint()) < 1e-15);
        let ev = crate::linalg::hermitian_eigenvalues(&mp);
        let tol = grid.tail_estimate(1);
        assert!(ev[0] > -tol && ev[ev.len() - 1] < 1.0 + tol, "{} {}", ev[0], ev[ev.len() - 1]);
        // tr β = tr α_a = 0, so the trace is half the spinor count.
        assert!((mp.trace().re - 2.0 * shell.len() as f64).abs() < 1e-12);
    }
}
