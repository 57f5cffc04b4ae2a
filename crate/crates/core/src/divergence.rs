//! The vacuum-norm series `S_J = ‖Q^J Ω‖²` of the cube charge over mode shells.
//!
//! With `M⁺_{ij} = ⟨f_i, P₊ f_j⟩` over the first `J` modes, `S_J = tr M⁺ − tr (M⁺)²`.
//! For the product basis `φ_k ⊗ e_s` summing over spins reduces this to the
//! scalar Grams: `S_J = Σ_{i,j} [δ_{ij} − m²|G⁰_{ij}|² − Σ_s |G^s_{ij}|²]`.
//! Both routes are accumulated per shell, so one Gram assembly at the largest
//! shell yields every partial sum.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::charge::{trace_formula, vacuum_norm_deviation, SubspaceBasis};
use crate::error::{Error, Result};
use crate::fock::ToyModel;
use crate::involution::{c_invariant_onb, InvariantBasis};
use crate::linalg::{random_unitary, CMatrix, C64};
use crate::modes::{enumerate_shell, max_norm, shell_conjugation, Shell};
use crate::quadrature::{gram_matrices, GramMatrices, QuadGrid, SpinTables};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    Product,
    CInvariant,
}

impl BasisKind {
    pub fn name(self) -> &'static str {
        match self {
            BasisKind::Product => "product",
            BasisKind::CInvariant => "c_invariant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub k: u32,
    /// Number of spinor modes with `‖k‖_∞ ≤ K`.
    pub j: usize,
    pub s: f64,
    pub delta_s: f64,
    pub tail_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceSeries {
    pub points: Vec<SeriesPoint>,
    pub basis_kind: BasisKind,
    pub m: f64,
    pub cutoff: u32,
    pub panels_per_unit: u32,
    pub order: usize,
    /// `max_a |M⁺_{aa} − ½|` over the invariant basis; `None` for the product basis.
    pub diagonal_deviation: Option<f64>,
    /// `S_1` for the first basis vector alone.
    pub first_mode: f64,
}

impl DivergenceSeries {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.s).collect()
    }

    pub fn mode_counts(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.j).collect()
    }
}

fn shell_of(shell: &Shell, spinor_index: usize) -> usize {
    max_norm(shell.modes()[spinor_index / 4]) as usize
}

fn cumulative(buckets: &[f64]) -> Vec<f64> {
    buckets
        .iter()
        .scan(0.0, |acc, b| {
            *acc += b;
            Some(*acc)
        })
        .collect()
}

fn build_points(shell: &Shell, grid: &QuadGrid, totals: Vec<f64>) -> Vec<SeriesPoint> {
    let counts = shell.prefix_counts();
    let mut prev = 0.0;
    totals
        .into_iter()
        .enumerate()
        .map(|(k, s)| {
            let p = SeriesPoint {
                k: k as u32,
                j: 4 * counts[k],
                s,
                delta_s: s - prev,
                tail_estimate: grid.tail_estimate(k as u32),
            };
            prev = s;
            p
        })
        .collect()
}

/// Assembles the Grams for shells `0..=k_max` after checking the grid tail.
pub fn shell_grams(k_max: u32, m: f64, grid: &QuadGrid) -> Result<(Shell, GramMatrices)> {
    grid.check_shell(k_max)?;
    let shell = enumerate_shell(k_max);
    let grams = gram_matrices(&shell, m, grid)?;
    Ok((shell, grams))
}

/// `C`-fixed orthonormal basis of the spinor modes of a shell, built from the
/// standard basis, so that its first `4(2K+1)³` vectors span shell `K`.
pub fn invariant_shell_basis(shell: &Shell) -> Result<InvariantBasis> {
    let c = shell_conjugation(shell)?;
    c_invariant_onb(&c, None)
}

pub fn vacuum_series_trace(k_max: u32, m: f64, grid: &QuadGrid, kind: BasisKind) -> Result<DivergenceSeries> {
    let (shell, grams) = shell_grams(k_max, m, grid)?;
    series_trace_from_grams(&shell, &grams, grid, kind)
}

pub fn series_trace_from_grams(
    shell: &Shell,
    grams: &GramMatrices,
    grid: &QuadGrid,
    kind: BasisKind,
) -> Result<DivergenceSeries> {
    let tables = SpinTables::new();
    let nshell = shell.k_max() as usize + 1;
    let mut buckets = vec![0.0; nshell];
    let dim = shell.spinor_dim();
    let entry = |r: usize, c: usize| grams.m_plus_entry(&tables, r / 4, r % 4, c / 4, c % 4);
    let (diagonal_deviation, first_mode) = match kind {
        BasisKind::Product => {
            for r in 0..dim {
                let sr = shell_of(shell, r);
                for c in 0..dim {
                    let z = entry(r, c);
                    let b = sr.max(shell_of(shell, c));
                    buckets[b] -= z.norm_sqr();
                    if r == c {
                        buckets[b] += z.re;
                    }
                }
            }
            let mu = entry(0, 0).re;
            (None, mu - mu * mu)
        }
        BasisKind::CInvariant => {
            let basis = invariant_shell_basis(shell)?;
            let vecs = basis.sparse_vectors();
            let shells: Vec<usize> = vecs
                .iter()
                .map(|v| v.iter().map(|(i, _)| shell_of(shell, *i)).max().unwrap_or(0))
                .collect();
            let counts = shell.prefix_counts();
            for (k, &n) in counts.iter().enumerate() {
                let have = shells.iter().filter(|&&s| s <= k).count();
                if have != 4 * n || shells[..4 * n].iter().any(|&s| s > k) {
                    return Err(Error::InvalidGrid(format!(
                        "invariant basis is not shell-ordered at K = {k}"
                    )));
                }
            }
            let mut diag_dev = 0.0_f64;
            let mut first = 0.0;
            for (a, fa) in vecs.iter().enumerate() {
                for (b, fb) in vecs.iter().enumerate() {
                    let mut z = C64::from(0.0);
                    for &(r, x) in fa {
                        for &(c, y) in fb {
                            z += x.conj() * y * entry(r, c);
                        }
                    }
                    let bucket = shells[a].max(shells[b]);
                    buckets[bucket] -= z.norm_sqr();
                    if a == b {
                        buckets[bucket] += z.re;
                        diag_dev = diag_dev.max((z.re - 0.5).abs());
                        if a == 0 {
                            first = z.re - z.re * z.re;
                        }
                    }
                }
            }
            (Some(diag_dev), first)
        }
    };
    Ok(DivergenceSeries {
        points: build_points(shell, grid, cumulative(&buckets)),
        basis_kind: kind,
        m: grams.m,
        cutoff: grams.cutoff,
        panels_per_unit: grams.panels_per_unit,
        order: grams.order,
        diagonal_deviation,
        first_mode,
    })
}

pub fn vacuum_series_scalar(k_max: u32, m: f64, grid: &QuadGrid) -> Result<DivergenceSeries> {
    let (shell, grams) = shell_grams(k_max, m, grid)?;
    Ok(series_scalar_from_grams(&shell, &grams, grid))
}

pub fn series_scalar_from_grams(shell: &Shell, grams: &GramMatrices, grid: &QuadGrid) -> DivergenceSeries {
    let j = shell.len();
    let nshell = shell.k_max() as usize + 1;
    let mut buckets = vec![0.0; nshell];
    let m2 = grams.m * grams.m;
    let shells: Vec<usize> = shell.modes().iter().map(|k| max_norm(*k) as usize).collect();
    for a in 0..j {
        for b in 0..j {
            let mut v = -m2 * grams.g0[(a, b)].powi(2);
            for g in &grams.g {
                v -= g[(a, b)].powi(2);
            }
            if a == b {
                v += 1.0;
            }
            buckets[shells[a].max(shells[b])] += v;
        }
    }
    let g00 = grams.g0[(0, 0)];
    DivergenceSeries {
        points: build_points(shell, grid, cumulative(&buckets)),
        basis_kind: BasisKind::Product,
        m: grams.m,
        cutoff: grams.cutoff,
        panels_per_unit: grams.panels_per_unit,
        order: grams.order,
        diagonal_deviation: None,
        first_mode: 1.0 - m2 * g00 * g00 - grams.g.iter().map(|g| g[(0, 0)].powi(2)).sum::<f64>(),
    }
}

/// Least-squares fit `S ≈ a + b·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub rms_residual: f64,
}

fn fit(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len();
    let a = DMatrix::from_fn(n, 2, |i, c| if c == 0 { 1.0 } else { x[i] });
    let b = DVector::from_column_slice(y);
    let coef = (a.transpose() * &a)
        .lu()
        .solve(&(a.transpose() * &b))
        .unwrap_or_else(|| DVector::from_element(2, f64::NAN));
    let res = &b - &a * &coef;
    LinearFit {
        intercept: coef[0],
        slope: coef[1],
        rms_residual: (res.norm_squared() / n as f64).sqrt(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub increments: Vec<f64>,
    pub median_increment: f64,
    pub verdict: &'static str,
    pub fit_log: LinearFit,
    pub fit_surface: LinearFit,
}

impl GrowthReport {
    pub fn diverges(&self) -> bool {
        self.verdict == NO_CAUCHY
    }
}

pub const NO_CAUCHY: &str = "no Cauchy convergence";
pub const CONVERGED: &str = "converged";

pub fn growth_diagnostics(series: &DivergenceSeries) -> Result<GrowthReport> {
    growth_from_values(&series.values(), &series.mode_counts())
}

/// Shell increments, the verdict, and descriptive fits against `log J` and `J^{2/3}`.
pub fn growth_from_values(s: &[f64], j: &[usize]) -> Result<GrowthReport> {
    if s.len() < 3 || j.len() != s.len() {
        return Err(Error::TooFewShells {
            needed: 3,
            got: s.len().min(j.len()),
        });
    }
    let increments: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
    let mut sorted = increments.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let last = *increments.last().unwrap();
    let scale = s.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    let verdict = if last >= 0.5 * median && last > 1e-12 * scale {
        NO_CAUCHY
    } else {
        CONVERGED
    };
    let jf: Vec<f64> = j.iter().map(|&v| v as f64).collect();
    let log_j: Vec<f64> = jf.iter().map(|v| v.ln()).collect();
    let surface: Vec<f64> = jf.iter().map(|v| v.powf(2.0 / 3.0)).collect();
    Ok(GrowthReport {
        increments,
        median_increment: median,
        verdict,
        fit_log: fit(&log_j, s),
        fit_surface: fit(&surface, s),
    })
}

/// `max_{J' ≤ J} |‖Q^{J'} Ω‖² − (tr M⁺ − tr (M⁺)²)|` on the toy Fock space.
pub fn toy_oracle_equivalence(model: &ToyModel, basis: &SubspaceBasis, j: usize) -> Result<f64> {
    let mut dev = 0.0_f64;
    for jj in 0..=j {
        dev = dev.max(vacuum_norm_deviation(model, basis, jj)?);
    }
    Ok(dev)
}

/// `S_J` for `J = 0..=d` by the trace formula on a toy model.
pub fn toy_series(model: &ToyModel, basis: &SubspaceBasis) -> Vec<f64> {
    (0..=basis.len()).map(|j| trace_formula(model, basis, j)).collect()
}

/// `|S − S'|` over the complete shell when the spinor modes are mixed by a
/// random unitary. `M⁺` is formed densely, so this is meant for small shells.
pub fn mixing_invariance<R: Rng + ?Sized>(grams: &GramMatrices, rng: &mut R) -> f64 {
    let mp = grams.m_plus();
    let u = random_unitary(rng, mp.nrows());
    let mixed: CMatrix = u.adjoint() * &mp * &u;
    let s = |m: &CMatrix| (m.trace() - (m * m).trace()).re;
    (s(&mp) - s(&mixed)).abs()
}
