//! Charge operators on the toy Fock space.
//!
//! For an orthonormal family `(f_j)` of a subspace `𝓀` the subspace charge is
//! `Q_𝓀 = Σ_j T_j` with `T_j = :Ψ*(f_j)Ψ(f_j):`. The module also builds the
//! variants `Q̃`, the total charge, weighted and truncated sums, and splits
//! `‖(Q^J ψ)^{(n₀+1, m₀+1)}‖²` into the four sums obtained from the
//! anticommutation relations.

use rand::Rng;

use crate::error::{Error, Result};
use crate::fock::{FockOperator, FockVector, ToyModel};
use crate::involution::c_invariant_onb;
use crate::linalg::{
    cluster_values, gram_deviation, inner, lattice_match_error, random_unitary, CMatrix, CVector, Cluster, C64,
    ONE, ZERO,
};

const ORTHONORMAL_TOL: f64 = 1e-10;

/// Gap used to group degenerate eigenvalues before lattice matching.
pub const CLUSTER_GAP: f64 = 1e-6;

/// An orthonormal family spanning a subspace `𝓀 ⊆ ℂⁿ`.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    vectors: Vec<CVector>,
    dplus: f64,
    dminus: f64,
}

impl SubspaceBasis {
    pub fn new(model: &ToyModel, vectors: Vec<CVector>) -> Result<SubspaceBasis> {
        for v in &vectors {
            if v.len() != model.n() {
                return Err(Error::DimensionMismatch {
                    expected: model.n(),
                    got: v.len(),
                });
            }
        }
        let dev = gram_deviation(&vectors);
        if dev > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal(dev));
        }
        let pplus = model.pplus();
        let dplus: f64 = vectors.iter().map(|f| inner(f, &(pplus * f)).re).sum();
        let dminus = vectors.len() as f64 - dplus;
        Ok(SubspaceBasis {
            vectors,
            dplus,
            dminus,
        })
    }

    /// Orthonormal basis of a random `d`-dimensional subspace.
    pub fn random<R: Rng + ?Sized>(model: &ToyModel, d: usize, rng: &mut R) -> Result<SubspaceBasis> {
        check_dim(model, d)?;
        let u = random_unitary(rng, model.n());
        Self::new(model, u.columns(0, d).column_iter().map(|c| c.into_owned()).collect())
    }

    /// A random `d`-dimensional subspace with `C𝓀 = 𝓀`, spanned by real
    /// combinations of a `C`-fixed basis (so every vector is itself fixed).
    pub fn random_c_invariant<R: Rng + ?Sized>(model: &ToyModel, d: usize, rng: &mut R) -> Result<SubspaceBasis> {
        check_dim(model, d)?;
        let fixed = c_invariant_onb(model.conjugation(), None)?.matrix();
        let o = crate::linalg::random_orthogonal(rng, model.n());
        let mix = fixed * o.map(C64::from);
        Self::new(model, mix.columns(0, d).column_iter().map(|c| c.into_owned()).collect())
    }

    /// Pairwise orthogonal random subspaces of the given dimensions.
    pub fn random_orthogonal_family<R: Rng + ?Sized>(
        model: &ToyModel,
        dims: &[usize],
        rng: &mut R,
    ) -> Result<Vec<SubspaceBasis>> {
        check_dim(model, dims.iter().sum())?;
        let u = random_unitary(rng, model.n());
        let cols: Vec<CVector> = u.column_iter().map(|c| c.into_owned()).collect();
        let mut start = 0;
        let mut out = Vec::new();
        for &d in dims {
            out.push(Self::new(model, cols[start..start + d].to_vec())?);
            start += d;
        }
        Ok(out)
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `tr(P_𝓀 P₊)`.
    pub fn dplus(&self) -> f64 {
        self.dplus
    }

    /// `tr(P_𝓀 P₋)`.
    pub fn dminus(&self) -> f64 {
        self.dminus
    }

    /// Basis `(Σ_i U_{ij} f_i)_j` of the same subspace.
    pub fn rotated(&self, model: &ToyModel, u: &CMatrix) -> Result<SubspaceBasis> {
        let d = self.len();
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: u.nrows(),
            });
        }
        let vectors = (0..d)
            .map(|j| {
                let mut v = CVector::zeros(model.n());
                for i in 0..d {
                    v += &self.vectors[i] * u[(i, j)];
                }
                v
            })
            .collect();
        Self::new(model, vectors)
    }

    /// Direct sum with an orthogonal subspace.
    pub fn direct_sum(&self, model: &ToyModel, other: &SubspaceBasis) -> Result<SubspaceBasis> {
        let overlap = max_overlap(self, other);
        if overlap > ORTHONORMAL_TOL {
            return Err(Error::NotOrthogonal(overlap));
        }
        let mut v = self.vectors.clone();
        v.extend(other.vectors.iter().cloned());
        Self::new(model, v)
    }

    /// `M⁺_{ij} = ⟨f_i, P₊ f_j⟩` for `i, j < J`.
    pub fn m_plus(&self, model: &ToyModel, j: usize) -> CMatrix {
        let pplus = model.pplus();
        let pf: Vec<CVector> = self.vectors[..j].iter().map(|f| pplus * f).collect();
        CMatrix::from_fn(j, j, |a, b| inner(&self.vectors[a], &pf[b]))
    }

    /// Projector `P_J` onto the first `J` basis vectors.
    pub fn projector(&self, model: &ToyModel, j: usize) -> CMatrix {
        crate::linalg::projector(&self.vectors[..j], model.n())
    }
}

fn check_dim(model: &ToyModel, d: usize) -> Result<()> {
    if d > model.n() {
        return Err(Error::OutOfRange {
            what: "subspace dimension",
            detail: format!("{d} > {}", model.n()),
        });
    }
    Ok(())
}

fn max_overlap(a: &SubspaceBasis, b: &SubspaceBasis) -> f64 {
    let mut m = 0.0_f64;
    for f in &a.vectors {
        for g in &b.vectors {
            m = m.max(inner(f, g).norm());
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChargeKind {
    Subspace,
    Tilde,
    Total,
    Weighted,
    Truncated,
}

#[derive(Debug, Clone)]
pub struct ChargeOperator {
    pub matrix: FockOperator,
    pub kind: ChargeKind,
}

impl ChargeOperator {
    pub fn hermiticity_deviation(&self) -> f64 {
        self.matrix.hermiticity_deviation()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.hermitian_eigenvalues()
    }
}

/// `T_j = :Ψ*(f_j)Ψ(f_j):` for each basis vector, in order.
pub fn densities(model: &ToyModel, basis: &SubspaceBasis) -> Result<Vec<FockOperator>> {
    basis.vectors.iter().map(|f| model.normal_ordered_density(f)).collect()
}

fn sum_ops(dim: usize, ops: impl IntoIterator<Item = FockOperator>) -> FockOperator {
    ops.into_iter().fold(FockOperator::zero(dim), |acc, t| &acc + &t)
}

pub fn q_subspace(model: &ToyModel, basis: &SubspaceBasis) -> Result<ChargeOperator> {
    Ok(ChargeOperator {
        matrix: sum_ops(model.fock_dim(), densities(model, basis)?),
        kind: ChargeKind::Subspace,
    })
}

/// First `J` terms of the defining sum.
pub fn truncated_q(model: &ToyModel, basis: &SubspaceBasis, j: usize) -> Result<ChargeOperator> {
    if j > basis.len() {
        return Err(Error::OutOfRange {
            what: "truncation index",
            detail: format!("J = {j} > d = {}", basis.len()),
        });
    }
    let ops: Result<Vec<FockOperator>> = basis.vectors[..j]
        .iter()
        .map(|f| model.normal_ordered_density(f))
        .collect();
    Ok(ChargeOperator {
        matrix: sum_ops(model.fock_dim(), ops?),
        kind: ChargeKind::Truncated,
    })
}

/// `Σ_j m_j T_j` with weights in `[0, 1]`.
pub fn q_weighted(model: &ToyModel, basis: &SubspaceBasis, weights: &[f64]) -> Result<ChargeOperator> {
    if weights.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            got: weights.len(),
        });
    }
    if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        return Err(Error::OutOfRange {
            what: "weight",
            detail: format!("{w} not in [0, 1]"),
        });
    }
    let terms = densities(model, basis)?
        .into_iter()
        .zip(weights)
        .map(|(t, &w)| t.scale(C64::from(w)));
    Ok(ChargeOperator {
        matrix: sum_ops(model.fock_dim(), terms),
        kind: ChargeKind::Weighted,
    })
}

/// `Q̃ = Σ_j (b*(f_j)b(f_j) − c*(f_j)c(f_j))`.
pub fn q_tilde(model: &ToyModel, basis: &SubspaceBasis) -> Result<ChargeOperator> {
    let mut acc = FockOperator::zero(model.fock_dim());
    for f in &basis.vectors {
        let bb = &model.creator_b(f)? * &model.annihilator_b(f)?;
        let cc = &model.creator_c(f)? * &model.annihilator_c(f)?;
        acc = &acc + &(&bb - &cc);
    }
    Ok(ChargeOperator {
        matrix: acc,
        kind: ChargeKind::Tilde,
    })
}

/// `Q = Σ_a b*(u_a)b(u_a) − Σ_b c*(v_b)c(v_b)` over bases of `h₊` and `h₋`.
pub fn q_total(model: &ToyModel) -> Result<ChargeOperator> {
    let mut acc = FockOperator::zero(model.fock_dim());
    for u in model.basis_plus() {
        acc = &acc + &(&model.creator_b(u)? * &model.annihilator_b(u)?);
    }
    for v in model.basis_minus() {
        acc = &acc - &(&model.creator_c(v)? * &model.annihilator_c(v)?);
    }
    Ok(ChargeOperator {
        matrix: acc,
        kind: ChargeKind::Total,
    })
}

/// `{−d⁻ + q : q = 0..d}`.
pub fn predicted_spectrum(basis: &SubspaceBasis) -> Vec<f64> {
    (0..=basis.len()).map(|q| q as f64 - basis.dminus).collect()
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub clusters: Vec<Cluster>,
    pub predicted: Vec<f64>,
    /// Largest distance of an eigenvalue from its predicted value.
    pub error: f64,
    pub hermiticity: f64,
}

impl SpectrumReport {
    pub fn multiplicities(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.count).collect()
    }
}

pub fn spectrum_report(q: &ChargeOperator, predicted: Vec<f64>) -> SpectrumReport {
    let ev = q.eigenvalues();
    let clusters = cluster_values(&ev, CLUSTER_GAP);
    let error = lattice_match_error(&clusters, &predicted);
    SpectrumReport {
        clusters,
        predicted,
        error,
        hermiticity: q.hermiticity_deviation(),
    }
}

pub fn q_subspace_spectrum(model: &ToyModel, basis: &SubspaceBasis) -> Result<SpectrumReport> {
    Ok(spectrum_report(&q_subspace(model, basis)?, predicted_spectrum(basis)))
}

/// Max entry deviation between `Q` built from `(f_j)` and from `(Σ_i U_{ij} f_i)`.
pub fn q_basis_independence_check(model: &ToyModel, basis: &SubspaceBasis, u: &CMatrix) -> Result<f64> {
    let q = q_subspace(model, basis)?;
    let q2 = q_subspace(model, &basis.rotated(model, u)?)?;
    Ok(q.matrix.max_abs_diff(&q2.matrix))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdditivityReport {
    pub commutator: f64,
    pub additivity: f64,
}

/// `‖[Q₁, Q₂]‖` and `‖Q_{𝓀₁⊕𝓀₂} − Q₁ − Q₂‖` for orthogonal subspaces.
pub fn q_additivity_and_commutation(
    model: &ToyModel,
    basis1: &SubspaceBasis,
    basis2: &SubspaceBasis,
) -> Result<AdditivityReport> {
    let sum = basis1.direct_sum(model, basis2)?;
    let q1 = q_subspace(model, basis1)?.matrix;
    let q2 = q_subspace(model, basis2)?.matrix;
    let q12 = q_subspace(model, &sum)?.matrix;
    Ok(AdditivityReport {
        commutator: q1.commutator(&q2).max_abs(),
        additivity: q12.max_abs_diff(&(&q1 + &q2)),
    })
}

/// `‖[Q_{𝒜⊕ℬ}, Q_{𝒜⊕𝒞}]‖` for mutually orthogonal `𝒜, ℬ, 𝒞`.
pub fn q_overlap_commutator(
    model: &ToyModel,
    a: &SubspaceBasis,
    b: &SubspaceBasis,
    c: &SubspaceBasis,
) -> Result<f64> {
    b.direct_sum(model, c)?;
    let ab = a.direct_sum(model, b)?;
    let ac = a.direct_sum(model, c)?;
    let q1 = q_subspace(model, &ab)?.matrix;
    let q2 = q_subspace(model, &ac)?.matrix;
    Ok(q1.commutator(&q2).max_abs())
}

/// Max pairwise commutator among the densities `T_j`.
pub fn density_commutators(model: &ToyModel, basis: &SubspaceBasis) -> Result<f64> {
    let t = densities(model, basis)?;
    let mut dev = 0.0_f64;
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            dev = dev.max(t[i].commutator(&t[j]).max_abs());
        }
    }
    Ok(dev)
}

/// Witnesses shorter than this are rounding residue of a vanishing product.
const WITNESS_FLOOR: f64 = 1e-8;

/// Residuals of `φ_j = Ψ(f_d)…Ψ(f_{j+1}) Ψ*(f_j)…Ψ*(f_1) Ω` as eigenvectors of
/// `Σ_i Ψ*(f_i)Ψ(f_i)` with eigenvalue `j`, for `j = 0..d`. Also returns the
/// smallest witness norm. In a finite model `φ_j` vanishes once `j > d⁺` or
/// `d − j > d⁻`, so the norm is only bounded away from zero for `d ≤ min(d⁺, d⁻)`.
pub fn eigenvector_witnesses(model: &ToyModel, basis: &SubspaceBasis) -> Result<(f64, f64)> {
    let d = basis.len();
    let fields: Vec<FockOperator> = basis.vectors.iter().map(|f| model.field(f)).collect::<Result<_>>()?;
    let adj: Vec<FockOperator> = fields.iter().map(FockOperator::adjoint).collect();
    let number = (0..d).fold(FockOperator::zero(model.fock_dim()), |acc, i| {
        &acc + &(&adj[i] * &fields[i])
    });
    let mut residual = 0.0_f64;
    let mut min_norm = f64::INFINITY;
    for j in 0..=d {
        let mut v = model.vacuum().amplitudes;
        for op in &adj[..j] {
            v = op.apply(&v);
        }
        for op in &fields[j..] {
            v = op.apply(&v);
        }
        let norm = v.norm();
        min_norm = min_norm.min(norm);
        if norm > WITNESS_FLOOR {
            let r = number.apply(&v) - &v * C64::from(j as f64);
            residual = residual.max(r.norm() / norm);
        }
    }
    Ok((residual, min_norm))
}

/// `tr(M⁺) − tr((M⁺)²)` for the first `J` basis vectors.
pub fn trace_formula(model: &ToyModel, basis: &SubspaceBasis, j: usize) -> f64 {
    let m = basis.m_plus(model, j);
    (m.trace() - (&m * &m).trace()).re
}

/// `|‖Q^J Ω‖² − (tr(M⁺) − tr((M⁺)²))|`.
pub fn vacuum_norm_deviation(model: &ToyModel, basis: &SubspaceBasis, j: usize) -> Result<f64> {
    let q = truncated_q(model, basis, j)?;
    let v = q.matrix.apply(&model.vacuum().amplitudes);
    Ok((v.norm_squared() - trace_formula(model, basis, j)).abs())
}

/// `coeff · b*(g_1)…b*(g_{n₀}) c*(h_1)…c*(h_{m₀}) Ω`.
#[derive(Debug, Clone)]
pub struct CreatorTerm {
    pub coeff: C64,
    pub particles: Vec<CVector>,
    pub antiparticles: Vec<CVector>,
}

/// A finite sum of [`CreatorTerm`]s sharing the sector `(n₀, m₀)`.
#[derive(Debug, Clone)]
pub struct CreatorState {
    terms: Vec<CreatorTerm>,
    sector: (usize, usize),
}

impl CreatorState {
    pub fn new(terms: Vec<CreatorTerm>) -> Result<CreatorState> {
        let first = terms
            .first()
            .ok_or_else(|| Error::NoTopSector("empty sum".into()))?;
        let sector = (first.particles.len(), first.antiparticles.len());
        if terms
            .iter()
            .any(|t| (t.particles.len(), t.antiparticles.len()) != sector)
        {
            return Err(Error::NoTopSector("terms with different particle numbers".into()));
        }
        Ok(CreatorState { terms, sector })
    }

    pub fn vacuum() -> CreatorState {
        CreatorState {
            terms: vec![CreatorTerm {
                coeff: ONE,
                particles: vec![],
                antiparticles: vec![],
            }],
            sector: (0, 0),
        }
    }

    pub fn sector(&self) -> (usize, usize) {
        self.sector
    }

    pub fn terms(&self) -> &[CreatorTerm] {
        &self.terms
    }

    pub fn to_fock(&self, model: &ToyModel) -> Result<FockVector> {
        let mut total = CVector::zeros(model.fock_dim());
        for t in &self.terms {
            let mut v = model.vacuum().amplitudes;
            for h in t.antiparticles.iter().rev() {
                v = model.creator_c(h)?.apply(&v);
            }
            for g in t.particles.iter().rev() {
                v = model.creator_b(g)?.apply(&v);
            }
            total += v * t.coeff;
        }
        if total.norm() == 0.0 {
            return Err(Error::NoTopSector("state vanishes".into()));
        }
        Ok(FockVector { amplitudes: total })
    }
}

/// The sector norm `‖(Q^J ψ)^{(n₀+1,m₀+1)}‖²` and its four-sum decomposition,
/// evaluated both with Fock matrices and with one-particle kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub sector_norm: f64,
    /// `‖Σ_i b*(f_i)c*(f_i)ψ‖²`, equal to `sector_norm`.
    pub pair_norm: f64,
    pub direct: [f64; 4],
    pub kernel: [f64; 4],
    /// `|sector_norm − (s1 − s2 − s3 + s4)|` with the direct sums.
    pub residual: f64,
    pub kernel_residual: f64,
    /// Largest difference between a direct sum and its kernel form.
    pub route_deviation: f64,
}

pub fn sector_norm_decomposition(
    model: &ToyModel,
    basis: &SubspaceBasis,
    j: usize,
    state: &CreatorState,
) -> Result<Decomposition> {
    if j > basis.len() {
        return Err(Error::OutOfRange {
            what: "truncation index",
            detail: format!("J = {j} > d = {}", basis.len()),
        });
    }
    let psi = state.to_fock(model)?.amplitudes;
    let (n0, m0) = state.sector();
    let fs = &basis.vectors[..j];
    let q = truncated_q(model, basis, j)?;
    let qpsi = FockVector {
        amplitudes: q.matrix.apply(&psi),
    };
    let sector_norm = model.project_sector(&qpsi, n0 + 1, m0 + 1).norm().powi(2);

    let bs: Vec<FockOperator> = fs.iter().map(|f| model.annihilator_b(f)).collect::<Result<_>>()?;
    let cs: Vec<FockOperator> = fs.iter().map(|f| model.annihilator_c(f)).collect::<Result<_>>()?;
    let mut pair = CVector::zeros(model.fock_dim());
    let mut lowered = CVector::zeros(model.fock_dim());
    for i in 0..j {
        let cpsi = cs[i].apply(&psi);
        pair += model.creator_b(&fs[i])?.apply(&model.creator_c(&fs[i])?.apply(&psi));
        lowered += bs[i].apply(&cpsi);
    }
    let bpsi: Vec<CVector> = bs.iter().map(|b| b.apply(&psi)).collect();
    let cpsi: Vec<CVector> = cs.iter().map(|c| c.apply(&psi)).collect();
    let mp = basis.m_plus(model, j);
    let mm = CMatrix::identity(j, j) - &mp;
    let norm2 = psi.norm_squared();
    let s1 = (mp.trace() - (&mp * &mp).trace()).re * norm2;
    let mut s2 = ZERO;
    let mut s3 = ZERO;
    for a in 0..j {
        for b in 0..j {
            s2 += mp[(a, b)] * inner(&cpsi[b], &cpsi[a]);
            s3 += mm[(b, a)] * inner(&bpsi[b], &bpsi[a]);
        }
    }
    let direct = [s1, s2.re, s3.re, lowered.norm_squared()];
    let kernel = kernel_sums(model, basis, j, state);
    let combine = |s: &[f64; 4]| s[0] - s[1] - s[2] + s[3];
    let route_deviation = direct
        .iter()
        .zip(&kernel)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(Decomposition {
        sector_norm,
        pair_norm: pair.norm_squared(),
        direct,
        kernel,
        residual: (sector_norm - combine(&direct)).abs(),
        kernel_residual: (sector_norm - combine(&kernel)).abs(),
        route_deviation,
    })
}

/// Determinant of the matrix `entry(a, b)` over the kept index lists.
fn det_of(rows: &[usize], cols: &[usize], entry: impl Fn(usize, usize) -> C64) -> C64 {
    if rows.is_empty() {
        return ONE;
    }
    CMatrix::from_fn(rows.len(), cols.len(), |a, b| entry(rows[a], cols[b])).determinant()
}

fn without(n: usize, skip: Option<usize>) -> Vec<usize> {
    (0..n).filter(|&i| Some(i) != skip).collect()
}

/// `⟨φ_r(u, k), φ_s(v, l)⟩` as a product of the particle and antiparticle
/// overlap determinants; `None` keeps the full product.
#[allow(clippy::too_many_arguments)]
fn reduced_overlap(
    model: &ToyModel,
    r: &CreatorTerm,
    s: &CreatorTerm,
    u: Option<usize>,
    v: Option<usize>,
    k: Option<usize>,
    l: Option<usize>,
) -> C64 {
    let pplus = model.pplus();
    let pminus = model.pminus();
    let gp = det_of(&without(r.particles.len(), u), &without(s.particles.len(), v), |a, b| {
        inner(&r.particles[a], &(pplus * &s.particles[b]))
    });
    let hp = det_of(
        &without(r.antiparticles.len(), k),
        &without(s.antiparticles.len(), l),
        |a, b| inner(&s.antiparticles[b], &(&pminus * &r.antiparticles[a])),
    );
    gp * hp
}

fn sign(a: usize, b: usize) -> f64 {
    if (a + b).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn kernel_sums(model: &ToyModel, basis: &SubspaceBasis, j: usize, state: &CreatorState) -> [f64; 4] {
    let pplus = model.pplus().clone();
    let pminus = model.pminus();
    let pj = basis.projector(model, j);
    let k2 = &pminus * &pj * &pplus * &pj * &pminus;
    let k3 = &pplus * &pj * &pminus * &pj * &pplus;
    let k4 = &pplus * &pj * &pminus;
    let (n0, m0) = state.sector();
    let mut norm2 = ZERO;
    let mut s2 = ZERO;
    let mut s3 = ZERO;
    let mut s4 = ZERO;
    for r in state.terms() {
        for s in state.terms() {
            let w = r.coeff.conj() * s.coeff;
            norm2 += w * reduced_overlap(model, r, s, None, None, None, None);
            for k in 0..m0 {
                for l in 0..m0 {
                    let ker = inner(&s.antiparticles[l], &(&k2 * &r.antiparticles[k]));
                    s2 += w * sign(k, l) * ker * reduced_overlap(model, r, s, None, None, Some(k), Some(l));
                }
            }
            for u in 0..n0 {
                for v in 0..n0 {
                    let ker = inner(&r.particles[u], &(&k3 * &s.particles[v]));
                    s3 += w * sign(u, v) * ker * reduced_overlap(model, r, s, Some(u), Some(v), None, None);
                }
            }
            for u in 0..n0 {
                for k in 0..m0 {
                    let left = inner(&r.particles[u], &(&k4 * &r.antiparticles[k]));
                    for v in 0..n0 {
                        for l in 0..m0 {
                            let right = inner(&s.particles[v], &(&k4 * &s.antiparticles[l])).conj();
                            let ov = reduced_overlap(model, r, s, Some(u), Some(v), Some(k), Some(l));
                            s4 += w * sign(u + v, k + l) * left * right * ov;
                        }
                    }
                }
            }
        }
    }
    let s1 = trace_formula(model, basis, j) * norm2.re;
    [s1, s2.re, s3.re, s4.re]
}
