//! Finite-mode fermionic Fock space over a toy one-particle space `ℂⁿ = h₊ ⊕ h₋`.
//!
//! Occupation bitstrings carry the `d⁺` particle modes in the low bits and the
//! `d⁻` antiparticle modes above them. Mode operators use the Jordan–Wigner
//! sign `(−1)^{#occupied modes below}`, so an antiparticle creator picks up
//! the parity of the particle number automatically.

use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;

use crate::error::{Error, Result};
use crate::involution::{make_involution, AntiUnitary};
use crate::linalg::{
    columns, gram_deviation, inner, max_abs_diff, random_orthogonal, random_unitary, unitarity_deviation,
    CMatrix, CVector, C64, ONE, ZERO,
};

/// Largest supported number of Fock modes (`2^14` basis states).
pub const MAX_MODES: usize = 14;

/// Sparse complex matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl FockOperator {
    pub fn zero(dim: usize) -> Self {
        FockOperator {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, ONE)
    }

    pub fn scaled_identity(dim: usize, z: C64) -> Self {
        if z == ZERO {
            return Self::zero(dim);
        }
        FockOperator {
            dim,
            row_ptr: (0..=dim).collect(),
            cols: (0..dim).collect(),
            vals: vec![z; dim],
        }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        FockOperator {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn from_dense(m: &CMatrix) -> Self {
        let mut t = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != ZERO {
                    t.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let t = self.triplets().map(|(i, j, v)| (j, i, v.conj())).collect();
        Self::from_triplets(self.dim, t)
    }

    pub fn scale(&self, z: C64) -> Self {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= z;
        }
        out
    }

    fn combine(&self, other: &Self, b: C64) -> Self {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        let t = self
            .triplets()
            .chain(other.triplets().map(|(i, j, v)| (i, j, b * v)))
            .collect();
        Self::from_triplets(self.dim, t)
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        let mut out = CVector::zeros(self.dim);
        for i in 0..self.dim {
            out[i] = self.row(i).map(|(j, a)| a * v[j]).sum();
        }
        out
    }

    /// `AB + BA`.
    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    /// `AB − BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Largest entry magnitude, used as the operator-norm proxy throughout.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self - other).max_abs()
    }

    /// `max |A − z·I|` entrywise.
    pub fn deviation_from_scalar(&self, z: C64) -> f64 {
        self.max_abs_diff(&Self::scaled_identity(self.dim, z))
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// Eigenvalues (ascending) of a Hermitian operator by dense diagonalization.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        crate::linalg::hermitian_eigenvalues(&self.to_dense())
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;

    fn mul(self, rhs: &FockOperator) -> FockOperator {
        assert_eq!(self.dim, rhs.dim, "operator dimensions differ");
        let n = self.dim;
        let mut acc = vec![ZERO; n];
        let mut mark = vec![usize::MAX; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..n {
            touched.clear();
            for (k, a) in self.row(i) {
                for (j, b) in rhs.row(k) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = ZERO;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                if acc[j] != ZERO {
                    cols.push(j);
                    vals.push(acc[j]);
                }
            }
            row_ptr.push(cols.len());
        }
        FockOperator {
            dim: n,
            row_ptr,
            cols,
            vals,
        }
    }
}

impl Add for &FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: &FockOperator) -> FockOperator {
        self.combine(rhs, ONE)
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: &FockOperator) -> FockOperator {
        self.combine(rhs, -ONE)
    }
}

impl Neg for &FockOperator {
    type Output = FockOperator;
    fn neg(self) -> FockOperator {
        self.scale(-ONE)
    }
}

/// A state in the Fock space of a [`ToyModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    pub amplitudes: CVector,
}

impl FockVector {
    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn inner(&self, other: &FockVector) -> C64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn apply(op: &FockOperator, v: &FockVector) -> FockVector {
        FockVector {
            amplitudes: op.apply(&v.amplitudes),
        }
    }
}

/// One-particle space with the split `P₊ + P₋ = I` and a charge conjugation
/// exchanging the two ranges.
#[derive(Debug, Clone)]
pub struct ToyModel {
    n: usize,
    pplus: CMatrix,
    c: AntiUnitary,
    basis_plus: Vec<CVector>,
    basis_minus: Vec<CVector>,
    basis_antip: Vec<CVector>,
}

const MODEL_TOL: f64 = 1e-12;

impl ToyModel {
    /// Validates `P₊` and `C` and diagonalizes `P₊` for the mode bases.
    pub fn new(pplus: CMatrix, c: AntiUnitary) -> Result<ToyModel> {
        Self::check(&pplus, &c)?;
        let eig = pplus.clone().symmetric_eigen();
        let vecs = columns(&eig.eigenvectors);
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for (v, &ev) in vecs.into_iter().zip(eig.eigenvalues.iter()) {
            if ev > 0.5 {
                plus.push(v);
            } else {
                minus.push(v);
            }
        }
        Self::with_bases(pplus, c, plus, minus)
    }

    fn check(pplus: &CMatrix, c: &AntiUnitary) -> Result<()> {
        let n = pplus.nrows();
        if pplus.ncols() != n {
            return Err(Error::NotSquare(n, pplus.ncols()));
        }
        if c.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: c.dim(),
            });
        }
        let proj = max_abs_diff(pplus, &(pplus * pplus)).max(max_abs_diff(pplus, &pplus.adjoint()));
        if proj > MODEL_TOL {
            return Err(Error::NotProjector(proj));
        }
        let pminus = CMatrix::identity(n, n) - pplus;
        let pair = max_abs_diff(&c.conjugate_operator(&pminus), pplus);
        if pair > MODEL_TOL {
            return Err(Error::NotConjugationPair(pair));
        }
        Ok(())
    }

    /// Uses given orthonormal bases of `h₊` and `h₋`; the antiparticle basis is
    /// `w_b = C v_b`.
    fn with_bases(
        pplus: CMatrix,
        c: AntiUnitary,
        basis_plus: Vec<CVector>,
        basis_minus: Vec<CVector>,
    ) -> Result<ToyModel> {
        let n = pplus.nrows();
        let modes = basis_plus.len() + basis_minus.len();
        if modes > MAX_MODES {
            return Err(Error::OutOfRange {
                what: "mode count",
                detail: format!("{modes} > {MAX_MODES}"),
            });
        }
        let basis_antip = basis_minus.iter().map(|v| c.apply(v)).collect();
        Ok(ToyModel {
            n,
            pplus,
            c,
            basis_plus,
            basis_minus,
            basis_antip,
        })
    }

    /// Random model on `ℂ^{2d}` with `dim h₊ = dim h₋ = d`: `P₊ = W diag(I, 0) W*`
    /// and `U = W S Wᵀ` where `S` pairs the two halves by a random real
    /// orthogonal matrix, so `C P₋ C = P₊` holds by construction.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Result<ToyModel> {
        let n = 2 * d;
        let w = random_unitary(rng, n);
        let o = random_orthogonal(rng, d);
        let mut s = CMatrix::zeros(n, n);
        for i in 0..d {
            for j in 0..d {
                s[(d + i, j)] = C64::from(o[(i, j)]);
                s[(i, d + j)] = C64::from(o[(j, i)]);
            }
        }
        let u = &w * s * w.transpose();
        let c = make_involution(&u)?;
        let mut diag = CMatrix::zeros(n, n);
        for i in 0..d {
            diag[(i, i)] = ONE;
        }
        let pplus = &w * diag * w.adjoint();
        let wc = columns(&w);
        let plus = wc[..d].to_vec();
        let minus = wc[d..].to_vec();
        Self::check(&pplus, &c)?;
        Self::with_bases(pplus, c, plus, minus)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dplus(&self) -> usize {
        self.basis_plus.len()
    }

    pub fn dminus(&self) -> usize {
        self.basis_minus.len()
    }

    pub fn modes(&self) -> usize {
        self.dplus() + self.dminus()
    }

    pub fn fock_dim(&self) -> usize {
        1 << self.modes()
    }

    pub fn pplus(&self) -> &CMatrix {
        &self.pplus
    }

    pub fn pminus(&self) -> CMatrix {
        CMatrix::identity(self.n, self.n) - &self.pplus
    }

    pub fn conjugation(&self) -> &AntiUnitary {
        &self.c
    }

    pub fn basis_plus(&self) -> &[CVector] {
        &self.basis_plus
    }

    pub fn basis_minus(&self) -> &[CVector] {
        &self.basis_minus
    }

    pub fn basis_antip(&self) -> &[CVector] {
        &self.basis_antip
    }

    /// Max deviation of the mode bases from orthonormality and of `U` from unitarity.
    pub fn basis_deviation(&self) -> f64 {
        let mut all = self.basis_plus.clone();
        all.extend(self.basis_minus.iter().cloned());
        gram_deviation(&all)
            .max(gram_deviation(&self.basis_antip))
            .max(unitarity_deviation(&self.c.matrix()))
    }

    fn check_vector(&self, f: &CVector) -> Result<()> {
        if f.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: f.len(),
            });
        }
        Ok(())
    }

    /// `(n, m)`: occupied particle and antiparticle modes of a basis state.
    pub fn sector_of(&self, state: usize) -> (usize, usize) {
        let d = self.dplus();
        let mask = (1usize << d) - 1;
        ((state & mask).count_ones() as usize, (state >> d).count_ones() as usize)
    }

    pub fn vacuum(&self) -> FockVector {
        let mut amplitudes = CVector::zeros(self.fock_dim());
        amplitudes[0] = ONE;
        FockVector { amplitudes }
    }

    pub fn project_sector(&self, v: &FockVector, n: usize, m: usize) -> FockVector {
        let amplitudes = CVector::from_fn(v.amplitudes.len(), |s, _| {
            if self.sector_of(s) == (n, m) {
                v.amplitudes[s]
            } else {
                ZERO
            }
        });
        FockVector { amplitudes }
    }

    /// Orthogonal projector onto the span of the sectors satisfying `keep`.
    pub fn sector_projector(&self, keep: impl Fn(usize, usize) -> bool) -> FockOperator {
        let t = (0..self.fock_dim())
            .filter(|&s| {
                let (n, m) = self.sector_of(s);
                keep(n, m)
            })
            .map(|s| (s, s, ONE))
            .collect();
        FockOperator::from_triplets(self.fock_dim(), t)
    }

    /// `Σ_a coeff_a a_a†` over Fock modes `offset..offset+coeffs.len()`.
    fn creator_combination(&self, offset: usize, coeffs: &[C64]) -> FockOperator {
        let dim = self.fock_dim();
        let mut t = Vec::new();
        for s in 0..dim {
            for (a, &z) in coeffs.iter().enumerate() {
                if z == ZERO {
                    continue;
                }
                let bit = 1usize << (offset + a);
                if s & bit == 0 {
                    let sign = if (s & (bit - 1)).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
                    t.push((s | bit, s, z * sign));
                }
            }
        }
        FockOperator::from_triplets(dim, t)
    }

    /// Number operator of a single Fock mode.
    pub fn mode_number(&self, mode: usize) -> FockOperator {
        let t = (0..self.fock_dim())
            .filter(|s| s & (1 << mode) != 0)
            .map(|s| (s, s, ONE))
            .collect();
        FockOperator::from_triplets(self.fock_dim(), t)
    }

    /// Coefficients `⟨u_a, P₊ f⟩` of the particle part.
    pub fn particle_coefficients(&self, f: &CVector) -> Vec<C64> {
        let pf = &self.pplus * f;
        self.basis_plus.iter().map(|u| inner(u, &pf)).collect()
    }

    /// Coefficients `⟨w_b, C P₋ f⟩` of the antiparticle part (anti-linear in `f`).
    pub fn antiparticle_coefficients(&self, f: &CVector) -> Vec<C64> {
        let cpf = self.c.apply(&(self.pminus() * f));
        self.basis_antip.iter().map(|w| inner(w, &cpf)).collect()
    }

    /// `b*(f)`, linear in `f`.
    pub fn creator_b(&self, f: &CVector) -> Result<FockOperator> {
        self.check_vector(f)?;
        Ok(self.creator_combination(0, &self.particle_coefficients(f)))
    }

    /// `b(f)`, anti-linear in `f`.
    pub fn annihilator_b(&self, f: &CVector) -> Result<FockOperator> {
        Ok(self.creator_b(f)?.adjoint())
    }

    /// `c*(f)`: creates the antiparticle `C P₋ f`, anti-linear in `f`.
    pub fn creator_c(&self, f: &CVector) -> Result<FockOperator> {
        self.check_vector(f)?;
        Ok(self.creator_combination(self.dplus(), &self.antiparticle_coefficients(f)))
    }

    /// `c(f)`, linear in `f`.
    pub fn annihilator_c(&self, f: &CVector) -> Result<FockOperator> {
        Ok(self.creator_c(f)?.adjoint())
    }

    /// `Ψ(f) = b(f) + c*(f)`.
    pub fn field(&self, f: &CVector) -> Result<FockOperator> {
        Ok(&self.annihilator_b(f)? + &self.creator_c(f)?)
    }

    /// `Ψ*(f) = b*(f) + c(f)`.
    pub fn field_adjoint(&self, f: &CVector) -> Result<FockOperator> {
        Ok(&self.creator_b(f)? + &self.annihilator_c(f)?)
    }

    /// `:Ψ*(f)Ψ(f): = Ψ*(f)Ψ(f) − ‖P₋f‖²` for a unit vector `f`.
    pub fn normal_ordered_density(&self, f: &CVector) -> Result<FockOperator> {
        self.check_vector(f)?;
        let norm = f.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(norm));
        }
        let prod = &self.field_adjoint(f)? * &self.field(f)?;
        let shift = (self.pminus() * f).norm_squared();
        Ok(&prod - &FockOperator::scaled_identity(self.fock_dim(), C64::from(shift)))
    }

    /// `N₊` and `N₋`, the particle and antiparticle number operators.
    pub fn number_operators(&self) -> (FockOperator, FockOperator) {
        let mut np = Vec::new();
        let mut nm = Vec::new();
        for s in 0..self.fock_dim() {
            let (n, m) = self.sector_of(s);
            if n > 0 {
                np.push((s, s, C64::from(n as f64)));
            }
            if m > 0 {
                nm.push((s, s, C64::from(m as f64)));
            }
        }
        (
            FockOperator::from_triplets(self.fock_dim(), np),
            FockOperator::from_triplets(self.fock_dim(), nm),
        )
    }
}

/// Largest deviations from the anticommutation relations for one pair `(f, g)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarDeviations {
    /// `{b(g), b*(f)} = ⟨g, P₊f⟩`.
    pub particle: f64,
    /// `{c(g), c*(f)} = ⟨g, P₋f⟩*`.
    pub antiparticle: f64,
    /// Every `{b#, c%}` and the creator–creator and annihilator–annihilator pairs.
    pub vanishing: f64,
    /// `{Ψ*(f), Ψ(g)} = ⟨g, f⟩`.
    pub field: f64,
    /// `{Ψ(f), Ψ(g)} = 0` and `{Ψ*(f), Ψ*(g)} = 0`.
    pub field_vanishing: f64,
}

impl CarDeviations {
    pub fn max(&self) -> f64 {
        self.particle
            .max(self.antiparticle)
            .max(self.vanishing)
            .max(self.field)
            .max(self.field_vanishing)
    }
}

pub fn car_deviations(model: &ToyModel, f: &CVector, g: &CVector) -> Result<CarDeviations> {
    let bf = model.annihilator_b(f)?;
    let bsf = model.creator_b(f)?;
    let cf = model.annihilator_c(f)?;
    let csf = model.creator_c(f)?;
    let bg = model.annihilator_b(g)?;
    let bsg = model.creator_b(g)?;
    let cg = model.annihilator_c(g)?;
    let csg = model.creator_c(g)?;

    let pf = model.pplus() * f;
    let mf = model.pminus() * f;
    let particle = bg.anticommutator(&bsf).deviation_from_scalar(inner(g, &pf));
    let antiparticle = cg.anticommutator(&csf).deviation_from_scalar(inner(g, &mf).conj());

    let mut vanishing = 0.0_f64;
    let pairs = [
        (&bf, &bg),
        (&bsf, &bsg),
        (&cf, &cg),
        (&csf, &csg),
        (&bf, &cg),
        (&bf, &csg),
        (&bsf, &cg),
        (&bsf, &csg),
        (&cf, &bg),
        (&cf, &bsg),
        (&csf, &bg),
        (&csf, &bsg),
    ];
    for (a, b) in pairs {
        vanishing = vanishing.max(a.anticommutator(b).max_abs());
    }

    let psi_f = &bf + &csf;
    let psi_g = &bg + &csg;
    let psi_star_f = psi_f.adjoint();
    let psi_star_g = psi_g.adjoint();
    let field = psi_star_f.anticommutator(&psi_g).deviation_from_scalar(inner(g, f));
    let field_vanishing = psi_f
        .anticommutator(&psi_g)
        .max_abs()
        .max(psi_star_f.anticommutator(&psi_star_g).max_abs());
    Ok(CarDeviations {
        particle,
        antiparticle,
        vanishing,
        field,
        field_vanishing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_complex_vector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(seed: u64, d: usize) -> ToyModel {
        ToyModel::random(&mut ChaCha8Rng::seed_from_u64(seed), d).unwrap()
    }

    #[test]
    fn random_model_is_consistent() {
        let m = model(1, 3);
        assert_eq!(m.modes(), 6);
        assert_eq!(m.fock_dim(), 64);
        assert!(m.basis_deviation() < 1e-12);
        let rebuilt = ToyModel::new(m.pplus().clone(), m.conjugation().clone()).unwrap();
        assert_eq!(rebuilt.dplus(), 3);
        assert_eq!(rebuilt.dminus(), 3);
    }

    #[test]
    fn model_validation_errors() {
        let m = model(2, 2);
        let bad = m.pplus() * C64::from(0.5);
        assert!(matches!(
            ToyModel::new(bad, m.conjugation().clone()),
            Err(Error::NotProjector(_))
        ));
        let plain = AntiUnitary::conjugation(4);
        assert!(matches!(
            ToyModel::new(m.pplus().clone(), plain),
            Err(Error::NotConjugationPair(_))
        ));
    }

    #[test]
    fn vacuum_is_annihilated() {
        let m = model(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let omega = m.vacuum();
        assert_eq!(omega.norm(), 1.0);
        for _ in 0..5 {
            let f = random_complex_vector(&mut rng, 4);
            let b = FockVector::apply(&m.annihilator_b(&f).unwrap(), &omega);
            let c = FockVector::apply(&m.annihilator_c(&f).unwrap(), &omega);
            assert!(b.norm() < 1e-15 && c.norm() < 1e-15);
        }
    }

    #[test]
    fn linearity_of_mode_operators() {
        let m = model(5, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = random_complex_vector(&mut rng, 4);
        let g = random_complex_vector(&mut rng, 4);
        let a = C64::new(0.3, -1.2);
        let h = &f * a + &g;
        let bh = m.annihilator_b(&h).unwrap();
        let expect = &m.annihilator_b(&f).unwrap().scale(a.conj()) + &m.annihilator_b(&g).unwrap();
        assert!(bh.max_abs_diff(&expect) < 1e-13);
        let ch = m.creator_c(&h).unwrap();
        let expect = &m.creator_c(&f).unwrap().scale(a.conj()) + &m.creator_c(&g).unwrap();
        assert!(ch.max_abs_diff(&expect) < 1e-13);
        let bs = m.creator_b(&h).unwrap();
        let expect = &m.creator_b(&f).unwrap().scale(a) + &m.creator_b(&g).unwrap();
        assert!(bs.max_abs_diff(&expect) < 1e-13);
    }

    #[test]
    fn field_adjoint_is_matrix_adjoint() {
        let m = model(7, 3);
        let f = random_complex_vector(&mut ChaCha8Rng::seed_from_u64(8), 6);
        let psi = m.field(&f).unwrap();
        assert!(m.field_adjoint(&f).unwrap().max_abs_diff(&psi.adjoint()) < 1e-15);
        assert!((&psi * &psi).max_abs() < 1e-13);
    }

    #[test]
    fn sector_grading_of_creators() {
        let m = model(9, 2);
        let f = random_complex_vector(&mut ChaCha8Rng::seed_from_u64(10), 4);
        let bs = m.creator_b(&f).unwrap();
        let cs = m.creator_c(&f).unwrap();
        for (i, j, _) in bs.triplets() {
            let (n0, m0) = m.sector_of(j);
            assert_eq!(m.sector_of(i), (n0 + 1, m0));
        }
        for (i, j, _) in cs.triplets() {
            let (n0, m0) = m.sector_of(j);
            assert_eq!(m.sector_of(i), (n0, m0 + 1));
        }
    }

    #[test]
    fn density_requires_unit_vector() {
        let m = model(11, 1);
        let f = CVector::from_element(2, ONE);
        assert!(matches!(m.normal_ordered_density(&f), Err(Error::NotNormalized(_))));
        assert!(matches!(
            m.creator_b(&CVector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn car_on_a_small_model() {
        let m = model(14, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let f = random_complex_vector(&mut rng, 6);
        let g = random_complex_vector(&mut rng, 6);
        assert!(car_deviations(&m, &f, &g).unwrap().max() < 1e-13);
        assert!(car_deviations(&m, &f, &f).unwrap().max() < 1e-13);
    }

    #[test]
    fn sparse_product_matches_dense() {
        let m = model(12, 2);
        let f = random_complex_vector(&mut ChaCha8Rng::seed_from_u64(13), 4);
        let a = m.field(&f).unwrap();
        let b = m.creator_b(&f).unwrap();
        let dense = a.to_dense() * b.to_dense();
        assert!(max_abs_diff(&(&a * &b).to_dense(), &dense) < 1e-14);
    }
}
