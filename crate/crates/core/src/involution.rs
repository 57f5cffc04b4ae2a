//! Anti-unitary involutions `C v = U·conj(v)` and orthonormal bases fixed by them.
//!
//! Operators on the shell mode spaces are permutation-like, so both `U` and
//! the constructed bases are kept column-sparse. Vectors are stored as
//! index-sorted `(index, value)` lists.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{principal_sqrt, random_unitary, CMatrix, CVector, C64, ONE, ZERO};

pub type SparseVec = Vec<(usize, C64)>;

/// Entries below this magnitude are dropped when densifying or sparsifying.
const DROP: f64 = 1e-300;

const VALIDATION_TOL: f64 = 1e-12;

pub fn sparsify(v: &CVector) -> SparseVec {
    v.iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > DROP)
        .map(|(i, z)| (i, *z))
        .collect()
}

pub fn densify(v: &SparseVec, dim: usize) -> CVector {
    let mut out = CVector::zeros(dim);
    for &(i, z) in v {
        out[i] += z;
    }
    out
}

pub fn sparse_norm(v: &SparseVec) -> f64 {
    v.iter().map(|(_, z)| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨a, b⟩` for index-sorted sparse vectors.
pub fn sparse_inner(a: &SparseVec, b: &SparseVec) -> C64 {
    let (mut i, mut j) = (0, 0);
    let mut acc = ZERO;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1.conj() * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// `Σ c_t v_t`, merged and sorted.
fn sparse_combination(terms: &[(C64, &SparseVec)]) -> SparseVec {
    let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
    for (c, v) in terms {
        for &(i, z) in v.iter() {
            *acc.entry(i).or_insert(ZERO) += c * z;
        }
    }
    acc.into_iter().filter(|(_, z)| z.norm() > DROP).collect()
}

fn sparse_scale(v: &SparseVec, c: C64) -> SparseVec {
    v.iter().map(|&(i, z)| (i, c * z)).collect()
}

/// An anti-linear involution `v ↦ U·conj(v)` with `U` unitary and `U·conj(U) = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntiUnitary {
    dim: usize,
    columns: Vec<SparseVec>,
}

impl AntiUnitary {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> CMatrix {
        let mut u = CMatrix::zeros(self.dim, self.dim);
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, z) in col {
                u[(i, j)] = z;
            }
        }
        u
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        let mut out = CVector::zeros(self.dim);
        for (j, col) in self.columns.iter().enumerate() {
            let c = v[j].conj();
            if c != ZERO {
                for &(i, z) in col {
                    out[i] += z * c;
                }
            }
        }
        out
    }

    pub fn apply_sparse(&self, v: &SparseVec) -> SparseVec {
        let terms: Vec<(C64, &SparseVec)> =
            v.iter().map(|&(j, c)| (c.conj(), &self.columns[j])).collect();
        sparse_combination(&terms)
    }

    /// The matrix of the linear map `X ↦ U·conj(X)` applied column-wise, i.e.
    /// `C A C` for a linear `A` is `U·conj(A)·conj(U)`.
    pub fn conjugate_operator(&self, a: &CMatrix) -> CMatrix {
        let u = self.matrix();
        &u * a.map(|z| z.conj()) * u.map(|z| z.conj())
    }

    /// `(‖U*U − I‖_max, ‖U·conj(U) − I‖_max)`.
    pub fn deviations(&self) -> (f64, f64) {
        let n = self.dim;
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); n];
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, z) in col {
                rows[i].push((j, z));
            }
        }
        let mut gram: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for row in &rows {
            for &(j, a) in row {
                for &(k, b) in row {
                    *gram.entry((j, k)).or_insert(ZERO) += a.conj() * b;
                }
            }
        }
        let mut unitary = 0.0_f64;
        for j in 0..n {
            if !gram.contains_key(&(j, j)) {
                unitary = unitary.max(1.0);
            }
        }
        for (&(j, k), &z) in &gram {
            let target = if j == k { ONE } else { ZERO };
            unitary = unitary.max((z - target).norm());
        }
        let mut involution = 0.0_f64;
        for k in 0..n {
            let e = vec![(k, ONE)];
            let twice = self.apply_sparse(&self.apply_sparse(&e));
            let mut seen = false;
            for &(i, z) in &twice {
                let target = if i == k {
                    seen = true;
                    ONE
                } else {
                    ZERO
                };
                involution = involution.max((z - target).norm());
            }
            if !seen {
                involution = involution.max(1.0);
            }
        }
        (unitary, involution)
    }

    /// Validates sparse columns of `U`.
    pub fn from_columns(dim: usize, columns: Vec<SparseVec>) -> Result<AntiUnitary> {
        if columns.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: columns.len(),
            });
        }
        if let Some(&(i, _)) = columns.iter().flatten().find(|(i, _)| *i >= dim) {
            return Err(Error::OutOfRange {
                what: "row index",
                detail: format!("{i} >= {dim}"),
            });
        }
        let columns = columns
            .into_iter()
            .map(|mut c| {
                c.sort_by_key(|(i, _)| *i);
                c
            })
            .collect();
        let c = AntiUnitary { dim, columns };
        let (unitary, involution) = c.deviations();
        if unitary >= VALIDATION_TOL {
            return Err(Error::NotUnitary(unitary));
        }
        if involution >= VALIDATION_TOL {
            return Err(Error::NotInvolution(involution));
        }
        Ok(c)
    }

    /// Plain complex conjugation on `ℂⁿ`.
    pub fn conjugation(dim: usize) -> AntiUnitary {
        AntiUnitary {
            dim,
            columns: (0..dim).map(|j| vec![(j, ONE)]).collect(),
        }
    }
}

pub fn make_involution(u: &CMatrix) -> Result<AntiUnitary> {
    if u.nrows() != u.ncols() {
        return Err(Error::NotSquare(u.nrows(), u.ncols()));
    }
    let cols = u.column_iter().map(|c| sparsify(&c.into_owned())).collect();
    AntiUnitary::from_columns(u.nrows(), cols)
}

/// `U = W·Wᵀ` with `W` Haar-random; every anti-unitary involution has this form.
pub fn random_involution<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> AntiUnitary {
    let w = random_unitary(rng, dim);
    let u = &w * w.transpose();
    make_involution(&u).expect("W·Wᵀ is a unitary involution")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Parallel,
    Orthogonal,
    Generic,
}

pub const DEFAULT_TOL: f64 = 1e-10;

pub fn classify(g: &CVector, c: &AntiUnitary, tol: f64) -> Result<Class> {
    classify_sparse(&sparsify(g), c, tol)
}

fn classify_sparse(g: &SparseVec, c: &AntiUnitary, tol: f64) -> Result<Class> {
    let norm = sparse_norm(g);
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let cg = c.apply_sparse(g);
    let z = sparse_inner(g, &cg);
    let ratio = z / C64::from(norm * norm);
    let rest = sparse_combination(&[(ONE, &cg), (-ratio, g)]);
    if sparse_norm(&rest) < tol * norm {
        Ok(Class::Parallel)
    } else if z.norm() < tol * norm * norm {
        Ok(Class::Orthogonal)
    } else {
        Ok(Class::Generic)
    }
}

/// An orthonormal basis whose vectors are fixed by an anti-unitary involution.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantBasis {
    dim: usize,
    vectors: Vec<SparseVec>,
}

/// Orthonormal vectors touching each coordinate, for sparse projections.
struct Span {
    vectors: Vec<SparseVec>,
    touching: Vec<Vec<usize>>,
}

impl Span {
    fn new(dim: usize) -> Self {
        Span {
            vectors: Vec::new(),
            touching: vec![Vec::new(); dim],
        }
    }

    fn overlapping(&self, v: &SparseVec) -> Vec<usize> {
        let mut ids: Vec<usize> = v
            .iter()
            .flat_map(|(i, _)| self.touching[*i].iter().copied())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Removes the component along the span; with `real`, only the real parts
    /// of the coefficients (exact for vectors that are themselves invariant).
    fn reduce(&self, v: &SparseVec, real: bool) -> SparseVec {
        let mut out = v.clone();
        for _ in 0..2 {
            let ids = self.overlapping(&out);
            let coeffs: Vec<C64> = ids
                .iter()
                .map(|&k| {
                    let z = sparse_inner(&self.vectors[k], &out);
                    if real {
                        C64::from(z.re)
                    } else {
                        z
                    }
                })
                .collect();
            let mut terms: Vec<(C64, &SparseVec)> = vec![(ONE, &out)];
            for (&k, &z) in ids.iter().zip(&coeffs) {
                terms.push((-z, &self.vectors[k]));
            }
            out = sparse_combination(&terms);
        }
        out
    }

    fn push(&mut self, v: SparseVec) {
        let id = self.vectors.len();
        for &(i, _) in &v {
            self.touching[i].push(id);
        }
        self.vectors.push(v);
    }
}

/// Builds an invariant orthonormal basis by induction over the seed vectors
/// (the standard basis by default): each seed is orthogonalized against the
/// invariant span built so far and then turned into one or two fixed vectors
/// according to its [`Class`].
pub fn c_invariant_onb(c: &AntiUnitary, seed: Option<&[CVector]>) -> Result<InvariantBasis> {
    let dim = c.dim();
    let seeds: Vec<SparseVec> = match seed {
        None => (0..dim).map(|j| vec![(j, ONE)]).collect(),
        Some(s) => {
            for v in s {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: v.len(),
                    });
                }
            }
            let dev = crate::linalg::gram_deviation(s);
            if dev > 1e-10 {
                return Err(Error::NotOrthonormal(dev));
            }
            s.iter().map(sparsify).collect()
        }
    };
    let mut span = Span::new(dim);
    for g in &seeds {
        // A dropped near-degenerate candidate leaves part of g outside the
        // span, so the same seed is revisited until it is covered.
        for _ in 0..4 {
            if span.vectors.len() == dim {
                break;
            }
            let r = span.reduce(g, false);
            let norm = sparse_norm(&r);
            if norm < 1e-8 {
                break;
            }
            let r = sparse_scale(&r, C64::from(1.0 / norm));
            for f in candidates(&r, c)? {
                let f = span.reduce(&f, true);
                let cf = c.apply_sparse(&f);
                let sym = sparse_combination(&[(C64::from(0.5), &f), (C64::from(0.5), &cf)]);
                let n = sparse_norm(&sym);
                if n > 1e-6 {
                    span.push(sparse_scale(&sym, C64::from(1.0 / n)));
                }
            }
        }
    }
    Ok(InvariantBasis {
        dim,
        vectors: span.vectors,
    })
}

fn candidates(g: &SparseVec, c: &AntiUnitary) -> Result<Vec<SparseVec>> {
    let cg = c.apply_sparse(g);
    let z = sparse_inner(g, &cg);
    let out = match classify_sparse(g, c, DEFAULT_TOL)? {
        Class::Parallel => {
            let phase = principal_sqrt(z / C64::from(z.norm()));
            vec![sparse_scale(g, phase)]
        }
        Class::Orthogonal => {
            let s = C64::from(std::f64::consts::FRAC_1_SQRT_2);
            let i = C64::new(0.0, 1.0);
            vec![
                sparse_combination(&[(s, g), (s, &cg)]),
                sparse_combination(&[(i * s, g), (-i * s, &cg)]),
            ]
        }
        Class::Generic => {
            let alpha = principal_sqrt(z);
            let i = C64::new(0.0, 1.0);
            let u = sparse_combination(&[(alpha, g), (alpha.conj(), &cg)]);
            let v = sparse_combination(&[(i * alpha, g), (-i * alpha.conj(), &cg)]);
            [u, v]
                .into_iter()
                .filter_map(|w| {
                    let n = sparse_norm(&w);
                    (n > 0.0).then(|| sparse_scale(&w, C64::from(1.0 / n)))
                })
                .collect()
        }
    };
    Ok(out)
}

impl InvariantBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn sparse_vectors(&self) -> &[SparseVec] {
        &self.vectors
    }

    pub fn vectors(&self) -> Vec<CVector> {
        self.vectors.iter().map(|v| densify(v, self.dim)).collect()
    }

    /// Basis vectors as the columns of a `dim × len` matrix.
    pub fn matrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.vectors.len());
        for (j, v) in self.vectors.iter().enumerate() {
            for &(i, z) in v {
                m[(i, j)] = z;
            }
        }
        m
    }

    pub fn gram_deviation(&self) -> f64 {
        let mut span = Span::new(self.dim);
        let mut dev = 0.0_f64;
        for v in &self.vectors {
            for k in span.overlapping(v) {
                dev = dev.max(sparse_inner(&span.vectors[k], v).norm());
            }
            dev = dev.max((sparse_inner(v, v).re - 1.0).abs());
            span.push(v.clone());
        }
        dev
    }

    /// `max_j ‖C f_j − f_j‖`.
    pub fn invariance_deviation(&self, c: &AntiUnitary) -> f64 {
        self.vectors
            .iter()
            .map(|f| {
                let cf = c.apply_sparse(f);
                sparse_norm(&sparse_combination(&[(ONE, &cf), (-ONE, f)]))
            })
            .fold(0.0, f64::max)
    }

    /// Number of vectors, counted only when they form an orthonormal family
    /// (which is then linearly independent); small cases use an SVD instead.
    pub fn rank(&self) -> usize {
        if self.dim <= 64 {
            let m = self.matrix();
            if m.ncols() == 0 {
                return 0;
            }
            m.singular_values().iter().filter(|s| **s > 1e-8).count()
        } else if self.gram_deviation() < 1e-6 {
            self.vectors.len()
        } else {
            0
        }
    }

    /// Max deviation of `C(Σ c_j f_j)` from `Σ conj(c_j) f_j` over the given
    /// coefficient vectors.
    pub fn representation_deviation(&self, c: &AntiUnitary, coeffs: &[CVector]) -> f64 {
        let f = self.matrix();
        coeffs
            .iter()
            .map(|a| {
                let v = &f * a;
                let lhs = c.apply(&v);
                let rhs = &f * a.map(|z| z.conj());
                (lhs - rhs).iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
            })
            .fold(0.0, f64::max)
    }
}
