//! Small dense linear-algebra helpers shared by the modules.
//!
//! Inner products are conjugate-linear in the first argument.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// `⟨a, b⟩ = Σ conj(a_i) b_i`.
pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `max |(A*A − I)_{ij}|`.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let n = u.ncols();
    max_abs_diff(&(u.adjoint() * u), &CMatrix::identity(n, n))
}

/// Max deviation of the Gram matrix of `vectors` from the identity.
pub fn gram_deviation(vectors: &[CVector]) -> f64 {
    let mut dev = 0.0_f64;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate().skip(i) {
            let target = if i == j { ONE } else { ZERO };
            dev = dev.max((inner(a, b) - target).norm());
        }
    }
    dev
}

/// Orthogonal projector onto the span of an orthonormal family.
pub fn projector(vectors: &[CVector], dim: usize) -> CMatrix {
    let mut p = CMatrix::zeros(dim, dim);
    for v in vectors {
        p += v * v.adjoint();
    }
    p
}

/// Columns of `m` as vectors.
pub fn columns(m: &CMatrix) -> Vec<CVector> {
    m.column_iter().map(|c| c.into_owned()).collect()
}

pub fn random_complex_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    let v = random_complex_vector(rng, n);
    let norm = v.norm();
    v / C64::from(norm)
}

/// Haar-distributed unitary from the QR factorisation of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-distributed real orthogonal matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Principal square root with non-negative real part; on the imaginary axis
/// the root with non-negative imaginary part is chosen.
pub fn principal_sqrt(z: C64) -> C64 {
    let w = z.sqrt();
    if w.re < 0.0 || (w.re == 0.0 && w.im < 0.0) {
        -w
    } else {
        w
    }
}

/// A group of nearly equal eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub center: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// Groups sorted values whose consecutive gaps are below `gap`.
pub fn cluster_values(sorted: &[f64], gap: f64) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[i - 1] > gap {
            if i > start {
                let slice = &sorted[start..i];
                let center = slice.iter().sum::<f64>() / slice.len() as f64;
                out.push(Cluster {
                    center,
                    min: slice[0],
                    max: slice[slice.len() - 1],
                    count: slice.len(),
                });
            }
            start = i;
        }
    }
    out
}

/// Matches eigenvalue clusters against a predicted set of values.
///
/// Returns the largest distance of any eigenvalue from its matched lattice
/// value, or `f64::INFINITY` when the cluster count differs from the
/// lattice size.
pub fn lattice_match_error(clusters: &[Cluster], lattice: &[f64]) -> f64 {
    if clusters.len() != lattice.len() {
        return f64::INFINITY;
    }
    let mut sorted = lattice.to_vec();
    sorted.sort_by(f64::total_cmp);
    clusters
        .iter()
        .zip(sorted.iter())
        .map(|(c, &v)| (c.min - v).abs().max((c.max - v).abs()))
        .fold(0.0, f64::max)
}
