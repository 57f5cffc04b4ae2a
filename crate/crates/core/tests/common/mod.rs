#![allow(dead_code)]

use fockcharge::fock::ToyModel;
use fockcharge::linalg::{inner, CMatrix, CVector, C64};

/// Jordan–Wigner creator for Fock mode `k` out of `modes`, built from Kronecker
/// products: `Z` on the lower modes, `|1⟩⟨0|` on mode `k`.
pub fn jw_creator(modes: usize, k: usize) -> CMatrix {
    let one = C64::from(1.0);
    let zero = C64::from(0.0);
    let id = CMatrix::identity(2, 2);
    let z = CMatrix::from_diagonal(&CVector::from_vec(vec![one, -one]));
    let raise = CMatrix::from_row_slice(2, 2, &[zero, zero, one, zero]);
    // Index bit q belongs to mode q, so the leftmost factor is the highest mode.
    let mut acc = CMatrix::identity(1, 1);
    for q in (0..modes).rev() {
        let f = if q == k {
            &raise
        } else if q < k {
            &z
        } else {
            &id
        };
        acc = acc.kronecker(f);
    }
    acc
}

/// Dense `b*(f)` and `c*(f)` expanded in the model's mode bases.
pub fn dense_creators(m: &ToyModel, f: &CVector) -> (CMatrix, CMatrix) {
    let modes = m.modes();
    let dim = m.fock_dim();
    let pf = m.pplus() * f;
    let mut b_star = CMatrix::zeros(dim, dim);
    for (a, u) in m.basis_plus().iter().enumerate() {
        b_star += jw_creator(modes, a) * inner(u, &pf);
    }
    // c*(f) creates C P₋ f, expanded in the antiparticle basis C v_b.
    let cmat = m.conjugation().matrix();
    let cpf = &cmat * (m.pminus() * f).map(|z| z.conj());
    let mut c_star = CMatrix::zeros(dim, dim);
    for (b, v) in m.basis_minus().iter().enumerate() {
        let w = &cmat * v.map(|z| z.conj());
        c_star += jw_creator(modes, m.dplus() + b) * inner(&w, &cpf);
    }
    (b_star, c_star)
}

/// Dense `Ψ(f) = b(f) + c*(f)`.
pub fn dense_field(m: &ToyModel, f: &CVector) -> CMatrix {
    let (b_star, c_star) = dense_creators(m, f);
    b_star.adjoint() + c_star
}

/// `Σ_j (Ψ*(f_j)Ψ(f_j) − ⟨Ω, Ψ*(f_j)Ψ(f_j) Ω⟩)` with `Ω = e₀`.
pub fn dense_charge(m: &ToyModel, fs: &[CVector]) -> CMatrix {
    let dim = m.fock_dim();
    let mut q = CMatrix::zeros(dim, dim);
    for f in fs {
        let psi = dense_field(m, f);
        let p = psi.adjoint() * psi;
        let vac = p[(0, 0)];
        q += p - CMatrix::identity(dim, dim) * vac;
    }
    q
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |a, z| a.max(z.norm()))
}
