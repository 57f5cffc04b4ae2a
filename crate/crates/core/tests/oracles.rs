mod common;

use common::{dense_charge, max_abs};
use fockcharge::charge::{sector_norm_decomposition, trace_formula, truncated_q, CreatorState, CreatorTerm, SubspaceBasis};
use fockcharge::divergence::{toy_oracle_equivalence, toy_series};
use fockcharge::fock::ToyModel;
use fockcharge::linalg::{random_complex_vector, CMatrix, CVector, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `tr M⁺ − tr (M⁺)²` from the Gram matrix `⟨f_i, P₊ f_j⟩`.
fn trace_oracle(model: &ToyModel, fs: &[CVector]) -> f64 {
    let j = fs.len();
    let m = CMatrix::from_fn(j, j, |a, b| fs[a].dotc(&(model.pplus() * &fs[b])));
    (m.trace() - (&m * &m).trace()).re
}

#[test]
fn vacuum_norm_matches_trace_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for d in 1..=4 {
        for _ in 0..3 {
            let model = ToyModel::random(&mut rng, d).unwrap();
            let dim = model.n().min(6);
            let basis = SubspaceBasis::random(&model, dim, &mut rng).unwrap();
            let omega = model.vacuum().amplitudes;
            for j in 0..=dim {
                let fs = &basis.vectors()[..j];
                let q = dense_charge(&model, fs);
                let lib = truncated_q(&model, &basis, j).unwrap().matrix.to_dense();
                assert!(max_abs(&(&q - &lib)) < 1e-12, "d={d} J={j}");
                let s = (&q * &omega).norm_squared();
                assert!((s - trace_oracle(&model, fs)).abs() < 1e-10);
                assert!((s - trace_formula(&model, &basis, j)).abs() < 1e-10);
            }
            assert!(toy_oracle_equivalence(&model, &basis, dim).unwrap() < 1e-10);
        }
    }
}

#[test]
fn toy_series_starts_at_zero_and_never_goes_negative() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let model = ToyModel::random(&mut rng, 3).unwrap();
    let basis = SubspaceBasis::random(&model, 6, &mut rng).unwrap();
    let s = toy_series(&model, &basis);
    assert_eq!(s.len(), 7);
    assert_eq!(s[0], 0.0);
    assert!(s.iter().all(|v| *v >= -1e-12));
    // The full space gives a projector M⁺ = P₊ in that basis, hence S = 0.
    assert!(s[6].abs() < 1e-12);
}

#[test]
fn invariant_basis_has_quarter_per_mode() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let model = ToyModel::random(&mut rng, 4).unwrap();
    let basis = SubspaceBasis::random_c_invariant(&model, 1, &mut rng).unwrap();
    assert!((trace_formula(&model, &basis, 1) - 0.25).abs() < 1e-12);
}

fn term(particles: Vec<CVector>, antiparticles: Vec<CVector>) -> CreatorTerm {
    CreatorTerm {
        coeff: C64::from(1.0),
        particles,
        antiparticles,
    }
}

/// `‖(Q ψ)^{(n₀+1, m₀+1)}‖²` by dense matrices and bit counting.
fn sector_norm_oracle(model: &ToyModel, q: &CMatrix, psi: &CVector, n0: usize, m0: usize) -> f64 {
    let d = model.dplus();
    let qpsi = q * psi;
    qpsi.iter()
        .enumerate()
        .filter(|(s, _)| {
            let low = (s & ((1 << d) - 1)).count_ones() as usize;
            let high = (s >> d).count_ones() as usize;
            (low, high) == (n0 + 1, m0 + 1)
        })
        .map(|(_, z)| z.norm_sqr())
        .sum()
}

#[test]
fn four_sum_decomposition_for_the_listed_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for d in 2..=4 {
        let model = ToyModel::random(&mut rng, d).unwrap();
        let n = model.n();
        let basis = SubspaceBasis::random(&model, n.min(6), &mut rng).unwrap();
        let mut v = || random_complex_vector(&mut rng, n);
        let states = vec![
            CreatorState::vacuum(),
            CreatorState::new(vec![term(vec![v()], vec![])]).unwrap(),
            CreatorState::new(vec![term(vec![v()], vec![v()])]).unwrap(),
            CreatorState::new(vec![term(vec![v(), v()], vec![v()])]).unwrap(),
        ];
        for j in [1, basis.len() / 2, basis.len()] {
            let q = dense_charge(&model, &basis.vectors()[..j]);
            for state in &states {
                let (n0, m0) = state.sector();
                let psi = state.to_fock(&model).unwrap().amplitudes;
                let dec = sector_norm_decomposition(&model, &basis, j, state).unwrap();
                let oracle = sector_norm_oracle(&model, &q, &psi, n0, m0);
                assert!((dec.sector_norm - oracle).abs() < 1e-10 * oracle.max(1.0));
                assert!((dec.pair_norm - oracle).abs() < 1e-10 * oracle.max(1.0));
                assert!(dec.residual < 1e-10, "d={d} J={j} sector=({n0},{m0}) residual={}", dec.residual);
                assert!(dec.kernel_residual < 1e-10);
                assert!(dec.route_deviation < 1e-10);
            }
        }
    }
}

#[test]
fn vacuum_decomposition_reduces_to_trace_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let model = ToyModel::random(&mut rng, 3).unwrap();
    let basis = SubspaceBasis::random(&model, 4, &mut rng).unwrap();
    let dec = sector_norm_decomposition(&model, &basis, 4, &CreatorState::vacuum()).unwrap();
    assert!((dec.sector_norm - trace_formula(&model, &basis, 4)).abs() < 1e-12);
    assert_eq!(dec.direct[1], 0.0);
    assert_eq!(dec.direct[2], 0.0);
    assert_eq!(dec.direct[3], 0.0);
    assert!(sector_norm_decomposition(&model, &basis, 5, &CreatorState::vacuum()).is_err());
}

#[test]
fn superpositions_in_one_sector_decompose() {
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    let model = ToyModel::random(&mut rng, 3).unwrap();
    let basis = SubspaceBasis::random(&model, 5, &mut rng).unwrap();
    let mut v = || random_complex_vector(&mut rng, 6);
    let mut a = term(vec![v()], vec![v()]);
    a.coeff = C64::new(0.3, -0.8);
    let b = term(vec![v()], vec![v()]);
    let state = CreatorState::new(vec![a, b]).unwrap();
    let dec = sector_norm_decomposition(&model, &basis, 5, &state).unwrap();
    assert!(dec.residual < 1e-10 && dec.kernel_residual < 1e-10);

    let mixed = CreatorState::new(vec![term(vec![v()], vec![]), term(vec![], vec![v()])]);
    assert!(mixed.is_err());
}
