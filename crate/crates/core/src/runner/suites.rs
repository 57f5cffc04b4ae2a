use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use super::output::{Check, Relation, Table, Value};
use super::Report;
use crate::bessel::{inverse_energy_kernel, inverse_energy_kernel_fd, k0, k0_oscillatory, k1};
use crate::charge::{
    density_commutators, eigenvector_witnesses, q_additivity_and_commutation, q_basis_independence_check,
    q_overlap_commutator, q_subspace, q_subspace_spectrum, q_tilde, q_total, q_weighted, sector_norm_decomposition,
    CreatorState, CreatorTerm, SubspaceBasis, CLUSTER_GAP,
};
use crate::divergence::{growth_diagnostics, series_scalar_from_grams, series_trace_from_grams, shell_grams, toy_oracle_equivalence, toy_series, BasisKind};
use crate::error::{Error, Result};
use crate::fock::{car_deviations, FockOperator, ToyModel};
use crate::involution::{c_invariant_onb, random_involution, AntiUnitary};
use crate::linalg::{cluster_values, random_complex_vector, random_unit_vector, random_unitary, CVector, C64, ONE};
use crate::quadrature::build_grid;

/// Seed of the search that exhibits non-commuting `Q̃` operators.
pub const QTILDE_WITNESS_SEED: u64 = 0x51_7d_e0;

fn rng(cfg: &ExperimentConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// Largest distance from a value to the lattice `offset + ℤ`.
fn lattice_distance(values: &[f64], offset: f64) -> f64 {
    max_of(values.iter().map(|v| {
        let x = v - offset;
        (x - x.round()).abs()
    }))
}

/// Symmetric distance between a computed and a predicted set of values.
fn set_distance(computed: &[f64], predicted: &[f64]) -> f64 {
    let nearest = |x: f64, set: &[f64]| set.iter().map(|y| (x - y).abs()).fold(f64::INFINITY, f64::min);
    let a = max_of(computed.iter().map(|&x| nearest(x, predicted)));
    let b = max_of(predicted.iter().map(|&y| nearest(y, computed)));
    a.max(b)
}

fn eigen_centers(values: &[f64]) -> Vec<f64> {
    cluster_values(values, CLUSTER_GAP).iter().map(|c| c.center).collect()
}

fn multiplicity_text(counts: &[usize]) -> String {
    counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";")
}

/// `Σ b*(u)b(u) − Σ c*(v)c(v)` over vectors taken from `h₊` and `h₋`.
fn aligned_number(model: &ToyModel, plus: &[CVector], minus: &[CVector]) -> Result<FockOperator> {
    let mut acc = FockOperator::zero(model.fock_dim());
    for u in plus {
        acc = &acc + &(&model.creator_b(u)? * &model.annihilator_b(u)?);
    }
    for v in minus {
        acc = &acc - &(&model.creator_c(v)? * &model.annihilator_c(v)?);
    }
    Ok(acc)
}

/// Random orthonormal combinations of the first `k` vectors of `basis`.
fn mixed<R: Rng + ?Sized>(basis: &[CVector], k: usize, rng: &mut R) -> Vec<CVector> {
    if k == 0 {
        return Vec::new();
    }
    let u = random_unitary(rng, k);
    (0..k)
        .map(|j| (0..k).fold(CVector::zeros(basis[0].len()), |acc, i| acc + &basis[i] * u[(i, j)]))
        .collect()
}

pub(super) fn car_check(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rng = rng(cfg);
    let mut table = Table::new(&[
        "instance",
        "modes",
        "particle",
        "antiparticle",
        "vanishing",
        "field",
        "field_vanishing",
        "max",
    ]);
    let mut worst = 0.0_f64;
    for i in 0..100 {
        let model = ToyModel::random(&mut rng, 1 + i % 6)?;
        let f = random_complex_vector(&mut rng, model.n());
        let g = if i % 10 == 9 {
            f.clone()
        } else {
            random_complex_vector(&mut rng, model.n())
        };
        let d = car_deviations(&model, &f, &g)?;
        worst = worst.max(d.max());
        table.push(vec![
            i.into(),
            model.modes().into(),
            d.particle.into(),
            d.antiparticle.into(),
            d.vanishing.into(),
            d.field.into(),
            d.field_vanishing.into(),
            d.max().into(),
        ]);
    }
    Ok(Report {
        table,
        checks: vec![Check::below("car_max_deviation", worst, 1e-12)],
    })
}

pub(super) fn spectrum(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rng = rng(cfg);
    let mut table = Table::new(&[
        "instance",
        "kind",
        "modes",
        "d",
        "d_plus",
        "d_minus",
        "spectrum_error",
        "hermiticity",
        "multiplicities",
        "basis_independence",
        "witness_residual",
        "half_dim_deviation",
        "lattice_distance",
    ]);
    let (mut spec_err, mut herm, mut indep, mut witness) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..50 {
        let model = ToyModel::random(&mut rng, 1 + i % 4)?;
        let d = rng.random_range(1..=model.n().min(4));
        let basis = SubspaceBasis::random(&model, d, &mut rng)?;
        let report = q_subspace_spectrum(&model, &basis)?;
        let mut dev = 0.0_f64;
        for _ in 0..2 {
            let u = random_unitary(&mut rng, d);
            dev = dev.max(q_basis_independence_check(&model, &basis, &u)?);
        }
        let (res, _) = eigenvector_witnesses(&model, &basis)?;
        spec_err = spec_err.max(report.error);
        herm = herm.max(report.hermiticity);
        indep = indep.max(dev);
        witness = witness.max(res);
        table.push(vec![
            i.into(),
            "generic".into(),
            model.modes().into(),
            d.into(),
            basis.dplus().into(),
            basis.dminus().into(),
            report.error.into(),
            report.hermiticity.into(),
            multiplicity_text(&report.multiplicities()).into(),
            dev.into(),
            res.into(),
            Value::Empty,
            Value::Empty,
        ]);
    }
    let (mut half, mut lattice) = (0.0_f64, 0.0_f64);
    for i in 0..20 {
        let model = ToyModel::random(&mut rng, 1 + i % 4)?;
        let d = 1 + i % model.n().min(4);
        let basis = SubspaceBasis::random_c_invariant(&model, d, &mut rng)?;
        let report = q_subspace_spectrum(&model, &basis)?;
        let centers: Vec<f64> = report.clusters.iter().flat_map(|c| [c.min, c.max]).collect();
        let dist = lattice_distance(&centers, d as f64 / 2.0);
        let h = (basis.dplus() - d as f64 / 2.0).abs();
        spec_err = spec_err.max(report.error);
        half = half.max(h);
        lattice = lattice.max(dist);
        table.push(vec![
            (50 + i).into(),
            "c_invariant".into(),
            model.modes().into(),
            d.into(),
            basis.dplus().into(),
            basis.dminus().into(),
            report.error.into(),
            report.hermiticity.into(),
            multiplicity_text(&report.multiplicities()).into(),
            Value::Empty,
            Value::Empty,
            h.into(),
            dist.into(),
        ]);
    }
    Ok(Report {
        table,
        checks: vec![
            Check::below("spectrum_error", spec_err, 1e-9),
            Check::below("hermiticity", herm, 1e-12),
            Check::below("basis_independence", indep, 1e-10),
            Check::below("witness_residual", witness, 1e-10),
            Check::below("c_invariant_half_dimension", half, 1e-10),
            Check::below("c_invariant_lattice", lattice, 1e-9),
        ],
    })
}

pub(super) fn additivity(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rng = rng(cfg);
    let mut table = Table::new(&["instance", "kind", "modes", "dims", "commutator", "additivity"]);
    let (mut comm, mut add, mut overlap, mut dens) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..12 {
        let model = ToyModel::random(&mut rng, 2 + i % 3)?;
        let n = model.n();
        let d1 = 1 + i % 2;
        let d2 = rng.random_range(1..=(n - d1).min(3));
        let fam = SubspaceBasis::random_orthogonal_family(&model, &[d1, d2], &mut rng)?;
        let r = q_additivity_and_commutation(&model, &fam[0], &fam[1])?;
        comm = comm.max(r.commutator);
        add = add.max(r.additivity);
        table.push(vec![
            i.into(),
            "orthogonal".into(),
            n.into(),
            format!("{d1};{d2}").into(),
            r.commutator.into(),
            r.additivity.into(),
        ]);

        let dims = [1 + i % 2, 1, 1 + (i / 2) % 2];
        let dims = if dims.iter().sum::<usize>() > n { [1, 1, 1] } else { dims };
        let abc = SubspaceBasis::random_orthogonal_family(&model, &dims, &mut rng)?;
        let c = q_overlap_commutator(&model, &abc[0], &abc[1], &abc[2])?;
        overlap = overlap.max(c);
        table.push(vec![
            i.into(),
            "overlapping".into(),
            n.into(),
            format!("{};{};{}", dims[0], dims[1], dims[2]).into(),
            c.into(),
            Value::Empty,
        ]);

        let basis = SubspaceBasis::random(&model, n.min(4), &mut rng)?;
        let t = density_commutators(&model, &basis)?;
        dens = dens.max(t);
        table.push(vec![
            i.into(),
            "densities".into(),
            n.into(),
            n.min(4).to_string().into(),
            t.into(),
            Value::Empty,
        ]);
    }
    Ok(Report {
        table,
        checks: vec![
            Check::below("orthogonal_commutator", comm, 1e-11),
            Check::below("additivity", add, 1e-11),
            Check::below("overlapping_commutator", overlap, 1e-11),
            Check::below("density_commutator", dens, 1e-11),
        ],
    })
}

/// The standard basis of `ℂⁿ` with odd indices first, the first of them
/// carrying the phase `−i`, so that early vectors are never `C`-fixed as given.
pub fn interleaved_seed(n: usize) -> Vec<CVector> {
    let mut order: Vec<usize> = (1..n).step_by(2).collect();
    order.extend((0..n).step_by(2));
    order
        .iter()
        .map(|&k| {
            let mut e = CVector::zeros(n);
            e[k] = if k == 1 { C64::new(0.0, -1.0) } else { ONE };
            e
        })
        .collect()
}

pub(super) fn cbasis(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rng = rng(cfg);
    let mut table = Table::new(&["instance", "seed_kind", "dim", "invariance", "gram", "rank", "representation"]);
    let (mut inv, mut gram, mut deficit, mut rep) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let mut row = |table: &mut Table, i: usize, kind: &str, c: &AntiUnitary, seed: Option<&[CVector]>, rng: &mut ChaCha8Rng| -> Result<()> {
        let b = c_invariant_onb(c, seed)?;
        let coeffs = vec![random_complex_vector(rng, c.dim())];
        let (a, g, r, p) = (
            b.invariance_deviation(c),
            b.gram_deviation(),
            b.rank(),
            b.representation_deviation(c, &coeffs),
        );
        inv = inv.max(a);
        gram = gram.max(g);
        deficit = deficit.max((c.dim() - r.min(c.dim())) as f64);
        rep = rep.max(p);
        table.push(vec![i.into(), kind.into(), c.dim().into(), a.into(), g.into(), r.into(), p.into()]);
        Ok(())
    };
    for i in 0..200 {
        let dim = 1 + i % 16;
        let c = random_involution(&mut rng, dim);
        row(&mut table, i, "standard", &c, None, &mut rng)?;
        if i % 4 == 0 {
            let mut seed: Vec<CVector> = (0..dim)
                .map(|k| {
                    let mut e = CVector::zeros(dim);
                    e[k] = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
                    e
                })
                .collect();
            seed.shuffle(&mut rng);
            row(&mut table, i, "permuted", &c, Some(&seed), &mut rng)?;
        }
    }
    let plain = AntiUnitary::conjugation(8);
    row(&mut table, 200, "interleaved", &plain, Some(&interleaved_seed(8)), &mut rng)?;
    for dim in [8, 16] {
        let c = random_involution(&mut rng, dim);
        row(&mut table, 200 + dim, "interleaved", &c, Some(&interleaved_seed(dim)), &mut rng)?;
    }
    Ok(Report {
        table,
        checks: vec![
            Check::below("invariance", inv, 1e-10),
            Check::below("gram_deviation", gram, 1e-10),
            Check::new("rank_deficit", deficit, Relation::AtMost, 0.0),
            Check::below("representation", rep, 1e-9),
        ],
    })
}

/// Deterministic search for an orthogonal pair whose `Q̃` operators do not commute.
pub fn qtilde_witness() -> Result<(usize, ToyModel, Vec<SubspaceBasis>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(QTILDE_WITNESS_SEED);
    for attempt in 0..64 {
        let model = ToyModel::random(&mut rng, 2)?;
        let fam = SubspaceBasis::random_orthogonal_family(&model, &[1, 1], &mut rng)?;
        let q1 = q_tilde(&model, &fam[0])?.matrix;
        let q2 = q_tilde(&model, &fam[1])?.matrix;
        let c = q1.commutator(&q2).max_abs();
        if c > 1e-3 {
            return Ok((attempt, model, fam, c));
        }
    }
    Err(Error::OutOfRange {
        what: "witness search",
        detail: "no non-commuting pair found".into(),
    })
}

pub(super) fn qtilde(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rng = rng(cfg);
    let mut table = Table::new(&["instance", "kind", "modes", "value"]);
    let (attempt, model, fam, comm) = qtilde_witness()?;
    table.push(vec![attempt.into(), "witness_commutator".into(), model.modes().into(), comm.into()]);

    let mut herm = max_of(
        fam.iter()
            .map(|b| q_tilde(&model, b).map(|q| q.hermiticity_deviation()))
            .collect::<Result<Vec<_>>>()?,
    );
    let (mut add, mut aligned, mut total, mut non_integer) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..10 {
        let model = ToyModel::random(&mut rng, 2 + i % 3)?;
        let n = model.n();
        let fam = SubspaceBasis::random_orthogonal_family(&model, &[2, 1 + i % 2], &mut rng)?;
        let sum = fam[0].direct_sum(&model, &fam[1])?;
        let q1 = q_tilde(&model, &fam[0])?;
        let q2 = q_tilde(&model, &fam[1])?;
        let q12 = q_tilde(&model, &sum)?;
        let a = q12.matrix.max_abs_diff(&(&q1.matrix + &q2.matrix));
        let h = q12.hermiticity_deviation();
        let dist = lattice_distance(&q1.eigenvalues(), 0.0);
        add = add.max(a);
        herm = herm.max(h);
        non_integer = non_integer.max(dist);
        table.push(vec![i.into(), "additivity".into(), n.into(), a.into()]);
        table.push(vec![i.into(), "hermiticity".into(), n.into(), h.into()]);
        table.push(vec![i.into(), "non_integer_eigenvalue".into(), n.into(), dist.into()]);

        let kp = rng.random_range(0..=model.dplus());
        let km = rng.random_range(usize::from(kp == 0)..=model.dminus());
        let plus = mixed(model.basis_plus(), kp, &mut rng);
        let minus = mixed(model.basis_minus(), km, &mut rng);
        let vecs: Vec<CVector> = plus.iter().chain(&minus).cloned().collect();
        let basis = SubspaceBasis::new(&model, vecs)?;
        let qt = q_tilde(&model, &basis)?.matrix;
        let qk = q_subspace(&model, &basis)?.matrix;
        let a = qt.max_abs_diff(&qk).max(qk.max_abs_diff(&aligned_number(&model, &plus, &minus)?));
        aligned = aligned.max(a);
        table.push(vec![i.into(), "aligned_deviation".into(), n.into(), a.into()]);

        let all: Vec<CVector> = model.basis_plus().iter().chain(model.basis_minus()).cloned().collect();
        let full = SubspaceBasis::new(&model, all)?;
        let (np, nm) = model.number_operators();
        let t = q_tilde(&model, &full)?.matrix.max_abs_diff(&(&np - &nm));
        total = total.max(t);
        table.push(vec![i.into(), "full_aligned_vs_number".into(), n.into(), t.into()]);
    }
    Ok(Report {
        table,
        checks: vec![
            Check::new("witness_commutator", comm, Relation::Above, 1e-6),
            Check::below("additivity", add, 1e-11),
            Check::below("hermiticity", herm, 1e-12),
            Check::below("aligned_equals_q", aligned, 1e-11),
            Check::below("full_aligned_equals_number_difference", total, 1e-11),
            Check::new("non_integer_spectrum", non_integer, Relation::Above, 1e-6),
        ],
    })
}

pub(super) fn weighted(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rng = rng(cfg);
    let mut table = Table::new(&["instance", "modes", "weights", "spectrum_error", "hermiticity"]);
    let (mut err, mut herm) = (0.0_f64, 0.0_f64);
    for i in 0..16 {
        let model = ToyModel::random(&mut rng, 1 + i % 4)?;
        let d = if i == 0 { 2 } else { rng.random_range(1..=model.n().min(4)) };
        let basis = SubspaceBasis::random(&model, d, &mut rng)?;
        let weights: Vec<f64> = if i == 0 {
            vec![1.0, 0.5]
        } else {
            (0..d).map(|_| rng.random_range(0.0..=1.0)).collect()
        };
        let q = q_weighted(&model, &basis, &weights)?;
        // The T_j commute, with T_j ∈ {‖P₊f_j‖², −‖P₋f_j‖²} independently.
        let shift: Vec<f64> = basis.vectors().iter().map(|f| (model.pminus() * f).norm_squared()).collect();
        let predicted: Vec<f64> = (0..1usize << d)
            .map(|mask| (0..d).map(|j| weights[j] * (((mask >> j) & 1) as f64 - shift[j])).sum())
            .collect();
        let e = set_distance(&eigen_centers(&q.eigenvalues()), &predicted);
        let h = q.hermiticity_deviation();
        err = err.max(e);
        herm = herm.max(h);
        let text = weights.iter().map(|w| format!("{w:.6}")).collect::<Vec<_>>().join(";");
        table.push(vec![i.into(), model.modes().into(), text.into(), e.into(), h.into()]);
    }
    let model = ToyModel::random(&mut rng, 3)?;
    let basis = SubspaceBasis::random(&model, 3, &mut rng)?;
    let zero = q_weighted(&model, &basis, &[0.0; 3])?.matrix.max_abs();
    let ones = q_weighted(&model, &basis, &[1.0; 3])?
        .matrix
        .max_abs_diff(&q_subspace(&model, &basis)?.matrix);
    let rejected = q_weighted(&model, &basis, &[0.5, 1.5, 0.0]).is_err() && q_weighted(&model, &basis, &[-0.1, 0.5, 0.0]).is_err();
    Ok(Report {
        table,
        checks: vec![
            Check::below("spectrum_error", err, 1e-9),
            Check::below("hermiticity", herm, 1e-12),
            Check::new("zero_weights", zero, Relation::AtMost, 0.0),
            Check::below("unit_weights_match_subspace_charge", ones, 1e-12),
            Check::new("out_of_range_rejected", f64::from(u8::from(rejected)), Relation::AtLeast, 1.0),
        ],
    })
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

pub(super) fn total_charge(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rng = rng(cfg);
    let mut table = Table::new(&[
        "instance",
        "modes",
        "d_plus",
        "d_minus",
        "lattice_distance",
        "multiplicities",
        "expected_multiplicities",
        "number_deviation",
        "sector_commutator",
        "one_particle",
    ]);
    let (mut lattice, mut mult_mismatch, mut number, mut sector, mut single) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..8 {
        let model = ToyModel::random(&mut rng, 1 + i % 4)?;
        let (dp, dm) = (model.dplus(), model.dminus());
        let q = q_total(&model)?.matrix;
        let ev = q.hermitian_eigenvalues();
        let clusters = cluster_values(&ev, CLUSTER_GAP);
        let got: Vec<usize> = clusters.iter().map(|c| c.count).collect();
        let expected: Vec<usize> = (-(dm as i64)..=dp as i64)
            .map(|c| {
                (0..=dp)
                    .filter_map(|a| {
                        let b = a as i64 - c;
                        (b >= 0).then(|| binomial(dp, a) * binomial(dm, b as usize))
                    })
                    .sum()
            })
            .collect();
        let centers: Vec<f64> = clusters.iter().map(|c| c.center).collect();
        let lattice_expected: Vec<f64> = (-(dm as i64)..=dp as i64).map(|c| c as f64).collect();
        let dist = if centers.len() == lattice_expected.len() {
            lattice_distance(&ev, 0.0).max(set_distance(&centers, &lattice_expected))
        } else {
            f64::INFINITY
        };
        let (np, nm) = model.number_operators();
        let nd = q.max_abs_diff(&(&np - &nm));
        let mut sc = 0.0_f64;
        for c in -(dm as i64)..=dp as i64 {
            let p = model.sector_projector(|a, b| a as i64 - b as i64 == c);
            sc = sc.max(q.commutator(&p).max_abs());
        }
        let omega = model.vacuum().amplitudes;
        let mut one = q.apply(&omega).norm();
        let u = &model.basis_plus()[0];
        let bu = model.creator_b(u)?.apply(&omega);
        one = one.max((q.apply(&bu) - &bu).norm());
        let v = &model.basis_minus()[0];
        let cv = model.creator_c(v)?.apply(&omega);
        one = one.max((q.apply(&cv) + &cv).norm());
        lattice = lattice.max(dist);
        mult_mismatch = mult_mismatch.max(if got == expected { 0.0 } else { 1.0 });
        number = number.max(nd);
        sector = sector.max(sc);
        single = single.max(one);
        table.push(vec![
            i.into(),
            model.modes().into(),
            dp.into(),
            dm.into(),
            dist.into(),
            multiplicity_text(&got).into(),
            multiplicity_text(&expected).into(),
            nd.into(),
            sc.into(),
            one.into(),
        ]);
    }
    Ok(Report {
        table,
        checks: vec![
            Check::below("integer_spectrum", lattice, 1e-9),
            Check::new("eigenspace_dimensions_mismatch", mult_mismatch, Relation::AtMost, 0.0),
            Check::below("equals_number_difference", number, 1e-12),
            Check::below("sector_commutator", sector, 1e-12),
            Check::below("vacuum_and_one_particle", single, 1e-12),
        ],
    })
}

pub(super) fn aligned(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rng = rng(cfg);
    let mut table = Table::new(&[
        "instance",
        "modes",
        "k_plus",
        "k_minus",
        "number_deviation",
        "lattice_distance",
        "vacuum",
        "series_max",
    ]);
    let (mut number, mut lattice, mut vac, mut series) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..12 {
        let model = ToyModel::random(&mut rng, 1 + i % 4)?;
        let kp = rng.random_range(0..=model.dplus());
        let km = rng.random_range(usize::from(kp == 0)..=model.dminus());
        let plus = mixed(model.basis_plus(), kp, &mut rng);
        let minus = mixed(model.basis_minus(), km, &mut rng);
        let mut vecs: Vec<CVector> = plus.iter().chain(&minus).cloned().collect();
        vecs.shuffle(&mut rng);
        let basis = SubspaceBasis::new(&model, vecs)?;
        let q = q_subspace(&model, &basis)?;
        let nd = q.matrix.max_abs_diff(&aligned_number(&model, &plus, &minus)?);
        let dist = lattice_distance(&q.eigenvalues(), 0.0);
        let v = q.matrix.apply(&model.vacuum().amplitudes).norm();
        let s = max_of(toy_series(&model, &basis).iter().map(|x| x.abs()));
        number = number.max(nd);
        lattice = lattice.max(dist);
        vac = vac.max(v);
        series = series.max(s);
        table.push(vec![
            i.into(),
            model.modes().into(),
            kp.into(),
            km.into(),
            nd.into(),
            dist.into(),
            v.into(),
            s.into(),
        ]);
    }
    Ok(Report {
        table,
        checks: vec![
            Check::below("equals_number_operator", number, 1e-12),
            Check::below("integer_spectrum", lattice, 1e-9),
            Check::below("vacuum_annihilated", vac, 1e-12),
            Check::below("vacuum_series_vanishes", series, 1e-12),
        ],
    })
}

pub(super) fn bessel_check(cfg: &ExperimentConfig) -> Result<Report> {
    let m = if cfg.m > 0.0 { cfg.m } else { 1.0 };
    let mut table = Table::new(&["kind", "x", "value", "reference", "rel_error"]);
    let push = |table: &mut Table, kind: &str, x: f64, value: f64, reference: f64| -> f64 {
        let e = ((value - reference) / reference).abs();
        table.push(vec![kind.into(), x.into(), value.into(), reference.into(), e.into()]);
        e
    };
    let z = 0.02;
    let small = (z * k1(z)? - 1.0).abs();
    table.push(vec!["z_k1_at_zero".into(), z.into(), (z * k1(z)?).into(), 1.0.into(), small.into()]);

    let mut integral = 0.0_f64;
    for i in 0..=20 {
        let z = 0.1 * 100f64.powf(i as f64 / 20.0);
        let e = push(&mut table, "k0_vs_integral", z, k0(z)?, k0_oscillatory(z)?);
        integral = integral.max(e);
    }

    let mut wronskian = 0.0_f64;
    for i in 0..=12 {
        let z = 0.01 * 1000f64.powf(i as f64 / 12.0);
        let h = 1e-3 * z;
        let d = (k0_oscillatory(z - 2.0 * h)? - 8.0 * k0_oscillatory(z - h)? + 8.0 * k0_oscillatory(z + h)?
            - k0_oscillatory(z + 2.0 * h)?)
            / (12.0 * h);
        let e = push(&mut table, "k1_vs_integral_derivative", z, k1(z)?, -d);
        wronskian = wronskian.max(e);
    }

    let mut kernel = 0.0_f64;
    for i in 0..50 {
        let r = 0.1 + 4.9 * i as f64 / 49.0;
        let e = push(&mut table, "kernel", r, inverse_energy_kernel_fd(m, r)?, inverse_energy_kernel(m, r)?);
        kernel = kernel.max(e);
    }

    let mut monotone = true;
    let mut prev = (f64::INFINITY, f64::INFINITY);
    for i in 0..=100 {
        let z = 1e-3 * 50_000f64.powf(i as f64 / 100.0);
        let v = (k0(z)?, k1(z)?);
        monotone &= v.0 > 0.0 && v.1 > 0.0 && v.0 < prev.0 && v.1 < prev.1;
        prev = v;
    }
    Ok(Report {
        table,
        checks: vec![
            Check::below("small_argument_limit", small, 0.01),
            Check::below("k0_integral_representation", integral, 1e-8),
            Check::below("k1_derivative_relation", wronskian, 1e-7),
            Check::below("inverse_energy_kernel", kernel, 1e-6),
            Check::new("positive_decreasing", f64::from(u8::from(monotone)), Relation::AtLeast, 1.0),
        ],
    })
}

/// Quadrature order used to test self-convergence: twice the configured order
/// when that grid is admissible, half of it otherwise.
pub fn comparison_order(cfg: &ExperimentConfig) -> Result<usize> {
    if build_grid(cfg.cutoff, cfg.panels, 2 * cfg.order).is_ok() {
        Ok(2 * cfg.order)
    } else if cfg.order >= 4 {
        Ok(cfg.order / 2)
    } else {
        Err(Error::InvalidConfig(format!(
            "order {} cannot be doubled within the node limit nor halved",
            cfg.order
        )))
    }
}

pub(super) fn vacuum_divergence(cfg: &ExperimentConfig) -> Result<Report> {
    let k_max = cfg.shells;
    if k_max < 2 {
        return Err(Error::TooFewShells {
            needed: 3,
            got: k_max as usize + 1,
        });
    }
    let grid = build_grid(cfg.cutoff, cfg.panels, cfg.order)?;
    let other_order = comparison_order(cfg)?;
    let other_grid = build_grid(cfg.cutoff, cfg.panels, other_order)?;
    let (shell, grams) = shell_grams(k_max, cfg.m, &grid)?;
    let inv = series_trace_from_grams(&shell, &grams, &grid, BasisKind::CInvariant)?;
    let product = series_trace_from_grams(&shell, &grams, &grid, BasisKind::Product)?;
    let scalar = series_scalar_from_grams(&shell, &grams, &grid);
    drop(grams);
    let (_, other_grams) = shell_grams(k_max, cfg.m, &other_grid)?;
    let other = series_trace_from_grams(&shell, &other_grams, &other_grid, BasisKind::CInvariant)?;

    let mut table = Table::new(&[
        "shell",
        "K",
        "J",
        "S",
        "deltaS",
        "tail_estimate",
        "S_product",
        "S_scalar",
        "S_comparison_order",
    ]);
    for (i, p) in inv.points.iter().enumerate() {
        table.push(vec![
            i.into(),
            p.k.into(),
            p.j.into(),
            p.s.into(),
            p.delta_s.into(),
            p.tail_estimate.into(),
            product.points[i].s.into(),
            scalar.points[i].s.into(),
            other.points[i].s.into(),
        ]);
    }

    let tol = grid.tail_estimate(k_max);
    let s = inv.values();
    let route = max_of(
        product
            .points
            .iter()
            .zip(&scalar.points)
            .map(|(a, b)| ((a.s - b.s) / b.s).abs()),
    );
    let min_s = s.iter().copied().fold(f64::INFINITY, f64::min);
    let min_increment = inv.points[1..].iter().map(|p| p.delta_s).fold(f64::INFINITY, f64::min);
    let half = (k_max / 2) as usize;
    let ratio = s[k_max as usize] / s[half];
    let order_change = max_of(s.iter().zip(other.values()).map(|(a, b)| ((a - b) / a).abs()));
    let growth = growth_diagnostics(&inv)?;
    let last = *growth.increments.last().unwrap_or(&0.0);
    Ok(Report {
        table,
        checks: vec![
            Check::below("route_agreement", route, 1e-6),
            Check::new("positivity", min_s, Relation::AtLeast, -tol),
            Check::new("strictly_increasing", min_increment, Relation::Above, 0.0),
            Check::new(&format!("growth_ratio_K{k_max}_over_K{half}"), ratio, Relation::AtLeast, 2.0),
            Check::below(&format!("order_change_{}_vs_{}", cfg.order, other_order), order_change, 0.01),
            Check::new("diagonal_half", inv.diagonal_deviation.unwrap_or(f64::NAN), Relation::AtMost, tol),
            Check::new("first_mode_quarter", (inv.first_mode - 0.25).abs(), Relation::AtMost, tol),
            Check::new("no_cauchy_convergence", last / growth.median_increment, Relation::AtLeast, 0.5),
        ],
    })
}

fn decomposition_states<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<(&'static str, CreatorState)> {
    let mut v = || random_unit_vector(rng, n);
    let term = |particles: Vec<CVector>, antiparticles: Vec<CVector>| CreatorTerm {
        coeff: ONE,
        particles,
        antiparticles,
    };
    let g1 = v();
    let g2 = v();
    let h1 = v();
    let g3 = v();
    let h2 = v();
    vec![
        ("vacuum", CreatorState::vacuum()),
        ("b*(g)", CreatorState::new(vec![term(vec![g1.clone()], vec![])]).unwrap()),
        ("b*(g1)c*(h1)", CreatorState::new(vec![term(vec![g1.clone()], vec![h1.clone()])]).unwrap()),
        ("b*(g1)b*(g2)c*(h1)", CreatorState::new(vec![term(vec![g1.clone(), g2], vec![h1.clone()])]).unwrap()),
        (
            "b*(g1)c*(h1)+b*(g3)c*(h2)",
            CreatorState::new(vec![term(vec![g1], vec![h1]), term(vec![g3], vec![h2])]).unwrap(),
        ),
    ]
}

pub(super) fn decomposition(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rng = rng(cfg);
    let mut table = Table::new(&[
        "instance",
        "state",
        "J",
        "sector_norm",
        "sum1",
        "sum2",
        "sum3",
        "sum4",
        "residual",
        "kernel_residual",
        "route_deviation",
    ]);
    let (mut res, mut kres, mut route) = (0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..6 {
        let model = ToyModel::random(&mut rng, 2 + i % 3)?;
        let d = model.n().min(5);
        let basis = SubspaceBasis::random(&model, d, &mut rng)?;
        for (name, state) in decomposition_states(model.n(), &mut rng) {
            for j in [1, d / 2, d] {
                let r = sector_norm_decomposition(&model, &basis, j, &state)?;
                res = res.max(r.residual);
                kres = kres.max(r.kernel_residual);
                route = route.max(r.route_deviation);
                table.push(vec![
                    i.into(),
                    name.into(),
                    j.into(),
                    r.sector_norm.into(),
                    r.direct[0].into(),
                    r.direct[1].into(),
                    r.direct[2].into(),
                    r.direct[3].into(),
                    r.residual.into(),
                    r.kernel_residual.into(),
                    r.route_deviation.into(),
                ]);
            }
        }
    }
    Ok(Report {
        table,
        checks: vec![
            Check::below("four_sum_residual", res, 1e-10),
            Check::below("kernel_residual", kres, 1e-10),
            Check::below("kernel_route_deviation", route, 1e-10),
        ],
    })
}

pub(super) fn oracle_equivalence(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rng = rng(cfg);
    let mut table = Table::new(&["instance", "kind", "modes", "J", "deviation", "diagonal_half_deviation"]);
    let (mut dev, mut diag) = (0.0_f64, 0.0_f64);
    for i in 0..16 {
        let model = ToyModel::random(&mut rng, 1 + i % 4)?;
        let j = model.n().min(6);
        let invariant = i % 2 == 1;
        let basis = if invariant {
            SubspaceBasis::random_c_invariant(&model, j, &mut rng)?
        } else {
            SubspaceBasis::random(&model, j, &mut rng)?
        };
        let e = toy_oracle_equivalence(&model, &basis, j)?;
        dev = dev.max(e);
        let half = if invariant {
            let mp = basis.m_plus(&model, j);
            let h = max_of((0..j).map(|a| (mp[(a, a)] - C64::from(0.5)).norm()));
            diag = diag.max(h);
            Some(h)
        } else {
            None
        };
        table.push(vec![
            i.into(),
            (if invariant { "c_invariant" } else { "generic" }).into(),
            model.modes().into(),
            j.into(),
            e.into(),
            half.into(),
        ]);
    }
    Ok(Report {
        table,
        checks: vec![
            Check::below("fock_vs_trace_formula", dev, 1e-10),
            Check::below("c_invariant_diagonal_half", diag, 1e-12),
        ],
    })
}
