//! One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use fockcharge::runner::{run, Check, ExperimentConfig, Report, Value, EXPERIMENTS};

struct Criterion {
    id: u32,
    name: &'static str,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Criterion {
    fn new(id: u32, name: &'static str) -> Self {
        Criterion {
            id,
            name,
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn below(&mut self, what: &str, value: f64, tol: f64) {
        self.require(value < tol, format!("{what}={value:.3e}<{tol:.0e}"));
    }

    fn above(&mut self, what: &str, value: f64, tol: f64) {
        self.require(value > tol, format!("{what}={value:.3e}>{tol:.0e}"));
    }

    fn line(&self) -> String {
        let status = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        let detail = if self.failures.is_empty() {
            self.notes.join(" ")
        } else {
            self.failures.join(" ")
        };
        format!("{status} criterion {} {}: {detail}", self.id, self.name)
    }
}

fn config(name: &str, overrides: &[(&str, &str)]) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        experiment: name.into(),
        ..Default::default()
    };
    for (k, v) in overrides {
        cfg.set(k, v).expect("valid override");
    }
    cfg
}

fn timed(name: &str, overrides: &[(&str, &str)]) -> (Report, f64) {
    let start = Instant::now();
    let report = run(&config(name, overrides)).unwrap_or_else(|e| panic!("{name}: {e}"));
    (report, start.elapsed().as_secs_f64())
}

fn check<'a>(report: &'a Report, name: &str) -> &'a Check {
    report
        .checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("missing check {name}"))
}

fn value(report: &Report, name: &str) -> f64 {
    check(report, name).value
}

fn numbers(report: &Report, column: &str) -> Vec<f64> {
    report
        .table
        .column(column)
        .unwrap_or_else(|| panic!("missing column {column}"))
        .into_iter()
        .map(|v| match v {
            Value::Int(i) => *i as f64,
            Value::Float(x) => *x,
            other => panic!("non-numeric {column}: {other:?}"),
        })
        .collect()
}

fn texts(report: &Report, column: &str) -> Vec<String> {
    report
        .table
        .column(column)
        .unwrap_or_else(|| panic!("missing column {column}"))
        .into_iter()
        .map(|v| v.to_string())
        .collect()
}

fn car() -> Criterion {
    let mut c = Criterion::new(1, "CAR suite");
    let (r, secs) = timed("car-check", &[]);
    c.require(r.table.rows.len() == 100, format!("instances={}", r.table.rows.len()));
    let modes = numbers(&r, "modes");
    let max_modes = modes.iter().cloned().fold(0.0, f64::max);
    c.require(max_modes == 12.0, format!("max_modes={max_modes}"));
    let dev = numbers(&r, "max").into_iter().fold(0.0, f64::max);
    c.below("max_deviation", dev, 1e-12);
    c.below("runtime_s", secs, 30.0);
    c
}

fn spectrum() -> Criterion {
    let mut c = Criterion::new(2, "subspace charge spectrum");
    let (r, secs) = timed("spectrum", &[]);
    let kinds = texts(&r, "kind");
    let generic = kinds.iter().filter(|k| *k == "generic").count();
    c.require(generic == 50, format!("generic_instances={generic}"));
    let d_max = numbers(&r, "d").into_iter().fold(0.0, f64::max);
    let n_max = numbers(&r, "modes").into_iter().fold(0.0, f64::max);
    c.require(d_max <= 4.0 && n_max <= 8.0, format!("d<={d_max} n<={n_max}"));
    c.below("spectrum_error", value(&r, "spectrum_error"), 1e-9);
    c.below("basis_independence", value(&r, "basis_independence"), 1e-10);
    c.below("runtime_s", secs, 120.0);
    c
}

fn commutation() -> Criterion {
    let mut c = Criterion::new(3, "additivity, commutation, invariant subspaces");
    let (r, _) = timed("additivity", &[]);
    c.below("orthogonal_commutator", value(&r, "orthogonal_commutator"), 1e-11);
    c.below("overlapping_commutator", value(&r, "overlapping_commutator"), 1e-11);
    c.below("additivity", value(&r, "additivity"), 1e-11);
    let (s, _) = timed("spectrum", &[]);
    c.below("half_dimension", value(&s, "c_invariant_half_dimension"), 1e-10);
    c.below("lattice", value(&s, "c_invariant_lattice"), 1e-9);
    c
}

fn cbasis() -> Criterion {
    let mut c = Criterion::new(4, "invariant basis constructor");
    let (r, _) = timed("cbasis", &[]);
    let kinds = texts(&r, "seed_kind");
    let standard = kinds.iter().filter(|k| *k == "standard").count();
    c.require(standard == 200, format!("instances={standard}"));
    c.require(kinds.iter().any(|k| k == "interleaved"), "adversarial_seed_included");
    let dims = numbers(&r, "dim");
    c.require(dims.iter().all(|d| *d <= 16.0), "dim<=16");
    let inv = numbers(&r, "invariance").into_iter().fold(0.0, f64::max);
    let gram = numbers(&r, "gram").into_iter().fold(0.0, f64::max);
    c.below("invariance", inv, 1e-10);
    c.below("gram", gram, 1e-10);
    let full = numbers(&r, "rank").iter().zip(&dims).all(|(a, b)| a == b);
    c.require(full, "full_rank");
    c
}

fn oracle() -> Criterion {
    let mut c = Criterion::new(5, "oracle equivalence and four-sum decomposition");
    let (r, _) = timed("oracle-equivalence", &[]);
    let n_max = numbers(&r, "modes").into_iter().fold(0.0, f64::max);
    let j_max = numbers(&r, "J").into_iter().fold(0.0, f64::max);
    c.require(n_max <= 8.0 && j_max <= 6.0, format!("n<={n_max} J<={j_max}"));
    c.below("fock_vs_trace", value(&r, "fock_vs_trace_formula"), 1e-10);
    let (d, _) = timed("decomposition", &[]);
    let states = texts(&d, "state");
    for s in ["vacuum", "b*(g)", "b*(g1)c*(h1)", "b*(g1)b*(g2)c*(h1)"] {
        c.require(states.iter().any(|x| x == s), format!("state {s}"));
    }
    c.below("four_sum_residual", value(&d, "four_sum_residual"), 1e-10);
    c
}

fn bessel() -> Criterion {
    let mut c = Criterion::new(6, "Bessel functions and inverse-energy kernel");
    let (r, secs) = timed("bessel-check", &[]);
    c.below("|zK1-1|@0.02", value(&r, "small_argument_limit"), 0.01);
    c.below("k0_vs_integral", value(&r, "k0_integral_representation"), 1e-8);
    c.below("kernel", value(&r, "inverse_energy_kernel"), 1e-6);
    c.below("runtime_s", secs, 10.0);
    c
}

fn divergence() -> Criterion {
    let mut c = Criterion::new(7, "vacuum-norm divergence, K=0..4, m=1");
    let (r, secs) = timed("vacuum-divergence", &[]);
    let s = numbers(&r, "S");
    let j = numbers(&r, "J");
    c.require(j == [4.0, 108.0, 500.0, 1372.0, 2916.0], format!("J_max={}", j.last().unwrap()));
    c.below("route_agreement", value(&r, "route_agreement"), 1e-6);
    let tol = numbers(&r, "tail_estimate").into_iter().fold(0.0, f64::max);
    let min_s = s.iter().cloned().fold(f64::INFINITY, f64::min);
    c.require(min_s >= -tol, format!("min_S={min_s:.4}"));
    c.require(s.windows(2).all(|w| w[1] > w[0]), "strictly_increasing");
    let ratio = s[4] / s[2];
    c.require(ratio >= 2.0, format!("S4/S2={ratio:.3}"));
    let order = r.checks.iter().find(|ch| ch.name.starts_with("order_change")).expect("order check");
    c.below(&order.name, order.value, 0.01);
    // Order 12 at the default cutoff exceeds the node limit; compare 6 and 12 on a smaller grid.
    let (fine, fine_secs) = timed("vacuum-divergence", &[("cutoff", "20")]);
    let order = fine.checks.iter().find(|ch| ch.name.starts_with("order_change")).expect("order check");
    c.below(&format!("cutoff20_{}", order.name), order.value, 0.01);
    c.below("diagonal_half", value(&r, "diagonal_half"), 1e-10);
    c.notes.push(format!("S={}", s.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(";")));
    c.notes.push(format!("runtime_s={:.1}", secs + fine_secs));
    c
}

fn witness() -> Criterion {
    let mut c = Criterion::new(8, "modified charge witness");
    let (r, _) = timed("qtilde", &[]);
    c.above("commutator", value(&r, "witness_commutator"), 1e-6);
    c.below("additivity", value(&r, "additivity"), 1e-11);
    c.below("hermiticity", value(&r, "hermiticity"), 1e-12);
    c.below("aligned_equals_q", value(&r, "aligned_equals_q"), 1e-11);
    c.below("aligned_equals_N+-N-", value(&r, "full_aligned_equals_number_difference"), 1e-11);
    c
}

fn determinism() -> Criterion {
    let mut c = Criterion::new(9, "determinism");
    let bin = env!("CARGO_BIN_EXE_fockcharge");
    for name in EXPERIMENTS {
        let out = || {
            Command::new(bin)
                .args([name, "--no-timestamp"])
                .output()
                .unwrap_or_else(|e| panic!("{name}: {e}"))
        };
        let (a, b) = (out(), out());
        let same = a.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
        if same {
            c.notes.push(name.to_string());
        } else {
            c.failures.push(format!("{name} differs"));
        }
    }
    c
}

fn main() -> ExitCode {
    let criteria: [fn() -> Criterion; 9] = [
        car,
        spectrum,
        commutation,
        cbasis,
        oracle,
        bessel,
        divergence,
        witness,
        determinism,
    ];
    let mut failed = 0;
    for f in criteria {
        let c = f();
        println!("{}", c.line());
        if !c.failures.is_empty() {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
