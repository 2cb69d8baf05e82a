use std::io::Write;

use rayon::prelude::*;

use conducta_core::bounds::{hs_upper, optimize_s, trivial_upper};
use conducta_core::cell_solver::{constructive_upper, solve_effective_tensor};
use conducta_core::microstructure::empirical_phase_set;
use conducta_core::{BoundConfig, SolverConfig};

use super::{emit, worker_pool};
use crate::format::num;
use crate::manifest::{manifest_path, RunManifest};
use crate::{CliError, CorpusArgs, VerifyArgs};

/// Relative slack below which an analytic bound counts as violated.
pub const BOUND_SLACK: f64 = 1e-6;
/// Relative slack for the constructive bound, which carries solver error.
pub const CONSTRUCTIVE_SLACK: f64 = 1e-5;

pub const VERIFY_CSV_HEADER: [&str; 11] = [
    "index",
    "seed",
    "sigma",
    "mu",
    "sigma_bar",
    "trivial",
    "hs",
    "constructive_min",
    "theorem1",
    "iterations",
    "violations",
];

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRow {
    pub index: usize,
    pub seed: u64,
    pub sigma: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma_bar: f64,
    pub trivial: f64,
    pub hs: f64,
    /// Smallest constructive value over `S ∈ {σ₁, (σ₁+σ_K)/2, σ_K}`.
    pub constructive_min: f64,
    pub theorem1: Option<f64>,
    pub iterations: usize,
    pub violations: Vec<&'static str>,
}

impl VerifyRow {
    fn record(&self) -> Vec<String> {
        let list = |v: &[f64]| v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(";");
        vec![
            self.index.to_string(),
            self.seed.to_string(),
            list(&self.sigma),
            list(&self.mu),
            num(self.sigma_bar),
            num(self.trivial),
            num(self.hs),
            num(self.constructive_min),
            self.theorem1.map_or_else(|| "-".into(), num),
            self.iterations.to_string(),
            if self.violations.is_empty() {
                "none".into()
            } else {
                self.violations.join(";")
            },
        ]
    }
}

fn check_member(
    corpus: &CorpusArgs,
    index: usize,
    c: Option<f64>,
    solver: &SolverConfig,
) -> Result<VerifyRow, CliError> {
    let (seed, _, g) = corpus.member(index)?;
    // bounds apply to the composite actually realized on the grid
    let ps = empirical_phase_set(&g);
    let t = solve_effective_tensor(&g, solver)?;
    let sb = t.sigma_bar;
    let trivial = trivial_upper(&ps).value;
    let hs = hs_upper(&ps).value;
    let constructive_min = [
        ps.sigma_min(),
        0.5 * (ps.sigma_min() + ps.sigma_max()),
        ps.sigma_max(),
    ]
    .iter()
    .map(|&s| constructive_upper(&g, s))
    .fold(f64::INFINITY, f64::min);
    let theorem1 = c
        .map(|c| optimize_s(&ps, &BoundConfig::with_c(c)).map(|r| r.value))
        .transpose()?;

    let mut violations = Vec::new();
    if trivial < sb * (1.0 - BOUND_SLACK) {
        violations.push("trivial");
    }
    if hs < sb * (1.0 - BOUND_SLACK) {
        violations.push("hashin_shtrikman");
    }
    if constructive_min < sb * (1.0 - CONSTRUCTIVE_SLACK) {
        violations.push("constructive");
    }
    if theorem1.is_some_and(|v| v < sb * (1.0 - BOUND_SLACK)) {
        violations.push("theorem1");
    }
    Ok(VerifyRow {
        index,
        seed,
        sigma: ps.phases().iter().map(|p| p.conductivity).collect(),
        mu: ps.phases().iter().map(|p| p.volume_fraction).collect(),
        sigma_bar: sb,
        trivial,
        hs,
        constructive_min,
        theorem1,
        iterations: t.iterations.iter().copied().max().unwrap_or(0),
        violations,
    })
}

/// Checks every corpus member, in index order regardless of scheduling.
pub fn verify_corpus(
    corpus: &CorpusArgs,
    c: Option<f64>,
    solver: &SolverConfig,
    workers: Option<usize>,
) -> Result<Vec<VerifyRow>, CliError> {
    corpus.validate()?;
    if let Some(c) = c {
        BoundConfig::with_c(c).validate()?;
    }
    let pool = worker_pool(workers)?;
    pool.install(|| {
        (0..corpus.count)
            .into_par_iter()
            .map(|i| check_member(corpus, i, c, solver))
            .collect()
    })
}

fn summary(rows: &[VerifyRow], theorem1_checked: bool) -> Vec<(String, String)> {
    let count = |name: &str| rows.iter().filter(|r| r.violations.contains(&name)).count();
    let min_slack = |f: &dyn Fn(&VerifyRow) -> f64| {
        rows.iter().map(|r| (f(r) - r.sigma_bar) / r.sigma_bar).fold(f64::INFINITY, f64::min)
    };
    let mut out = vec![
        ("grids".to_string(), rows.len().to_string()),
        ("violations.trivial".into(), count("trivial").to_string()),
        ("violations.hashin_shtrikman".into(), count("hashin_shtrikman").to_string()),
        ("violations.constructive".into(), count("constructive").to_string()),
        (
            "violations.theorem1".into(),
            if theorem1_checked {
                count("theorem1").to_string()
            } else {
                "unchecked".into()
            },
        ),
        ("min_slack.trivial".into(), num(min_slack(&|r| r.trivial))),
        ("min_slack.hashin_shtrikman".into(), num(min_slack(&|r| r.hs))),
        ("min_slack.constructive".into(), num(min_slack(&|r| r.constructive_min))),
    ];
    if theorem1_checked {
        out.push(("min_slack.theorem1".into(), num(min_slack(&|r| r.theorem1.unwrap()))));
    }
    out
}

pub(super) fn run(a: VerifyArgs, argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let solver = a.solver.config();
    let rows = verify_corpus(&a.corpus, a.c, &solver, a.workers)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(VERIFY_CSV_HEADER)?;
    for r in &rows {
        w.write_record(r.record())?;
    }
    let mut doc = String::from_utf8(w.into_inner().map_err(|e| CliError::Validation(e.to_string()))?)
        .expect("ASCII CSV");
    let summary = summary(&rows, a.c.is_some());
    for (k, v) in &summary {
        doc += &format!("# {k} = {v}\n");
    }

    let corpus = &a.corpus;
    let mut m = RunManifest::new("verify", argv);
    m.set("count", corpus.count)
        .set("size", corpus.size)
        .set("dim", corpus.dim)
        .set("phases", corpus.phases)
        .set("sigma_min", num(corpus.sigma_min))
        .set("sigma_max", num(corpus.sigma_max))
        .set("correlation_length", corpus.correlation_length.map_or("iid".into(), num))
        .set("C", a.c.map_or("unchecked".into(), num))
        .set("tol", num(solver.relative_tolerance))
        .set("max_iter", solver.max_iterations);
    m.seed = Some(corpus.seed);
    emit(&doc, a.out.as_deref(), m, stdout)?;

    for (k, v) in &summary {
        let _ = writeln!(stderr, "{k} = {v}");
    }
    let bad: Vec<&VerifyRow> = rows.iter().filter(|r| !r.violations.is_empty()).collect();
    if bad.is_empty() {
        return Ok(());
    }
    for r in &bad {
        let _ = writeln!(
            stderr,
            "violation index={} seed={} bounds={} sigma_bar={} (rerun alone with --count 1 --seed {})",
            r.index,
            r.seed,
            r.violations.join(";"),
            num(r.sigma_bar),
            r.seed
        );
    }
    if let Some(out) = &a.out {
        let _ = writeln!(stderr, "full run: conducta replay {}", manifest_path(out).display());
    }
    Err(CliError::Violation(format!("{} of {} grids violate a bound", bad.len(), rows.len())))
}
