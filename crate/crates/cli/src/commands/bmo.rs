use std::io::Write;

use rayon::prelude::*;

use conducta_core::bmo_analysis::{analyze_potential, corpus_report, CorpusReport};
use conducta_core::bounds::optimize_s;
use conducta_core::microstructure::{empirical_phase_set, read_grid_file};
use conducta_core::{BoundConfig, VoxelGrid};

use super::{emit, worker_pool};
use crate::format::{num, opt_num};
use crate::manifest::RunManifest;
use crate::{BmoArgs, CliError, SPolicy};

pub const BMO_CSV_HEADER: [&str; 12] = [
    "label",
    "S",
    "bmo_norm",
    "osc_theta",
    "osc_theta_closed_form",
    "b",
    "B",
    "max_violation",
    "fitted",
    "lemma1_max",
    "bmo_over_osc",
    "degenerate",
];

fn choose_s(g: &VoxelGrid, s: SPolicy, c: f64) -> Result<f64, CliError> {
    match s {
        SPolicy::Value(s) => Ok(s),
        SPolicy::Optimize => {
            let r = optimize_s(&empirical_phase_set(g), &BoundConfig::with_c(c))?;
            Ok(r.s_used.expect("optimized bound records S"))
        }
    }
}

/// Analyzes each labelled grid in order and collects the corpus report.
pub fn bmo_report(
    grids: &[(String, VoxelGrid)],
    s: SPolicy,
    c: f64,
    levels: usize,
    margin: f64,
    workers: Option<usize>,
) -> Result<CorpusReport, CliError> {
    if !(margin.is_finite() && margin >= 0.0) {
        return Err(CliError::Validation(format!("--margin must be nonnegative, got {margin}")));
    }
    let pool = worker_pool(workers)?;
    let entries = pool.install(|| {
        grids
            .par_iter()
            .map(|(label, g)| {
                let s = choose_s(g, s, c)?;
                Ok(analyze_potential(label, g, s, levels)?)
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    Ok(corpus_report(entries, margin))
}

pub fn render(report: &CorpusReport) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(BMO_CSV_HEADER)?;
    for e in &report.entries {
        w.write_record([
            e.label.clone(),
            num(e.s),
            opt_num(e.bmo.as_ref().map(|b| b.norm_value)),
            num(e.osc_theta),
            num(e.osc_theta_closed_form),
            opt_num(e.fit.as_ref().map(|f| f.b)),
            opt_num(e.fit.as_ref().map(|f| f.big_b)),
            opt_num(e.fit.as_ref().map(|f| f.max_violation)),
            e.fit.as_ref().map_or("-".into(), |f| f.fitted_by_regression.to_string()),
            opt_num(e.max_lemma1_ratio),
            opt_num(e.bmo_over_osc),
            e.is_degenerate().to_string(),
        ])?;
    }
    let mut doc = String::from_utf8(w.into_inner().map_err(|e| CliError::Validation(e.to_string()))?)
        .expect("ASCII CSV");
    let degenerate = report.entries.iter().filter(|e| e.is_degenerate()).count();
    doc += &format!("# fields = {}\n", report.entries.len());
    doc += &format!("# degenerate = {degenerate}\n");
    doc += &format!("# max_lemma1_ratio = {}\n", num(report.max_lemma1_ratio));
    doc += &format!("# margin = {}\n", num(report.margin));
    doc += &format!("# recommended_C = {}\n", num(report.recommended_c));
    doc += &format!("# C_fit = {}\n", num(report.c_fit));
    Ok(doc)
}

pub(super) fn run(a: BmoArgs, argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let mut m = RunManifest::new("bmo", argv);
    let grids = match &a.grid {
        Some(path) => {
            m.input(path);
            let g = read_grid_file(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            vec![(path.display().to_string(), g)]
        }
        None => {
            a.corpus.validate()?;
            m.seed = Some(a.corpus.seed);
            m.set("count", a.corpus.count)
                .set("size", a.corpus.size)
                .set("dim", a.corpus.dim)
                .set("phases", a.corpus.phases);
            (0..a.corpus.count)
                .map(|i| {
                    let (seed, _, g) = a.corpus.member(i)?;
                    Ok((format!("seed{seed}"), g))
                })
                .collect::<Result<Vec<_>, CliError>>()?
        }
    };
    let report = bmo_report(&grids, a.s, a.c, a.levels, a.margin, a.workers)?;
    let doc = render(&report)?;
    m.set("S", a.s)
        .set("C", num(a.c))
        .set("margin", num(a.margin))
        .set("levels", a.levels);
    emit(&doc, a.out.as_deref(), m, stdout)?;
    if report.entries.iter().all(|e| e.is_degenerate()) {
        let _ = writeln!(stderr, "every field is constant; no BMO constant can be estimated");
    } else {
        let _ = writeln!(
            stderr,
            "recommended_C = {} (max ratio {}, margin {})",
            num(report.recommended_c),
            num(report.max_lemma1_ratio),
            num(report.margin)
        );
    }
    Ok(())
}
