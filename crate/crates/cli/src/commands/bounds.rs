use std::io::Write;

use conducta_core::bounds::{
    hs_upper, log_spaced_mu3, mu3_sweep, optimize_s, theorem1_upper, three_phase_refined, trivial_upper,
    SWEEP_CSV_HEADER,
};
use conducta_core::{BoundConfig, BoundReport, PhaseSet};

use super::{emit, load_phases};
use crate::format::{num, opt_num};
use crate::manifest::RunManifest;
use crate::{BoundsArgs, CliError, SPolicy, SweepArgs};

pub const BOUNDS_HEADER: &str = "row\tbound\tvalue\tS\tC\tH\tE";

fn row(label: &str, r: &BoundReport) -> String {
    format!(
        "{label}\t{}\t{}\t{}\t{}\t{}\t{}\n",
        r.bound_name,
        num(r.value),
        opt_num(r.s_used),
        opt_num(r.c_used),
        opt_num(r.h_term),
        opt_num(r.e_term)
    )
}

/// Tab-separated bound table preceded by `#` metadata lines.
pub fn bounds_table(ps: &PhaseSet, cfg: &BoundConfig, s: SPolicy) -> Result<String, CliError> {
    cfg.validate()?;
    let mut doc = format!(
        "# dimension = {}\n# sigma = {}\n# mu = {}\n",
        ps.dimension(),
        crate::format::num_list(&ps.phases().iter().map(|p| p.conductivity).collect::<Vec<_>>()),
        crate::format::num_list(&ps.phases().iter().map(|p| p.volume_fraction).collect::<Vec<_>>()),
    );
    doc.push_str(BOUNDS_HEADER);
    doc.push('\n');
    doc += &row("trivial", &trivial_upper(ps));
    doc += &row("hs", &hs_upper(ps));
    if let SPolicy::Value(s) = s {
        doc += &row("theorem1", &theorem1_upper(ps, s, cfg)?);
    }
    doc += &row("theorem1_opt", &optimize_s(ps, cfg)?);
    if ps.len() == 3 {
        doc += &row("refined", &three_phase_refined(ps, cfg)?);
    }
    Ok(doc)
}

pub(super) fn run_bounds(a: BoundsArgs, argv: &[String], stdout: &mut dyn Write) -> Result<(), CliError> {
    let ps = load_phases(&a.config, a.dim)?;
    let cfg = a.bound.config();
    let doc = bounds_table(&ps, &cfg, a.s)?;
    let mut m = RunManifest::new("bounds", argv);
    m.input(&a.config)
        .set("C", num(cfg.c))
        .set("S", a.s)
        .set("simplified_e", cfg.use_simplified_e)
        .set("s_search_points", cfg.s_search_points);
    emit(&doc, a.out.as_deref(), m, stdout)
}

pub fn sweep_csv(base: &PhaseSet, cfg: &BoundConfig, mu3: &[f64]) -> Result<String, CliError> {
    let rows = mu3_sweep(base, mu3, cfg)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_CSV_HEADER.split(','))?;
    for r in rows {
        w.write_record([r.mu3, r.trivial, r.hs, r.theorem1_opt, r.s_opt, r.two_phase_hs, r.gap].map(num))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV of ASCII numbers"))
}

pub(super) fn run_sweep(a: SweepArgs, argv: &[String], stdout: &mut dyn Write) -> Result<(), CliError> {
    let ps = load_phases(&a.config, a.dim)?;
    let cfg = a.bound.config();
    let mu3 = match &a.mu3 {
        Some(v) => {
            let mut v = v.clone();
            if !a.no_zero && !v.contains(&0.0) {
                v.push(0.0);
            }
            v
        }
        None => {
            if !(a.mu3_min > 0.0 && a.mu3_min <= a.mu3_max && a.mu3_max < 1.0) {
                return Err(CliError::Validation(format!(
                    "need 0 < mu3-min <= mu3-max < 1, got {} and {}",
                    a.mu3_min, a.mu3_max
                )));
            }
            log_spaced_mu3(a.mu3_min, a.mu3_max, a.points, !a.no_zero)
        }
    };
    let doc = sweep_csv(&ps, &cfg, &mu3)?;
    let mut m = RunManifest::new("sweep", argv);
    m.input(&a.config)
        .set("C", num(cfg.c))
        .set("simplified_e", cfg.use_simplified_e)
        .set("mu3", crate::format::num_list(&mu3));
    emit(&doc, a.out.as_deref(), m, stdout)
}
