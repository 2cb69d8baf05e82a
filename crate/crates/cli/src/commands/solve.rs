use std::fmt::Write as _;
use std::io::Write;

use conducta_core::bounds::{hs_upper, optimize_s, theorem1_upper, three_phase_refined, trivial_upper};
use conducta_core::cell_solver::{constructive_upper, solve_effective_tensor};
use conducta_core::microstructure::{empirical_phase_set, read_grid_file};
use conducta_core::{BoundConfig, BoundReport, SolverConfig, VoxelGrid};

use super::emit;
use crate::format::{num, num_list};
use crate::manifest::RunManifest;
use crate::{CliError, SPolicy, SolveArgs};

fn status(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

/// `key = value` report of the effective tensor and every bound check.
///
/// Analytic bounds use the realized volume fractions of the grid. A failing
/// theorem-1 check only says the chosen `C` is too small for this grid.
pub fn solve_report(g: &VoxelGrid, bound: &BoundConfig, s: SPolicy, solver: &SolverConfig) -> Result<String, CliError> {
    bound.validate()?;
    let ps = empirical_phase_set(g);
    let t = solve_effective_tensor(g, solver)?;
    let sigma_bar = t.sigma_bar;

    let mut doc = String::new();
    let w = &mut doc;
    let _ = writeln!(w, "dimension = {}", g.dimension());
    let _ = writeln!(w, "shape = {}", g.shape().iter().map(|m| m.to_string()).collect::<Vec<_>>().join(" "));
    let _ = writeln!(w, "sigma = {}", num_list(&ps.phases().iter().map(|p| p.conductivity).collect::<Vec<_>>()));
    let _ = writeln!(w, "mu = {}", num_list(&ps.phases().iter().map(|p| p.volume_fraction).collect::<Vec<_>>()));
    for (i, row) in t.matrix.iter().enumerate() {
        let _ = writeln!(w, "A.{i} = {}", num_list(row));
    }
    let _ = writeln!(w, "eigenvalues = {}", num_list(&t.eigenvalues()));
    let _ = writeln!(w, "sigma_bar = {}", num(sigma_bar));
    let _ = writeln!(w, "flux_discrepancy = {}", num(t.flux_discrepancy));
    let _ = writeln!(
        w,
        "iterations = {}",
        t.iterations.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
    );
    let _ = writeln!(w, "residuals = {}", num_list(&t.residuals));

    let check = |w: &mut String, key: &str, r: &BoundReport| {
        let mut line = format!("bound.{key} = {}", num(r.value));
        if let Some(s) = r.s_used {
            line += &format!(" S={}", num(s));
        }
        if let Some(c) = r.c_used {
            line += &format!(" C={}", num(c));
        }
        let _ = writeln!(w, "{line} {}", status(sigma_bar <= r.value));
    };
    check(w, "trivial", &trivial_upper(&ps));
    check(w, "hashin_shtrikman", &hs_upper(&ps));
    let theorem1 = match s {
        SPolicy::Value(s) => theorem1_upper(&ps, s, bound)?,
        SPolicy::Optimize => optimize_s(&ps, bound)?,
    };
    check(w, "theorem1", &theorem1);
    if ps.len() == 3 {
        check(w, "three_phase_refined", &three_phase_refined(&ps, bound)?);
    }

    let mut s_values = vec![
        ps.sigma_min(),
        0.5 * (ps.sigma_min() + ps.sigma_max()),
        ps.sigma_max(),
    ];
    if let Some(s) = theorem1.s_used {
        s_values.push(s);
    }
    s_values.sort_by(f64::total_cmp);
    s_values.dedup();
    for s in s_values {
        let u = constructive_upper(g, s);
        let _ = writeln!(w, "constructive = {} S={} {}", num(u), num(s), status(sigma_bar <= u));
    }
    Ok(doc)
}

pub(super) fn run(a: SolveArgs, argv: &[String], stdout: &mut dyn Write) -> Result<(), CliError> {
    let g = read_grid_file(&a.grid).map_err(|e| CliError::Validation(format!("{}: {e}", a.grid.display())))?;
    let bound = a.bound.config();
    let solver = a.solver.config();
    let doc = format!("grid = {}\n", a.grid.display()) + &solve_report(&g, &bound, a.s, &solver)?;
    let mut m = RunManifest::new("solve", argv);
    m.input(&a.grid)
        .set("C", num(bound.c))
        .set("S", a.s)
        .set("simplified_e", bound.use_simplified_e)
        .set("tol", num(solver.relative_tolerance))
        .set("max_iter", solver.max_iterations);
    emit(&doc, a.out.as_deref(), m, stdout)
}
