//! Dyadic BMO norms, John–Nirenberg tail fits and the Lemma-type ratio
//! `∫_A|f|² / (‖f‖²_BMO (1 − log|A|)² |A|)` on voxel fields.
//!
//! All statistics are taken per component and reduced by a maximum, so
//! scalar and matrix fields go through the same code path. Complex values are
//! measured by their modulus.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cell_solver::{build_optimal_potential, osc_theta_closed_form};
use crate::field::Field;
use crate::microstructure::{strides, VoxelGrid};

#[derive(Debug, Error, PartialEq)]
pub enum BmoError {
    #[error("dyadic depth {depth} exceeds the grid resolution (maximum {max})")]
    Depth { depth: usize, max: usize },
    #[error("field is constant; BMO norm is zero")]
    Degenerate,
    #[error("mask selects no voxels")]
    EmptyMask,
    #[error("mask has {found} entries, field has {expected}")]
    MaskLength { expected: usize, found: usize },
    #[error("need at least 2 sample levels, got {0}")]
    SampleLevels(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BmoEstimate {
    pub dyadic_depth: usize,
    pub norm_value: f64,
    /// Norm restricted to levels `0..=k`, for each `k`.
    pub level_norms: Vec<f64>,
    pub component_norms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JohnNirenbergFit {
    pub b: f64,
    #[serde(rename = "B")]
    pub big_b: f64,
    /// `max_s [log |{|f|>s}| + b s/‖f‖ − log B]` over sampled levels; zero at
    /// the level that fixes `B`.
    pub max_violation: f64,
    /// False when the tail had too few points for a regression and the
    /// default rate `b = 1` was used.
    pub fitted_by_regression: bool,
    pub sampled_points: usize,
}

/// Finest dyadic level available: cubes must contain at least one voxel per
/// axis.
pub fn max_dyadic_depth(shape: &[usize]) -> usize {
    shape.iter().map(|m| m.trailing_zeros() as usize).min().unwrap_or(0)
}

fn subtract_mean(c: &[Complex64]) -> Vec<Complex64> {
    let mean = c.iter().sum::<Complex64>() / c.len() as f64;
    c.iter().map(|v| v - mean).collect()
}

/// Max over cubes at level `k` of the mean `|f − f_Q|`.
fn level_oscillation(c: &[Complex64], shape: &[usize], k: usize, cube_of: &mut [usize]) -> f64 {
    let per_axis: Vec<usize> = shape.iter().map(|&m| m >> k).collect();
    let cubes_per_axis = 1usize << k;
    let cube_count = cubes_per_axis.pow(shape.len() as u32);
    let st = strides(shape);
    for (v, slot) in cube_of.iter_mut().enumerate() {
        let mut q = 0;
        for (a, (&s, &side)) in st.iter().zip(&per_axis).enumerate() {
            let i = (v / s) % shape[a];
            q = q * cubes_per_axis + i / side;
        }
        *slot = q;
    }
    let mut sums = vec![Complex64::default(); cube_count];
    for (v, &q) in cube_of.iter().enumerate() {
        sums[q] += c[v];
    }
    let volume = per_axis.iter().product::<usize>() as f64;
    let means: Vec<Complex64> = sums.iter().map(|s| s / volume).collect();
    let mut dev = vec![0.0; cube_count];
    for (v, &q) in cube_of.iter().enumerate() {
        dev[q] += (c[v] - means[q]).norm();
    }
    dev.iter().map(|d| d / volume).fold(0.0, f64::max)
}

/// Dyadic BMO norm over cubes of side `2^{−k}`, `k = 0..=depth`. The mean
/// is subtracted first; matrix fields are reduced component-wise.
pub fn bmo_norm(field: &Field, depth: usize) -> Result<BmoEstimate, BmoError> {
    let max = max_dyadic_depth(field.shape());
    if depth > max {
        return Err(BmoError::Depth { depth, max });
    }
    let shape = field.shape();
    let per_component: Vec<Vec<f64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = field
            .components()
            .iter()
            .map(|c| {
                scope.spawn(move || {
                    let c = subtract_mean(c);
                    let mut cube_of = vec![0; c.len()];
                    (0..=depth)
                        .map(|k| level_oscillation(&c, shape, k, &mut cube_of))
                        .collect::<Vec<f64>>()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("BMO worker panicked")).collect()
    });

    let mut level_norms = Vec::with_capacity(depth + 1);
    let mut running = 0.0f64;
    for k in 0..=depth {
        running = per_component.iter().map(|levels| levels[k]).fold(running, f64::max);
        level_norms.push(running);
    }
    let component_norms = per_component
        .iter()
        .map(|levels| levels.iter().copied().fold(0.0, f64::max))
        .collect();
    Ok(BmoEstimate {
        dyadic_depth: depth,
        norm_value: running,
        level_norms,
        component_norms,
    })
}

/// Fits `|{|f|>s}| ≤ B exp(−b s/‖f‖)` with `|f|` the pointwise largest
/// component modulus after mean subtraction.
///
/// Levels are geometric between `10⁻³ s_max` and `s_max`. The rate `b` is the
/// negated slope of `log |{|f|>s}|` against `s/‖f‖` over the levels where the
/// measure is at most one half; `B` is the smallest constant that makes the
/// bound hold at every sampled level.
pub fn john_nirenberg_fit(field: &Field, bmo: &BmoEstimate, sample_levels: usize) -> Result<JohnNirenbergFit, BmoError> {
    if sample_levels < 2 {
        return Err(BmoError::SampleLevels(sample_levels));
    }
    if !(bmo.norm_value > 0.0) {
        return Err(BmoError::Degenerate);
    }
    let centered = Field::new(
        field.shape().to_vec(),
        field.components().iter().map(|c| subtract_mean(c)).collect(),
    );
    let mut modulus = centered.max_modulus();
    modulus.sort_by(f64::total_cmp);
    let s_max = *modulus.last().unwrap();
    if !(s_max > 0.0) {
        return Err(BmoError::Degenerate);
    }
    let total = modulus.len() as f64;
    let s_min = 1e-3 * s_max;
    let ratio = (s_max / s_min).powf(1.0 / (sample_levels - 1) as f64);

    // (t, log m) for every level with nonzero measure
    let mut samples = Vec::with_capacity(sample_levels);
    for i in 0..sample_levels {
        let s = if i + 1 == sample_levels { s_max } else { s_min * ratio.powi(i as i32) };
        let above = modulus.len() - modulus.partition_point(|&v| v <= s);
        if above > 0 {
            samples.push((s / bmo.norm_value, (above as f64 / total).ln()));
        }
    }

    let tail: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|&(_, lm)| lm <= 0.5f64.ln())
        .collect();
    let slope = if tail.len() >= 2 {
        let mt = tail.iter().map(|p| p.0).sum::<f64>() / tail.len() as f64;
        let ml = tail.iter().map(|p| p.1).sum::<f64>() / tail.len() as f64;
        let sxx: f64 = tail.iter().map(|p| (p.0 - mt).powi(2)).sum();
        let sxy: f64 = tail.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
        if sxx > 0.0 {
            Some(sxy / sxx)
        } else {
            None
        }
    } else {
        None
    };
    let (b, fitted) = match slope {
        Some(m) if m < 0.0 => (-m, true),
        _ => (1.0, false),
    };

    let log_b = samples.iter().map(|&(t, lm)| lm + b * t).fold(f64::NEG_INFINITY, f64::max);
    let log_b = if log_b.is_finite() { log_b } else { 0.0 };
    let max_violation = samples
        .iter()
        .map(|&(t, lm)| (lm + b * t) - log_b)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(JohnNirenbergFit {
        b,
        big_b: log_b.exp(),
        max_violation: if max_violation.is_finite() { max_violation } else { 0.0 },
        fitted_by_regression: fitted,
        sampled_points: samples.len(),
    })
}

/// `max_c ∫_A|f_c − mean f_c|² / (‖f_c‖²_BMO (1 − log|A|)² |A|)` over
/// components with a nonzero norm.
pub fn lemma1_ratio(field: &Field, bmo: &BmoEstimate, mask: &[bool]) -> Result<f64, BmoError> {
    if mask.len() != field.len() {
        return Err(BmoError::MaskLength {
            expected: field.len(),
            found: mask.len(),
        });
    }
    let selected = mask.iter().filter(|&&m| m).count();
    if selected == 0 {
        return Err(BmoError::EmptyMask);
    }
    let total = field.len() as f64;
    let measure = selected as f64 / total;
    let weight = (1.0 - measure.ln()).powi(2) * measure;
    let mut best: Option<f64> = None;
    for (c, &norm) in field.components().iter().zip(&bmo.component_norms) {
        if norm <= 0.0 {
            continue;
        }
        let c = subtract_mean(c);
        let integral: f64 = c
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|(v, _)| v.norm_sqr())
            .sum::<f64>()
            / total;
        let r = integral / (norm * norm * weight);
        best = Some(best.map_or(r, |b: f64| b.max(r)));
    }
    best.ok_or(BmoError::Degenerate)
}

/// Analysis of the traceless Hessian `D²p − (Δp/n)I` of the optimal potential
/// on one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub label: String,
    pub s: f64,
    /// `None` when the field is constant (homogeneous grid).
    pub bmo: Option<BmoEstimate>,
    pub osc_theta: f64,
    pub osc_theta_closed_form: f64,
    pub fit: Option<JohnNirenbergFit>,
    /// Largest ratio over the superlevel sets `{σ > t}`.
    pub max_lemma1_ratio: Option<f64>,
    /// `‖D²p − (Δp/n)I‖_BMO / osc θ`
    pub bmo_over_osc: Option<f64>,
}

impl CorpusEntry {
    pub fn is_degenerate(&self) -> bool {
        self.bmo.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub entries: Vec<CorpusEntry>,
    pub max_lemma1_ratio: f64,
    pub margin: f64,
    /// `max_lemma1_ratio · (1 + margin)`
    pub recommended_c: f64,
    /// Largest `‖D²p − (Δp/n)I‖_BMO / osc θ` over the corpus.
    pub c_fit: f64,
}

/// Superlevel masks `{σ > t}` for every conductivity below the maximum, plus
/// the whole cube.
pub fn superlevel_masks(g: &VoxelGrid) -> Vec<Vec<bool>> {
    let sigma = g.sigma_field();
    let mut levels: Vec<f64> = g.conductivities().to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut masks = vec![vec![true; sigma.len()]];
    for &t in &levels[..levels.len().saturating_sub(1)] {
        let m: Vec<bool> = sigma.iter().map(|&s| s > t).collect();
        if m.iter().any(|&b| b) && !masks.contains(&m) {
            masks.push(m);
        }
    }
    masks
}

pub fn analyze_potential(label: &str, g: &VoxelGrid, s: f64, sample_levels: usize) -> Result<CorpusEntry, BmoError> {
    let pf = build_optimal_potential(g, s);
    let traceless = pf.traceless_hessian();
    let field = traceless.field();
    let osc_theta = pf.osc_theta();
    let closed = osc_theta_closed_form(&pf.phases, s);
    let bmo = bmo_norm(field, max_dyadic_depth(g.shape()))?;
    if bmo.norm_value <= 0.0 {
        return Ok(CorpusEntry {
            label: label.to_string(),
            s,
            bmo: None,
            osc_theta,
            osc_theta_closed_form: closed,
            fit: None,
            max_lemma1_ratio: None,
            bmo_over_osc: None,
        });
    }
    let fit = john_nirenberg_fit(field, &bmo, sample_levels)?;
    let mut ratio = 0.0f64;
    for mask in superlevel_masks(g) {
        ratio = ratio.max(lemma1_ratio(field, &bmo, &mask)?);
    }
    let bmo_over_osc = (osc_theta > 0.0).then(|| bmo.norm_value / osc_theta);
    Ok(CorpusEntry {
        label: label.to_string(),
        s,
        bmo: Some(bmo),
        osc_theta,
        osc_theta_closed_form: closed,
        fit: Some(fit),
        max_lemma1_ratio: Some(ratio),
        bmo_over_osc,
    })
}

pub fn corpus_report(entries: Vec<CorpusEntry>, margin: f64) -> CorpusReport {
    let max_ratio = entries
        .iter()
        .filter_map(|e| e.max_lemma1_ratio)
        .fold(0.0, f64::max);
    let c_fit = entries.iter().filter_map(|e| e.bmo_over_osc).fold(0.0, f64::max);
    CorpusReport {
        entries,
        max_lemma1_ratio: max_ratio,
        margin,
        recommended_c: max_ratio * (1.0 + margin),
        c_fit,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::microstructure::{generate_laminate, generate_random, RandomMode};
    use crate::phases::PhaseSet;
    use proptest::prelude::*;

    fn scalar(shape: &[usize], f: impl Fn(&[usize]) -> f64) -> Field {
        let total: usize = shape.iter().product();
        let mut idx = vec![0; shape.len()];
        let values: Vec<f64> = (0..total)
            .map(|v| {
                crate::fft::unravel(v, shape, &mut idx);
                f(&idx)
            })
            .collect();
        Field::real_scalar(shape.to_vec(), &values)
    }

    #[test]
    fn constant_field_has_zero_norm() {
        let f = scalar(&[16, 16], |_| 3.5);
        let e = bmo_norm(&f, 4).unwrap();
        assert_eq!(e.norm_value, 0.0);
        assert!(matches!(john_nirenberg_fit(&f, &e, 10), Err(BmoError::Degenerate)));
        assert!(matches!(lemma1_ratio(&f, &e, &[true; 256]), Err(BmoError::Degenerate)));
    }

    #[test]
    fn sign_pattern_has_unit_norm() {
        let f = scalar(&[32, 32], |i| if i[0] < 16 { 1.0 } else { -1.0 });
        let e = bmo_norm(&f, 5).unwrap();
        assert_eq!(e.level_norms[0], 1.0);
        assert!(e.level_norms.iter().all(|&v| v <= 1.0));
        assert_eq!(e.norm_value, 1.0);
    }

    #[test]
    fn depth_checked_against_resolution() {
        let f = scalar(&[16, 4], |i| i[0] as f64);
        assert_eq!(max_dyadic_depth(&[16, 4]), 2);
        assert_eq!(bmo_norm(&f, 3), Err(BmoError::Depth { depth: 3, max: 2 }));
    }

    #[test]
    fn finer_levels_can_increase_norm() {
        // oscillates only inside the first octant, invisible at level 0
        let f = scalar(&[16, 16], |i| {
            if i[0] < 8 && i[1] < 8 {
                if i[0] < 4 { 1.0 } else { -1.0 }
            } else {
                0.0
            }
        });
        let e = bmo_norm(&f, 4).unwrap();
        assert!(e.level_norms[0] < e.level_norms[1]);
        assert!(e.level_norms.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(e.norm_value, 1.0);
    }

    #[test]
    fn two_valued_fit_is_finite() {
        let f = scalar(&[16, 16], |i| if (i[0] + i[1]) % 2 == 0 { 1.0 } else { -1.0 });
        let e = bmo_norm(&f, 4).unwrap();
        let fit = john_nirenberg_fit(&f, &e, 20).unwrap();
        assert!(fit.b > 0.0 && fit.big_b.is_finite() && fit.big_b > 0.0);
        assert!(fit.max_violation <= 0.0);
        assert!(!fit.fitted_by_regression);
    }

    #[test]
    fn whole_cube_ratio() {
        let f = scalar(&[8, 8], |i| i[0] as f64 - 3.5);
        let e = bmo_norm(&f, 3).unwrap();
        let r = lemma1_ratio(&f, &e, &[true; 64]).unwrap();
        let integral: f64 = (0..8).map(|i| (i as f64 - 3.5).powi(2)).sum::<f64>() / 8.0;
        assert!((r - integral / e.norm_value.powi(2)).abs() < 1e-12);
        assert_eq!(lemma1_ratio(&f, &e, &[false; 64]), Err(BmoError::EmptyMask));
        assert!(matches!(lemma1_ratio(&f, &e, &[true; 3]), Err(BmoError::MaskLength { .. })));
    }

    #[test]
    fn nested_masks_stay_bounded() {
        let ps = PhaseSet::from_pairs(2, &[1.0, 5.0], &[0.5, 0.5]).unwrap();
        let g = generate_random(&ps, &[64, 64], 4, RandomMode::SmoothedNoise { correlation_length: 0.05 }).unwrap();
        let pf = build_optimal_potential(&g, 3.0);
        let t = pf.traceless_hessian();
        let e = bmo_norm(t.field(), 6).unwrap();
        let mut ratios = Vec::new();
        for side in [64usize, 32, 16, 8, 4, 2, 1] {
            let mask: Vec<bool> = (0..4096).map(|v| v / 64 < side && v % 64 < side).collect();
            ratios.push(lemma1_ratio(t.field(), &e, &mask).unwrap());
        }
        assert!(ratios.iter().all(|r| r.is_finite()));
        assert!(ratios.iter().copied().fold(0.0, f64::max) < 50.0);
    }

    #[test]
    fn random_potential_has_exponential_tail() {
        let ps = PhaseSet::from_pairs(2, &[1.0, 4.0], &[0.5, 0.5]).unwrap();
        let g = generate_random(&ps, &[64, 64], 1, RandomMode::Iid).unwrap();
        let entry = analyze_potential("iid", &g, 2.0, 40).unwrap();
        let fit = entry.fit.unwrap();
        assert!(fit.b > 0.0 && fit.fitted_by_regression);
        assert!(fit.max_violation <= 0.0);
        assert!((entry.osc_theta - entry.osc_theta_closed_form).abs() < 1e-10);
    }

    #[test]
    fn fit_is_scale_invariant() {
        let ps = PhaseSet::from_pairs(3, &[1.0, 3.0], &[0.4, 0.6]).unwrap();
        let g = generate_random(&ps, &[16, 16, 16], 9, RandomMode::Iid).unwrap();
        let t = build_optimal_potential(&g, 2.0).traceless_hessian();
        let f = t.field();
        let e = bmo_norm(f, 4).unwrap();
        let fit = john_nirenberg_fit(f, &e, 30).unwrap();
        let scaled = f.scaled(-7.5);
        let es = bmo_norm(&scaled, 4).unwrap();
        let fit_s = john_nirenberg_fit(&scaled, &es, 30).unwrap();
        assert!((fit.b - fit_s.b).abs() <= 1e-9 * fit.b);
        assert!((fit.big_b - fit_s.big_b).abs() <= 1e-9 * fit.big_b);
    }

    #[test]
    fn homogeneous_entry_is_degenerate() {
        let g = VoxelGrid::uniform(vec![8, 8], 2.0).unwrap();
        let entry = analyze_potential("flat", &g, 1.0, 10).unwrap();
        assert!(entry.is_degenerate());
        let report = corpus_report(vec![entry], 0.1);
        assert_eq!(report.recommended_c, 0.0);
    }

    #[test]
    fn report_recommends_above_every_ratio() {
        let ps = PhaseSet::from_pairs(2, &[1.0, 2.0, 6.0], &[0.3, 0.3, 0.4]).unwrap();
        let mut entries = Vec::new();
        for seed in 0..3 {
            let g = generate_random(&ps, &[32, 32], seed, RandomMode::Iid).unwrap();
            entries.push(analyze_potential(&format!("seed{seed}"), &g, 2.0, 20).unwrap());
        }
        let lam = generate_laminate(&PhaseSet::from_pairs(2, &[1.0, 6.0], &[0.5, 0.5]).unwrap(), 1, &[32, 32]).unwrap();
        entries.push(analyze_potential("laminate", &lam, 6.0, 20).unwrap());
        let report = corpus_report(entries, 0.25);
        for e in &report.entries {
            assert!(e.max_lemma1_ratio.unwrap() < report.recommended_c);
            assert!(e.bmo_over_osc.unwrap() <= report.c_fit);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn norm_is_scale_covariant_and_bounded(
            values in proptest::collection::vec(-10.0f64..10.0, 64),
            lambda in -4.0f64..4.0,
        ) {
            let f = Field::real_scalar(vec![8, 8], &values);
            let e = bmo_norm(&f, 3).unwrap();
            let es = bmo_norm(&f.scaled(lambda), 3).unwrap();
            prop_assert!((es.norm_value - lambda.abs() * e.norm_value).abs() <= 1e-12 * (1.0 + e.norm_value));
            let mean = values.iter().sum::<f64>() / 64.0;
            let sup = values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
            prop_assert!(e.norm_value <= 2.0 * sup + 1e-12);
            prop_assert!(e.level_norms.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
