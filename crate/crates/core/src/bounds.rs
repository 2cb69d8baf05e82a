//! Closed-form upper bounds on `σ̄ = tr A / n`.
//!
//! * trivial: the arithmetic mean `Σ μᵢ σᵢ`;
//! * Hashin–Shtrikman: `H(S)` at `S = sup σ`;
//! * the distribution-dependent bound `H(S) + E(S)` for any `S > 0`, where
//!   `E` carries the dimensional constant `C`. No value of `C` is known, so it
//!   is always an explicit input and every report records the `C` it used.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::phases::{log_weight, shifted_harmonic_l, tail_integral, PhaseError, PhaseSet};

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("invalid bound config: {0}")]
    Config(String),
    #[error("S must be positive and finite, got {0}")]
    InvalidS(f64),
    #[error("expected {expected} phases, got {found}")]
    PhaseCount { expected: usize, found: usize },
    #[error("third conductivity {sigma3} must not be below sigma_2 = {sigma2}")]
    ThirdPhaseBelow { sigma2: f64, sigma3: f64 },
    #[error(transparent)]
    Phase(#[from] PhaseError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundConfig {
    /// Dimensional constant `C` of the E term.
    pub c: f64,
    /// Use `E ≤ C (osc σ)² ∫… / (inf σ + (n−1)S)²` instead of the full E.
    pub use_simplified_e: bool,
    pub s_search_points: usize,
    pub s_tolerance: f64,
}

impl Default for BoundConfig {
    fn default() -> Self {
        BoundConfig {
            c: 1.0,
            use_simplified_e: true,
            s_search_points: 64,
            s_tolerance: 1e-10,
        }
    }
}

impl BoundConfig {
    pub fn with_c(c: f64) -> Self {
        BoundConfig {
            c,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), BoundsError> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(BoundsError::Config(format!("C must be positive, got {}", self.c)));
        }
        if self.s_search_points < 16 {
            return Err(BoundsError::Config(format!(
                "S_search_points must be at least 16, got {}",
                self.s_search_points
            )));
        }
        if !(self.s_tolerance.is_finite() && self.s_tolerance > 0.0) {
            return Err(BoundsError::Config(format!(
                "S_tolerance must be positive, got {}",
                self.s_tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundName {
    Trivial,
    HashinShtrikman,
    Theorem1,
    Theorem1Simplified,
    ThreePhaseRefined,
}

impl BoundName {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundName::Trivial => "trivial",
            BoundName::HashinShtrikman => "hashin_shtrikman",
            BoundName::Theorem1 => "theorem1",
            BoundName::Theorem1Simplified => "theorem1_simplified",
            BoundName::ThreePhaseRefined => "three_phase_refined",
        }
    }
}

impl std::fmt::Display for BoundName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_name: BoundName,
    pub value: f64,
    #[serde(rename = "S_used")]
    pub s_used: Option<f64>,
    #[serde(rename = "H_term")]
    pub h_term: Option<f64>,
    #[serde(rename = "E_term")]
    pub e_term: Option<f64>,
    #[serde(rename = "L_value")]
    pub l_value: Option<f64>,
    #[serde(rename = "C_used")]
    pub c_used: Option<f64>,
}

impl BoundReport {
    fn plain(bound_name: BoundName, value: f64) -> Self {
        BoundReport {
            bound_name,
            value,
            s_used: None,
            h_term: None,
            e_term: None,
            l_value: None,
            c_used: None,
        }
    }
}

fn check_s(s: f64) -> Result<(), BoundsError> {
    if s.is_finite() && s > 0.0 {
        Ok(())
    } else {
        Err(BoundsError::InvalidS(s))
    }
}

pub fn trivial_upper(ps: &PhaseSet) -> BoundReport {
    BoundReport::plain(BoundName::Trivial, ps.arithmetic_mean())
}

/// `H(S) = −(n−1)S + L(S)`; also the minimum of the Laplacian part of the
/// split energy.
pub fn h_term(ps: &PhaseSet, s: f64) -> f64 {
    let shift = (ps.dimension() as f64 - 1.0) * s;
    shifted_harmonic_l(ps, s) - shift
}

pub fn hs_upper(ps: &PhaseSet) -> BoundReport {
    let s = ps.sigma_max();
    let l = shifted_harmonic_l(ps, s);
    let h = h_term(ps, s);
    BoundReport {
        bound_name: BoundName::HashinShtrikman,
        value: h,
        s_used: Some(s),
        h_term: Some(h),
        e_term: Some(0.0),
        l_value: Some(l),
        c_used: None,
    }
}

/// Evaluates `H(S) + E(S)`.
///
/// For `S ≥ sup σ` the tail integral vanishes and the value is `H(S)`; the
/// simplified E is only a valid majorant for `S ≤ sup σ`, which is irrelevant
/// there because both forms are zero.
pub fn theorem1_upper(ps: &PhaseSet, s: f64, cfg: &BoundConfig) -> Result<BoundReport, BoundsError> {
    check_s(s)?;
    cfg.validate()?;
    Ok(theorem1_unchecked(ps, s, cfg))
}

fn theorem1_unchecked(ps: &PhaseSet, s: f64, cfg: &BoundConfig) -> BoundReport {
    let shift = (ps.dimension() as f64 - 1.0) * s;
    let l = shifted_harmonic_l(ps, s);
    let h = l - shift;
    let osc = ps.oscillation();
    let tail = tail_integral(&ps.distribution(), s);
    let low = ps.sigma_min() + shift;
    let e = if cfg.use_simplified_e {
        cfg.c * osc * osc * tail / (low * low)
    } else {
        let high = ps.sigma_max() + shift;
        cfg.c * osc * osc * l * l * tail / (low * low * high * high)
    };
    BoundReport {
        bound_name: if cfg.use_simplified_e {
            BoundName::Theorem1Simplified
        } else {
            BoundName::Theorem1
        },
        value: h + e,
        s_used: Some(s),
        h_term: Some(h),
        e_term: Some(e),
        l_value: Some(l),
        c_used: Some(cfg.c),
    }
}

/// Three-phase bound at `S = σ₂` with the simplified E, from raw parts.
///
/// Unlike [`three_phase_refined`] this accepts zero fractions so the
/// `μ₃ = 0` endpoint of a sweep can be evaluated: the third phase then drops
/// out of both terms and the value is the two-phase Hashin–Shtrikman bound of
/// the first two phases.
pub fn three_phase_refined_parts(
    dimension: usize,
    sigma: [f64; 3],
    mu: [f64; 3],
    c: f64,
) -> BoundReport {
    let s = sigma[1];
    let shift = (dimension as f64 - 1.0) * s;
    let inv: f64 = sigma
        .iter()
        .zip(&mu)
        .filter(|(_, &m)| m > 0.0)
        .map(|(&sg, &m)| m / (sg + shift))
        .sum();
    let l = 1.0 / inv;
    let h = l - shift;
    let low = sigma[0] + shift;
    let d31 = sigma[2] - sigma[0];
    let e = c * d31 * d31 * (sigma[2] - sigma[1]) * log_weight(mu[2]) / (low * low);
    BoundReport {
        bound_name: BoundName::ThreePhaseRefined,
        value: h + e,
        s_used: Some(s),
        h_term: Some(h),
        e_term: Some(e),
        l_value: Some(l),
        c_used: Some(c),
    }
}

pub fn three_phase_refined(ps: &PhaseSet, cfg: &BoundConfig) -> Result<BoundReport, BoundsError> {
    if ps.len() != 3 {
        return Err(BoundsError::PhaseCount {
            expected: 3,
            found: ps.len(),
        });
    }
    cfg.validate()?;
    let p = ps.phases();
    Ok(three_phase_refined_parts(
        ps.dimension(),
        [p[0].conductivity, p[1].conductivity, p[2].conductivity],
        [p[0].volume_fraction, p[1].volume_fraction, p[2].volume_fraction],
        cfg.c,
    ))
}

/// Candidate values of S probed before refinement: a uniform grid on
/// `(0, σ_K]` plus every phase conductivity, sorted and deduplicated.
pub fn s_search_grid(ps: &PhaseSet, points: usize) -> Vec<f64> {
    let top = ps.sigma_max();
    let mut grid: Vec<f64> = (1..=points).map(|j| top * j as f64 / points as f64).collect();
    grid.extend(ps.phases().iter().map(|p| p.conductivity));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Minimizes `H(S) + E(S)` over `S ∈ (0, σ_K]`.
///
/// The grid from [`s_search_grid`] is scanned first (ties go to the larger
/// S), then the bracket around the best grid point is refined by
/// golden-section search. The refined point replaces the grid point only when
/// strictly better, so the result never exceeds any probed value.
pub fn optimize_s(ps: &PhaseSet, cfg: &BoundConfig) -> Result<BoundReport, BoundsError> {
    cfg.validate()?;
    if ps.len() == 1 {
        // H(S) ≡ σ and E ≡ 0; any S is optimal
        return Ok(theorem1_unchecked(ps, ps.sigma_max(), cfg));
    }
    let value = |s: f64| theorem1_unchecked(ps, s, cfg).value;

    let grid = s_search_grid(ps, cfg.s_search_points);
    let values: Vec<f64> = grid.iter().map(|&s| value(s)).collect();
    let mut best = 0;
    for (j, &v) in values.iter().enumerate() {
        if v <= values[best] {
            best = j;
        }
    }
    let lo = if best == 0 { 0.0 } else { grid[best - 1] };
    let hi = grid.get(best + 1).copied().unwrap_or(grid[best]);

    let mut s_best = grid[best];
    let mut v_best = values[best];
    if hi > lo {
        let (s_ref, v_ref) = golden_section(value, lo, hi, cfg.s_tolerance);
        if v_ref < v_best {
            s_best = s_ref;
            v_best = v_ref;
        }
    }
    let report = theorem1_unchecked(ps, s_best, cfg);
    debug_assert_eq!(report.value, v_best);
    Ok(report)
}

/// Golden-section minimization on the open interval `(lo, hi)`; the
/// endpoints are never evaluated. Returns the best point seen.
fn golden_section(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = if f2 <= f1 { (x2, f2) } else { (x1, f1) };
    let mut guard = 0;
    while b - a > tol && guard < 200 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1);
            if f1 < best.1 {
                best = (x1, f1);
            }
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2);
            if f2 <= best.1 {
                best = (x2, f2);
            }
        }
        guard += 1;
    }
    best
}

/// Hashin–Shtrikman upper bound of the three-phase composite
/// `(σ₁, σ₂, sigma3)` in the limit `μ₃ → 0⁺`, minus the two-phase bound.
///
/// Positive whenever `sigma3 > σ₂` and both fractions are positive: the
/// three-phase bound remembers a phase that is no longer there.
pub fn milton_gap(ps2: &PhaseSet, sigma3: f64) -> Result<f64, BoundsError> {
    if ps2.len() != 2 {
        return Err(BoundsError::PhaseCount {
            expected: 2,
            found: ps2.len(),
        });
    }
    let sigma2 = ps2.sigma_max();
    if !(sigma3.is_finite() && sigma3 >= sigma2) {
        return Err(BoundsError::ThirdPhaseBelow { sigma2, sigma3 });
    }
    Ok(h_term(ps2, sigma3) - h_term(ps2, sigma2))
}

/// One row of the `μ₃ → 0` experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub mu3: f64,
    pub trivial: f64,
    pub hs: f64,
    pub theorem1_opt: f64,
    pub s_opt: f64,
    pub two_phase_hs: f64,
    /// `three_phase_refined − two_phase_hs`
    pub gap: f64,
}

pub const SWEEP_CSV_HEADER: &str = "mu3,trivial,hs,theorem1_opt,S_opt,two_phase_hs,gap";

/// Evaluates the bounds along a sequence of third-phase fractions.
///
/// `base` supplies the three conductivities and the relative weights of the
/// first two phases; its third fraction is ignored. At each `μ₃` the first
/// two fractions are `μᵢ⁰ (1 − μ₃) / (μ₁⁰ + μ₂⁰)`, so `μ₃ = 0` is exactly the
/// base two-phase composite. At `μ₃ = 0` the `hs` column holds the `μ₃ → 0⁺`
/// limit of the three-phase bound, which differs from `two_phase_hs`.
pub fn mu3_sweep(base: &PhaseSet, mu3_values: &[f64], cfg: &BoundConfig) -> Result<Vec<SweepRow>, BoundsError> {
    if base.len() != 3 {
        return Err(BoundsError::PhaseCount {
            expected: 3,
            found: base.len(),
        });
    }
    cfg.validate()?;
    let n = base.dimension();
    let p = base.phases();
    let sigma = [p[0].conductivity, p[1].conductivity, p[2].conductivity];
    let w = p[0].volume_fraction + p[1].volume_fraction;
    let b1 = p[0].volume_fraction / w;
    let b2 = p[1].volume_fraction / w;
    let two = PhaseSet::from_pairs(n, &sigma[..2], &[b1, b2])?;
    let two_phase_hs = hs_upper(&two).value;

    mu3_values
        .iter()
        .map(|&mu3| {
            if !(0.0..1.0).contains(&mu3) {
                return Err(BoundsError::Config(format!("mu3 must lie in [0, 1), got {mu3}")));
            }
            let mu = [b1 * (1.0 - mu3), b2 * (1.0 - mu3), mu3];
            let refined = three_phase_refined_parts(n, sigma, mu, cfg.c);
            let (trivial, hs, opt) = if mu3 == 0.0 {
                (
                    trivial_upper(&two).value,
                    h_term(&two, sigma[2]),
                    optimize_s(&two, cfg)?,
                )
            } else {
                let ps = PhaseSet::from_pairs(n, &sigma, &mu)?;
                (trivial_upper(&ps).value, hs_upper(&ps).value, optimize_s(&ps, cfg)?)
            };
            Ok(SweepRow {
                mu3,
                trivial,
                hs,
                theorem1_opt: opt.value,
                s_opt: opt.s_used.unwrap_or(f64::NAN),
                two_phase_hs,
                gap: refined.value - two_phase_hs,
            })
        })
        .collect()
}

/// `count` log-spaced values from `hi` down to `lo`, optionally followed by 0.
pub fn log_spaced_mu3(lo: f64, hi: f64, count: usize, include_zero: bool) -> Vec<f64> {
    let mut v: Vec<f64> = match count {
        0 => vec![],
        1 => vec![hi],
        _ => {
            let (a, b) = (hi.log10(), lo.log10());
            (0..count)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
                .collect()
        }
    };
    if include_zero {
        v.push(0.0);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three() -> PhaseSet {
        PhaseSet::from_pairs(3, &[1.0, 2.0, 5.0], &[0.4, 0.4, 0.2]).unwrap()
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol * b.abs().max(1.0), "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn trivial_values() {
        assert_close(trivial_upper(&three()).value, 2.2, 1e-15);
        let ps = PhaseSet::from_pairs(2, &[1.0, 4.0], &[0.5, 0.5]).unwrap();
        assert_close(trivial_upper(&ps).value, 2.5, 1e-15);
        let one = PhaseSet::from_pairs(2, &[7.0], &[1.0]).unwrap();
        assert_eq!(trivial_upper(&one).value, 7.0);
    }

    #[test]
    fn h_term_values() {
        assert_close(h_term(&three(), 2.0), 1.921_052_631_578_947, 1e-14);
        let ps = PhaseSet::from_pairs(2, &[1.0, 2.0], &[0.5, 0.5]).unwrap();
        assert_close(h_term(&ps, 2.0), 1.428_571_428_571_428_8, 1e-14);
        let one = PhaseSet::from_pairs(3, &[2.0], &[1.0]).unwrap();
        for s in [0.1, 1.0, 30.0] {
            assert_close(h_term(&one, s), 2.0, 1e-14);
        }
    }

    #[test]
    fn hs_values() {
        let r = hs_upper(&three());
        assert_close(r.value, 2.043_795_620_437_954_6, 1e-14);
        assert_eq!(r.e_term, Some(0.0));
        assert_eq!(r.s_used, Some(5.0));
        let ps = PhaseSet::from_pairs(2, &[1.0, 4.0], &[0.5, 0.5]).unwrap();
        assert_close(hs_upper(&ps).value, 2.153_846_153_846_153_3, 1e-14);
        let one = PhaseSet::from_pairs(2, &[3.0], &[1.0]).unwrap();
        assert_close(hs_upper(&one).value, 3.0, 1e-15);
    }

    #[test]
    fn theorem1_at_sup_is_hs() {
        let ps = three();
        let r = theorem1_upper(&ps, 5.0, &BoundConfig::default()).unwrap();
        assert_eq!(r.e_term, Some(0.0));
        assert_eq!(r.value, hs_upper(&ps).value);
    }

    #[test]
    fn theorem1_simplified_hand_value() {
        let r = theorem1_upper(&three(), 2.0, &BoundConfig::with_c(1.0)).unwrap();
        assert_eq!(r.bound_name, BoundName::Theorem1Simplified);
        assert_close(r.h_term.unwrap(), 1.921_052_631_578_947, 1e-14);
        assert_close(r.e_term.unwrap(), 2.614_719_828_037_799_7, 1e-13);
        assert_close(r.value, 4.535_772_459_616_746, 1e-13);
        assert_eq!(r.value, r.h_term.unwrap() + r.e_term.unwrap());
        assert_eq!(r.c_used, Some(1.0));
    }

    #[test]
    fn theorem1_full_e_below_simplified() {
        let ps = three();
        let full = BoundConfig {
            use_simplified_e: false,
            ..Default::default()
        };
        for s in [0.5, 1.0, 2.0, 3.5] {
            let a = theorem1_upper(&ps, s, &full).unwrap();
            let b = theorem1_upper(&ps, s, &BoundConfig::default()).unwrap();
            assert_eq!(a.bound_name, BoundName::Theorem1);
            assert!(a.e_term.unwrap() <= b.e_term.unwrap());
        }
    }

    #[test]
    fn theorem1_single_phase() {
        let one = PhaseSet::from_pairs(3, &[4.0], &[1.0]).unwrap();
        for c in [1.0, 1e6] {
            let r = theorem1_upper(&one, 0.7, &BoundConfig::with_c(c)).unwrap();
            assert_eq!(r.e_term, Some(0.0));
            assert_close(r.value, 4.0, 1e-14);
        }
    }

    #[test]
    fn theorem1_rejects_bad_s() {
        for s in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(theorem1_upper(&three(), s, &BoundConfig::default()).is_err());
        }
    }

    #[test]
    fn refined_matches_theorem1_at_sigma2() {
        let cfg = BoundConfig::default();
        let a = three_phase_refined(&three(), &cfg).unwrap();
        let b = theorem1_upper(&three(), 2.0, &cfg).unwrap();
        assert_close(a.value, b.value, 1e-12);
        assert_close(a.value, 4.535_772_459_616_746, 1e-13);
    }

    #[test]
    fn refined_rejects_wrong_phase_count() {
        let ps = PhaseSet::from_pairs(2, &[1.0, 2.0], &[0.5, 0.5]).unwrap();
        assert_eq!(
            three_phase_refined(&ps, &BoundConfig::default()),
            Err(BoundsError::PhaseCount { expected: 3, found: 2 })
        );
    }

    #[test]
    fn refined_zero_mu3_is_two_phase_hs() {
        let two = PhaseSet::from_pairs(3, &[1.0, 2.0], &[0.5, 0.5]).unwrap();
        let r = three_phase_refined_parts(3, [1.0, 2.0, 5.0], [0.5, 0.5, 0.0], 1.0);
        assert_eq!(r.e_term, Some(0.0));
        assert_eq!(r.value, hs_upper(&two).value);
    }

    #[test]
    fn refined_small_mu3_approaches_two_phase_hs() {
        let two = hs_upper(&PhaseSet::from_pairs(3, &[1.0, 2.0], &[0.5, 0.5]).unwrap()).value;
        let mut last = f64::INFINITY;
        for k in 1..=6 {
            let mu3 = 10f64.powi(-k);
            let r = three_phase_refined_parts(3, [1.0, 2.0, 5.0], [0.5 * (1.0 - mu3), 0.5 * (1.0 - mu3), mu3], 1.0);
            let gap = r.value - two;
            assert!(gap > 0.0 && gap < last);
            last = gap;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn milton_gap_values() {
        let ps = PhaseSet::from_pairs(3, &[1.0, 2.0], &[0.5, 0.5]).unwrap();
        let gap = milton_gap(&ps, 5.0).unwrap();
        assert_close(gap, 264.0 / 23.0 - 10.0 - (60.0 / 11.0 - 4.0), 1e-13);
        assert!((gap - 0.023_719).abs() < 1e-5);
        assert_eq!(milton_gap(&ps, 2.0).unwrap(), 0.0);
        assert!(milton_gap(&ps, 1.5).is_err());
        assert!(milton_gap(&three(), 6.0).is_err());
    }

    #[test]
    fn milton_gap_increases_with_sigma3() {
        let ps = PhaseSet::from_pairs(3, &[1.0, 2.0], &[0.5, 0.5]).unwrap();
        let gaps: Vec<f64> = (0..=90)
            .map(|i| milton_gap(&ps, 2.0 + 18.0 * i as f64 / 90.0).unwrap())
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn optimize_single_phase() {
        let one = PhaseSet::from_pairs(2, &[3.0], &[1.0]).unwrap();
        let r = optimize_s(&one, &BoundConfig::default()).unwrap();
        assert_close(r.value, 3.0, 1e-14);
        assert_eq!(r.s_used, Some(3.0));
    }

    #[test]
    fn optimize_huge_c_falls_back_to_hs() {
        let ps = three();
        let r = optimize_s(&ps, &BoundConfig::with_c(1e6)).unwrap();
        assert_eq!(r.s_used, Some(5.0));
        assert_eq!(r.value, hs_upper(&ps).value);
    }

    #[test]
    fn optimize_never_exceeds_grid() {
        let ps = three();
        for c in [1e-3, 0.1, 1.0, 10.0] {
            let cfg = BoundConfig::with_c(c);
            let r = optimize_s(&ps, &cfg).unwrap();
            for s in s_search_grid(&ps, cfg.s_search_points) {
                assert!(r.value <= theorem1_upper(&ps, s, &cfg).unwrap().value);
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(BoundConfig::with_c(0.0).validate().is_err());
        let cfg = BoundConfig {
            s_search_points: 8,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sweep_shape() {
        let mu3 = log_spaced_mu3(1e-3, 1e-1, 3, true);
        assert_eq!(mu3.len(), 4);
        assert_close(mu3[0], 0.1, 1e-14);
        assert_close(mu3[2], 1e-3, 1e-12);
        let rows = mu3_sweep(&three(), &mu3, &BoundConfig::default()).unwrap();
        assert!(rows[0].gap > rows[1].gap && rows[1].gap > rows[2].gap);
        assert_eq!(rows[3].gap, 0.0);
        // hs does not approach the two-phase value
        for r in &rows {
            assert!(r.hs - r.two_phase_hs > 0.02);
        }
    }

    #[test]
    fn report_serializes_with_exact_field_names() {
        let r = theorem1_upper(&three(), 2.0, &BoundConfig::default()).unwrap();
        let json = serde_json_like(&r);
        for key in ["bound_name", "value", "S_used", "H_term", "E_term", "L_value", "C_used"] {
            assert!(json.contains(key), "{json}");
        }
        assert!(json.contains("theorem1_simplified"));
    }

    fn serde_json_like(r: &BoundReport) -> String {
        toml::to_string(r).unwrap()
    }
}
