//! Material descriptions: phases, phase sets and the distribution function
//! of a piecewise-constant conductivity.
//!
//! Every bound in this crate depends on the conductivity only through its
//! distribution, so [`PhaseSet`] is the common input. Phases are kept sorted by
//! conductivity and phases sharing a conductivity are merged on construction.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on `Σ μᵢ = 1`.
pub const FRACTION_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum PhaseError {
    #[error("dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("a phase set needs at least one phase")]
    Empty,
    #[error("phase {index}: conductivity must be positive and finite, got {value}")]
    Conductivity { index: usize, value: f64 },
    #[error("phase {index}: volume fraction must lie in (0, 1], got {value}")]
    Fraction { index: usize, value: f64 },
    #[error("volume fractions must sum to 1 (within {FRACTION_SUM_TOLERANCE:e}), got {sum}")]
    FractionSum { sum: f64 },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// One isotropic phase: conductivity σᵢ occupying volume fraction μᵢ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    #[serde(rename = "sigma")]
    pub conductivity: f64,
    #[serde(rename = "mu")]
    pub volume_fraction: f64,
}

impl Phase {
    pub fn new(conductivity: f64, volume_fraction: f64) -> Self {
        Phase {
            conductivity,
            volume_fraction,
        }
    }
}

/// A validated multiphase composite in dimension `n ≥ 2`.
///
/// Conductivities are strictly increasing and the fractions sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSet {
    dimension: usize,
    phases: Vec<Phase>,
}

impl PhaseSet {
    /// Validates, sorts by conductivity and merges equal conductivities.
    pub fn new(dimension: usize, phases: Vec<Phase>) -> Result<Self, PhaseError> {
        if dimension < 2 {
            return Err(PhaseError::Dimension(dimension));
        }
        if phases.is_empty() {
            return Err(PhaseError::Empty);
        }
        for (index, p) in phases.iter().enumerate() {
            if !(p.conductivity.is_finite() && p.conductivity > 0.0) {
                return Err(PhaseError::Conductivity {
                    index,
                    value: p.conductivity,
                });
            }
            if !(p.volume_fraction > 0.0 && p.volume_fraction <= 1.0) {
                return Err(PhaseError::Fraction {
                    index,
                    value: p.volume_fraction,
                });
            }
        }
        let sum: f64 = phases.iter().map(|p| p.volume_fraction).sum();
        if (sum - 1.0).abs() > FRACTION_SUM_TOLERANCE {
            return Err(PhaseError::FractionSum { sum });
        }

        let mut sorted = phases;
        sorted.sort_by(|a, b| a.conductivity.total_cmp(&b.conductivity));
        let mut merged: Vec<Phase> = Vec::with_capacity(sorted.len());
        for p in sorted {
            match merged.last_mut() {
                Some(last) if last.conductivity == p.conductivity => {
                    last.volume_fraction += p.volume_fraction;
                }
                _ => merged.push(p),
            }
        }
        Ok(PhaseSet {
            dimension,
            phases: merged,
        })
    }

    /// Convenience constructor from parallel slices.
    pub fn from_pairs(dimension: usize, sigma: &[f64], mu: &[f64]) -> Result<Self, PhaseError> {
        assert_eq!(sigma.len(), mu.len(), "sigma and mu must have equal length");
        let phases = sigma
            .iter()
            .zip(mu)
            .map(|(&s, &m)| Phase::new(s, m))
            .collect();
        Self::new(dimension, phases)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// `inf σ = σ₁`
    pub fn sigma_min(&self) -> f64 {
        self.phases[0].conductivity
    }

    /// `sup σ = σ_K`
    pub fn sigma_max(&self) -> f64 {
        self.phases[self.phases.len() - 1].conductivity
    }

    pub fn oscillation(&self) -> f64 {
        self.sigma_max() - self.sigma_min()
    }

    /// `Σ μᵢ σᵢ`
    pub fn arithmetic_mean(&self) -> f64 {
        self.phases
            .iter()
            .map(|p| p.volume_fraction * p.conductivity)
            .sum()
    }

    /// `(Σ μᵢ / σᵢ)⁻¹`
    pub fn harmonic_mean(&self) -> f64 {
        1.0 / self
            .phases
            .iter()
            .map(|p| p.volume_fraction / p.conductivity)
            .sum::<f64>()
    }

    /// Same fractions, all conductivities multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, PhaseError> {
        let phases = self
            .phases
            .iter()
            .map(|p| Phase::new(p.conductivity * factor, p.volume_fraction))
            .collect();
        Self::new(self.dimension, phases)
    }

    pub fn with_dimension(&self, dimension: usize) -> Result<Self, PhaseError> {
        Self::new(dimension, self.phases.clone())
    }

    pub fn distribution(&self) -> DistributionFunction {
        distribution_from_phases(self)
    }

    /// Parses the declarative phase config (TOML):
    ///
    /// ```toml
    /// dimension = 3
    ///
    /// [[phase]]
    /// sigma = 1.0
    /// mu = 0.4
    /// ```
    pub fn from_config_str(text: &str) -> Result<Self, PhaseError> {
        let cfg: PhaseConfig = toml::from_str(text).map_err(|e| PhaseError::Parse(e.to_string()))?;
        Self::new(cfg.dimension, cfg.phase)
    }

    pub fn from_config_file(path: &Path) -> Result<Self, PhaseError> {
        let text = std::fs::read_to_string(path).map_err(|e| PhaseError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_config_str(&text)
    }

    pub fn to_config_string(&self) -> String {
        let cfg = PhaseConfig {
            dimension: self.dimension,
            phase: self.phases.clone(),
        };
        toml::to_string(&cfg).expect("phase config serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhaseConfig {
    dimension: usize,
    phase: Vec<Phase>,
}

/// Right-continuous step function `F(t) = |{σ > t}|`.
///
/// `levels[i] = (σᵢ, F(σᵢ))`; `F = 1` below `σ₁` and `F(σ_K) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionFunction {
    levels: Vec<(f64, f64)>,
}

impl DistributionFunction {
    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.levels
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.levels.partition_point(|&(s, _)| s <= t);
        if k == 0 {
            1.0
        } else {
            self.levels[k - 1].1
        }
    }

    /// Iterates `(lo, hi, F)` over the maximal intervals `[lo, hi)` on which F
    /// is constant, starting at `from`. The unbounded tail where `F = 0` is
    /// omitted.
    fn pieces(&self, from: f64) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let first = std::iter::once((f64::NEG_INFINITY, self.levels[0].0, 1.0));
        let rest = self
            .levels
            .windows(2)
            .map(|w| (w[0].0, w[1].0, w[0].1));
        first.chain(rest).filter_map(move |(lo, hi, f)| {
            let lo = lo.max(from);
            (hi > lo).then_some((lo, hi, f))
        })
    }

    /// `∫_from^∞ F(t) dt`
    pub fn integral(&self, from: f64) -> f64 {
        self.pieces(from).map(|(lo, hi, f)| f * (hi - lo)).sum()
    }
}

pub fn distribution_from_phases(ps: &PhaseSet) -> DistributionFunction {
    let k = ps.phases.len();
    let mut levels = vec![(0.0, 0.0); k];
    // suffix sums from the top so F(σᵢ) is exactly Σ_{j>i} μⱼ
    let mut above = 0.0;
    for i in (0..k).rev() {
        levels[i] = (ps.phases[i].conductivity, above);
        above += ps.phases[i].volume_fraction;
    }
    DistributionFunction { levels }
}

/// `L(S) = (Σ μᵢ / (σᵢ + (n−1)S))⁻¹`
///
/// Panics if `s` is negative or not finite.
pub fn shifted_harmonic_l(ps: &PhaseSet, s: f64) -> f64 {
    assert!(s.is_finite() && s >= 0.0, "S must be finite and nonnegative, got {s}");
    let shift = (ps.dimension as f64 - 1.0) * s;
    let inv: f64 = ps
        .phases
        .iter()
        .map(|p| p.volume_fraction / (p.conductivity + shift))
        .sum();
    1.0 / inv
}

/// `F (1 − ln F)²`, continuously extended by 0 at `F = 0`.
pub fn log_weight(f: f64) -> f64 {
    if f <= 0.0 {
        0.0
    } else {
        let g = 1.0 - f.ln();
        f * g * g
    }
}

/// `∫_S^∞ F(t)(1 − ln F(t))² dt`, evaluated exactly on the step intervals.
///
/// Panics if `s` is negative or not finite.
pub fn tail_integral(dist: &DistributionFunction, s: f64) -> f64 {
    assert!(s.is_finite() && s >= 0.0, "S must be finite and nonnegative, got {s}");
    dist.pieces(s)
        .map(|(lo, hi, f)| log_weight(f) * (hi - lo))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three() -> PhaseSet {
        PhaseSet::from_pairs(3, &[1.0, 2.0, 5.0], &[0.4, 0.4, 0.2]).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn single_phase_distribution() {
        let ps = PhaseSet::from_pairs(2, &[3.0], &[1.0]).unwrap();
        let f = ps.distribution();
        assert_eq!(f.eval(-1.0), 1.0);
        assert_eq!(f.eval(2.999), 1.0);
        assert_eq!(f.eval(3.0), 0.0);
        assert_eq!(f.eval(100.0), 0.0);
    }

    #[test]
    fn three_phase_distribution_values() {
        let f = three().distribution();
        assert!(close(f.eval(1.5), 0.6, 1e-15));
        assert!(close(f.eval(3.0), 0.2, 1e-15));
        assert_eq!(f.eval(5.0), 0.0);
    }

    #[test]
    fn right_continuous_at_first_jump() {
        let ps = PhaseSet::from_pairs(2, &[1.0, 2.0], &[0.5, 0.5]).unwrap();
        let f = ps.distribution();
        assert_eq!(f.eval(1.0), 0.5);
        assert_eq!(f.eval(0.999_999), 1.0);
    }

    #[test]
    fn l_hand_values() {
        let ps = PhaseSet::from_pairs(2, &[1.0, 2.0], &[0.5, 0.5]).unwrap();
        assert!(close(shifted_harmonic_l(&ps, 2.0), 1.0 / (0.5 / 3.0 + 0.5 / 4.0), 1e-15));
        assert!(close(shifted_harmonic_l(&ps, 2.0), 3.428_571_428_571_428_5, 1e-14));
        let l = shifted_harmonic_l(&three(), 2.0);
        assert!(close(l, 1.0 / (0.08 + 0.4 / 6.0 + 0.2 / 9.0), 1e-15));
        assert!(close(l, 5.921_052_631_578_947, 1e-14));
    }

    #[test]
    fn l_single_phase() {
        let ps = PhaseSet::from_pairs(3, &[2.5], &[1.0]).unwrap();
        for s in [0.0, 0.3, 7.0] {
            assert!(close(shifted_harmonic_l(&ps, s), 2.5 + 2.0 * s, 1e-15));
        }
    }

    #[test]
    fn tail_integral_hand_values() {
        let f = three().distribution();
        let w = 0.2 * (1.0 - 0.2f64.ln()).powi(2);
        assert!(close(tail_integral(&f, 2.0), 3.0 * w, 1e-14));
        assert!(close(tail_integral(&f, 2.0), 4.085_499_731_309_063, 1e-12));
        let s1 = 0.6 * (1.0 - 0.6f64.ln()).powi(2) + 3.0 * w;
        assert!(close(tail_integral(&f, 1.0), s1, 1e-14));
        assert!(close(tail_integral(&f, 1.0), 5.455_056_170_565_8, 1e-12));
        assert_eq!(tail_integral(&f, 5.0), 0.0);
        assert_eq!(tail_integral(&f, 9.0), 0.0);
    }

    #[test]
    fn tail_integral_below_inf_sigma_counts_full_mass() {
        let f = three().distribution();
        // F = 1 on [0.5, 1), weight 1
        assert!(close(tail_integral(&f, 0.5), 0.5 + tail_integral(&f, 1.0), 1e-14));
    }

    #[test]
    fn merges_equal_conductivities_and_sorts() {
        let ps = PhaseSet::from_pairs(2, &[2.0, 1.0, 2.0], &[0.3, 0.5, 0.2]).unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps.phases()[0], Phase::new(1.0, 0.5));
        assert_eq!(ps.phases()[1], Phase::new(2.0, 0.5));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(
            PhaseSet::from_pairs(1, &[1.0], &[1.0]),
            Err(PhaseError::Dimension(1))
        );
        assert_eq!(PhaseSet::new(2, vec![]), Err(PhaseError::Empty));
        assert!(matches!(
            PhaseSet::from_pairs(2, &[1.0, -2.0], &[0.5, 0.5]),
            Err(PhaseError::Conductivity { index: 1, .. })
        ));
        assert!(matches!(
            PhaseSet::from_pairs(2, &[1.0, 2.0], &[0.0, 1.0]),
            Err(PhaseError::Fraction { index: 0, .. })
        ));
        assert!(matches!(
            PhaseSet::from_pairs(2, &[1.0, 2.0], &[0.5, 0.4]),
            Err(PhaseError::FractionSum { .. })
        ));
    }

    #[test]
    fn layer_cake_identity() {
        let ps = three();
        let f = ps.distribution();
        let mean = ps.arithmetic_mean();
        assert!(close(f.integral(ps.sigma_min()) + ps.sigma_min(), mean, 1e-12));
        assert!(close(f.integral(0.0), mean, 1e-12));
    }

    #[test]
    fn config_round_trip_and_errors() {
        let text = "dimension = 3\n\n[[phase]]\nsigma = 1.0\nmu = 0.4\n\n[[phase]]\nsigma = 2.0\nmu = 0.4\n\n[[phase]]\nsigma = 5.0\nmu = 0.2\n";
        let ps = PhaseSet::from_config_str(text).unwrap();
        assert_eq!(ps, three());
        assert_eq!(PhaseSet::from_config_str(&ps.to_config_string()).unwrap(), ps);

        let bad = "dimension = 2\n[[phase]]\nsigma = 1.0\nmu = 0.5\n[[phase]]\nsigma = 2.0\nmu = 0.4\n";
        assert!(matches!(
            PhaseSet::from_config_str(bad),
            Err(PhaseError::FractionSum { .. })
        ));
        let garbled = "dimension = 2\n[[phase]]\nsigma = \n";
        match PhaseSet::from_config_str(garbled) {
            Err(PhaseError::Parse(msg)) => assert!(msg.contains("line 3"), "{msg}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
