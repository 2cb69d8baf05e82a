use rustfft::num_complex::Complex64;

use super::Spectral;
use crate::bounds::h_term;
use crate::field::{Field, SymmetricMatrixField};
use crate::microstructure::{empirical_phase_set, VoxelGrid};
use crate::phases::{shifted_harmonic_l, PhaseSet};

/// The potential `p` minimizing the Laplacian part `I₁` of the split energy,
/// together with its derived fields and the two energy parts.
#[derive(Debug, Clone)]
pub struct PotentialField<'g> {
    pub grid: &'g VoxelGrid,
    pub phases: PhaseSet,
    pub s: f64,
    pub l_value: f64,
    /// `θ = nL/(σ + (n−1)S) − n`
    pub theta: Vec<f64>,
    pub theta_hat: Vec<Complex64>,
    pub p_hat: Vec<Complex64>,
    pub laplacian_p: Vec<f64>,
    pub hessian_p: SymmetricMatrixField,
    pub i1: f64,
    pub i2: f64,
    pub i2_positive: f64,
}

impl PotentialField<'_> {
    pub fn dimension(&self) -> usize {
        self.grid.dimension()
    }

    pub fn mean_theta(&self) -> f64 {
        self.theta.iter().sum::<f64>() / self.theta.len() as f64
    }

    pub fn osc_theta(&self) -> f64 {
        let (lo, hi) = self
            .theta
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| (lo.min(t), hi.max(t)));
        hi - lo
    }

    /// `D²p − (Δp/n) I`
    pub fn traceless_hessian(&self) -> SymmetricMatrixField {
        self.hessian_p.minus_scalar(&self.laplacian_p)
    }

    /// `∫|D²p|²`
    pub fn hessian_energy(&self) -> f64 {
        let n = self.laplacian_p.len();
        (0..n).map(|v| self.hessian_p.frobenius_sq(v)).sum::<f64>() / n as f64
    }

    /// `∫|Δp|²`
    pub fn laplacian_energy(&self) -> f64 {
        self.laplacian_p.iter().map(|x| x * x).sum::<f64>() / self.laplacian_p.len() as f64
    }

    /// `∫θ²`
    pub fn theta_energy(&self) -> f64 {
        self.theta.iter().map(|x| x * x).sum::<f64>() / self.theta.len() as f64
    }

    /// `∫|D²p − (Δp/n) I|²` from the sampled field.
    pub fn traceless_energy(&self) -> f64 {
        let t = self.traceless_hessian();
        let n = self.laplacian_p.len();
        (0..n).map(|v| t.frobenius_sq(v)).sum::<f64>() / n as f64
    }

    /// Potential `p` in physical space (real up to round-off).
    pub fn potential(&self) -> Vec<f64> {
        let mut p = self.p_hat.clone();
        Spectral::new(self.grid.shape()).fft.inverse(&mut p);
        p.iter().map(|v| v.re).collect()
    }
}

/// `I₁` at the optimum: `−(n−1)S + L(S)` of the realized phase set.
pub fn i1_closed_form(pf: &PotentialField) -> f64 {
    h_term(&pf.phases, pf.s)
}

/// `osc θ = n L osc σ / ((inf σ + (n−1)S)(sup σ + (n−1)S))`
pub fn osc_theta_closed_form(ps: &PhaseSet, s: f64) -> f64 {
    let n = ps.dimension() as f64;
    let shift = (n - 1.0) * s;
    let l = shifted_harmonic_l(ps, s);
    n * l * ps.oscillation() / ((ps.sigma_min() + shift) * (ps.sigma_max() + shift))
}

/// Builds the potential with `Δp = θ`. `p̂(0) = 0`; the Hessian is the
/// multiplier `−ξ ⊗ ξ / |ξ|²` applied to `θ̂`.
///
/// Panics unless `s` is positive and finite.
pub fn build_optimal_potential(g: &VoxelGrid, s: f64) -> PotentialField<'_> {
    assert!(s.is_finite() && s > 0.0, "S must be positive and finite, got {s}");
    let n = g.dimension();
    let phases = empirical_phase_set(g);
    let l = shifted_harmonic_l(&phases, s);
    let shift = (n as f64 - 1.0) * s;
    let nf = n as f64;
    let theta_of_phase: Vec<f64> = g
        .conductivities()
        .iter()
        .map(|&sigma| {
            if phases.len() == 1 {
                // L = σ + (n−1)S exactly for a homogeneous medium
                0.0
            } else {
                nf * l / (sigma + shift) - nf
            }
        })
        .collect();
    let theta: Vec<f64> = g.phase_index().iter().map(|&p| theta_of_phase[p as usize]).collect();

    let spectral = Spectral::new(g.shape());
    let mut theta_hat = spectral.fft.forward_real(&theta);
    theta_hat[0] = Complex64::default();
    let p_hat: Vec<Complex64> = theta_hat
        .iter()
        .zip(&spectral.k2)
        .map(|(t, &k2)| if k2 > 0.0 { -t / k2 } else { Complex64::default() })
        .collect();

    let laplacian_p: Vec<f64> = spectral
        .apply_multiplier(&p_hat, |k| Complex64::new(-spectral.k2[k], 0.0))
        .iter()
        .map(|v| v.re)
        .collect();
    let components = SymmetricMatrixField::pairs(n)
        .into_iter()
        .map(|(a, b)| {
            let (xa, xb) = (&spectral.xi[a], &spectral.xi[b]);
            spectral.apply_multiplier(&p_hat, |k| Complex64::new(-xa[k] * xb[k], 0.0))
        })
        .collect();
    let hessian_p = SymmetricMatrixField::new(n, Field::new(g.shape().to_vec(), components));

    let mut pf = PotentialField {
        grid: g,
        phases,
        s,
        l_value: l,
        theta,
        theta_hat,
        p_hat,
        laplacian_p,
        hessian_p,
        i1: 0.0,
        i2: 0.0,
        i2_positive: 0.0,
    };
    pf.i1 = evaluate_i1(&pf);
    (pf.i2, pf.i2_positive) = evaluate_i2(&pf);
    pf
}

/// Quadrature of `I₁ = (1/n)∫ σn + 2σΔp + S|Δp|² + (σ−S)|Δp|²/n`.
pub fn evaluate_i1(pf: &PotentialField) -> f64 {
    let n = pf.dimension() as f64;
    let s = pf.s;
    let sum: f64 = pf
        .laplacian_p
        .iter()
        .enumerate()
        .map(|(v, &lap)| {
            let sigma = pf.grid.sigma_at(v);
            sigma * n + 2.0 * sigma * lap + s * lap * lap + (sigma - s) * lap * lap / n
        })
        .sum();
    sum / (n * pf.laplacian_p.len() as f64)
}

/// `(I₂, I₂⁺)` with `I₂ = (1/n)∫(σ−S)|D²p − (Δp/n)I|²` and `I₂⁺` using
/// `(σ−S)⁺`.
pub fn evaluate_i2(pf: &PotentialField) -> (f64, f64) {
    let n = pf.dimension() as f64;
    let t = pf.traceless_hessian();
    let (mut full, mut positive) = (0.0, 0.0);
    for v in 0..pf.laplacian_p.len() {
        let w = pf.grid.sigma_at(v) - pf.s;
        let e = t.frobenius_sq(v);
        full += w * e;
        positive += w.max(0.0) * e;
    }
    let scale = n * pf.laplacian_p.len() as f64;
    (full / scale, positive / scale)
}

/// Spectral evaluation of `∫|D²p − (Δp/n)I|²` via Parseval, applying the
/// multiplier `−ξ⊗ξ/|ξ|² + I/n` to `θ̂` mode by mode.
pub fn spectral_traceless_energy(pf: &PotentialField) -> f64 {
    let n = pf.dimension();
    let spectral = Spectral::new(pf.grid.shape());
    let total = spectral.len() as f64;
    let mut acc = 0.0;
    for (k, t) in pf.theta_hat.iter().enumerate() {
        let k2 = spectral.k2[k];
        if k2 == 0.0 {
            continue;
        }
        let mut m2 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let mut m = -spectral.xi[a][k] * spectral.xi[b][k] / k2;
                if a == b {
                    m += 1.0 / n as f64;
                }
                m2 += m * m;
            }
        }
        acc += m2 * t.norm_sqr();
    }
    acc / (total * total)
}

/// `(1/n)∫σ|I + D²p|²`, the energy of the potential's test field computed
/// directly; equals `I₁ + I₂` when `∫|D²p|² = ∫|Δp|²`.
pub fn test_field_energy(pf: &PotentialField) -> f64 {
    let n = pf.dimension();
    let h = &pf.hessian_p;
    let mut acc = 0.0;
    for v in 0..pf.laplacian_p.len() {
        let mut e = 0.0;
        for a in 0..n {
            for b in 0..n {
                let mut m = h.entry(a, b, v);
                if a == b {
                    m += 1.0;
                }
                e += m.norm_sqr();
            }
        }
        acc += pf.grid.sigma_at(v) * e;
    }
    acc / (n as f64 * pf.laplacian_p.len() as f64)
}

/// `I₁ + I₂` for the potential minimizing `I₁`: an upper bound on `σ̄` of the
/// grid for every `S > 0`.
pub fn constructive_upper(g: &VoxelGrid, s: f64) -> f64 {
    let pf = build_optimal_potential(g, s);
    pf.i1 + pf.i2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::hs_upper;
    use crate::cell_solver::{solve_effective_tensor, SolverConfig};
    use crate::microstructure::{generate_checkerboard, generate_laminate, generate_random, RandomMode};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn homogeneous_potential_vanishes() {
        let g = VoxelGrid::uniform(vec![8, 8, 8], 3.0).unwrap();
        let pf = build_optimal_potential(&g, 1.3);
        assert!(pf.theta.iter().all(|&t| t == 0.0));
        assert!(pf.potential().iter().all(|&p| p == 0.0));
        assert_eq!(pf.i2, 0.0);
        assert!(rel(pf.i1, 3.0) < 1e-14);
        assert!(rel(constructive_upper(&g, 0.2), 3.0) < 1e-14);
    }

    #[test]
    fn theta_two_phase_hand_values() {
        let ps = PhaseSet::from_pairs(2, &[1.0, 2.0], &[0.5, 0.5]).unwrap();
        let g = generate_laminate(&ps, 0, &[16, 16]).unwrap();
        let pf = build_optimal_potential(&g, 1.0);
        assert!(rel(pf.l_value, 2.4) < 1e-14);
        for (v, &t) in pf.theta.iter().enumerate() {
            let expect = if g.sigma_at(v) == 1.0 { 0.4 } else { -0.4 };
            assert!((t - expect).abs() < 1e-14);
        }
        assert!((pf.osc_theta() - 0.8).abs() < 1e-14);
        assert!((osc_theta_closed_form(&pf.phases, 1.0) - 0.8).abs() < 1e-14);
        assert!(pf.mean_theta().abs() < 1e-14);
    }

    #[test]
    fn i1_three_phase_laminate() {
        let ps = PhaseSet::from_pairs(3, &[1.0, 2.0, 5.0], &[0.375, 0.375, 0.25]).unwrap();
        let g = generate_laminate(&ps, 0, &[8, 4, 4]).unwrap();
        for s in [0.5, 2.0, 5.0] {
            let pf = build_optimal_potential(&g, s);
            assert!(rel(pf.i1, i1_closed_form(&pf)) < 1e-12);
            assert!(rel(pf.i1, h_term(&ps, s)) < 1e-12);
        }
    }

    #[test]
    fn laminate_i2_closed_form() {
        // layers normal to axis 0: D²p has the single entry ∂₀₀p = θ, so
        // |D²p − (Δp/n)I|² = (1 − 1/n) θ²
        let ps = PhaseSet::from_pairs(3, &[1.0, 2.0, 5.0], &[0.25, 0.25, 0.5]).unwrap();
        let g = generate_laminate(&ps, 0, &[32, 4, 4]).unwrap();
        let s = 1.5;
        let pf = build_optimal_potential(&g, s);
        let n = 3.0;
        let expect: f64 = pf
            .theta
            .iter()
            .enumerate()
            .map(|(v, t)| (g.sigma_at(v) - s) * (1.0 - 1.0 / n) * t * t / n)
            .sum::<f64>()
            / g.len() as f64;
        assert!((pf.i2 - expect).abs() < 1e-6 * expect.abs().max(1.0));
    }

    #[test]
    fn i2_positive_vanishes_at_sup_sigma() {
        let ps = PhaseSet::from_pairs(2, &[1.0, 4.0], &[0.5, 0.5]).unwrap();
        let g = generate_checkerboard(1.0, 4.0, &[32, 32]).unwrap();
        let pf = build_optimal_potential(&g, 4.0);
        assert_eq!(pf.i2_positive, 0.0);
        assert!(pf.i2 <= pf.i2_positive);
        assert!(rel(pf.i1 + pf.i2_positive, hs_upper(&ps).value) < 1e-12);
    }

    #[test]
    fn identities_on_random_grid() {
        let ps = PhaseSet::from_pairs(2, &[1.0, 2.0, 7.0], &[0.3, 0.4, 0.3]).unwrap();
        let g = generate_random(&ps, &[16, 16], 2, RandomMode::Iid).unwrap();
        let pf = build_optimal_potential(&g, 2.5);
        assert!(rel(pf.hessian_energy(), pf.laplacian_energy()) < 1e-10);
        assert!(pf.spectral_energy_check() <= 1e-10);
        assert!(rel(test_field_energy(&pf), pf.i1 + pf.i2) < 1e-10);
        for v in 0..g.len() {
            let lap = pf.laplacian_p[v];
            assert!((pf.hessian_p.trace(v).re - lap).abs() < 1e-10);
            assert!(pf.hessian_p.trace(v).im.abs() < 1e-10);
            assert!(pf.hessian_p.frobenius_sq(v) >= lap * lap / 2.0 - 1e-12);
        }
        assert!(pf.i2 <= pf.i2_positive);
    }

    #[test]
    fn constructive_bound_is_admissible() {
        let ps = PhaseSet::from_pairs(2, &[1.0, 6.0], &[0.5, 0.5]).unwrap();
        let g = generate_random(&ps, &[32, 32], 8, RandomMode::Iid).unwrap();
        let t = solve_effective_tensor(&g, &SolverConfig::default()).unwrap();
        for s in [0.5, 1.0, 3.5, 6.0, 9.0] {
            assert!(constructive_upper(&g, s) >= t.sigma_bar * (1.0 - 1e-7), "S = {s}");
        }
    }

    #[test]
    fn checkerboard_between_exact_and_hs() {
        // I₂ ≤ 0 at S = sup σ, so the constructive value sits below HS
        let g = generate_checkerboard(1.0, 4.0, &[64, 64]).unwrap();
        let u = constructive_upper(&g, 4.0);
        assert!(u <= 2.153_846_153_846_153_3 + 1e-12);
        assert!(u >= 2.0 * (1.0 - 0.02));
    }

    impl PotentialField<'_> {
        fn spectral_energy_check(&self) -> f64 {
            let n = self.dimension() as f64;
            let spectral = spectral_traceless_energy(self);
            let bound = (n - 1.0) / n * self.theta_energy();
            rel(spectral, self.traceless_energy()).max((spectral - bound) / bound)
        }
    }
}
