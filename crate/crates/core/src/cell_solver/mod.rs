//! Spectral solver for the periodic cell problem and the constructive
//! potential-field upper bound.
//!
//! Fields are trigonometric polynomials with frequencies `k ∈ [−N/2, N/2)`
//! per axis, sampled at voxel centers, and derivatives are exact Fourier
//! multipliers `iξ`, `ξ = 2πk`. The Nyquist index carries the single
//! wavenumber `−πN`. Real inputs therefore produce complex gradients whose
//! imaginary part lives entirely on Nyquist modes; this is what keeps
//! `∫|D²p|² = ∫|Δp|²` exact on the grid and makes the potential field an
//! admissible competitor for the same discrete minimization the solver
//! performs. Real-valued outputs (the tensor, θ, Δp) are taken from the real
//! part where the imaginary part vanishes identically.

mod potential;

pub use potential::{
    build_optimal_potential, constructive_upper, evaluate_i1, evaluate_i2, i1_closed_form,
    osc_theta_closed_form, spectral_traceless_energy, test_field_energy, PotentialField,
};

use nalgebra::{DMatrix, SymmetricEigen};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fft::{wavevector_grid, FftNd};
use crate::microstructure::VoxelGrid;

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("invalid solver config: {0}")]
    Config(String),
    #[error("direction {direction}: no convergence after {iterations} iterations (relative residual {residual:e})")]
    NotConverged {
        direction: usize,
        iterations: usize,
        residual: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub relative_tolerance: f64,
    pub max_iterations: usize,
    /// Reference medium for the Green-operator preconditioner; `None` picks
    /// `(inf σ + sup σ) / 2`.
    pub reference_conductivity: Option<f64>,
    /// Solve the n load directions on separate threads.
    pub parallel_directions: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            relative_tolerance: 1e-8,
            max_iterations: 1000,
            reference_conductivity: None,
            parallel_directions: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.relative_tolerance > 0.0 && self.relative_tolerance < 1.0) {
            return Err(SolverError::Config(format!(
                "relative tolerance must lie in (0, 1), got {}",
                self.relative_tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(SolverError::Config("max_iterations must be at least 1".into()));
        }
        if let Some(s0) = self.reference_conductivity {
            if !(s0.is_finite() && s0 > 0.0) {
                return Err(SolverError::Config(format!(
                    "reference conductivity must be positive, got {s0}"
                )));
            }
        }
        Ok(())
    }
}

/// Effective tensor `A` with `⟨A v, v⟩ = min_u ∫σ|v + ∇u|²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectiveTensor {
    pub dimension: usize,
    /// From the converged energies: `A_ij = Re ⟨σ(eᵢ+∇uᵢ), eⱼ+∇uⱼ⟩`.
    pub matrix: Vec<Vec<f64>>,
    pub sigma_bar: f64,
    /// From flux averages: `A_ji = Re ⟨σ(eᵢ+∇uᵢ)⟩ⱼ`.
    pub flux_matrix: Vec<Vec<f64>>,
    /// `max |A − A_flux|`, a convergence diagnostic.
    pub flux_discrepancy: f64,
    pub iterations: Vec<usize>,
    pub residuals: Vec<f64>,
}

impl EffectiveTensor {
    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.dimension;
        let m = DMatrix::from_fn(n, n, |i, j| self.matrix[i][j]);
        let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Wavevectors and transforms shared by every spectral operation on a grid.
pub(crate) struct Spectral {
    pub fft: FftNd,
    pub xi: Vec<Vec<f64>>,
    pub k2: Vec<f64>,
}

impl Spectral {
    pub fn new(shape: &[usize]) -> Self {
        let xi = wavevector_grid(shape);
        let total: usize = shape.iter().product();
        let k2 = (0..total).map(|k| xi.iter().map(|a| a[k] * a[k]).sum()).collect();
        Spectral {
            fft: FftNd::new(shape),
            xi,
            k2,
        }
    }

    pub fn len(&self) -> usize {
        self.k2.len()
    }

    /// `IFFT(m(ξ) · f̂)` for a multiplier evaluated per mode.
    pub fn apply_multiplier(&self, f_hat: &[Complex64], m: impl Fn(usize) -> Complex64) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = f_hat.iter().enumerate().map(|(k, v)| m(k) * v).collect();
        self.fft.inverse(&mut out);
        out
    }
}

struct DirectionSolution {
    /// `eᵈ + ∇u`, one complex field per component.
    gradient: Vec<Vec<Complex64>>,
    iterations: usize,
    residual: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Preconditioned conjugate gradients on the Fourier coefficients of the
/// corrector `u` for load `e_direction`:
/// `∇ᴴ σ ∇u = −∇ᴴ(σ e)`, preconditioned by `(σ₀ |ξ|²)⁻¹`.
fn solve_direction(
    sigma: &[f64],
    spectral: &Spectral,
    direction: usize,
    sigma0: f64,
    cfg: &SolverConfig,
) -> Result<DirectionSolution, SolverError> {
    let n = spectral.xi.len();
    let total = spectral.len();
    let i = Complex64::i();

    let apply = |u_hat: &[Complex64]| -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); total];
        for axis in 0..n {
            let xi = &spectral.xi[axis];
            let mut g = spectral.apply_multiplier(u_hat, |k| i * xi[k]);
            for (v, s) in g.iter_mut().zip(sigma) {
                *v *= s;
            }
            spectral.fft.forward(&mut g);
            for ((o, v), x) in out.iter_mut().zip(&g).zip(xi) {
                *o -= i * x * v;
            }
        }
        out
    };
    let precondition = |r: &[Complex64]| -> Vec<Complex64> {
        r.iter()
            .zip(&spectral.k2)
            .map(|(v, &k2)| if k2 > 0.0 { v / (sigma0 * k2) } else { Complex64::default() })
            .collect()
    };

    let sigma_hat = spectral.fft.forward_real(sigma);
    let xd = &spectral.xi[direction];
    let b: Vec<Complex64> = sigma_hat.iter().zip(xd).map(|(s, x)| i * x * s).collect();
    let b_norm = norm(&b);

    let mut u = vec![Complex64::default(); total];
    let mut iterations = 0;
    let mut residual = 0.0;
    if b_norm > 0.0 {
        let mut r = b.clone();
        let mut z = precondition(&r);
        let mut p = z.clone();
        let mut rz = dot(&r, &z).re;
        residual = 1.0;
        while residual > cfg.relative_tolerance {
            if iterations == cfg.max_iterations {
                return Err(SolverError::NotConverged {
                    direction,
                    iterations,
                    residual,
                });
            }
            let ap = apply(&p);
            let alpha = rz / dot(&p, &ap).re;
            for ((uk, rk), (pk, apk)) in u.iter_mut().zip(r.iter_mut()).zip(p.iter().zip(&ap)) {
                *uk += alpha * pk;
                *rk -= alpha * apk;
            }
            iterations += 1;
            residual = norm(&r) / b_norm;
            z = precondition(&r);
            let rz_new = dot(&r, &z).re;
            let beta = rz_new / rz;
            for (pk, zk) in p.iter_mut().zip(&z) {
                *pk = zk + beta * *pk;
            }
            rz = rz_new;
        }
    }

    let gradient = (0..n)
        .map(|axis| {
            let xi = &spectral.xi[axis];
            let mut g = spectral.apply_multiplier(&u, |k| i * xi[k]);
            if axis == direction {
                for v in g.iter_mut() {
                    v.re += 1.0;
                }
            }
            g
        })
        .collect();
    Ok(DirectionSolution {
        gradient,
        iterations,
        residual,
    })
}

pub fn solve_effective_tensor(g: &VoxelGrid, cfg: &SolverConfig) -> Result<EffectiveTensor, SolverError> {
    cfg.validate()?;
    let n = g.dimension();
    let sigma = g.sigma_field();
    let (lo, hi) = sigma
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    let sigma0 = cfg.reference_conductivity.unwrap_or(0.5 * (lo + hi));
    let spectral = Spectral::new(g.shape());

    let solutions: Vec<Result<DirectionSolution, SolverError>> = if cfg.parallel_directions {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..n)
                .map(|d| {
                    let (sigma, spectral) = (&sigma, &spectral);
                    scope.spawn(move || solve_direction(sigma, spectral, d, sigma0, cfg))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("direction solve panicked"))
                .collect()
        })
    } else {
        (0..n)
            .map(|d| solve_direction(&sigma, &spectral, d, sigma0, cfg))
            .collect()
    };
    let solutions = solutions.into_iter().collect::<Result<Vec<_>, _>>()?;

    let total = sigma.len() as f64;
    let mut matrix = vec![vec![0.0; n]; n];
    let mut flux_matrix = vec![vec![0.0; n]; n];
    for d in 0..n {
        for e in d..n {
            let mut acc = 0.0;
            for comp in 0..n {
                let (gd, ge) = (&solutions[d].gradient[comp], &solutions[e].gradient[comp]);
                acc += gd
                    .iter()
                    .zip(ge)
                    .zip(&sigma)
                    .map(|((a, b), s)| s * (a * b.conj()).re)
                    .sum::<f64>();
            }
            matrix[d][e] = acc / total;
            matrix[e][d] = acc / total;
        }
        for (comp, row) in flux_matrix.iter_mut().enumerate() {
            let flux: f64 = solutions[d].gradient[comp]
                .iter()
                .zip(&sigma)
                .map(|(v, s)| s * v.re)
                .sum();
            row[d] = flux / total;
        }
    }
    let flux_discrepancy = matrix
        .iter()
        .flatten()
        .zip(flux_matrix.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let sigma_bar = (0..n).map(|d| matrix[d][d]).sum::<f64>() / n as f64;

    Ok(EffectiveTensor {
        dimension: n,
        matrix,
        sigma_bar,
        flux_matrix,
        flux_discrepancy,
        iterations: solutions.iter().map(|s| s.iterations).collect(),
        residuals: solutions.iter().map(|s| s.residual).collect(),
    })
}
