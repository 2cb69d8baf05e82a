//! Multidimensional complex FFT on row-major periodic grids, built from
//! one-dimensional `rustfft` plans applied axis by axis.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub struct FftNd {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl FftNd {
    pub fn new(shape: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        FftNd {
            shape: shape.to_vec(),
            forward: shape.iter().map(|&m| planner.plan_fft_forward(m)).collect(),
            inverse: shape.iter().map(|&m| planner.plan_fft_inverse(m)).collect(),
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unnormalized forward transform, in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// Inverse transform scaled by `1/N`, in place.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
        let scale = 1.0 / self.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    pub fn forward_real(&self, data: &[f64]) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward(&mut out);
        out
    }

    fn run(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        assert_eq!(data.len(), self.len(), "buffer does not match grid shape");
        let total = self.len();
        for (axis, plan) in plans.iter().enumerate() {
            let m = self.shape[axis];
            if m == 1 {
                continue;
            }
            let stride: usize = self.shape[axis + 1..].iter().product();
            let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
            if stride == 1 {
                plan.process_with_scratch(data, &mut scratch);
                continue;
            }
            let mut line = vec![Complex64::default(); m];
            let block = m * stride;
            for outer in (0..total).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (k, v) in line.iter_mut().enumerate() {
                        *v = data[base + k * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (k, v) in line.iter().enumerate() {
                        data[base + k * stride] = *v;
                    }
                }
            }
        }
    }
}

/// Angular wavenumbers `2πk` on the unit period for an axis of length `m`,
/// in FFT order. The Nyquist index `m/2` maps to `−πm` (one-sided).
pub fn wavenumbers(m: usize) -> Vec<f64> {
    (0..m)
        .map(|k| {
            let signed = if k < m.div_ceil(2) || m == 1 {
                k as f64
            } else {
                k as f64 - m as f64
            };
            2.0 * PI * signed
        })
        .collect()
}

/// Per-voxel multi-index iteration helper: unravels a flat row-major index.
pub fn unravel(mut index: usize, shape: &[usize], out: &mut [usize]) {
    for axis in (0..shape.len()).rev() {
        out[axis] = index % shape[axis];
        index /= shape[axis];
    }
}

/// Wavevector components of every mode, one `Vec` per axis, flat row-major.
pub fn wavevector_grid(shape: &[usize]) -> Vec<Vec<f64>> {
    let total: usize = shape.iter().product();
    let per_axis: Vec<Vec<f64>> = shape.iter().map(|&m| wavenumbers(m)).collect();
    let mut out = vec![vec![0.0; total]; shape.len()];
    let mut idx = vec![0; shape.len()];
    for flat in 0..total {
        unravel(flat, shape, &mut idx);
        for axis in 0..shape.len() {
            out[axis][flat] = per_axis[axis][idx[axis]];
        }
    }
    out
}
