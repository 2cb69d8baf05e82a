use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use super::{strides, GridError, VoxelGrid};
use crate::fft::{wavevector_grid, FftNd};
use crate::phases::PhaseSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RandomMode {
    /// Each voxel draws its phase independently with probabilities `μᵢ`.
    Iid,
    /// Uniform white noise smoothed by a Gaussian filter of the given
    /// correlation length (unit-cube units), then thresholded at the
    /// quantiles `μ₁, μ₁+μ₂, …` so the realized fractions are the rounded
    /// targets exactly.
    SmoothedNoise { correlation_length: f64 },
}

/// Slab counts for each phase along an axis of `len` voxels, or an error if
/// rounding does not give a partition with every phase present.
fn slab_counts(ps: &PhaseSet, len: usize) -> Result<Vec<usize>, GridError> {
    let counts: Vec<usize> = ps
        .phases()
        .iter()
        .map(|p| (p.volume_fraction * len as f64).round() as usize)
        .collect();
    let sum: usize = counts.iter().sum();
    if counts.contains(&0) || sum != len {
        let detail = ps
            .phases()
            .iter()
            .map(|p| format!("{}*{}", p.volume_fraction, len))
            .collect::<Vec<_>>()
            .join(", ");
        return Err(GridError::Unrepresentable { len, detail });
    }
    Ok(counts)
}

/// Layers normal to `axis`, phase i occupying a slab of width `≈ μᵢ`, in
/// increasing order of conductivity.
pub fn generate_laminate(ps: &PhaseSet, axis: usize, shape: &[usize]) -> Result<VoxelGrid, GridError> {
    if axis >= shape.len() {
        return Err(GridError::Argument(format!(
            "axis {axis} out of range for {} dimensions",
            shape.len()
        )));
    }
    let len = shape[axis];
    let counts = slab_counts(ps, len)?;
    let mut layer = Vec::with_capacity(len);
    for (phase, &c) in counts.iter().enumerate() {
        layer.extend(std::iter::repeat_n(phase as u8, c));
    }
    let total: usize = shape.iter().product();
    let stride = strides(shape)[axis];
    let index = (0..total).map(|flat| layer[(flat / stride) % len]).collect();
    VoxelGrid::new(
        shape.to_vec(),
        index,
        ps.phases().iter().map(|p| p.conductivity).collect(),
    )
}

/// Two-dimensional checkerboard with 2×2 cells: `sigma_a` on the diagonal
/// cells, `sigma_b` on the off-diagonal ones.
pub fn generate_checkerboard(sigma_a: f64, sigma_b: f64, shape: &[usize]) -> Result<VoxelGrid, GridError> {
    if shape.len() != 2 {
        return Err(GridError::Argument(format!(
            "checkerboard needs a 2D shape, got {} axes",
            shape.len()
        )));
    }
    if shape.iter().any(|&m| m % 2 != 0) {
        return Err(GridError::Argument(format!("checkerboard needs even shape, got {shape:?}")));
    }
    let (rows, cols) = (shape[0], shape[1]);
    let mut index = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let diagonal = (i < rows / 2) == (j < cols / 2);
            index.push(if diagonal { 0 } else { 1 });
        }
    }
    VoxelGrid::new(shape.to_vec(), index, vec![sigma_a, sigma_b])
}

pub fn generate_random(ps: &PhaseSet, shape: &[usize], seed: u64, mode: RandomMode) -> Result<VoxelGrid, GridError> {
    let total: usize = shape.iter().product();
    let conductivities: Vec<f64> = ps.phases().iter().map(|p| p.conductivity).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let index = match mode {
        RandomMode::Iid => {
            let mut cumulative = Vec::with_capacity(ps.len());
            let mut acc = 0.0;
            for p in ps.phases() {
                acc += p.volume_fraction;
                cumulative.push(acc);
            }
            let last = (ps.len() - 1) as u8;
            (0..total)
                .map(|_| {
                    let u: f64 = rng.gen();
                    cumulative
                        .iter()
                        .position(|&c| u < c)
                        .map_or(last, |i| i as u8)
                })
                .collect()
        }
        RandomMode::SmoothedNoise { correlation_length } => {
            if !(correlation_length.is_finite() && correlation_length >= 0.0) {
                return Err(GridError::Argument(format!(
                    "correlation length must be nonnegative, got {correlation_length}"
                )));
            }
            // validate the shape before touching the FFT
            VoxelGrid::new(shape.to_vec(), vec![0; total], conductivities.clone())?;
            let field = smoothed_noise(shape, correlation_length, &mut rng);
            threshold_by_rank(&field, &quantile_counts(ps, total))
        }
    };
    VoxelGrid::new(shape.to_vec(), index, conductivities)
}

fn smoothed_noise(shape: &[usize], ell: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let fft = FftNd::new(shape);
    let mut data: Vec<Complex64> = (0..fft.len())
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, 0.0))
        .collect();
    fft.forward(&mut data);
    let xi = wavevector_grid(shape);
    for (k, v) in data.iter_mut().enumerate() {
        let k2: f64 = xi.iter().map(|axis| axis[k] * axis[k]).sum();
        *v *= (-0.5 * k2 * ell * ell).exp();
    }
    fft.inverse(&mut data);
    data.iter().map(|v| v.re).collect()
}

/// Largest-remainder rounding of `μᵢ · total` so the counts sum to `total`.
fn quantile_counts(ps: &PhaseSet, total: usize) -> Vec<usize> {
    let exact: Vec<f64> = ps.phases().iter().map(|p| p.volume_fraction * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

fn threshold_by_rank(field: &[f64], counts: &[usize]) -> Vec<u8> {
    let mut order: Vec<usize> = (0..field.len()).collect();
    order.sort_by(|&a, &b| field[a].total_cmp(&field[b]).then(a.cmp(&b)));
    let mut index = vec![0u8; field.len()];
    let mut pos = 0;
    for (phase, &c) in counts.iter().enumerate() {
        for &voxel in &order[pos..pos + c] {
            index[voxel] = phase as u8;
        }
        pos += c;
    }
    index
}
