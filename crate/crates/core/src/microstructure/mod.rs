//! Periodic voxel microstructures on the unit cube `Q = [0,1]ⁿ`.
//!
//! A grid stores one phase index per voxel in row-major order (last axis
//! fastest) together with the conductivity of each phase. The voxel value is
//! the phase at the voxel center; there is no subgrid geometry.

mod generate;
mod io;

pub use generate::{generate_checkerboard, generate_laminate, generate_random, RandomMode};
pub use io::{read_grid, read_grid_file, write_grid, write_grid_file, GRID_MAGIC, GRID_VERSION};

use thiserror::Error;

use crate::phases::{Phase, PhaseError, PhaseSet};

#[derive(Debug, Error)]
pub enum GridError {
    #[error("dimension must be 2 or 3, got {0}")]
    Dimension(usize),
    #[error("axis {axis} has length {len}, which is not a power of two >= 2")]
    Shape { axis: usize, len: usize },
    #[error("grid needs between 1 and 255 phases, got {0}")]
    PhaseCount(usize),
    #[error("phase {index}: conductivity must be positive and finite, got {value}")]
    Conductivity { index: usize, value: f64 },
    #[error("voxel {voxel} has phase index {phase} but only {count} phases exist")]
    PhaseIndex { voxel: usize, phase: u8, count: usize },
    #[error("expected {expected} voxels, got {found}")]
    VoxelCount { expected: usize, found: usize },
    #[error("fractions not representable on {len} slabs: {detail}")]
    Unrepresentable { len: usize, detail: String },
    #[error("invalid generator argument: {0}")]
    Argument(String),
    #[error("bad magic bytes {0:?}, expected \"CNDA\"")]
    Magic([u8; 4]),
    #[error("unsupported grid file version {0}")]
    Version(u16),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Phase(#[from] PhaseError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    shape: Vec<usize>,
    phase_index: Vec<u8>,
    conductivities: Vec<f64>,
}

impl VoxelGrid {
    pub fn new(shape: Vec<usize>, phase_index: Vec<u8>, conductivities: Vec<f64>) -> Result<Self, GridError> {
        if !(2..=3).contains(&shape.len()) {
            return Err(GridError::Dimension(shape.len()));
        }
        for (axis, &len) in shape.iter().enumerate() {
            if len < 2 || !len.is_power_of_two() {
                return Err(GridError::Shape { axis, len });
            }
        }
        if conductivities.is_empty() || conductivities.len() > 255 {
            return Err(GridError::PhaseCount(conductivities.len()));
        }
        for (index, &value) in conductivities.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(GridError::Conductivity { index, value });
            }
        }
        let expected: usize = shape.iter().product();
        if phase_index.len() != expected {
            return Err(GridError::VoxelCount {
                expected,
                found: phase_index.len(),
            });
        }
        let count = conductivities.len();
        if let Some((voxel, &phase)) = phase_index.iter().enumerate().find(|(_, &p)| p as usize >= count) {
            return Err(GridError::PhaseIndex { voxel, phase, count });
        }
        Ok(VoxelGrid {
            shape,
            phase_index,
            conductivities,
        })
    }

    /// Homogeneous grid of a single conductivity.
    pub fn uniform(shape: Vec<usize>, sigma: f64) -> Result<Self, GridError> {
        let total = shape.iter().product();
        Self::new(shape, vec![0; total], vec![sigma])
    }

    pub fn dimension(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.phase_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phase_index.is_empty()
    }

    pub fn phase_index(&self) -> &[u8] {
        &self.phase_index
    }

    pub fn conductivities(&self) -> &[f64] {
        &self.conductivities
    }

    pub fn sigma_at(&self, voxel: usize) -> f64 {
        self.conductivities[self.phase_index[voxel] as usize]
    }

    /// σ(x) at every voxel.
    pub fn sigma_field(&self) -> Vec<f64> {
        self.phase_index
            .iter()
            .map(|&p| self.conductivities[p as usize])
            .collect()
    }

    pub fn phase_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.conductivities.len()];
        for &p in &self.phase_index {
            counts[p as usize] += 1;
        }
        counts
    }

    /// Grid with axes reordered: new axis `a` is old axis `perm[a]`.
    pub fn permute_axes(&self, perm: &[usize]) -> VoxelGrid {
        let n = self.dimension();
        assert_eq!(perm.len(), n);
        let new_shape: Vec<usize> = perm.iter().map(|&a| self.shape[a]).collect();
        let old_strides = strides(&self.shape);
        let mut out = vec![0u8; self.len()];
        let mut idx = vec![0; n];
        for (flat, slot) in out.iter_mut().enumerate() {
            crate::fft::unravel(flat, &new_shape, &mut idx);
            let src: usize = (0..n).map(|a| idx[a] * old_strides[perm[a]]).sum();
            *slot = self.phase_index[src];
        }
        VoxelGrid {
            shape: new_shape,
            phase_index: out,
            conductivities: self.conductivities.clone(),
        }
    }

    /// Same geometry with every conductivity multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<VoxelGrid, GridError> {
        VoxelGrid::new(
            self.shape.clone(),
            self.phase_index.clone(),
            self.conductivities.iter().map(|s| s * factor).collect(),
        )
    }
}

pub(crate) fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for a in (0..shape.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * shape[a + 1];
    }
    s
}

/// Volume fractions actually realized by the grid.
///
/// Unused phases are dropped and phases sharing a conductivity are merged.
/// Voxel counts on power-of-two grids are dyadic, so the fractions sum to
/// exactly 1.
pub fn empirical_phase_set(g: &VoxelGrid) -> PhaseSet {
    let total = g.len() as f64;
    let phases: Vec<Phase> = g
        .phase_counts()
        .into_iter()
        .zip(&g.conductivities)
        .filter(|(count, _)| *count > 0)
        .map(|(count, &sigma)| Phase::new(sigma, count as f64 / total))
        .collect();
    PhaseSet::new(g.dimension(), phases).expect("voxel counts form a valid phase set")
}
