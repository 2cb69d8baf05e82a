//! Scalar and matrix-valued fields sampled on a voxel grid.

use rustfft::num_complex::Complex64;

/// One or more complex components on a row-major grid. Matrix fields store
/// one component per matrix entry; every analysis treats components
/// independently.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    shape: Vec<usize>,
    components: Vec<Vec<Complex64>>,
}

impl Field {
    pub fn new(shape: Vec<usize>, components: Vec<Vec<Complex64>>) -> Self {
        let total: usize = shape.iter().product();
        assert!(!components.is_empty(), "field needs at least one component");
        assert!(
            components.iter().all(|c| c.len() == total),
            "component length does not match shape"
        );
        Field { shape, components }
    }

    pub fn real_scalar(shape: Vec<usize>, values: &[f64]) -> Self {
        Self::new(shape, vec![values.iter().map(|&v| Complex64::new(v, 0.0)).collect()])
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.components[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.components
    }

    pub fn scaled(&self, factor: f64) -> Field {
        Field {
            shape: self.shape.clone(),
            components: self
                .components
                .iter()
                .map(|c| c.iter().map(|v| v * factor).collect())
                .collect(),
        }
    }

    /// Pointwise `max_c |f_c(x)|`.
    pub fn max_modulus(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.components.iter().map(|c| c[i].norm()).fold(0.0, f64::max))
            .collect()
    }
}

/// Symmetric `n × n` matrix field storing the entries `(a, b)` with `a ≤ b`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrixField {
    dimension: usize,
    field: Field,
}

impl SymmetricMatrixField {
    pub fn new(dimension: usize, field: Field) -> Self {
        assert_eq!(field.components().len(), dimension * (dimension + 1) / 2);
        SymmetricMatrixField { dimension, field }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Upper-triangle pairs in storage order.
    pub fn pairs(dimension: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(dimension * (dimension + 1) / 2);
        for a in 0..dimension {
            for b in a..dimension {
                out.push((a, b));
            }
        }
        out
    }

    pub fn entry(&self, a: usize, b: usize, voxel: usize) -> Complex64 {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        // row a starts after Σ_{r<a} (n − r) entries
        let k = a * self.dimension - a * a.saturating_sub(1) / 2 + (b - a);
        self.field.components()[k][voxel]
    }

    pub fn trace(&self, voxel: usize) -> Complex64 {
        (0..self.dimension).map(|a| self.entry(a, a, voxel)).sum()
    }

    /// `|M|² = Σ_{a,b} |M_ab|²` at one voxel.
    pub fn frobenius_sq(&self, voxel: usize) -> f64 {
        Self::pairs(self.dimension)
            .iter()
            .zip(self.field.components())
            .map(|(&(a, b), c)| {
                let w = if a == b { 1.0 } else { 2.0 };
                w * c[voxel].norm_sqr()
            })
            .sum()
    }

    /// `M − (s/n) I` for a scalar field `s`.
    pub fn minus_scalar(&self, scalar: &[f64]) -> SymmetricMatrixField {
        let n = self.dimension as f64;
        let components = Self::pairs(self.dimension)
            .iter()
            .zip(self.field.components())
            .map(|(&(a, b), c)| {
                if a == b {
                    c.iter().zip(scalar).map(|(v, s)| v - s / n).collect()
                } else {
                    c.clone()
                }
            })
            .collect();
        SymmetricMatrixField {
            dimension: self.dimension,
            field: Field::new(self.field.shape().to_vec(), components),
        }
    }
}
