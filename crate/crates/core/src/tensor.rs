//! Dense complex linear algebra over named tensor-product spaces.
//!
//! A composite space is an ordered list of [`SubsystemSpec`]s. Amplitudes and
//! operator entries are stored row-major over that list: the last subsystem
//! varies fastest. All index arithmetic goes through [`Layout`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::HashSet;
use thiserror::Error;

use crate::tolerance;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("subsystem `{0}` must have dimension at least 1")]
    ZeroDimension(String),
    #[error("subsystem name `{0}` appears more than once")]
    NameCollision(String),
    #[error("unknown subsystem `{0}`")]
    UnknownSubsystem(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("operands live on different composite spaces")]
    SpaceMismatch,
    #[error("state norm {0:e} is numerically zero")]
    ZeroNorm(f64),
    #[error("partial trace must keep at least one subsystem")]
    EmptyKeep,
    #[error("not a valid density operator: {0}")]
    InvalidDensity(String),
}

pub type Result<T> = std::result::Result<T, TensorError>;

/// One factor of a composite Hilbert space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsystemSpec {
    name: String,
    dimension: usize,
}

impl SubsystemSpec {
    pub fn new(name: impl Into<String>, dimension: usize) -> Result<Self> {
        let name = name.into();
        if dimension == 0 {
            return Err(TensorError::ZeroDimension(name));
        }
        Ok(Self { name, dimension })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
}

fn check_unique(subsystems: &[SubsystemSpec]) -> Result<()> {
    let mut seen = HashSet::new();
    for s in subsystems {
        if !seen.insert(s.name.as_str()) {
            return Err(TensorError::NameCollision(s.name.clone()));
        }
    }
    Ok(())
}

fn position(subsystems: &[SubsystemSpec], name: &str) -> Result<usize> {
    subsystems
        .iter()
        .position(|s| s.name == name)
        .ok_or_else(|| TensorError::UnknownSubsystem(name.to_string()))
}

/// Row-major index arithmetic for an ordered list of dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    dims: Vec<usize>,
    strides: Vec<usize>,
}

impl Layout {
    pub fn new(dims: &[usize]) -> Self {
        let mut strides = vec![1; dims.len()];
        for axis in (0..dims.len().saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * dims[axis + 1];
        }
        Self {
            dims: dims.to_vec(),
            strides,
        }
    }

    pub fn of(subsystems: &[SubsystemSpec]) -> Self {
        let dims: Vec<usize> = subsystems.iter().map(|s| s.dimension).collect();
        Self::new(&dims)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn flatten(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.dims.len());
        index.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        self.strides
            .iter()
            .map(|s| {
                let i = flat / s;
                flat %= s;
                i
            })
            .collect()
    }

    /// Flat offsets in this layout of every multi-index over `axes`, with the
    /// other axes held at zero. Offsets are listed in row-major order of the
    /// sub-index, so they can be added to offsets over the complementary axes.
    pub fn offsets(&self, axes: &[usize]) -> Vec<usize> {
        let sub_dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let sub = Layout::new(&sub_dims);
        (0..sub.total())
            .map(|k| {
                sub.unflatten(k)
                    .iter()
                    .zip(axes)
                    .map(|(i, &a)| i * self.strides[a])
                    .sum()
            })
            .collect()
    }
}

/// Pure state vector on a composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeState {
    subsystems: Vec<SubsystemSpec>,
    amplitudes: Vec<Complex64>,
    normalized: bool,
}

impl CompositeState {
    pub fn new(subsystems: Vec<SubsystemSpec>, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_unique(&subsystems)?;
        let expected = Layout::of(&subsystems).total();
        if amplitudes.len() != expected {
            return Err(TensorError::DimensionMismatch {
                expected,
                actual: amplitudes.len(),
            });
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        Ok(Self {
            subsystems,
            amplitudes,
            normalized: (norm_sqr - 1.0).abs() <= tolerance::NORM,
        })
    }

    /// State on a single named subsystem whose dimension is the amplitude count.
    pub fn single(name: impl Into<String>, amplitudes: Vec<Complex64>) -> Result<Self> {
        let spec = SubsystemSpec::new(name, amplitudes.len())?;
        Self::new(vec![spec], amplitudes)
    }

    /// Computational basis state `|index⟩` on one subsystem.
    pub fn basis(name: impl Into<String>, dimension: usize, index: usize) -> Result<Self> {
        if index >= dimension {
            return Err(TensorError::DimensionMismatch {
                expected: dimension,
                actual: index + 1,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dimension];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::single(name, amps)
    }

    pub fn subsystems(&self) -> &[SubsystemSpec] {
        &self.subsystems
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn layout(&self) -> Layout {
        Layout::of(&self.subsystems)
    }

    /// Whether the squared norm was within tolerance of one at construction.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn subsystem(&self, name: &str) -> Result<&SubsystemSpec> {
        position(&self.subsystems, name).map(|i| &self.subsystems[i])
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let amplitudes = self.amplitudes.iter().map(|a| a * factor).collect();
        Self::new(self.subsystems.clone(), amplitudes).expect("same space")
    }

    /// Amplitude-wise sum of two states on the same space.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.subsystems != other.subsystems {
            return Err(TensorError::SpaceMismatch);
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a + b)
            .collect();
        Self::new(self.subsystems.clone(), amplitudes)
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut subsystems = self.subsystems.clone();
        subsystems.extend(other.subsystems.iter().cloned());
        check_unique(&subsystems)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Self::new(subsystems, amplitudes)
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        if self.subsystems != other.subsystems {
            return Err(TensorError::SpaceMismatch);
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Unit-norm copy of the state together with the original norm.
    pub fn normalize(&self) -> Result<(Self, f64)> {
        let norm = self.norm();
        if norm <= tolerance::ZERO_NORM {
            return Err(TensorError::ZeroNorm(norm));
        }
        Ok((self.scaled(Complex64::new(1.0 / norm, 0.0)), norm))
    }

    /// Contract `subsystem` against `⟨ket|`, returning the unnormalized state of
    /// the remaining factors. Its squared norm is the outcome probability.
    ///
    /// Projecting the only subsystem leaves a one-dimensional `scalar` space.
    pub fn project(&self, subsystem: &str, ket: &[Complex64]) -> Result<Self> {
        let axis = position(&self.subsystems, subsystem)?;
        let dim = self.subsystems[axis].dimension;
        if ket.len() != dim {
            return Err(TensorError::DimensionMismatch {
                expected: dim,
                actual: ket.len(),
            });
        }
        let layout = self.layout();
        let rest: Vec<usize> = (0..self.subsystems.len()).filter(|&a| a != axis).collect();
        let stride = layout.stride(axis);
        let amplitudes: Vec<Complex64> = layout
            .offsets(&rest)
            .into_iter()
            .map(|base| {
                ket.iter()
                    .enumerate()
                    .map(|(k, bra)| bra.conj() * self.amplitudes[base + k * stride])
                    .sum()
            })
            .collect();
        let mut subsystems: Vec<SubsystemSpec> =
            rest.iter().map(|&a| self.subsystems[a].clone()).collect();
        if subsystems.is_empty() {
            subsystems.push(SubsystemSpec::new("scalar", 1)?);
        }
        Self::new(subsystems, amplitudes)
    }

    /// Same state with its factors listed in `order`.
    pub fn reorder(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.subsystems.len() {
            return Err(TensorError::DimensionMismatch {
                expected: self.subsystems.len(),
                actual: order.len(),
            });
        }
        let axes = order
            .iter()
            .map(|n| position(&self.subsystems, n))
            .collect::<Result<Vec<_>>>()?;
        let subsystems: Vec<SubsystemSpec> =
            axes.iter().map(|&a| self.subsystems[a].clone()).collect();
        check_unique(&subsystems)?;
        let amplitudes = self
            .layout()
            .offsets(&axes)
            .into_iter()
            .map(|i| self.amplitudes[i])
            .collect();
        Self::new(subsystems, amplitudes)
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`.
    pub fn density(&self) -> Result<DensityOperator> {
        let (unit, _) = self.normalize()?;
        let n = unit.dimension();
        let mut matrix = Vec::with_capacity(n * n);
        for a in &unit.amplitudes {
            for b in &unit.amplitudes {
                matrix.push(a * b.conj());
            }
        }
        Ok(DensityOperator {
            subsystems: unit.subsystems,
            dimension: n,
            matrix,
        })
    }
}

pub fn tensor(a: &CompositeState, b: &CompositeState) -> Result<CompositeState> {
    a.tensor(b)
}

pub fn inner_product(a: &CompositeState, b: &CompositeState) -> Result<Complex64> {
    a.inner_product(b)
}

pub fn normalize(psi: &CompositeState) -> Result<(CompositeState, f64)> {
    psi.normalize()
}

pub fn project(psi: &CompositeState, subsystem: &str, ket: &[Complex64]) -> Result<CompositeState> {
    psi.project(subsystem, ket)
}

pub fn partial_trace(rho: &DensityOperator, keep: &[&str]) -> Result<DensityOperator> {
    rho.partial_trace(keep)
}

pub fn purity(rho: &DensityOperator) -> f64 {
    rho.purity()
}

/// Hermitian, trace-one, positive semidefinite operator on a composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    subsystems: Vec<SubsystemSpec>,
    dimension: usize,
    matrix: Vec<Complex64>,
}

impl DensityOperator {
    /// Validating constructor; `matrix` is row-major with side equal to the
    /// composite dimension.
    pub fn new(subsystems: Vec<SubsystemSpec>, matrix: Vec<Complex64>) -> Result<Self> {
        check_unique(&subsystems)?;
        let dimension = Layout::of(&subsystems).total();
        if matrix.len() != dimension * dimension {
            return Err(TensorError::DimensionMismatch {
                expected: dimension * dimension,
                actual: matrix.len(),
            });
        }
        let rho = Self {
            subsystems,
            dimension,
            matrix,
        };
        rho.validate()?;
        Ok(rho)
    }

    /// Convex mixture `Σ w_k |ψ_k⟩⟨ψ_k|` of normalized copies of `states`.
    pub fn mixture(weights: &[f64], states: &[CompositeState]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(TensorError::DimensionMismatch {
                expected: states.len(),
                actual: weights.len(),
            });
        }
        let subsystems = states[0].subsystems.clone();
        let n = states[0].dimension();
        let mut matrix = vec![Complex64::new(0.0, 0.0); n * n];
        for (w, psi) in weights.iter().zip(states) {
            if psi.subsystems != subsystems {
                return Err(TensorError::SpaceMismatch);
            }
            let rho = psi.density()?;
            for (m, r) in matrix.iter_mut().zip(&rho.matrix) {
                *m += r * w;
            }
        }
        Self::new(subsystems, matrix)
    }

    pub fn validate(&self) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect > tolerance::HERMITICITY {
            return Err(TensorError::InvalidDensity(format!(
                "Hermiticity defect {defect:e}"
            )));
        }
        let trace = self.trace();
        if (trace.re - 1.0).abs() > tolerance::NORM || trace.im.abs() > tolerance::NORM {
            return Err(TensorError::InvalidDensity(format!("trace {trace}")));
        }
        let min = self.min_eigenvalue();
        if min < tolerance::EIGENVALUE_FLOOR {
            return Err(TensorError::InvalidDensity(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    pub fn subsystems(&self) -> &[SubsystemSpec] {
        &self.subsystems
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dimension + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dimension).map(|i| self.get(i, i)).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dimension).map(|i| self.get(i, i).re).collect()
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        let n = self.dimension;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                // ρ_ij ρ_ji = |ρ_ij|² for Hermitian ρ
                acc += (self.get(i, j) * self.get(j, i)).re;
            }
        }
        acc
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dimension;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.dimension;
        let m = DMatrix::from_fn(n, n, |i, j| {
            // symmetrize so the solver sees an exactly Hermitian input
            (self.get(i, j) + self.get(j, i).conj()) * 0.5
        });
        let mut values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// `⟨bra|ρ|ket⟩` for vectors on the full composite space.
    pub fn matrix_element(&self, bra: &[Complex64], ket: &[Complex64]) -> Result<Complex64> {
        let n = self.dimension;
        for v in [bra, ket] {
            if v.len() != n {
                return Err(TensorError::DimensionMismatch {
                    expected: n,
                    actual: v.len(),
                });
            }
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let row: Complex64 = (0..n).map(|j| self.get(i, j) * ket[j]).sum();
            acc += bra[i].conj() * row;
        }
        Ok(acc)
    }

    /// Reduced operator on the `keep` subsystems, which stay in their
    /// original relative order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<Self> {
        if keep.is_empty() {
            return Err(TensorError::EmptyKeep);
        }
        let mut kept_axes = keep
            .iter()
            .map(|n| position(&self.subsystems, n))
            .collect::<Result<Vec<_>>>()?;
        kept_axes.sort_unstable();
        kept_axes.dedup();
        let traced_axes: Vec<usize> = (0..self.subsystems.len())
            .filter(|a| !kept_axes.contains(a))
            .collect();

        let layout = Layout::of(&self.subsystems);
        let kept = layout.offsets(&kept_axes);
        let traced = layout.offsets(&traced_axes);
        let n = self.dimension;
        let m = kept.len();

        let mut matrix = vec![Complex64::new(0.0, 0.0); m * m];
        for (i, &ri) in kept.iter().enumerate() {
            for (j, &rj) in kept.iter().enumerate() {
                matrix[i * m + j] = traced
                    .iter()
                    .map(|&t| self.matrix[(ri + t) * n + rj + t])
                    .sum();
            }
        }
        let subsystems = kept_axes
            .iter()
            .map(|&a| self.subsystems[a].clone())
            .collect();
        Ok(Self {
            subsystems,
            dimension: m,
            matrix,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn qubit(name: &str, a: Complex64, b: Complex64) -> CompositeState {
        CompositeState::single(name, vec![a, b]).unwrap()
    }

    fn bell() -> CompositeState {
        let s = FRAC_1_SQRT_2;
        CompositeState::new(
            vec![
                SubsystemSpec::new("A", 2).unwrap(),
                SubsystemSpec::new("B", 2).unwrap(),
            ],
            vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)],
        )
        .unwrap()
    }

    #[test]
    fn tensor_of_basis_states() {
        let a = qubit("A", c(1.0, 0.0), c(0.0, 0.0));
        let b = qubit("B", c(0.0, 0.0), c(1.0, 0.0));
        let ab = a.tensor(&b).unwrap();
        assert_eq!(
            ab.amplitudes(),
            &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]
        );
        let names: Vec<&str> = ab.subsystems().iter().map(|s| s.name()).collect();
        assert_eq!(names, ["A", "B"]);
    }

    #[test]
    fn tensor_is_linear() {
        let s = FRAC_1_SQRT_2;
        let a = qubit("A", c(s, 0.0), c(s, 0.0));
        let b = qubit("B", c(1.0, 0.0), c(0.0, 0.0));
        let ab = a.tensor(&b).unwrap();
        assert_eq!(
            ab.amplitudes(),
            &[c(s, 0.0), c(0.0, 0.0), c(s, 0.0), c(0.0, 0.0)]
        );
    }

    #[test]
    fn tensor_rejects_repeated_names() {
        let a = qubit("A", c(1.0, 0.0), c(0.0, 0.0));
        assert_eq!(
            a.tensor(&a),
            Err(TensorError::NameCollision("A".to_string()))
        );
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(
            SubsystemSpec::new("x", 0),
            Err(TensorError::ZeroDimension(_))
        ));
    }

    #[test]
    fn layout_round_trip() {
        let l = Layout::new(&[2, 3, 4]);
        assert_eq!(l.total(), 24);
        for k in 0..24 {
            assert_eq!(l.flatten(&l.unflatten(k)), k);
        }
        assert_eq!(l.flatten(&[1, 2, 3]), 12 + 8 + 3);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let a = qubit("A", c(0.6, 0.0), c(0.0, 0.8));
        let b = qubit("B", c(FRAC_1_SQRT_2, 0.0), c(0.0, -FRAC_1_SQRT_2));
        let rho = a.tensor(&b).unwrap().density().unwrap();
        let reduced = rho.partial_trace(&["A"]).unwrap();
        let expected = a.density().unwrap();
        for (x, y) in reduced.matrix().iter().zip(expected.matrix()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let reduced = bell().density().unwrap().partial_trace(&["A"]).unwrap();
        let expected = [c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)];
        for (x, y) in reduced.matrix().iter().zip(&expected) {
            assert!((x - y).norm() < 1e-14);
        }
        assert!((reduced.purity() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn partial_trace_of_measurement_record() {
        // 0.6 |ξ1⟩|η1⟩ + 0.8 |ξ2⟩|η2⟩ written out by hand in the (ξ, η) basis
        let psi = CompositeState::new(
            vec![
                SubsystemSpec::new("system", 2).unwrap(),
                SubsystemSpec::new("apparatus", 2).unwrap(),
            ],
            vec![c(0.6, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.8, 0.0)],
        )
        .unwrap();
        let reduced = psi.density().unwrap().partial_trace(&["system"]).unwrap();
        assert!((reduced.get(0, 0).re - 0.36).abs() < 1e-14);
        assert!((reduced.get(1, 1).re - 0.64).abs() < 1e-14);
        assert!(reduced.get(0, 1).norm() < 1e-14);
        assert!((reduced.purity() - 0.5392).abs() < 1e-14);
    }

    #[test]
    fn partial_trace_unknown_name() {
        let rho = bell().density().unwrap();
        assert_eq!(
            rho.partial_trace(&["C"]),
            Err(TensorError::UnknownSubsystem("C".to_string()))
        );
        assert_eq!(rho.partial_trace(&[]), Err(TensorError::EmptyKeep));
    }

    #[test]
    fn project_bell_state() {
        let out = bell()
            .project("B", &[c(1.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        assert_eq!(out.subsystems()[0].name(), "A");
        assert!((out.amplitudes()[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!(out.amplitudes()[1].norm() < 1e-15);
        assert!((out.norm_sqr() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn project_product_state_onto_own_factor() {
        let sys = qubit("S", c(0.6, 0.0), c(0.0, 0.8));
        let app = qubit("M", c(0.0, FRAC_1_SQRT_2), c(FRAC_1_SQRT_2, 0.0));
        let out = sys
            .tensor(&app)
            .unwrap()
            .project("M", app.amplitudes())
            .unwrap();
        for (x, y) in out.amplitudes().iter().zip(sys.amplitudes()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn project_branch_with_imaginary_amplitude() {
        // 0.6 |ξ1 η1⟩ + 0.8i |ξ2 η2⟩ projected on η2 leaves 0.8i |ξ2⟩
        let psi = CompositeState::new(
            vec![
                SubsystemSpec::new("system", 2).unwrap(),
                SubsystemSpec::new("apparatus", 2).unwrap(),
            ],
            vec![c(0.6, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.8)],
        )
        .unwrap();
        let out = psi.project("apparatus", &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(out.amplitudes(), &[c(0.0, 0.0), c(0.0, 0.8)]);
        assert!((out.norm_sqr() - 0.64).abs() < 1e-15);
    }

    #[test]
    fn project_dimension_mismatch() {
        assert_eq!(
            bell().project("A", &[c(1.0, 0.0)]),
            Err(TensorError::DimensionMismatch {
                expected: 2,
                actual: 1
            })
        );
    }

    #[test]
    fn normalize_reports_norm_and_rejects_null() {
        let psi = qubit("A", c(3.0, 0.0), c(0.0, 4.0));
        let (unit, norm) = psi.normalize().unwrap();
        assert!((norm - 5.0).abs() < 1e-15);
        assert!(unit.is_normalized());
        let null = qubit("A", c(1e-14, 0.0), c(0.0, 0.0));
        assert!(matches!(null.normalize(), Err(TensorError::ZeroNorm(_))));
    }

    #[test]
    fn inner_product_requires_same_space() {
        let a = qubit("A", c(1.0, 0.0), c(0.0, 0.0));
        let b = qubit("B", c(1.0, 0.0), c(0.0, 0.0));
        assert_eq!(a.inner_product(&b), Err(TensorError::SpaceMismatch));
        let ip = a
            .inner_product(&qubit("A", c(0.0, 1.0), c(1.0, 0.0)))
            .unwrap();
        assert_eq!(ip, c(0.0, 1.0));
    }

    #[test]
    fn purity_examples() {
        let pure = qubit("A", c(0.6, 0.0), c(0.0, 0.8)).density().unwrap();
        assert!((pure.purity() - 1.0).abs() < 1e-15);

        let spec = vec![SubsystemSpec::new("A", 2).unwrap()];
        let half = DensityOperator::new(
            spec.clone(),
            vec![c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)],
        )
        .unwrap();
        assert!((half.purity() - 0.5).abs() < 1e-15);

        let diag = DensityOperator::new(
            spec,
            vec![c(0.36, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.64, 0.0)],
        )
        .unwrap();
        assert!((diag.purity() - 0.5392).abs() < 1e-15);
    }

    #[test]
    fn density_validation() {
        let spec = vec![SubsystemSpec::new("A", 2).unwrap()];
        let not_hermitian = DensityOperator::new(
            spec.clone(),
            vec![c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)],
        );
        assert!(matches!(not_hermitian, Err(TensorError::InvalidDensity(_))));
        let bad_trace = DensityOperator::new(
            spec.clone(),
            vec![c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.6, 0.0)],
        );
        assert!(matches!(bad_trace, Err(TensorError::InvalidDensity(_))));
        let negative = DensityOperator::new(
            spec,
            vec![c(0.5, 0.0), c(0.9, 0.0), c(0.9, 0.0), c(0.5, 0.0)],
        );
        assert!(matches!(negative, Err(TensorError::InvalidDensity(_))));
    }

    #[test]
    fn reorder_permutes_axes() {
        let a = qubit("A", c(1.0, 0.0), c(0.0, 0.0));
        let b = qubit("B", c(0.0, 0.0), c(1.0, 0.0));
        let ba = a.tensor(&b).unwrap().reorder(&["B", "A"]).unwrap();
        assert_eq!(ba, b.tensor(&a).unwrap());
    }

    #[test]
    fn project_last_subsystem_leaves_scalar() {
        let a = qubit("A", c(0.6, 0.0), c(0.8, 0.0));
        let out = a.project("A", &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(out.dimension(), 1);
        assert_eq!(out.amplitudes()[0], c(0.6, 0.0));
    }
}
