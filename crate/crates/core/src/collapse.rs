//! Two-stage von Neumann measurement.
//!
//! A premeasurement correlates system eigenstates `|ξ_j⟩` with orthonormal
//! apparatus pointer states `|η_j⟩`, giving `Σ_j a_j |ξ_j⟩|η_j⟩`. The record
//! is then reduced either statistically (trace over the apparatus, leaving the
//! mixture `Σ_l |a_l|² |ξ_l⟩⟨ξ_l|`) or by post-selecting one pointer outcome,
//! which leaves the pure state `|ξ_l⟩` with probability `|a_l|²`.

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::{CompositeState, DensityOperator, SubsystemSpec, TensorError};
use crate::tolerance;

pub const SYSTEM: &str = "system";
pub const APPARATUS: &str = "apparatus";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CollapseError {
    #[error("invalid entanglement spec: {0}")]
    InvalidSpec(String),
    #[error("outcome {index} has probability {probability:e}; cannot post-select on a null branch")]
    DegenerateOutcome { index: usize, probability: f64 },
    #[error("outcome index {index} out of range for {outcomes} declared outcomes")]
    OutcomeOutOfRange { index: usize, outcomes: usize },
    #[error("shot count must be at least 1")]
    NoShots,
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

pub type Result<T> = std::result::Result<T, CollapseError>;

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn check_orthonormal(label: &str, states: &[Vec<Complex64>]) -> Result<usize> {
    let dim = states[0].len();
    if dim == 0 {
        return Err(CollapseError::InvalidSpec(format!("{label} states are empty")));
    }
    for (j, s) in states.iter().enumerate() {
        if s.len() != dim {
            return Err(CollapseError::InvalidSpec(format!(
                "{label} state {j} has length {} but state 0 has {dim}",
                s.len()
            )));
        }
    }
    for (j, a) in states.iter().enumerate() {
        for (k, b) in states.iter().enumerate().skip(j) {
            let expected = if j == k { 1.0 } else { 0.0 };
            let got = dot(a, b);
            if (got - Complex64::new(expected, 0.0)).norm() > tolerance::NORM {
                return Err(CollapseError::InvalidSpec(format!(
                    "{label} states are not orthonormal: ⟨{j}|{k}⟩ = {got}"
                )));
            }
        }
    }
    Ok(dim)
}

fn basis_vector(dim: usize, index: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    v[index] = Complex64::new(1.0, 0.0);
    v
}

/// Branch amplitudes with their system eigenstates, pointer states and
/// eigenvalues. Branches are indexed from zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementSpec {
    amplitudes: Vec<Complex64>,
    system_states: Vec<Vec<Complex64>>,
    apparatus_states: Vec<Vec<Complex64>>,
    eigenvalues: Vec<f64>,
}

impl EntanglementSpec {
    pub fn new(
        amplitudes: Vec<Complex64>,
        system_states: Vec<Vec<Complex64>>,
        apparatus_states: Vec<Vec<Complex64>>,
        eigenvalues: Vec<f64>,
    ) -> Result<Self> {
        let branches = amplitudes.len();
        if branches == 0 {
            return Err(CollapseError::InvalidSpec("no branches".into()));
        }
        if system_states.len() != branches
            || apparatus_states.len() != branches
            || eigenvalues.len() != branches
        {
            return Err(CollapseError::InvalidSpec(format!(
                "{branches} amplitudes but {} system states, {} apparatus states, {} eigenvalues",
                system_states.len(),
                apparatus_states.len(),
                eigenvalues.len()
            )));
        }
        let weight: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (weight - 1.0).abs() > tolerance::NORM {
            return Err(CollapseError::InvalidSpec(format!(
                "Σ|a_j|² = {weight} instead of 1"
            )));
        }
        check_orthonormal("system", &system_states)?;
        check_orthonormal("apparatus", &apparatus_states)?;
        Ok(Self {
            amplitudes,
            system_states,
            apparatus_states,
            eigenvalues,
        })
    }

    /// System and apparatus both in their computational bases, dimension J.
    pub fn standard(amplitudes: Vec<Complex64>, eigenvalues: Vec<f64>) -> Result<Self> {
        let n = amplitudes.len();
        let basis: Vec<Vec<Complex64>> = (0..n).map(|j| basis_vector(n, j)).collect();
        Self::new(amplitudes, basis.clone(), basis, eigenvalues)
    }

    /// Spin-1/2 along the quantization axis: `a1 |+⟩|φ+⟩ + a2 |−⟩|φ−⟩`, with
    /// eigenvalues +1/2 and −1/2.
    pub fn stern_gerlach(a1: Complex64, a2: Complex64) -> Result<Self> {
        Self::standard(vec![a1, a2], vec![0.5, -0.5])
    }

    pub fn branches(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn system_states(&self) -> &[Vec<Complex64>] {
        &self.system_states
    }

    pub fn apparatus_states(&self) -> &[Vec<Complex64>] {
        &self.apparatus_states
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn system_dimension(&self) -> usize {
        self.system_states[0].len()
    }

    pub fn apparatus_dimension(&self) -> usize {
        self.apparatus_states[0].len()
    }

    /// `Σ_j a_j |ξ_j⟩ ⊗ |η_j⟩` on `(system, apparatus)`.
    pub fn entangle(&self) -> Result<CompositeState> {
        let subsystems = vec![
            SubsystemSpec::new(SYSTEM, self.system_dimension())?,
            SubsystemSpec::new(APPARATUS, self.apparatus_dimension())?,
        ];
        let mut amps = vec![Complex64::new(0.0, 0.0); self.system_dimension() * self.apparatus_dimension()];
        for ((a, xi), eta) in self
            .amplitudes
            .iter()
            .zip(&self.system_states)
            .zip(&self.apparatus_states)
        {
            for (s, x) in xi.iter().enumerate() {
                for (m, e) in eta.iter().enumerate() {
                    amps[s * self.apparatus_dimension() + m] += a * x * e;
                }
            }
        }
        Ok(CompositeState::new(subsystems, amps)?)
    }

    /// Unnormalized system state left by reading pointer `index`.
    fn branch(&self, psi: &CompositeState, index: usize) -> Result<CompositeState> {
        let eta = self
            .apparatus_states
            .get(index)
            .ok_or(CollapseError::OutcomeOutOfRange {
                index,
                outcomes: self.branches(),
            })?;
        Ok(psi.project(APPARATUS, eta)?)
    }

    /// Probability of reading each declared pointer state.
    pub fn outcome_probabilities(&self, psi: &CompositeState) -> Result<Vec<f64>> {
        (0..self.branches())
            .map(|l| self.branch(psi, l).map(|s| s.norm_sqr()))
            .collect()
    }

    /// Condition the system on pointer outcome `index`.
    pub fn reduce_postselect(&self, psi: &CompositeState, index: usize) -> Result<CollapseOutcome> {
        let projected = self.branch(psi, index)?;
        let probability = projected.norm_sqr();
        if probability < tolerance::DEGENERATE_PROBABILITY {
            return Err(CollapseError::DegenerateOutcome { index, probability });
        }
        let (unit, _) = projected.normalize()?;
        Ok(CollapseOutcome {
            outcome_index: index,
            probability,
            post_state: fix_global_phase(&unit),
            eigenvalue: self.eigenvalues[index],
        })
    }

    /// Draw `shots` independent pointer readings from a generator seeded
    /// with `seed`.
    pub fn sample_outcomes(&self, psi: &CompositeState, shots: u64, seed: u64) -> Result<SampleCounts> {
        if shots == 0 {
            return Err(CollapseError::NoShots);
        }
        let probabilities = self.outcome_probabilities(psi)?;
        let dist = WeightedIndex::new(&probabilities)
            .map_err(|e| CollapseError::InvalidSpec(format!("outcome distribution: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0u64; probabilities.len()];
        for _ in 0..shots {
            counts[dist.sample(&mut rng)] += 1;
        }
        Ok(SampleCounts {
            counts,
            shots,
            seed,
        })
    }
}

/// Rotate the global phase so the largest-magnitude amplitude is real and positive.
pub fn fix_global_phase(psi: &CompositeState) -> CompositeState {
    let mut pivot = Complex64::new(0.0, 0.0);
    for a in psi.amplitudes() {
        if a.norm() > pivot.norm() + tolerance::ZERO_NORM {
            pivot = *a;
        }
    }
    if pivot.norm() == 0.0 {
        return psi.clone();
    }
    psi.scaled(pivot.conj() / pivot.norm())
}

/// Trace the apparatus out of the measurement record.
pub fn reduce_statistical(psi: &CompositeState) -> Result<DensityOperator> {
    Ok(psi.density()?.partial_trace(&[SYSTEM])?)
}

/// Stern–Gerlach record `a1 |+⟩|φ+⟩ + a2 |−⟩|φ−⟩`.
pub fn stern_gerlach(a1: Complex64, a2: Complex64) -> Result<CompositeState> {
    EntanglementSpec::stern_gerlach(a1, a2)?.entangle()
}

/// Result of post-selecting one pointer outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseOutcome {
    pub outcome_index: usize,
    pub probability: f64,
    /// Unit-norm system state with its global phase fixed.
    pub post_state: CompositeState,
    pub eigenvalue: f64,
}

/// Shot tallies per outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleCounts {
    pub counts: Vec<u64>,
    pub shots: u64,
    pub seed: u64,
}

impl SampleCounts {
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.shots as f64)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn spec(a: &[Complex64]) -> EntanglementSpec {
        let eig = (0..a.len()).map(|j| j as f64).collect();
        EntanglementSpec::standard(a.to_vec(), eig).unwrap()
    }

    #[test]
    fn single_branch_is_product_state() {
        let s = spec(&[c(1.0, 0.0)]);
        let psi = s.entangle().unwrap();
        assert_eq!(psi.amplitudes(), &[c(1.0, 0.0)]);
        let s2 = EntanglementSpec::new(
            vec![c(1.0, 0.0)],
            vec![vec![c(0.0, 0.0), c(1.0, 0.0)]],
            vec![vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)]],
            vec![1.0],
        )
        .unwrap();
        let xi = CompositeState::single(SYSTEM, s2.system_states()[0].clone()).unwrap();
        let eta = CompositeState::single(APPARATUS, s2.apparatus_states()[0].clone()).unwrap();
        assert_eq!(s2.entangle().unwrap(), xi.tensor(&eta).unwrap());
    }

    #[test]
    fn equal_weights_give_bell_state() {
        let s = FRAC_1_SQRT_2;
        let psi = spec(&[c(s, 0.0), c(s, 0.0)]).entangle().unwrap();
        assert_eq!(
            psi.amplitudes(),
            &[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]
        );
    }

    #[test]
    fn branch_overlaps_equal_amplitudes() {
        let s = spec(&[c(0.6, 0.0), c(0.0, 0.8)]);
        let psi = s.entangle().unwrap();
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-15);
        for j in 0..2 {
            let xi = CompositeState::single(SYSTEM, s.system_states()[j].clone()).unwrap();
            let eta = CompositeState::single(APPARATUS, s.apparatus_states()[j].clone()).unwrap();
            let branch = xi.tensor(&eta).unwrap();
            let overlap = branch.inner_product(&psi).unwrap();
            assert!((overlap - s.amplitudes()[j]).norm() < 1e-15);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(matches!(
            EntanglementSpec::standard(vec![c(0.6, 0.0), c(0.6, 0.0)], vec![0.0, 1.0]),
            Err(CollapseError::InvalidSpec(_))
        ));
        let not_orthogonal = EntanglementSpec::new(
            vec![c(0.6, 0.0), c(0.8, 0.0)],
            vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]],
            vec![
                vec![c(1.0, 0.0), c(0.0, 0.0)],
                vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)],
            ],
            vec![0.0, 1.0],
        );
        assert!(matches!(not_orthogonal, Err(CollapseError::InvalidSpec(_))));
        assert!(matches!(
            EntanglementSpec::standard(vec![], vec![]),
            Err(CollapseError::InvalidSpec(_))
        ));
    }

    #[test]
    fn statistical_reduction_examples() {
        let pure = reduce_statistical(&spec(&[c(1.0, 0.0), c(0.0, 0.0)]).entangle().unwrap()).unwrap();
        assert_eq!(pure.diagonal(), vec![1.0, 0.0]);
        assert!((pure.purity() - 1.0).abs() < 1e-15);

        let s = FRAC_1_SQRT_2;
        let half = reduce_statistical(&spec(&[c(s, 0.0), c(s, 0.0)]).entangle().unwrap()).unwrap();
        for d in half.diagonal() {
            assert!((d - 0.5).abs() < 1e-15);
        }
        assert!(half.get(0, 1).norm() < 1e-15);

        let mixed = reduce_statistical(&spec(&[c(0.6, 0.0), c(0.8, 0.0)]).entangle().unwrap()).unwrap();
        let d = mixed.diagonal();
        assert!((d[0] - 0.36).abs() < 1e-15 && (d[1] - 0.64).abs() < 1e-15);
        assert!((mixed.purity() - 0.5392).abs() < 1e-14);
    }

    #[test]
    fn postselection_examples() {
        let s = spec(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let psi = s.entangle().unwrap();
        let out = s.reduce_postselect(&psi, 0).unwrap();
        assert_eq!(out.probability, 1.0);
        assert_eq!(out.post_state.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);

        assert!(matches!(
            s.reduce_postselect(&psi, 1),
            Err(CollapseError::DegenerateOutcome { index: 1, .. })
        ));
        assert!(matches!(
            s.reduce_postselect(&psi, 2),
            Err(CollapseError::OutcomeOutOfRange { index: 2, outcomes: 2 })
        ));

        let s = spec(&[c(0.6, 0.0), c(0.0, 0.8)]);
        let psi = s.entangle().unwrap();
        let out = s.reduce_postselect(&psi, 1).unwrap();
        assert!((out.probability - 0.64).abs() < 1e-15);
        // global phase removed: 0.8i|ξ2⟩ / 0.8 → |ξ2⟩
        assert_eq!(out.post_state.amplitudes(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(out.eigenvalue, 1.0);
        assert!((out.post_state.density().unwrap().purity() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stern_gerlach_examples() {
        let psi = stern_gerlach(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let phi_plus = psi.project(SYSTEM, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(phi_plus.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);

        let s = FRAC_1_SQRT_2;
        let rho = reduce_statistical(&stern_gerlach(c(s, 0.0), c(s, 0.0)).unwrap()).unwrap();
        assert!((rho.get(0, 0).re - 0.5).abs() < 1e-15);
        assert!((rho.get(1, 1).re - 0.5).abs() < 1e-15);

        let sg = EntanglementSpec::stern_gerlach(c(0.6, 0.0), c(0.8, 0.0)).unwrap();
        let probs = sg.outcome_probabilities(&sg.entangle().unwrap()).unwrap();
        assert!((probs[0] - 0.36).abs() < 1e-15 && (probs[1] - 0.64).abs() < 1e-15);
        assert_eq!(sg.eigenvalues(), &[0.5, -0.5]);

        assert!(matches!(
            stern_gerlach(c(0.6, 0.0), c(0.6, 0.0)),
            Err(CollapseError::InvalidSpec(_))
        ));
    }

    #[test]
    fn sampling_examples() {
        let s = spec(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let psi = s.entangle().unwrap();
        let counts = s.sample_outcomes(&psi, 1000, 7).unwrap();
        assert_eq!(counts.counts, vec![1000, 0]);

        let h = FRAC_1_SQRT_2;
        let s = spec(&[c(h, 0.0), c(h, 0.0)]);
        let psi = s.entangle().unwrap();
        let shots = 100_000;
        let a = s.sample_outcomes(&psi, shots, 42).unwrap();
        let b = s.sample_outcomes(&psi, shots, 42).unwrap();
        assert_eq!(a, b);
        let m = a.frequencies()[0];
        assert!((m - 0.5).abs() <= 4.0 * (0.25f64 / shots as f64).sqrt());
        assert_eq!(a.counts.iter().sum::<u64>(), shots);

        assert_eq!(s.sample_outcomes(&psi, 0, 1), Err(CollapseError::NoShots));
    }
}
