//! Physical objects of the estimation protocol: probe states, Hamiltonian
//! generators and measurement bases, plus the amplitude decomposition
//! ⟨k|ψ_θ⟩ = r_k e^{iφ_k} together with its θ-derivatives.

use crate::linalg::{
    gram_check, hermitian_eig, ComplexMatrix, ComplexVector, LinalgError, SpectralDecomposition,
    C64,
};
use thiserror::Error;

/// Amplitudes below this are treated as exact zeros for phase purposes.
pub const EPS_AMP: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state norm {norm} is not 1 within 1e-10")]
    NotNormalized { norm: f64 },
    #[error("basis is not orthonormal: gram deviation {dev:.3e}")]
    NotOrthonormal { dev: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Normalized probe state |ψ⟩.
#[derive(Debug, Clone)]
pub struct PureState {
    vec: ComplexVector,
}

impl PureState {
    pub fn new(vec: ComplexVector) -> Result<Self, ModelError> {
        let norm = vec.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(ModelError::NotNormalized { norm });
        }
        Ok(Self { vec })
    }

    /// Normalize and wrap; fails only on the zero vector.
    pub fn normalized(vec: ComplexVector) -> Result<Self, ModelError> {
        let norm = vec.norm();
        if norm < 1e-14 {
            return Err(ModelError::NotNormalized { norm });
        }
        Ok(Self { vec: vec.normalized() })
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        Self { vec: ComplexVector::basis_state(dim, index) }
    }

    pub fn dim(&self) -> usize {
        self.vec.dim()
    }

    pub fn vec(&self) -> &ComplexVector {
        &self.vec
    }

    pub fn overlap(&self, other: &Self) -> C64 {
        self.vec.dot(&other.vec)
    }
}

/// Generator of the parameter-imprinting unitary (ħ = 1).
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    matrix: ComplexMatrix,
    spectrum: SpectralDecomposition,
}

impl Hamiltonian {
    pub fn new(matrix: ComplexMatrix) -> Result<Self, ModelError> {
        let spectrum = hermitian_eig(&matrix)?;
        Ok(Self { matrix, spectrum })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    /// λ_max − λ_min, the seminorm ‖Ĥ‖.
    pub fn seminorm(&self) -> f64 {
        let ev = self.spectrum.eigenvalues();
        ev[ev.len() - 1] - ev[0]
    }

    pub fn expectation(&self, psi: &PureState) -> f64 {
        self.matrix.expectation(psi.vec()).re
    }

    /// ⟨ψ|Ĥ²|ψ⟩, computed as ‖Ĥψ‖².
    pub fn second_moment(&self, psi: &PureState) -> f64 {
        let hv = self.matrix.mul_vec(psi.vec());
        hv.dot(&hv).re
    }

    pub fn unitary(&self, theta: f64) -> ComplexMatrix {
        // exp(-i H theta) through the cached spectrum
        self.spectrum.map(|lambda| C64::new(0.0, -lambda * theta).exp())
    }
}

/// Orthonormal, complete projective measurement {|k⟩⟨k|}.
#[derive(Debug, Clone)]
pub struct MeasurementBasis {
    kets: Vec<ComplexVector>,
    labels: Vec<String>,
}

impl MeasurementBasis {
    pub fn new(kets: Vec<ComplexVector>) -> Result<Self, ModelError> {
        let dim = kets[0].dim();
        if kets.len() != dim {
            return Err(ModelError::DimensionMismatch { expected: dim, got: kets.len() });
        }
        let dev = gram_check(&kets)?;
        if dev > 1e-9 {
            return Err(ModelError::NotOrthonormal { dev });
        }
        let labels = (0..dim).map(|k| format!("k{k}")).collect();
        Ok(Self { kets, labels })
    }

    pub fn with_labels(kets: Vec<ComplexVector>, labels: Vec<String>) -> Result<Self, ModelError> {
        let mut b = Self::new(kets)?;
        if labels.len() != b.kets.len() {
            return Err(ModelError::DimensionMismatch { expected: b.kets.len(), got: labels.len() });
        }
        b.labels = labels;
        Ok(b)
    }

    /// Computational basis {|0⟩, ..., |d−1⟩}.
    pub fn computational(dim: usize) -> Self {
        let kets = (0..dim).map(|k| ComplexVector::basis_state(dim, k)).collect();
        Self::new(kets).expect("computational basis is orthonormal")
    }

    /// Eigenbasis of a Hamiltonian, in ascending-eigenvalue order.
    pub fn eigenbasis(h: &Hamiltonian) -> Self {
        Self::new(h.spectrum().eigenvectors().to_vec()).expect("eigenbasis is orthonormal")
    }

    pub fn dim(&self) -> usize {
        self.kets.len()
    }

    pub fn kets(&self) -> &[ComplexVector] {
        &self.kets
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Matrix whose columns are the kets.
    pub fn as_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_columns(&self.kets)
    }
}

/// One outcome row of an [`AmplitudeTrack`].
#[derive(Debug, Clone, Copy)]
pub struct OutcomeTrack {
    /// ⟨k|ψ_θ⟩
    pub a: C64,
    /// amplitude modulus r_k
    pub r: f64,
    /// phase φ_k in [0, 2π); 0 by convention when r_k < ε_amp
    pub phi: f64,
    /// probability p_k = r_k²
    pub p: f64,
    /// radial velocity ṙ_k
    pub r_dot: f64,
    /// transverse velocity r_k φ̇_k
    pub rphi_dot: f64,
    /// φ̇_k itself, only defined when r_k ≥ ε_amp
    pub phi_dot: Option<f64>,
    /// velocity angle τ_k = atan2(r_k φ̇_k, ṙ_k)
    pub tau: f64,
}

/// Amplitude decomposition of |ψ_θ⟩ in a measurement basis, with
/// θ-derivatives of every outcome.
#[derive(Debug, Clone)]
pub struct AmplitudeTrack {
    pub outcomes: Vec<OutcomeTrack>,
    pub theta: f64,
}

impl AmplitudeTrack {
    pub fn dim(&self) -> usize {
        self.outcomes.len()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.p).collect()
    }
}

fn check_dims(h: &Hamiltonian, psi0: &PureState) -> Result<(), ModelError> {
    if h.dim() != psi0.dim() {
        return Err(ModelError::DimensionMismatch { expected: h.dim(), got: psi0.dim() });
    }
    Ok(())
}

/// |ψ_θ⟩ = e^{−iĤθ}|ψ₀⟩.
pub fn evolve(h: &Hamiltonian, psi0: &PureState, theta: f64) -> Result<PureState, ModelError> {
    check_dims(h, psi0)?;
    let v = h.unitary(theta).mul_vec(psi0.vec());
    // renormalize away the eigensolver's last-digit drift
    PureState::normalized(v)
}

/// Decompose |ψ_θ⟩ into the basis and differentiate each amplitude in θ.
///
/// Derivatives come from ⟨k|ψ̇⟩ = −i⟨k|Ĥ|ψ_θ⟩ rather than finite
/// differences, so there are no branch-cut artifacts in φ.
pub fn amplitude_track(
    h: &Hamiltonian,
    psi0: &PureState,
    basis: &MeasurementBasis,
    theta: f64,
) -> Result<AmplitudeTrack, ModelError> {
    check_dims(h, psi0)?;
    if basis.dim() != h.dim() {
        return Err(ModelError::DimensionMismatch { expected: h.dim(), got: basis.dim() });
    }
    let psi = evolve(h, psi0, theta)?;
    let h_psi = h.matrix().mul_vec(psi.vec());
    let outcomes = basis
        .kets()
        .iter()
        .map(|ket| {
            let a = ket.dot(psi.vec());
            let a_dot = ket.dot(&h_psi) * C64::new(0.0, -1.0); // ⟨k|ψ̇⟩
            let r = a.norm();
            if r < EPS_AMP {
                // phase undefined at a zero: put all velocity in the radial
                // component so the Fisher limit 4|ȧ|² is reproduced
                OutcomeTrack {
                    a,
                    r,
                    phi: 0.0,
                    p: r * r,
                    r_dot: a_dot.norm(),
                    rphi_dot: 0.0,
                    phi_dot: None,
                    tau: 0.0,
                }
            } else {
                let phi = a.arg().rem_euclid(std::f64::consts::TAU);
                let rotated = a_dot * (a.conj() / C64::new(r, 0.0)); // e^{-iφ}⟨k|ψ̇⟩
                let r_dot = rotated.re;
                let rphi_dot = rotated.im;
                OutcomeTrack {
                    a,
                    r,
                    phi,
                    p: r * r,
                    r_dot,
                    rphi_dot,
                    phi_dot: Some(rphi_dot / r),
                    tau: rphi_dot.atan2(r_dot),
                }
            }
        })
        .collect();
    Ok(AmplitudeTrack { outcomes, theta })
}

/// H̃ = Ĥ − ⟨Ĥ⟩𝕀, the re-zeroed Hamiltonian.
pub fn rezero(h: &Hamiltonian, psi: &PureState) -> Result<Hamiltonian, ModelError> {
    check_dims(h, psi)?;
    let mean = h.expectation(psi);
    let shifted = h
        .matrix()
        .sub(&ComplexMatrix::identity(h.dim()).scale(C64::new(mean, 0.0)));
    Hamiltonian::new(shifted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_z, random_hermitian};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    pub(crate) fn plus_state() -> PureState {
        let s = 1.0 / 2.0_f64.sqrt();
        PureState::new(ComplexVector::from_real(&[s, s])).unwrap()
    }

    pub(crate) fn sigma_x_basis() -> MeasurementBasis {
        let s = 1.0 / 2.0_f64.sqrt();
        MeasurementBasis::new(vec![
            ComplexVector::from_real(&[s, s]),
            ComplexVector::from_real(&[s, -s]),
        ])
        .unwrap()
    }

    pub(crate) fn random_state(dim: usize, seed: u64) -> PureState {
        // evolve a basis state by a random Hermitian generator
        let h = Hamiltonian::new(random_hermitian(dim, seed)).unwrap();
        evolve(&h, &PureState::basis_state(dim, 0), 1.3).unwrap()
    }

    #[test]
    fn evolve_at_zero_is_identity() {
        let h = Hamiltonian::new(pauli_z()).unwrap();
        let psi = plus_state();
        let out = evolve(&h, &psi, 0.0).unwrap();
        assert_abs_diff_eq!(out.overlap(&psi).norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eigenstate_only_gains_phase() {
        let h = Hamiltonian::new(pauli_z()).unwrap();
        let zero = PureState::basis_state(2, 0);
        for theta in [0.1, 0.7, 2.9] {
            let out = evolve(&h, &zero, theta).unwrap();
            assert_abs_diff_eq!(out.vec().entries()[0].norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn qubit_probabilities_in_x_basis() {
        // p_+ = cos^2 theta, p_- = sin^2 theta
        let h = Hamiltonian::new(pauli_z()).unwrap();
        let theta = 0.437;
        let track = amplitude_track(&h, &plus_state(), &sigma_x_basis(), theta).unwrap();
        assert_abs_diff_eq!(track.outcomes[0].p, theta.cos().powi(2), epsilon = 1e-12);
        assert_abs_diff_eq!(track.outcomes[1].p, theta.sin().powi(2), epsilon = 1e-12);
    }

    #[test]
    fn z_basis_velocities() {
        let h = Hamiltonian::new(pauli_z()).unwrap();
        let basis = MeasurementBasis::computational(2);
        let track = amplitude_track(&h, &plus_state(), &basis, 0.9).unwrap();
        for o in &track.outcomes {
            assert_abs_diff_eq!(o.r_dot, 0.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(track.outcomes[0].phi_dot.unwrap(), -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(track.outcomes[1].phi_dot.unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(track.outcomes[0].tau.abs(), std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn x_basis_velocities_at_0_3() {
        let h = Hamiltonian::new(pauli_z()).unwrap();
        let track = amplitude_track(&h, &plus_state(), &sigma_x_basis(), 0.3).unwrap();
        assert_abs_diff_eq!(track.outcomes[0].r_dot, -(0.3_f64.sin()), epsilon = 1e-12);
        assert_abs_diff_eq!(track.outcomes[1].r_dot, 0.3_f64.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(track.outcomes[0].rphi_dot, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(track.outcomes[1].rphi_dot, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn eigenstate_probe_has_zero_radial_velocity() {
        let h = Hamiltonian::new(random_hermitian(4, 11)).unwrap();
        let eig = PureState::new(h.spectrum().eigenvectors()[2].clone()).unwrap();
        let basis = MeasurementBasis::new(
            (0..4).map(|k| ComplexVector::basis_state(4, k)).collect(),
        )
        .unwrap();
        let track = amplitude_track(&h, &eig, &basis, 0.77).unwrap();
        for o in &track.outcomes {
            if o.r >= EPS_AMP {
                assert_abs_diff_eq!(o.r_dot, 0.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn speed_identity_and_normalization_conservation() {
        for seed in 0..30 {
            let dim = 2 + (seed as usize % 5);
            let h = Hamiltonian::new(random_hermitian(dim, seed)).unwrap();
            let psi0 = random_state(dim, seed + 500);
            let basis = MeasurementBasis::eigenbasis(
                &Hamiltonian::new(random_hermitian(dim, seed + 900)).unwrap(),
            );
            let track = amplitude_track(&h, &psi0, &basis, 0.41).unwrap();
            let psi = evolve(&h, &psi0, 0.41).unwrap();
            let speed: f64 = track
                .outcomes
                .iter()
                .map(|o| o.r_dot * o.r_dot + o.rphi_dot * o.rphi_dot)
                .sum();
            assert_abs_diff_eq!(speed, h.second_moment(&psi), epsilon = 1e-9);
            let norm_dot: f64 = track.outcomes.iter().map(|o| 2.0 * o.r * o.r_dot).sum();
            assert_abs_diff_eq!(norm_dot, 0.0, epsilon = 1e-9);
            let p_sum: f64 = track.outcomes.iter().map(|o| o.p).sum();
            assert_abs_diff_eq!(p_sum, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn mean_energy_is_minus_mean_phase_velocity() {
        // Eq-level identity <H> = -sum_k p_k phidot_k for every basis and theta
        for seed in 0..20 {
            let dim = 3 + (seed as usize % 3);
            let h = Hamiltonian::new(random_hermitian(dim, 2 * seed + 1)).unwrap();
            let psi0 = random_state(dim, seed + 100);
            let basis = MeasurementBasis::eigenbasis(
                &Hamiltonian::new(random_hermitian(dim, seed + 300)).unwrap(),
            );
            let track = amplitude_track(&h, &psi0, &basis, 1.1).unwrap();
            let mean_phase_vel: f64 = track
                .outcomes
                .iter()
                .map(|o| o.r * o.rphi_dot) // p_k * phidot_k
                .sum();
            assert_abs_diff_eq!(h.expectation(&psi0), -mean_phase_vel, epsilon = 1e-9);
        }
    }

    #[test]
    fn velocities_match_finite_differences() {
        let dim = 4;
        let h = Hamiltonian::new(random_hermitian(dim, 42)).unwrap();
        let psi0 = random_state(dim, 7);
        let basis = MeasurementBasis::eigenbasis(
            &Hamiltonian::new(random_hermitian(dim, 77)).unwrap(),
        );
        let theta = 0.63;
        let track = amplitude_track(&h, &psi0, &basis, theta).unwrap();
        if track.outcomes.iter().any(|o| o.p <= 1e-3) {
            return; // oracle only valid away from amplitude zeros
        }
        let step = 1e-5;
        let lo = amplitude_track(&h, &psi0, &basis, theta - step).unwrap();
        let hi = amplitude_track(&h, &psi0, &basis, theta + step).unwrap();
        for k in 0..dim {
            let r_dot_fd = (hi.outcomes[k].r - lo.outcomes[k].r) / (2.0 * step);
            assert_abs_diff_eq!(track.outcomes[k].r_dot, r_dot_fd, epsilon = 1e-6);
            // difference phases through the amplitude ratio to avoid wrapping
            let dphi = (hi.outcomes[k].a / lo.outcomes[k].a).arg();
            let phi_dot_fd = dphi / (2.0 * step);
            assert_abs_diff_eq!(
                track.outcomes[k].phi_dot.unwrap(),
                phi_dot_fd,
                epsilon = 1e-5
            );
        }
    }

    #[test]
    fn rezero_examples() {
        let h = Hamiltonian::new(pauli_z()).unwrap();
        let shifted = rezero(&h, &plus_state()).unwrap();
        assert!(shifted.matrix().max_abs_diff(h.matrix()) < 1e-12);
        let shifted0 = rezero(&h, &PureState::basis_state(2, 0)).unwrap();
        assert!(shifted0.matrix().max_abs_diff(&ComplexMatrix::diagonal(&[0.0, -2.0])) < 1e-12);
        for seed in 0..10 {
            let h4 = Hamiltonian::new(random_hermitian(4, seed + 60)).unwrap();
            let psi = random_state(4, seed + 80);
            let r = rezero(&h4, &psi).unwrap();
            assert_abs_diff_eq!(r.expectation(&psi), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn rezero_evolution_matches_up_to_global_phase() {
        let h = Hamiltonian::new(random_hermitian(3, 5)).unwrap();
        let psi = random_state(3, 6);
        let r = rezero(&h, &psi).unwrap();
        let a = evolve(&h, &psi, 0.83).unwrap();
        let b = evolve(&r, &psi, 0.83).unwrap();
        assert_abs_diff_eq!(a.overlap(&b).norm(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn basis_validation() {
        let s = 1.0 / 2.0_f64.sqrt();
        let bad = MeasurementBasis::new(vec![
            ComplexVector::from_real(&[s, s]),
            ComplexVector::from_real(&[s, s]),
        ]);
        assert!(matches!(bad, Err(ModelError::NotOrthonormal { .. })));
        let wrong_count = MeasurementBasis::new(vec![ComplexVector::from_real(&[1.0, 0.0])]);
        assert!(matches!(wrong_count, Err(ModelError::DimensionMismatch { .. })));
        let unnorm = PureState::new(ComplexVector::from_real(&[1.0, 1.0]));
        assert!(matches!(unnorm, Err(ModelError::NotNormalized { .. })));
        let _ = c(0.0, 0.0);
    }

    #[test]
    fn phase_convention_at_zero_amplitude() {
        // sigma_x basis at theta = 0: p_- = 0 exactly, all velocity radial
        let h = Hamiltonian::new(pauli_z()).unwrap();
        let track = amplitude_track(&h, &plus_state(), &sigma_x_basis(), 0.0).unwrap();
        let minus = &track.outcomes[1];
        assert!(minus.r < EPS_AMP);
        assert_abs_diff_eq!(minus.phi, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(minus.tau, 0.0, epsilon = 1e-15);
        assert!(minus.phi_dot.is_none());
        assert_abs_diff_eq!(minus.r_dot, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(minus.rphi_dot, 0.0, epsilon = 1e-15);
        let _ = pauli_x();
    }
}

#[cfg(test)]
pub(crate) use tests::{plus_state, random_state, sigma_x_basis};
