//! Classical Fisher information for a projective measurement of a
//! unitarily evolved pure state, in its three equivalent forms, together
//! with the F̂_θ/Φ̂_θ operators, the information complement K and the
//! variance/seminorm bound chain.

use crate::linalg::{ComplexMatrix, C64};
use crate::model::{
    amplitude_track, evolve, AmplitudeTrack, Hamiltonian, MeasurementBasis, ModelError, PureState,
};
use thiserror::Error;

/// Probabilities below this switch the direct form to its 4ṙ² limit term.
pub const EPS_P: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum FisherError {
    #[error("operator-form Fisher information has imaginary part {imag:.3e}")]
    NonRealResult { imag: f64 },
    #[error(
        "Fisher computations disagree: velocity {velocity}, direct {direct}, operator {operator}"
    )]
    ConsistencyFailure { velocity: f64, direct: f64, operator: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One-point summary of an estimation instance.
#[derive(Debug, Clone, Copy)]
pub struct FisherReport {
    /// classical Fisher information J(θ)
    pub j: f64,
    /// information complement K(θ) = Σ (r_k φ̇_k)²
    pub k: f64,
    /// ⟨Ĥ⟩
    pub h_mean: f64,
    /// ⟨Ĥ²⟩
    pub h2_mean: f64,
    /// Δ²Ĥ
    pub variance: f64,
    /// ‖Ĥ‖² = (λ_max − λ_min)²
    pub seminorm_sq: f64,
    pub theta: f64,
}

/// J from Eq. (1): Σ ṗ_k²/p_k, with the 4ṙ² limit at vanishing p_k.
pub fn fisher_direct(track: &AmplitudeTrack) -> f64 {
    track
        .outcomes
        .iter()
        .map(|o| {
            if o.p > EPS_P {
                let p_dot = 2.0 * o.r * o.r_dot;
                p_dot * p_dot / o.p
            } else {
                4.0 * o.r_dot * o.r_dot
            }
        })
        .sum()
}

/// J from Eq. (2): 4 Σ ṙ_k². Canonical form — no division by small p_k.
pub fn fisher_velocity(track: &AmplitudeTrack) -> f64 {
    4.0 * track.outcomes.iter().map(|o| o.r_dot * o.r_dot).sum::<f64>()
}

/// F̂_θ = 4 Σ cos²τ_k |k⟩⟨k| (Eq. 5), diagonal in the measurement basis.
pub fn f_operator(track: &AmplitudeTrack, basis: &MeasurementBasis) -> ComplexMatrix {
    let dim = basis.dim();
    let mut out = ComplexMatrix::zeros(dim);
    for (o, ket) in track.outcomes.iter().zip(basis.kets()) {
        let w = 4.0 * o.tau.cos().powi(2);
        let proj = ComplexMatrix::from_fn(dim, |i, j| {
            ket.entries()[i] * ket.entries()[j].conj() * C64::new(w, 0.0)
        });
        out = out.add(&proj);
    }
    out
}

/// J from Eq. (6): ⟨ψ_θ|Ĥ F̂_θ Ĥ|ψ_θ⟩.
pub fn fisher_operator_form(
    h: &Hamiltonian,
    psi_theta: &PureState,
    fop: &ComplexMatrix,
) -> Result<f64, FisherError> {
    let hv = h.matrix().mul_vec(psi_theta.vec());
    let val = hv.dot(&fop.mul_vec(&hv));
    if val.im.abs() > 1e-8 {
        return Err(FisherError::NonRealResult { imag: val.im });
    }
    Ok(val.re)
}

/// Φ̂_θ = e^{iĤθ} F̂_θ e^{−iĤθ}, the Heisenberg-picture Fisher operator.
pub fn phi_operator(h: &Hamiltonian, fop: &ComplexMatrix, theta: f64) -> ComplexMatrix {
    let u = h.unitary(theta); // e^{-iH theta}
    u.adjoint().mul(fop).mul(&u)
}

/// Information complement K = Σ (r_k φ̇_k)² (Eq. 8).
pub fn complement(track: &AmplitudeTrack) -> f64 {
    track.outcomes.iter().map(|o| o.rphi_dot * o.rphi_dot).sum()
}

/// Full report at one θ. The three J forms are cross-checked internally;
/// disagreement beyond 1e-8 indicates a numerical bug, not bad input.
pub fn report(
    h: &Hamiltonian,
    psi0: &PureState,
    basis: &MeasurementBasis,
    theta: f64,
) -> Result<FisherReport, FisherError> {
    let track = amplitude_track(h, psi0, basis, theta)?;
    let psi_theta = evolve(h, psi0, theta)?;
    let j_vel = fisher_velocity(&track);
    let j_dir = fisher_direct(&track);
    let fop = f_operator(&track, basis);
    let j_op = fisher_operator_form(h, &psi_theta, &fop)?;
    let scale = 1.0_f64.max(j_vel.abs());
    if (j_vel - j_dir).abs() > 1e-8 * scale || (j_vel - j_op).abs() > 1e-8 * scale {
        return Err(FisherError::ConsistencyFailure {
            velocity: j_vel,
            direct: j_dir,
            operator: j_op,
        });
    }
    let h_mean = h.expectation(&psi_theta);
    let h2_mean = h.second_moment(&psi_theta);
    Ok(FisherReport {
        j: j_vel,
        k: complement(&track),
        h_mean,
        h2_mean,
        variance: h2_mean - h_mean * h_mean,
        seminorm_sq: h.seminorm().powi(2),
        theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_z, random_hermitian, ComplexVector};
    use crate::model::{plus_state, random_state, sigma_x_basis};
    use approx::assert_abs_diff_eq;

    fn qubit_z() -> Hamiltonian {
        Hamiltonian::new(pauli_z()).unwrap()
    }

    fn random_instance(dim: usize, seed: u64) -> (Hamiltonian, PureState, MeasurementBasis) {
        let h = Hamiltonian::new(random_hermitian(dim, seed)).unwrap();
        let psi0 = random_state(dim, seed + 1000);
        let basis = MeasurementBasis::eigenbasis(
            &Hamiltonian::new(random_hermitian(dim, seed + 2000)).unwrap(),
        );
        (h, psi0, basis)
    }

    #[test]
    fn qubit_x_basis_gives_four_everywhere() {
        let h = qubit_z();
        for theta in [0.0, 0.3, 1.2, 2.8] {
            let track = amplitude_track(&h, &plus_state(), &sigma_x_basis(), theta).unwrap();
            assert_abs_diff_eq!(fisher_direct(&track), 4.0, epsilon = 1e-9);
            assert_abs_diff_eq!(fisher_velocity(&track), 4.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn eigenstate_probe_gives_zero() {
        let h = qubit_z();
        let basis = sigma_x_basis();
        let track =
            amplitude_track(&h, &PureState::basis_state(2, 0), &basis, 0.5).unwrap();
        assert_abs_diff_eq!(fisher_velocity(&track), 0.0, epsilon = 1e-12);
        let r = report(&h, &PureState::basis_state(2, 0), &basis, 0.5).unwrap();
        assert_abs_diff_eq!(r.j, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.variance, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn qubit_z_basis_gives_zero_and_k_one() {
        let h = qubit_z();
        let basis = MeasurementBasis::computational(2);
        let track = amplitude_track(&h, &plus_state(), &basis, 0.9).unwrap();
        assert_abs_diff_eq!(fisher_direct(&track), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(complement(&track), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn x_basis_complement_is_zero() {
        let h = qubit_z();
        let track = amplitude_track(&h, &plus_state(), &sigma_x_basis(), 0.4).unwrap();
        assert_abs_diff_eq!(complement(&track), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn eigenstate_complement_is_lambda_squared() {
        let h = Hamiltonian::new(random_hermitian(4, 17)).unwrap();
        let lambda = h.spectrum().eigenvalues()[1];
        let psi = PureState::new(h.spectrum().eigenvectors()[1].clone()).unwrap();
        let basis = MeasurementBasis::computational(4);
        let track = amplitude_track(&h, &psi, &basis, 0.6).unwrap();
        assert_abs_diff_eq!(complement(&track), lambda * lambda, epsilon = 1e-9);
    }

    #[test]
    fn f_operator_cases() {
        let h = qubit_z();
        let zbasis = MeasurementBasis::computational(2);
        let track = amplitude_track(&h, &plus_state(), &zbasis, 0.7).unwrap();
        assert!(f_operator(&track, &zbasis).max_abs() < 1e-12);

        let xbasis = sigma_x_basis();
        let track = amplitude_track(&h, &plus_state(), &xbasis, 0.3).unwrap();
        let fop = f_operator(&track, &xbasis);
        assert!(fop.max_abs_diff(&ComplexMatrix::identity(2).scale(C64::new(4.0, 0.0))) < 1e-9);
    }

    #[test]
    fn f_operator_is_diagonal_in_basis() {
        let (h, psi0, basis) = random_instance(5, 3);
        let track = amplitude_track(&h, &psi0, &basis, 0.8).unwrap();
        let fop = f_operator(&track, &basis);
        assert!(fop.hermiticity_deviation() < 1e-10);
        // off-diagonal in basis coordinates must vanish
        let b = basis.as_matrix();
        let fb = b.adjoint().mul(&fop).mul(&b);
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert!(fb.get(i, j).norm() < 1e-10);
                }
                if i == j {
                    let d = fb.get(i, i).re;
                    assert!((-1e-10..=4.0 + 1e-10).contains(&d));
                }
            }
        }
    }

    #[test]
    fn operator_form_matches_velocity_form() {
        for seed in 0..40 {
            let dim = 2 + (seed as usize % 7);
            let (h, psi0, basis) = random_instance(dim, 5 * seed + 2);
            let theta = 0.1 + 0.05 * seed as f64;
            let track = amplitude_track(&h, &psi0, &basis, theta).unwrap();
            let psi_theta = evolve(&h, &psi0, theta).unwrap();
            let fop = f_operator(&track, &basis);
            let j_op = fisher_operator_form(&h, &psi_theta, &fop).unwrap();
            let j_vel = fisher_velocity(&track);
            let j_dir = fisher_direct(&track);
            assert_abs_diff_eq!(j_op, j_vel, epsilon = 1e-8 * (1.0 + j_vel));
            assert_abs_diff_eq!(j_dir, j_vel, epsilon = 1e-8 * (1.0 + j_vel));
        }
    }

    #[test]
    fn phi_operator_pictures_agree() {
        let (h, psi0, basis) = random_instance(4, 21);
        let theta = 0.53;
        let track = amplitude_track(&h, &psi0, &basis, theta).unwrap();
        let psi_theta = evolve(&h, &psi0, theta).unwrap();
        let fop = f_operator(&track, &basis);
        assert!(phi_operator(&h, &fop, 0.0).max_abs_diff(&fop) < 1e-10);
        let phi = phi_operator(&h, &fop, theta);
        let schr = fisher_operator_form(&h, &psi_theta, &fop).unwrap();
        let heis = fisher_operator_form(&h, &psi0, &phi).unwrap();
        assert_abs_diff_eq!(schr, heis, epsilon = 1e-9 * (1.0 + schr));
    }

    #[test]
    fn phi_operator_commuting_case_unchanged() {
        let h = qubit_z();
        let fop = ComplexMatrix::diagonal(&[3.0, 1.0]);
        for theta in [0.2, 1.7] {
            assert!(phi_operator(&h, &fop, theta).max_abs_diff(&fop) < 1e-12);
        }
    }

    #[test]
    fn report_invariants_random() {
        for seed in 0..200 {
            let dim = 2 + (seed as usize % 5);
            let (h, psi0, basis) = random_instance(dim, 7 * seed + 3);
            let r = report(&h, &psi0, &basis, 0.37).unwrap();
            assert!(r.j >= -1e-12);
            assert!(r.k >= -1e-12);
            assert_abs_diff_eq!(r.j / 4.0 + r.k, r.h2_mean, epsilon = 1e-9 * (1.0 + r.h2_mean.abs()));
            assert!(r.k >= r.h_mean * r.h_mean - 1e-9);
            assert!(r.j <= 4.0 * r.variance + 1e-9);
            assert!(4.0 * r.variance <= r.seminorm_sq + 1e-9);
        }
    }

    #[test]
    fn report_noon_qubit_saturates_chain() {
        let h = qubit_z();
        let r = report(&h, &plus_state(), &sigma_x_basis(), 0.25).unwrap();
        assert_abs_diff_eq!(r.j, 4.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.variance, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.seminorm_sq, 4.0, epsilon = 1e-10);
    }

    #[test]
    fn finite_difference_oracle() {
        let (h, psi0, basis) = random_instance(4, 99);
        let theta = 0.71;
        let track = amplitude_track(&h, &psi0, &basis, theta).unwrap();
        if track.outcomes.iter().any(|o| o.p < 1e-3) {
            return;
        }
        let step = 1e-5;
        let lo = amplitude_track(&h, &psi0, &basis, theta - step).unwrap();
        let hi = amplitude_track(&h, &psi0, &basis, theta + step).unwrap();
        let mut j_fd = 0.0;
        for k in 0..4 {
            let p_dot = (hi.outcomes[k].p - lo.outcomes[k].p) / (2.0 * step);
            j_fd += p_dot * p_dot / track.outcomes[k].p;
        }
        let j = fisher_velocity(&track);
        assert!((j - j_fd).abs() <= 1e-5 * j.max(1.0));
    }

    #[test]
    fn basis_non_covariance() {
        // conjugating the basis and recomputing F differs from conjugating F
        let (h, psi0, basis) = random_instance(3, 55);
        let theta = 0.42;
        let track = amplitude_track(&h, &psi0, &basis, theta).unwrap();
        let fop = f_operator(&track, &basis);
        let u = crate::linalg::unitary_exp(&random_hermitian(3, 77), 0.9).unwrap();
        let rotated_kets: Vec<ComplexVector> =
            basis.kets().iter().map(|k| u.mul_vec(k)).collect();
        let rotated_basis = MeasurementBasis::new(rotated_kets).unwrap();
        let track2 = amplitude_track(&h, &psi0, &rotated_basis, theta).unwrap();
        let f_recomputed = f_operator(&track2, &rotated_basis);
        let f_conjugated = u.mul(&fop).mul(&u.adjoint());
        assert!(f_recomputed.max_abs_diff(&f_conjugated) > 1e-3);
    }
}
