//! The information complement K(θ, ω) under measurement drift
//! |k⟩ ↦ e^{−iĥω}|k⟩, its Hessian at the global optimum, the analytic
//! second-derivative formulas, and the drift-orthogonality condition.

use crate::linalg::{unitary_exp, ComplexMatrix, C64};
use crate::model::{
    evolve, Hamiltonian, MeasurementBasis, ModelError, PureState, EPS_AMP,
};
use crate::optimal::{check_parameter_independence, CriterionVerdict, OptimalError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StabilityError {
    #[error("finite-difference step {step:.3e} underflows the 1e-9 floor")]
    StepUnderflow { step: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Optimal(#[from] OptimalError),
}

/// Hermitian generator ĥ of a measurement-basis drift.
#[derive(Debug, Clone)]
pub struct DriftModel {
    pub generator: ComplexMatrix,
    pub description: String,
}

impl DriftModel {
    pub fn new(generator: ComplexMatrix, description: impl Into<String>) -> Self {
        assert!(
            generator.is_hermitian(1e-10),
            "drift generator must be Hermitian"
        );
        Self { generator, description: description.into() }
    }
}

/// Second-derivative summary of K(θ, ω) at one point.
#[derive(Debug, Clone, Copy)]
pub struct HessianReport {
    pub d2_theta: f64,
    pub d2_omega: f64,
    pub d2_mixed: f64,
    /// −2⟨Ĥ⟩ Σ_k ṗ_k φ̇'_k, evaluated verbatim
    pub analytic_mixed: f64,
    /// 2⟨(φ̇')²⟩_c − 2⟨Ĥ⟩[⟨φ̇''⟩_c + 2Σ_k p'_k φ̇'_k], with the
    /// zero-amplitude limit terms of the amplitude convention
    pub analytic_omega: f64,
    pub grad_theta: f64,
    pub grad_omega: f64,
    pub at_theta: f64,
    pub at_omega: f64,
    /// true only when parameter-independent optimality is certified, so the
    /// gm-only identities may be read off the report
    pub gm_certified: bool,
}

/// Applies e^{−iĥω} to every basis ket.
pub fn drifted_basis(
    basis: &MeasurementBasis,
    drift: &DriftModel,
    omega: f64,
) -> Result<MeasurementBasis, StabilityError> {
    if drift.generator.dim() != basis.dim() {
        return Err(StabilityError::DimensionMismatch {
            expected: basis.dim(),
            got: drift.generator.dim(),
        });
    }
    let u = unitary_exp(&drift.generator, omega).map_err(ModelError::from)?;
    let kets = basis.kets().iter().map(|k| u.mul_vec(k)).collect();
    Ok(MeasurementBasis::new(kets)?)
}

/// Per-outcome drifted amplitude a_k = ⟨k|e^{iĥω}|ψ_θ⟩ and its partials in
/// θ and ω, all evaluated from operator overlaps (no finite differences).
struct DriftedAmplitudes {
    /// per outcome: (a, a_θ, a_ω, a_ωθ, a_ωω, a_ωωθ)
    rows: Vec<(C64, C64, C64, C64, C64, C64)>,
}

fn drifted_amplitudes(
    h: &Hamiltonian,
    psi0: &PureState,
    basis: &MeasurementBasis,
    drift: &DriftModel,
    theta: f64,
    omega: f64,
) -> Result<DriftedAmplitudes, StabilityError> {
    let psi = evolve(h, psi0, theta)?;
    let hd = &drift.generator;
    // e^{ i h omega } acting to the right of the bra = e^{-i h (-omega)}
    let e = unitary_exp(hd, -omega).map_err(ModelError::from)?;
    let v0 = e.mul_vec(psi.vec());
    let v1 = e.mul_vec(&h.matrix().mul_vec(psi.vec())).scale(C64::new(0.0, -1.0));
    let i = C64::new(0.0, 1.0);
    let hv0 = hd.mul_vec(&v0);
    let hhv0 = hd.mul_vec(&hv0);
    let hv1 = hd.mul_vec(&v1);
    let hhv1 = hd.mul_vec(&hv1);
    let rows = basis
        .kets()
        .iter()
        .map(|ket| {
            (
                ket.dot(&v0),
                ket.dot(&v1),
                ket.dot(&hv0) * i,
                ket.dot(&hv1) * i,
                ket.dot(&hhv0) * (-C64::new(1.0, 0.0)),
                ket.dot(&hhv1) * (-C64::new(1.0, 0.0)),
            )
        })
        .collect();
    Ok(DriftedAmplitudes { rows })
}

/// K(θ, ω): the information complement with the drifted basis.
pub fn complement_surface(
    h: &Hamiltonian,
    psi0: &PureState,
    basis: &MeasurementBasis,
    drift: &DriftModel,
    theta: f64,
    omega: f64,
) -> Result<f64, StabilityError> {
    let amps = drifted_amplitudes(h, psi0, basis, drift, theta, omega)?;
    let mut k = 0.0;
    for (a, a_t, ..) in &amps.rows {
        let p = a.norm_sqr();
        if p >= EPS_AMP * EPS_AMP {
            // (r phi_dot)^2 = Im(conj(a) a_t)^2 / p
            let t = (a.conj() * a_t).im;
            k += t * t / p;
        }
    }
    Ok(k)
}

/// J(θ, ω): Fisher information with the drifted basis, for bookkeeping
/// checks against K (Eq. 8 continues to hold since ⟨Ĥ²⟩ is basis-free).
pub fn fisher_surface(
    h: &Hamiltonian,
    psi0: &PureState,
    basis: &MeasurementBasis,
    drift: &DriftModel,
    theta: f64,
    omega: f64,
) -> Result<f64, StabilityError> {
    let amps = drifted_amplitudes(h, psi0, basis, drift, theta, omega)?;
    let mut j = 0.0;
    for (a, a_t, ..) in &amps.rows {
        let p = a.norm_sqr();
        let r_dot_sq = if p >= EPS_AMP * EPS_AMP {
            let re = (a.conj() * a_t).re;
            re * re / p
        } else {
            a_t.norm_sqr()
        };
        j += 4.0 * r_dot_sq;
    }
    Ok(j)
}

/// 5-point central second derivative with one Richardson level.
fn second_derivative(mut f: impl FnMut(f64) -> f64, x: f64, step: f64) -> f64 {
    let stencil = |f: &mut dyn FnMut(f64) -> f64, h: f64| {
        (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h))
            / (12.0 * h * h)
    };
    let d1 = stencil(&mut f, step);
    let d2 = stencil(&mut f, step / 2.0);
    (16.0 * d2 - d1) / 15.0
}

/// 5-point central first derivative with one Richardson level.
fn first_derivative(mut f: impl FnMut(f64) -> f64, x: f64, step: f64) -> f64 {
    let stencil = |f: &mut dyn FnMut(f64) -> f64, h: f64| {
        (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
    };
    let d1 = stencil(&mut f, step);
    let d2 = stencil(&mut f, step / 2.0);
    (16.0 * d2 - d1) / 15.0
}

pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Hessian of K(θ, ω) by finite differences plus the analytic formulas.
///
/// The gm-only identities are meaningful only when `gm_certified` is set,
/// which requires parameter-independent optimality of the undrifted
/// instance.
pub fn hessian_at(
    h: &Hamiltonian,
    psi0: &PureState,
    basis: &MeasurementBasis,
    drift: &DriftModel,
    theta: f64,
    omega: f64,
) -> Result<HessianReport, StabilityError> {
    hessian_at_with_step(h, psi0, basis, drift, theta, omega, DEFAULT_FD_STEP)
}

pub fn hessian_at_with_step(
    h: &Hamiltonian,
    psi0: &PureState,
    basis: &MeasurementBasis,
    drift: &DriftModel,
    theta: f64,
    omega: f64,
    step: f64,
) -> Result<HessianReport, StabilityError> {
    if step < 1e-9 {
        return Err(StabilityError::StepUnderflow { step });
    }
    let surf = |t: f64, w: f64| {
        complement_surface(h, psi0, basis, drift, t, w)
            .expect("surface evaluation inside the stencil")
    };
    let grad_theta = first_derivative(|t| surf(t, omega), theta, step);
    let grad_omega = first_derivative(|w| surf(theta, w), omega, step);
    let d2_theta = second_derivative(|t| surf(t, omega), theta, step);
    let d2_omega = second_derivative(|w| surf(theta, w), omega, step);
    // mixed derivative from the diagonal second derivatives:
    // d2/(ds dd) with s = (theta+omega), d = (theta-omega) directions
    let diag_plus = second_derivative(|u| surf(theta + u, omega + u), 0.0, step);
    let diag_minus = second_derivative(|u| surf(theta + u, omega - u), 0.0, step);
    let d2_mixed = (diag_plus - diag_minus) / 4.0;

    // analytic formulas from the drifted amplitude partials
    let amps = drifted_amplitudes(h, psi0, basis, drift, theta, omega)?;
    let psi = evolve(h, psi0, theta)?;
    let h_mean = h.expectation(&psi);
    let mut sum_pdot_phidot_w = 0.0; // Σ ṗ_k φ̇'_k
    let mut sum_p_phidot_w_sq = 0.0; // Σ p_k (φ̇'_k)²
    let mut sum_p_phiddot_ww = 0.0; // Σ p_k φ̇''_k
    let mut sum_pw_phidot_w = 0.0; // Σ p'_k φ̇'_k
    let mut limit_terms = 0.0; // zero-amplitude contributions to ∂²K/∂ω²
    for &(a, a_t, a_w, a_wt, a_ww, a_wwt) in &amps.rows {
        let p = a.norm_sqr();
        if p >= EPS_AMP * EPS_AMP {
            let inv = C64::new(1.0, 0.0) / a;
            let ra_t = a_t * inv;
            let ra_w = a_w * inv;
            let ra_wt = a_wt * inv;
            let ra_ww = a_ww * inv;
            let ra_wwt = a_wwt * inv;
            let phidot_w = (ra_wt - ra_t * ra_w).im; // ∂ω φ̇
            let phidot_ww = (ra_wwt - ra_wt * ra_w * 2.0 - ra_t * ra_ww
                + ra_t * ra_w * ra_w * 2.0)
                .im; // ∂²ω φ̇
            let p_dot = 2.0 * (a.conj() * a_t).re;
            let p_w = 2.0 * (a.conj() * a_w).re;
            sum_pdot_phidot_w += p_dot * phidot_w;
            sum_p_phidot_w_sq += p * phidot_w * phidot_w;
            sum_p_phiddot_ww += p * phidot_ww;
            sum_pw_phidot_w += p_w * phidot_w;
        } else if a_w.norm_sqr() >= EPS_AMP * EPS_AMP {
            // amplitude zero crossed transversally in ω: the (r φ̇)² term
            // contributes 2 Im(conj(a_w) a_wt)² / |a_w|² to ∂²K/∂ω² in the
            // limit, mirroring the 4ṙ² convention of the direct Fisher form
            let t = (a_w.conj() * a_wt).im;
            limit_terms += 2.0 * t * t / a_w.norm_sqr();
        }
    }
    let analytic_mixed = -2.0 * h_mean * sum_pdot_phidot_w;
    let analytic_omega = 2.0 * sum_p_phidot_w_sq
        - 2.0 * h_mean * (sum_p_phiddot_ww + 2.0 * sum_pw_phidot_w)
        + limit_terms;

    let gm_certified = {
        let thetas = crate::optimal::default_theta_samples(h);
        check_parameter_independence(h, psi0, basis, &thetas)?.satisfied
    };

    Ok(HessianReport {
        d2_theta,
        d2_omega,
        d2_mixed,
        analytic_mixed,
        analytic_omega,
        grad_theta,
        grad_omega,
        at_theta: theta,
        at_omega: omega,
        gm_certified,
    })
}

/// Orthogonality condition Tr(H̃⁽ᴵ⁾[M̂, ĥ]) = 0 against a drift generator,
/// with M̂ the measurement observable Σ_k k·|k⟩⟨k| (0-based outcome values;
/// any injective assignment changes the trace, so this one is fixed).
pub fn orthogonality_condition(
    h_tilde_im: &ComplexMatrix,
    m_op: &ComplexMatrix,
    drift: &DriftModel,
) -> Result<CriterionVerdict, StabilityError> {
    let dim = h_tilde_im.dim();
    for other in [m_op.dim(), drift.generator.dim()] {
        if other != dim {
            return Err(StabilityError::DimensionMismatch { expected: dim, got: other });
        }
    }
    let residual = h_tilde_im
        .mul(&m_op.commutator(&drift.generator))
        .trace()
        .norm();
    Ok(CriterionVerdict {
        satisfied: residual <= 1e-9,
        residual,
        detail: "drift orthogonality Tr(H_im [M, h])".to_string(),
    })
}

/// Measurement observable Σ_k k·|k⟩⟨k| for [`orthogonality_condition`].
pub fn measurement_observable(basis: &MeasurementBasis) -> ComplexMatrix {
    let dim = basis.dim();
    let mut out = ComplexMatrix::zeros(dim);
    for (k, ket) in basis.kets().iter().enumerate() {
        let proj = ComplexMatrix::from_fn(dim, |i, j| {
            ket.entries()[i] * ket.entries()[j].conj() * C64::new(k as f64, 0.0)
        });
        out = out.add(&proj);
    }
    out
}

/// Entrywise split of a matrix already expressed in the measurement basis:
/// (real part, i·imaginary part).
pub fn entrywise_split(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let dim = m.dim();
    (
        ComplexMatrix::from_fn(dim, |i, j| C64::new(m.get(i, j).re, 0.0)),
        ComplexMatrix::from_fn(dim, |i, j| C64::new(0.0, m.get(i, j).im)),
    )
}
