//! Spin-j angular momentum operators, NOON probe states and the
//! precision-landscape scans over measurement drift angles.

use crate::fisher::report;
use crate::linalg::{hermitian_eig, unitary_exp, ComplexMatrix, ComplexVector, C64};
use crate::model::{Hamiltonian, MeasurementBasis, ModelError, PureState, EPS_AMP};
use crate::optimal::build_optimal_basis;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpinError {
    #[error("spin must be a positive half-integer, got {j}")]
    InvalidSpin { j: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Spin-j system with the standard angular momentum operators in the
/// Ĵ_z eigenbasis, ordered m = +j, ..., −j.
#[derive(Debug, Clone)]
pub struct SpinSystem {
    pub j: f64,
    pub dim: usize,
    pub jx: ComplexMatrix,
    pub jy: ComplexMatrix,
    pub jz: ComplexMatrix,
}

/// Standard ladder construction.
pub fn make_spin(j: f64) -> Result<SpinSystem, SpinError> {
    let two_j = 2.0 * j;
    if j <= 0.0 || (two_j - two_j.round()).abs() > 1e-9 {
        return Err(SpinError::InvalidSpin { j });
    }
    let dim = two_j.round() as usize + 1;
    let m_of = |i: usize| j - i as f64; // row index -> magnetic quantum number
    let mut jp = ComplexMatrix::zeros(dim); // raising operator J+
    for i in 1..dim {
        let m = m_of(i);
        let c = (j * (j + 1.0) - m * (m + 1.0)).sqrt();
        jp = jp.add(&ComplexMatrix::from_fn(dim, |r, col| {
            if r == i - 1 && col == i { C64::new(c, 0.0) } else { C64::new(0.0, 0.0) }
        }));
    }
    let jm = jp.adjoint();
    let jx = jp.add(&jm).scale(C64::new(0.5, 0.0));
    let jy = jp.sub(&jm).scale(C64::new(0.0, -0.5));
    let jz = ComplexMatrix::from_fn(dim, |r, c| {
        if r == c { C64::new(m_of(r), 0.0) } else { C64::new(0.0, 0.0) }
    });
    Ok(SpinSystem { j, dim, jx, jy, jz })
}

/// NOON probe (|j,+j⟩_y + e^{iχ}|j,−j⟩_y)/√2.
pub fn noon_state(s: &SpinSystem, chi: f64) -> PureState {
    let spec = hermitian_eig(&s.jy).expect("jy is Hermitian");
    let (_, v_min) = (spec.eigenvalues()[0], &spec.eigenvectors()[0]);
    let v_max = &spec.eigenvectors()[s.dim - 1];
    let half = C64::new(1.0 / 2.0_f64.sqrt(), 0.0);
    let phase = C64::new(0.0, chi).exp();
    PureState::normalized(v_max.add(&v_min.scale(phase)).scale(half))
        .expect("jy eigenvectors are orthonormal")
}

/// Which optimal basis Fig. 2 drifts away from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// the Ĵ_x eigenbasis (Fig. 2a)
    JxBasis,
    /// the straddled basis of Eq. (11) for Ĵ_y (Fig. 2b)
    Eq11Basis,
}

/// Fisher-information values on a (ω_y, ω_z) drift grid.
#[derive(Debug, Clone)]
pub struct LandscapeGrid {
    pub omega_y_values: Vec<f64>,
    pub omega_z_values: Vec<f64>,
    /// row-major: `j_values[iy][iz]`
    pub j_values: Vec<Vec<f64>>,
    pub j: f64,
    /// separable-particle bound 2j
    pub classical_bound: f64,
    /// Heisenberg ceiling 4j²
    pub heisenberg: f64,
    pub basis_kind: BasisKind,
    pub chi: f64,
}

fn undrifted_basis(s: &SpinSystem, kind: BasisKind) -> MeasurementBasis {
    match kind {
        BasisKind::JxBasis => {
            let hx = Hamiltonian::new(s.jx.clone()).expect("jx Hermitian");
            MeasurementBasis::eigenbasis(&hx)
        }
        BasisKind::Eq11Basis => {
            let hy = Hamiltonian::new(s.jy.clone()).expect("jy Hermitian");
            build_optimal_basis(&hy)
        }
    }
}

/// J at θ = 0 for the basis drifted by exp(iĴ_zω_z)·exp(iĴ_yω_y) (the
/// Fig. 2 rotation, note the +i sign), dynamics Ĵ_y, probe `psi0`.
///
/// `c`: columns are the ω_y-rotated basis kets adjointed, i.e. (Uy·B)†;
/// `psi`, `hpsi`: probe and Ĵ_y·probe, both pre-scaled by exp(−i m ω_z)
/// per entry to absorb the diagonal ω_z rotation.
fn row_point_j(c: &ComplexMatrix, psi_rot: &ComplexVector, dpsi_rot: &ComplexVector) -> f64 {
    let a = c.mul_vec(psi_rot);
    let d = c.mul_vec(dpsi_rot);
    let mut j = 0.0;
    for (ak, dk) in a.entries().iter().zip(d.entries()) {
        let p = ak.norm_sqr();
        if p >= EPS_AMP * EPS_AMP {
            let re = (ak.conj() * dk).re;
            j += 4.0 * re * re / p;
        } else {
            j += 4.0 * dk.norm_sqr();
        }
    }
    j
}

/// Scan J over the uniform drift grid [0, π] × [0, 2π).
pub fn landscape_scan(
    s: &SpinSystem,
    chi: f64,
    basis_kind: BasisKind,
    grid: (usize, usize),
) -> Result<LandscapeGrid, SpinError> {
    let (ny, nz) = grid;
    assert!(ny >= 2 && nz >= 2, "grid must be at least 2x2");
    let omega_y_values: Vec<f64> =
        (0..ny).map(|i| std::f64::consts::PI * i as f64 / (ny - 1) as f64).collect();
    let omega_z_values: Vec<f64> =
        (0..nz).map(|i| 2.0 * std::f64::consts::PI * i as f64 / nz as f64).collect();

    let basis = undrifted_basis(s, basis_kind);
    let b = basis.as_matrix();
    let psi0 = noon_state(s, chi);
    let hpsi = s.jy.mul_vec(psi0.vec());
    let dpsi = hpsi.scale(C64::new(0.0, -1.0)); // -i Jy psi = psi_dot at theta 0
    let m_of = |i: usize| s.j - i as f64;

    let j_values: Vec<Vec<f64>> = omega_y_values
        .par_iter()
        .map(|&wy| {
            // drifted ket: e^{i Jz wz} e^{i Jy wy} |k>; amplitudes are
            // (Uy B)^dagger applied to the diag(e^{-i m wz})-scaled state
            let uy = unitary_exp(&s.jy, -wy).expect("jy Hermitian"); // e^{+i Jy wy}
            let c = uy.mul(&b).adjoint();
            omega_z_values
                .iter()
                .map(|&wz| {
                    let scale_vec = |v: &ComplexVector| {
                        ComplexVector::new(
                            v.entries()
                                .iter()
                                .enumerate()
                                .map(|(i, z)| z * C64::new(0.0, -m_of(i) * wz).exp())
                                .collect(),
                        )
                    };
                    row_point_j(&c, &scale_vec(psi0.vec()), &scale_vec(&dpsi))
                })
                .collect()
        })
        .collect();

    Ok(LandscapeGrid {
        omega_y_values,
        omega_z_values,
        j_values,
        j: s.j,
        classical_bound: 2.0 * s.j,
        heisenberg: 4.0 * s.j * s.j,
        basis_kind,
        chi,
    })
}

/// J at a single drift point, through the full report pipeline (slow path,
/// used for cross-checks and by the CLI for spot evaluations).
pub fn drift_point_report(
    s: &SpinSystem,
    chi: f64,
    basis_kind: BasisKind,
    omega_y: f64,
    omega_z: f64,
    theta: f64,
) -> Result<crate::fisher::FisherReport, SpinError> {
    let basis = undrifted_basis(s, basis_kind);
    let uy = unitary_exp(&s.jy, -omega_y).expect("jy Hermitian");
    let uz = unitary_exp(&s.jz, -omega_z).expect("jz Hermitian");
    let u = uz.mul(&uy);
    let kets = basis.kets().iter().map(|k| u.mul_vec(k)).collect();
    let drifted = MeasurementBasis::new(kets)?;
    let hy = Hamiltonian::new(s.jy.clone())?;
    let psi0 = noon_state(s, chi);
    report(&hy, &psi0, &drifted, theta).map_err(|e| match e {
        crate::fisher::FisherError::Model(m) => SpinError::Model(m),
        other => panic!("unexpected fisher failure in spin scan: {other}"),
    })
}

/// Per-grid classification summary.
#[derive(Debug, Clone)]
pub struct ClassifySummary {
    /// area fraction of supra-classical cells, weighted by the spherical
    /// measure |cos ω_y| of the drift chart
    pub supra_area_fraction: f64,
    /// number of maximal supra-classical arcs around the near-equator
    /// latitude circle (see [`hotspot_arc_count`])
    pub hotspot_arcs: usize,
    /// per-cell labels, same shape as the grid ("classical"/"supra-classical")
    pub labels: Vec<Vec<&'static str>>,
    /// true when 4j² > 2j, i.e. a supra-classical region can exist at all
    pub supra_possible: bool,
}

pub fn classification_label(j_value: f64, classical_bound: f64) -> &'static str {
    if j_value > classical_bound + 1e-9 {
        "supra-classical"
    } else {
        "classical"
    }
}

/// Classify every cell and summarize the supra-classical geography.
pub fn classify(grid: &LandscapeGrid, s: &SpinSystem) -> ClassifySummary {
    let labels: Vec<Vec<&'static str>> = grid
        .j_values
        .iter()
        .map(|row| {
            row.iter()
                .map(|&v| classification_label(v, grid.classical_bound))
                .collect()
        })
        .collect();
    let mut weighted_supra = 0.0;
    let mut weighted_total = 0.0;
    for (iy, row) in grid.j_values.iter().enumerate() {
        let w = grid.omega_y_values[iy].cos().abs();
        for &v in row {
            weighted_total += w;
            if v > grid.classical_bound + 1e-9 {
                weighted_supra += w;
            }
        }
    }
    let supra_area_fraction = if weighted_total > 0.0 {
        weighted_supra / weighted_total
    } else {
        0.0
    };
    ClassifySummary {
        supra_area_fraction,
        hotspot_arcs: hotspot_arc_count(s, grid.chi, grid.basis_kind, 0.05, 720),
        labels,
        supra_possible: grid.heisenberg > grid.classical_bound + 1e-9,
    }
}

/// Counts maximal supra-classical arcs around a latitude circle of the
/// measurement-axis sphere, offset by `latitude_offset` radians from the
/// great circle of optimal axes (the cos ξ Ĵ_x + sin ξ Ĵ_z family).
///
/// The paper does not fix the counting rule behind "hotspots numbering 4j
/// around the equator"; this near-equator operationalization is ours.
pub fn hotspot_arc_count(
    s: &SpinSystem,
    chi: f64,
    basis_kind: BasisKind,
    latitude_offset: f64,
    samples: usize,
) -> usize {
    assert!(samples >= 720, "arc counting needs at least 720 samples");
    let basis = undrifted_basis(s, basis_kind);
    let b = basis.as_matrix();
    let psi0 = noon_state(s, chi);
    let dpsi = s.jy.mul_vec(psi0.vec()).scale(C64::new(0.0, -1.0));
    let threshold = 2.0 * s.j + 1e-9;
    let m_of = |i: usize| s.j - i as f64;
    let supra: Vec<bool> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let xi = 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
            // axis at constant offset from the optimal great circle
            let n_y = latitude_offset.sin();
            let n_x = latitude_offset.cos() * xi.cos();
            let n_z = latitude_offset.cos() * xi.sin();
            let wy = (-n_z).asin();
            let wz = n_y.atan2(n_x);
            let uy = unitary_exp(&s.jy, -wy).expect("jy Hermitian");
            let c = uy.mul(&b).adjoint();
            let scale_vec = |v: &ComplexVector| {
                ComplexVector::new(
                    v.entries()
                        .iter()
                        .enumerate()
                        .map(|(k, z)| z * C64::new(0.0, -m_of(k) * wz).exp())
                        .collect(),
                )
            };
            row_point_j(&c, &scale_vec(psi0.vec()), &scale_vec(&dpsi)) > threshold
        })
        .collect();
    // count maximal true-runs on the circle, merging across the seam
    let mut arcs = 0usize;
    for i in 0..samples {
        let prev = supra[(i + samples - 1) % samples];
        if supra[i] && !prev {
            arcs += 1;
        }
    }
    if arcs == 0 && supra[0] {
        1 // the whole circle is one arc
    } else {
        arcs
    }
}

/// Result of [`transverse_tolerance`].
#[derive(Debug, Clone, Copy)]
pub struct TransverseTolerance {
    /// drift angle at which J first falls to the classical bound 2j
    pub angle: f64,
    /// false when J never drops below 2j along the quarter-turn (the angle
    /// is then reported as π/2)
    pub crossed: bool,
}

/// How much transverse drift (pure ω_z rotation off the optimal great
/// circle, starting at the Ĵ_x point) keeps supra-classical precision.
/// Bisection for the first crossing J = 2j on [0, π/2], tolerance 1e-6.
pub fn transverse_tolerance(s: &SpinSystem, chi: f64) -> Result<TransverseTolerance, SpinError> {
    assert!(s.j >= 1.0, "tolerance is only meaningful when 4j^2 > 2j");
    let basis = undrifted_basis(s, BasisKind::JxBasis);
    let b = basis.as_matrix();
    let psi0 = noon_state(s, chi);
    let dpsi = s.jy.mul_vec(psi0.vec()).scale(C64::new(0.0, -1.0));
    let m_of = |i: usize| s.j - i as f64;
    // pure omega_z drift: omega_y = 0, so the rotated-basis matrix is just b
    let c = b.adjoint();
    let j_at = |wz: f64| {
        let scale_vec = |v: &ComplexVector| {
            ComplexVector::new(
                v.entries()
                    .iter()
                    .enumerate()
                    .map(|(k, z)| z * C64::new(0.0, -m_of(k) * wz).exp())
                    .collect(),
            )
        };
        row_point_j(&c, &scale_vec(psi0.vec()), &scale_vec(&dpsi))
    };
    let bound = 2.0 * s.j;
    let half_pi = std::f64::consts::FRAC_PI_2;
    // march out to bracket the first crossing
    let steps = 1000;
    let mut lo = 0.0f64;
    let mut hi = None;
    for i in 1..=steps {
        let w = half_pi * i as f64 / steps as f64;
        if j_at(w) <= bound {
            hi = Some(w);
            break;
        }
        lo = w;
    }
    let Some(mut hi) = hi else {
        return Ok(TransverseTolerance { angle: half_pi, crossed: false });
    };
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if j_at(mid) <= bound {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(TransverseTolerance { angle: 0.5 * (lo + hi), crossed: true })
}
