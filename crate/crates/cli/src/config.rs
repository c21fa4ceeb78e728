//! Scenario configuration: TOML file plus flag overrides (flags win).

use qmetrics_core::{
    build_optimal_basis, make_spin, max_variance_probe, noon_state, BasisKind, ComplexMatrix,
    ComplexVector, DriftModel, Hamiltonian, MeasurementBasis, PureState, SpinSystem, C64,
};
use serde::Deserialize;
use std::path::Path;

/// Configuration or validation failure; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// [re, im] pairs, the literal wire format for complex entries.
type ComplexLit = [f64; 2];

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSection {
    /// pauli_x | pauli_y | pauli_z | spin_jx | spin_jy | spin_jz
    pub preset: Option<String>,
    /// spin quantum number for the spin_* presets
    pub j: Option<f64>,
    /// dense matrix literal, rows of [re, im] entries
    pub matrix: Option<Vec<Vec<ComplexLit>>>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    /// max_variance | noon | eigenstate | literal
    pub kind: Option<String>,
    pub chi: Option<f64>,
    pub index: Option<usize>,
    pub amplitudes: Option<Vec<ComplexLit>>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    /// eq11 | eigenbasis | jx_eigenbasis | literal
    pub kind: Option<String>,
    pub kets: Option<Vec<Vec<ComplexLit>>>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DriftSection {
    /// generator preset, same names as hamiltonian presets, or a literal
    pub preset: Option<String>,
    pub j: Option<f64>,
    pub matrix: Option<Vec<Vec<ComplexLit>>>,
    /// scale factor applied to the generator (e.g. 0.5 for sigma_z/2)
    pub scale: Option<f64>,
    pub omega: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub j: Option<f64>,
    pub chi: Option<f64>,
    /// jx | eq11
    pub basis_kind: Option<String>,
    pub grid_ny: Option<usize>,
    pub grid_nz: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CrbSection {
    pub theta_true: Option<f64>,
    pub samples: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub hamiltonian: HamiltonianSection,
    #[serde(default)]
    pub probe: ProbeSection,
    #[serde(default)]
    pub basis: BasisSection,
    pub theta: Option<ThetaSpec>,
    #[serde(default)]
    pub drift: DriftSection,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub crb: CrbSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ThetaSpec {
    One(f64),
    Many(Vec<f64>),
}

impl ThetaSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            ThetaSpec::One(t) => vec![*t],
            ThetaSpec::Many(ts) => ts.clone(),
        }
    }
}

impl ScenarioConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| ConfigError(format!("cannot read {}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", p.display())))
            }
        }
    }
}

fn parse_matrix(rows: &[Vec<ComplexLit>], what: &str) -> Result<ComplexMatrix, ConfigError> {
    let dim = rows.len();
    if dim == 0 {
        return err(format!("{what}: matrix literal is empty"));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return err(format!(
                "{what}: row {i} has {} entries, expected {dim} (square matrix)",
                row.len()
            ));
        }
    }
    Ok(ComplexMatrix::from_fn(dim, |i, j| {
        C64::new(rows[i][j][0], rows[i][j][1])
    }))
}

fn parse_vector(entries: &[ComplexLit]) -> ComplexVector {
    ComplexVector::new(entries.iter().map(|e| C64::new(e[0], e[1])).collect())
}

fn check_hermitian(m: &ComplexMatrix, what: &str) -> Result<(), ConfigError> {
    let dim = m.dim();
    for i in 0..dim {
        for j in 0..dim {
            let dev = (m.get(i, j) - m.get(j, i).conj()).norm();
            if dev > 1e-10 {
                return err(format!(
                    "{what}: not Hermitian at entry ({i},{j}): deviates from conjugate \
                     transpose by {dev:.3e}"
                ));
            }
        }
    }
    Ok(())
}

/// The fully constructed physical scenario.
pub struct Scenario {
    pub hamiltonian: Hamiltonian,
    pub probe: PureState,
    pub basis: MeasurementBasis,
    pub theta: Vec<f64>,
}

fn build_generator(
    preset: Option<&str>,
    j: Option<f64>,
    matrix: Option<&Vec<Vec<ComplexLit>>>,
    what: &str,
) -> Result<(ComplexMatrix, Option<SpinSystem>), ConfigError> {
    match (preset, matrix) {
        (Some(_), Some(_)) => err(format!("{what}: give either a preset or a matrix, not both")),
        (None, None) => err(format!("{what}: missing preset or matrix")),
        (None, Some(rows)) => {
            let m = parse_matrix(rows, what)?;
            check_hermitian(&m, what)?;
            Ok((m, None))
        }
        (Some(name), None) => match name {
            "pauli_x" => Ok((qmetrics_core::linalg::pauli_x(), None)),
            "pauli_y" => Ok((qmetrics_core::linalg::pauli_y(), None)),
            "pauli_z" => Ok((qmetrics_core::linalg::pauli_z(), None)),
            "spin_jx" | "spin_jy" | "spin_jz" => {
                let jv = j.ok_or_else(|| {
                    ConfigError(format!("{what}: preset {name} needs the field j"))
                })?;
                let s = make_spin(jv).map_err(|e| ConfigError(format!("{what}: {e}")))?;
                let m = match name {
                    "spin_jx" => s.jx.clone(),
                    "spin_jy" => s.jy.clone(),
                    _ => s.jz.clone(),
                };
                Ok((m, Some(s)))
            }
            other => err(format!(
                "{what}: unknown preset '{other}' (expected pauli_x/y/z or spin_jx/jy/jz)"
            )),
        },
    }
}

impl ScenarioConfig {
    /// Construct the Hamiltonian, probe and basis, validating every literal.
    pub fn build(&self) -> Result<Scenario, ConfigError> {
        let h = &self.hamiltonian;
        let (matrix, spin) = if h.preset.is_none() && h.matrix.is_none() {
            build_generator(Some("pauli_z"), h.j, None, "hamiltonian")?
        } else {
            build_generator(h.preset.as_deref(), h.j, h.matrix.as_ref(), "hamiltonian")?
        };
        let hamiltonian =
            Hamiltonian::new(matrix).map_err(|e| ConfigError(format!("hamiltonian: {e}")))?;

        let probe = {
            let p = &self.probe;
            match p.kind.as_deref().unwrap_or("max_variance") {
                "max_variance" => max_variance_probe(&hamiltonian, p.chi.unwrap_or(0.0)),
                "noon" => {
                    let s = spin.as_ref().ok_or_else(|| {
                        ConfigError("probe: noon requires a spin_* hamiltonian preset".into())
                    })?;
                    noon_state(s, p.chi.unwrap_or(0.0))
                }
                "eigenstate" => {
                    let idx = p.index.unwrap_or(0);
                    let vecs = hamiltonian.spectrum().eigenvectors();
                    if idx >= vecs.len() {
                        return err(format!(
                            "probe: eigenstate index {idx} out of range for dim {}",
                            vecs.len()
                        ));
                    }
                    PureState::new(vecs[idx].clone())
                        .map_err(|e| ConfigError(format!("probe: {e}")))?
                }
                "literal" => {
                    let amps = p.amplitudes.as_ref().ok_or_else(|| {
                        ConfigError("probe: literal kind needs the amplitudes field".into())
                    })?;
                    PureState::normalized(parse_vector(amps))
                        .map_err(|e| ConfigError(format!("probe: {e}")))?
                }
                other => return err(format!("probe: unknown kind '{other}'")),
            }
        };

        let basis = {
            let b = &self.basis;
            match b.kind.as_deref().unwrap_or("eq11") {
                "eq11" => build_optimal_basis(&hamiltonian),
                "eigenbasis" => MeasurementBasis::eigenbasis(&hamiltonian),
                "jx_eigenbasis" => {
                    let s = spin.as_ref().ok_or_else(|| {
                        ConfigError(
                            "basis: jx_eigenbasis requires a spin_* hamiltonian preset".into(),
                        )
                    })?;
                    let hx = Hamiltonian::new(s.jx.clone())
                        .map_err(|e| ConfigError(format!("basis: {e}")))?;
                    MeasurementBasis::eigenbasis(&hx)
                }
                "literal" => {
                    let kets = b.kets.as_ref().ok_or_else(|| {
                        ConfigError("basis: literal kind needs the kets field".into())
                    })?;
                    let vecs: Vec<ComplexVector> =
                        kets.iter().map(|k| parse_vector(k)).collect();
                    MeasurementBasis::new(vecs)
                        .map_err(|e| ConfigError(format!("basis: {e}")))?
                }
                other => return err(format!("basis: unknown kind '{other}'")),
            }
        };

        if probe.dim() != hamiltonian.dim() || basis.dim() != hamiltonian.dim() {
            return err(format!(
                "dimension mismatch: hamiltonian {}, probe {}, basis {}",
                hamiltonian.dim(),
                probe.dim(),
                basis.dim()
            ));
        }

        let theta = self
            .theta
            .as_ref()
            .map(|t| t.values())
            .unwrap_or_else(|| vec![0.25]);

        Ok(Scenario { hamiltonian, probe, basis, theta })
    }

    /// Drift generator for the stability command.
    pub fn build_drift(&self) -> Result<(DriftModel, f64), ConfigError> {
        let d = &self.drift;
        let (mut m, _) = build_generator(d.preset.as_deref(), d.j, d.matrix.as_ref(), "drift")?;
        if let Some(scale) = d.scale {
            m = m.scale(C64::new(scale, 0.0));
        }
        let desc = d.preset.clone().unwrap_or_else(|| "literal".to_string());
        Ok((DriftModel::new(m, desc), d.omega.unwrap_or(0.0)))
    }

    /// Parameters for the scan command.
    pub fn build_scan(&self) -> Result<(SpinSystem, f64, BasisKind, (usize, usize)), ConfigError> {
        let s = &self.scan;
        let j = s.j.or(self.hamiltonian.j).unwrap_or(1.5);
        let spin = make_spin(j).map_err(|e| ConfigError(format!("scan: {e}")))?;
        let kind = match s.basis_kind.as_deref().unwrap_or("jx") {
            "jx" => BasisKind::JxBasis,
            "eq11" => BasisKind::Eq11Basis,
            other => return err(format!("scan: unknown basis_kind '{other}'")),
        };
        let ny = s.grid_ny.unwrap_or(181);
        let nz = s.grid_nz.unwrap_or(361);
        if ny < 2 || nz < 2 {
            return err(format!("scan: grid {ny}x{nz} is too small, need at least 2x2"));
        }
        Ok((spin, s.chi.unwrap_or(0.0), kind, (ny, nz)))
    }
}
