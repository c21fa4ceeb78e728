//! The four subcommands: report, scan, stability, crb.

use crate::config::{ConfigError, Scenario, ScenarioConfig};
use crate::emit::{fmt_f64, Json};
use qmetrics_core::{
    classify, crb_experiment, hessian_at, landscape_scan, transverse_tolerance, FisherError,
};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Command failure with its process exit code.
#[derive(Debug)]
pub struct CmdError {
    pub exit_code: i32,
    pub message: String,
}

impl From<ConfigError> for CmdError {
    fn from(e: ConfigError) -> Self {
        CmdError { exit_code: 2, message: e.to_string() }
    }
}

fn internal(msg: impl Into<String>) -> CmdError {
    CmdError { exit_code: 3, message: msg.into() }
}

fn report_json(scenario: &Scenario, theta: f64) -> Result<Json, CmdError> {
    let rep = qmetrics_core::report(&scenario.hamiltonian, &scenario.probe, &scenario.basis, theta)
        .map_err(|e| match e {
            FisherError::ConsistencyFailure { .. } | FisherError::NonRealResult { .. } => {
                internal(format!("consistency failure: {e}"))
            }
            FisherError::Model(m) => CmdError::from(ConfigError(m.to_string())),
        })?;
    let track =
        qmetrics_core::amplitude_track(&scenario.hamiltonian, &scenario.probe, &scenario.basis, theta)
            .map_err(|e| CmdError::from(ConfigError(e.to_string())))?;
    let outcomes = track
        .outcomes
        .iter()
        .zip(scenario.basis.labels())
        .map(|(o, label)| {
            Json::obj()
                .field("label", Json::str(label.clone()))
                .field("p", Json::num(o.p))
                .field("r", Json::num(o.r))
                .field("phi", Json::num(o.phi))
                .field("r_dot", Json::num(o.r_dot))
                .field("rphi_dot", Json::num(o.rphi_dot))
                .field("phi_dot", o.phi_dot.map(Json::num).unwrap_or(Json::Null))
                .field("tau", Json::num(o.tau))
        })
        .collect();
    Ok(Json::obj()
        .field("theta", Json::num(rep.theta))
        .field("J", Json::num(rep.j))
        .field("K", Json::num(rep.k))
        .field("h_mean", Json::num(rep.h_mean))
        .field("h2_mean", Json::num(rep.h2_mean))
        .field("variance", Json::num(rep.variance))
        .field("seminorm_sq", Json::num(rep.seminorm_sq))
        .field("outcomes", Json::Arr(outcomes)))
}

pub fn cmd_report(config: &ScenarioConfig) -> Result<String, CmdError> {
    let scenario = config.build()?;
    let body = if scenario.theta.len() == 1 {
        report_json(&scenario, scenario.theta[0])?
    } else {
        Json::Arr(
            scenario
                .theta
                .iter()
                .map(|&t| report_json(&scenario, t))
                .collect::<Result<_, _>>()?,
        )
    };
    Ok(body.to_string_pretty())
}

pub fn cmd_stability(config: &ScenarioConfig) -> Result<String, CmdError> {
    let scenario = config.build()?;
    let (drift, omega) = config.build_drift()?;
    let theta = scenario.theta[0];
    let rep = hessian_at(
        &scenario.hamiltonian,
        &scenario.probe,
        &scenario.basis,
        &drift,
        theta,
        omega,
    )
    .map_err(|e| internal(format!("stability evaluation failed: {e}")))?;
    Ok(Json::obj()
        .field("at_theta", Json::num(rep.at_theta))
        .field("at_omega", Json::num(rep.at_omega))
        .field("gm_certified", Json::Bool(rep.gm_certified))
        .field("grad_theta", Json::num(rep.grad_theta))
        .field("grad_omega", Json::num(rep.grad_omega))
        .field("d2_theta", Json::num(rep.d2_theta))
        .field("d2_omega", Json::num(rep.d2_omega))
        .field("d2_mixed", Json::num(rep.d2_mixed))
        .field("analytic_mixed", Json::num(rep.analytic_mixed))
        .field("analytic_omega", Json::num(rep.analytic_omega))
        .field("drift", Json::str(drift.description.clone()))
        .to_string_pretty())
}

pub fn cmd_crb(config: &ScenarioConfig) -> Result<String, CmdError> {
    let scenario = config.build()?;
    let c = &config.crb;
    let theta_true = c.theta_true.unwrap_or(std::f64::consts::FRAC_PI_8);
    let n = c.samples.unwrap_or(10_000);
    let t = c.trials.unwrap_or(400);
    let seed = c.seed.unwrap_or(7);
    if n == 0 || t < 2 {
        return Err(ConfigError(format!("crb: need samples >= 1 and trials >= 2, got {n}/{t}")).into());
    }
    let run = crb_experiment(
        &scenario.hamiltonian,
        &scenario.probe,
        &scenario.basis,
        theta_true,
        n,
        t,
        seed,
    )
    .map_err(|e| match e {
        qmetrics_core::EstimateError::ZeroInformation { .. }
        | qmetrics_core::EstimateError::DegenerateLikelihood => {
            CmdError { exit_code: 4, message: format!("zero-information instance: {e}") }
        }
        other => internal(other.to_string()),
    })?;
    // fixed 10-bin histogram over the estimate range
    let lo = run.estimates.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = run.estimates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut bins = vec![0i64; 10];
    for &e in &run.estimates {
        let idx = if hi > lo {
            (((e - lo) / (hi - lo)) * 10.0).floor().min(9.0) as usize
        } else {
            0
        };
        bins[idx] += 1;
    }
    Ok(Json::obj()
        .field("theta_true", Json::num(run.theta_true))
        .field("samples_per_trial", Json::Int(run.samples_per_trial as i64))
        .field("trials", Json::Int(run.trials as i64))
        .field("seed", Json::Int(run.seed as i64))
        .field("mean_estimate", Json::num(run.mean_estimate()))
        .field("empirical_variance", Json::num(run.empirical_variance))
        .field("crb", Json::num(run.crb))
        .field("ratio", Json::num(run.ratio()))
        .field(
            "histogram",
            Json::obj()
                .field("min", Json::num(lo))
                .field("max", Json::num(hi))
                .field("counts", Json::Arr(bins.into_iter().map(Json::Int).collect())),
        )
        .to_string_pretty())
}

/// Scan emits CSV to `output` and a JSON summary sidecar next to it.
pub fn cmd_scan(config: &ScenarioConfig, output: &Path) -> Result<String, CmdError> {
    let (spin, chi, kind, grid_dims) = config.build_scan()?;
    let grid = landscape_scan(&spin, chi, kind, grid_dims)
        .map_err(|e| internal(format!("scan failed: {e}")))?;
    let summary = classify(&grid, &spin);

    let mut csv = String::with_capacity(grid_dims.0 * grid_dims.1 * 64);
    csv.push_str("omega_y,omega_z,J,classification\n");
    for (iy, wy) in grid.omega_y_values.iter().enumerate() {
        for (iz, wz) in grid.omega_z_values.iter().enumerate() {
            csv.push_str(&fmt_f64(*wy));
            csv.push(',');
            csv.push_str(&fmt_f64(*wz));
            csv.push(',');
            csv.push_str(&fmt_f64(grid.j_values[iy][iz]));
            csv.push(',');
            csv.push_str(summary.labels[iy][iz]);
            csv.push('\n');
        }
    }
    std::fs::write(output, &csv)
        .map_err(|e| internal(format!("cannot write {}: {e}", output.display())))?;

    let tolerance = if spin.j >= 1.0 && summary.supra_possible {
        let t = transverse_tolerance(&spin, chi)
            .map_err(|e| internal(format!("tolerance bisection failed: {e}")))?;
        Json::obj()
            .field("angle", Json::num(t.angle))
            .field("crossed", Json::Bool(t.crossed))
    } else {
        Json::Null
    };
    let sidecar = Json::obj()
        .field("j", Json::num(spin.j))
        .field("chi", Json::num(chi))
        .field(
            "basis_kind",
            Json::str(match kind {
                qmetrics_core::BasisKind::JxBasis => "jx",
                qmetrics_core::BasisKind::Eq11Basis => "eq11",
            }),
        )
        .field("grid_ny", Json::Int(grid_dims.0 as i64))
        .field("grid_nz", Json::Int(grid_dims.1 as i64))
        .field("classical_bound", Json::num(grid.classical_bound))
        .field("heisenberg", Json::num(grid.heisenberg))
        .field("supra_possible", Json::Bool(summary.supra_possible))
        .field("supra_area_fraction", Json::num(summary.supra_area_fraction))
        .field("hotspot_arcs", Json::Int(summary.hotspot_arcs as i64))
        .field("transverse_tolerance", tolerance)
        .to_string_pretty();
    let sidecar_path = sidecar_path_for(output);
    std::fs::write(&sidecar_path, &sidecar)
        .map_err(|e| internal(format!("cannot write {}: {e}", sidecar_path.display())))?;
    Ok(format!(
        "wrote {} rows to {} and summary to {}\n",
        grid_dims.0 * grid_dims.1,
        output.display(),
        sidecar_path.display()
    ))
}

pub fn sidecar_path_for(output: &Path) -> PathBuf {
    output.with_extension("summary.json")
}

pub fn write_out(text: &str) {
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(text.as_bytes()).expect("stdout write");
}
