//! Distills simulate artifacts into plot-ready tables: a combined-norm
//! time series, growth-envelope fits, and the interface refinement-rate
//! dichotomy. Reports are derived deterministically from the records file
//! and the scenario, so identical runs produce byte-identical reports. An
//! empty run (records with no rows) yields header-only outputs.

use std::path::Path;

use patchlab::diagnostics::{
    boundary_refinement_study, doubly_exponential_envelope, exponential_envelope, CorrectorInput,
};
use patchlab::geometry::Vec2;

use crate::errors::{CliError, CliResult};
use crate::scenario::{ModelSpec, Scenario};

struct RecordRow {
    time: f64,
    grad_u_sup: f64,
    y_sup: f64,
    y_seminorm: f64,
    gamma_sup: f64,
    gamma_seminorm: f64,
    ygradu_sup: f64,
    ygradu_seminorm: f64,
    area: f64,
    omega_l1: f64,
    omega_l2: f64,
    omega_linf: f64,
}

pub fn run(scenario_path: &Path, out_dir: &Path) -> CliResult<()> {
    let scenario = Scenario::load(scenario_path)?;
    let records_path = out_dir.join(&scenario.records_name);
    if !records_path.exists() {
        return Err(CliError::Usage(format!(
            "{} not found: run `patchlab simulate` with the same --out first",
            records_path.display()
        )));
    }
    let rows = read_records(&records_path)?;

    let mut timeseries = String::from(
        "# plot-ready time series distilled from the run records; dimensionless quantities\n\
         # *_c_alpha columns: discrete Holder norm (sup + seminorm) at the scenario's alpha\n\
         time,grad_u_sup,y_c_alpha,gamma_c_alpha,ygradu_c_alpha,area,omega_l1,omega_l2,omega_linf\n",
    );
    for r in &rows {
        timeseries.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt(r.time),
            fmt(r.grad_u_sup),
            fmt(r.y_sup + r.y_seminorm),
            fmt(r.gamma_sup + r.gamma_seminorm),
            fmt(r.ygradu_sup + r.ygradu_seminorm),
            fmt(r.area),
            fmt(r.omega_l1),
            fmt(r.omega_l2),
            fmt(r.omega_linf),
        ));
    }

    let mut envelopes = String::from(
        "# growth-envelope fits of sup|grad_u| over time (reported, never asserted)\n\
         # exponential: f ~ amplitude * exp(rate * t); doubly-exponential: f ~ exp(amplitude * exp(rate * t))\n\
         kind,rate,amplitude,residual\n",
    );
    if !rows.is_empty() {
        let times: Vec<f64> = rows.iter().map(|r| r.time).collect();
        let sups: Vec<f64> = rows.iter().map(|r| r.grad_u_sup).collect();
        for (kind, fit) in [
            ("exponential", exponential_envelope(&times, &sups)),
            ("doubly-exponential", doubly_exponential_envelope(&times, &sups)),
        ] {
            envelopes.push_str(&format!(
                "{kind},{},{},{}\n",
                fmt(fit.rate),
                fmt(fit.amplitude),
                fmt(fit.residual)
            ));
        }
    }

    let mut refinement = String::from(
        "# discrete Holder-seminorm refinement rates on a band straddling the vorticity interface\n\
         # spacings 1/64 .. 1/512; raw = velocity gradient, corrected = Gamma = grad_u - omega*A\n\
         # header-only when the run is empty or the model has no closed gradient route (gaussian)\n\
         field,rate\n",
    );
    let mut refinement_note = None;
    if !rows.is_empty() {
        match refinement_rates(&scenario)? {
            Some((raw, corrected)) => {
                refinement.push_str(&format!("raw_gradient,{}\n", fmt(raw)));
                refinement.push_str(&format!("corrected_gradient,{}\n", fmt(corrected)));
            }
            None => {
                refinement_note =
                    Some("refinement table omitted: no interface with a closed gradient route");
            }
        }
    }

    let writes = [
        ("timeseries.csv", timeseries, rows.len()),
        ("envelopes.csv", envelopes, if rows.is_empty() { 0 } else { 2 }),
        (
            "refinement.csv",
            refinement,
            if rows.is_empty() || refinement_note.is_some() { 0 } else { 2 },
        ),
    ];
    for (name, content, data_rows) in &writes {
        let path = out_dir.join(name);
        std::fs::write(&path, content)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {} ({data_rows} rows)", path.display());
    }
    if let Some(note) = refinement_note {
        println!("{note}");
    }
    Ok(())
}

fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

fn read_records(path: &Path) -> CliResult<Vec<RecordRow>> {
    let malformed = |detail: String| {
        CliError::Usage(format!("{}: malformed records file: {detail}", path.display()))
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| malformed("no column header".into()))?;
    if !header.starts_with("time,") {
        return Err(malformed(format!("unexpected column header `{header}`")));
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| malformed(format!("unparsable number in `{line}`: {e}")))?;
        if fields.len() != 12 {
            return Err(malformed(format!(
                "expected 12 columns, got {} in `{line}`",
                fields.len()
            )));
        }
        rows.push(RecordRow {
            time: fields[0],
            grad_u_sup: fields[1],
            y_sup: fields[2],
            y_seminorm: fields[3],
            gamma_sup: fields[4],
            gamma_seminorm: fields[5],
            ygradu_sup: fields[6],
            ygradu_seminorm: fields[7],
            area: fields[8],
            omega_l1: fields[9],
            omega_l2: fields[10],
            omega_linf: fields[11],
        });
    }
    Ok(rows)
}

/// Refinement-rate dichotomy across the model's vorticity interface.
/// None for smooth models (their gradient route is quadrature, far too
/// slow for a per-point band sweep, and there is no jump to straddle) and
/// for Y0 choices that degenerate near the interface.
fn refinement_rates(scenario: &Scenario) -> CliResult<Option<(f64, f64)>> {
    if matches!(scenario.model, ModelSpec::Gaussian { .. }) {
        return Ok(None);
    }
    let model = scenario.build_model()?;
    let mut min_norm = f64::INFINITY;
    for &p in &scenario.interface_samples() {
        match scenario.y0_value(p) {
            Some(y) => min_norm = min_norm.min(y.norm()),
            None => return Ok(None),
        }
    }
    if !(min_norm > 0.0) {
        return Ok(None);
    }
    let omega_model = model.clone();
    let input = CorrectorInput::new(
        scenario.y_field(),
        // The band hugs the interface, where the transported cutoff of a
        // live run would be identically 1.
        |_| 1.0,
        move |x: Vec2| omega_model.vorticity(x),
        0.5 * min_norm,
    );
    let spacings = [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0, 1.0 / 512.0];
    let dichotomy = boundary_refinement_study(&model, &input, scenario.alpha, &spacings)
        .map_err(|e| CliError::Check(format!("refinement study failed: {e}")))?;
    Ok(Some((dichotomy.rate_raw, dichotomy.rate_corrected)))
}
