//! Scenario files: flat `key = value` lines with dotted section prefixes.
//!
//! `#` starts a comment (whole-line or trailing); there is no quoting, so
//! values cannot contain `#`. Every key may appear at most once. Unknown
//! keys are rejected with their line number so typos never fall back to a
//! default silently, and every validation failure names the offending line
//! and field. Nothing is written to disk until a scenario validates.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use patchlab::diagnostics::boundary_cutoff;
use patchlab::fields::{VorticityModel, YField};
use patchlab::geometry::Vec2;
use patchlab::holder::ClosedCurve;

use crate::errors::{CliError, CliResult};

/// Which vorticity the run carries, with its numeric parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// Unit-amplitude vortex patch on the unit disk.
    CircularPatch,
    /// Top-hat of the given amplitude on a disk of the given radius.
    Radial { radius: f64, amplitude: f64 },
    /// Strip profile sin(pi s / width) on [-width, width]; zero mean.
    ShearSine { width: f64 },
    /// exp(-|x|^2 / (2 sigma^2)), truncated beyond the support radius.
    Gaussian { sigma: f64, support: f64 },
    /// Patch on an axis-aligned elliptical region.
    Ellipse { semi_major: f64, semi_minor: f64, amplitude: f64 },
}

impl ModelSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelSpec::CircularPatch => "circular-patch",
            ModelSpec::Radial { .. } => "radial",
            ModelSpec::ShearSine { .. } => "shear-sine",
            ModelSpec::Gaussian { .. } => "gaussian",
            ModelSpec::Ellipse { .. } => "ellipse",
        }
    }

    /// Kinds whose vorticity is an indicator with a polygonal boundary —
    /// the ones contour dynamics can advance self-consistently.
    pub fn is_patch_kind(&self) -> bool {
        matches!(
            self,
            ModelSpec::CircularPatch | ModelSpec::Radial { .. } | ModelSpec::Ellipse { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// Velocity frozen at its t = 0 closed form; markers ride it passively.
    Frozen,
    /// Contour dynamics: the patch boundary induces its own velocity.
    SelfConsistent,
}

#[derive(Debug, Clone, PartialEq)]
pub enum YSpec {
    Constant(Vec2),
    Rotational,
    Azimuthal,
}

#[derive(Debug, Clone, Copy)]
pub struct Window {
    pub x1_min: f64,
    pub x1_max: f64,
    pub x2_min: f64,
    pub x2_max: f64,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    /// Path the scenario was loaded from, kept for error attribution.
    pub path: String,
    pub model: ModelSpec,
    pub mode: RunMode,
    pub y0: YSpec,
    pub alpha: f64,
    pub horizon: f64,
    pub dt: f64,
    /// Number of records a run emits, the t = 0 record included.
    pub checkpoints: usize,
    /// Tracer layout: grid x grid markers across the window (0 = none).
    pub grid: usize,
    pub boundary_nodes: usize,
    /// Vorticity-norm quadrature: cells x cells fixed boxes on the window.
    pub cells: usize,
    pub window: Window,
    pub seed: u64,
    pub records_name: String,
    pub trajectories_name: String,
}

/// Raw `key -> (value, line)` map with typed extraction. Extraction
/// removes entries, so whatever remains afterwards is an unknown key.
struct Raw {
    path: String,
    entries: BTreeMap<String, (String, usize)>,
}

impl Raw {
    fn parse(path: &Path) -> CliResult<Raw> {
        let display = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!(
            "cannot read scenario file {display}: {e}"
        )))?;
        let mut entries = BTreeMap::new();
        for (index, raw_line) in text.lines().enumerate() {
            let line = index + 1;
            let stripped = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            };
            let stripped = stripped.trim();
            if stripped.is_empty() {
                continue;
            }
            let Some((key, value)) = stripped.split_once('=') else {
                return Err(CliError::Config {
                    path: display,
                    line: Some(line),
                    field: None,
                    message: format!("expected `key = value`, got `{stripped}`"),
                });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(CliError::Config {
                    path: display,
                    line: Some(line),
                    field: None,
                    message: "both key and value must be nonempty".into(),
                });
            }
            if let Some((_, first)) = entries.get(&key) {
                return Err(CliError::Config {
                    path: display,
                    line: Some(line),
                    field: Some(key),
                    message: format!("duplicate key (first set on line {first})"),
                });
            }
            entries.insert(key, (value, line));
        }
        Ok(Raw { path: display, entries })
    }

    fn err(&self, line: Option<usize>, field: &str, message: String) -> CliError {
        CliError::Config {
            path: self.path.clone(),
            line,
            field: Some(field.to_string()),
            message,
        }
    }

    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key)
    }

    fn take_f64(&mut self, key: &str) -> CliResult<Option<(f64, usize)>> {
        match self.take(key) {
            None => Ok(None),
            Some((text, line)) => match text.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Some((v, line))),
                _ => Err(self.err(
                    Some(line),
                    key,
                    format!("expected a finite number, got `{text}`"),
                )),
            },
        }
    }

    fn require_f64(&mut self, key: &str) -> CliResult<(f64, usize)> {
        self.take_f64(key)?
            .ok_or_else(|| self.err(None, key, "missing required key".into()))
    }

    fn take_usize(&mut self, key: &str) -> CliResult<Option<(usize, usize)>> {
        match self.take(key) {
            None => Ok(None),
            Some((text, line)) => match text.parse::<usize>() {
                Ok(v) => Ok(Some((v, line))),
                Err(_) => Err(self.err(
                    Some(line),
                    key,
                    format!("expected a nonnegative integer, got `{text}`"),
                )),
            },
        }
    }

    fn take_u64(&mut self, key: &str) -> CliResult<Option<(u64, usize)>> {
        match self.take(key) {
            None => Ok(None),
            Some((text, line)) => match text.parse::<u64>() {
                Ok(v) => Ok(Some((v, line))),
                Err(_) => Err(self.err(
                    Some(line),
                    key,
                    format!("expected a nonnegative integer, got `{text}`"),
                )),
            },
        }
    }

    /// Errors on the leftover with the smallest line number, if any.
    fn reject_unknown(&self) -> CliResult<()> {
        if let Some((key, (_, line))) =
            self.entries.iter().min_by_key(|(_, (_, line))| *line)
        {
            return Err(self.err(Some(*line), key, "unknown key".into()));
        }
        Ok(())
    }
}

impl Scenario {
    pub fn load(path: &Path) -> CliResult<Scenario> {
        let mut raw = Raw::parse(path)?;

        let (kind, kind_line) = raw
            .take("model.kind")
            .ok_or_else(|| raw.err(None, "model.kind", "missing required key".into()))?;
        let model = match kind.as_str() {
            "circular-patch" => ModelSpec::CircularPatch,
            "radial" => {
                let radius = raw.take_f64("model.radius")?.map_or(1.0, |(v, _)| v);
                let amplitude = raw.take_f64("model.amplitude")?.map_or(1.0, |(v, _)| v);
                ModelSpec::Radial { radius, amplitude }
            }
            "shear-sine" => {
                let width = raw.take_f64("model.width")?.map_or(1.0, |(v, _)| v);
                ModelSpec::ShearSine { width }
            }
            "gaussian" => {
                let sigma = raw.take_f64("model.sigma")?.map_or(1.0, |(v, _)| v);
                let support = raw.take_f64("model.support")?.map_or(6.0 * sigma, |(v, _)| v);
                ModelSpec::Gaussian { sigma, support }
            }
            "ellipse" => {
                let semi_major = raw.take_f64("model.semi_major")?.map_or(1.2, |(v, _)| v);
                let semi_minor = raw.take_f64("model.semi_minor")?.map_or(0.8, |(v, _)| v);
                let amplitude = raw.take_f64("model.amplitude")?.map_or(1.0, |(v, _)| v);
                ModelSpec::Ellipse { semi_major, semi_minor, amplitude }
            }
            other => {
                return Err(raw.err(
                    Some(kind_line),
                    "model.kind",
                    format!(
                        "unknown model `{other}` (expected circular-patch, radial, \
                         shear-sine, gaussian, or ellipse)"
                    ),
                ))
            }
        };
        match &model {
            ModelSpec::Radial { radius, amplitude } => {
                if *radius <= 0.0 {
                    return Err(raw.err(None, "model.radius", format!(
                        "radius must be positive, got {radius}"
                    )));
                }
                if *amplitude == 0.0 {
                    return Err(raw.err(None, "model.amplitude", "amplitude must be nonzero".into()));
                }
            }
            ModelSpec::ShearSine { width } if *width <= 0.0 => {
                return Err(raw.err(None, "model.width", format!(
                    "width must be positive, got {width}"
                )));
            }
            ModelSpec::Gaussian { sigma, support } => {
                if *sigma <= 0.0 {
                    return Err(raw.err(None, "model.sigma", format!(
                        "sigma must be positive, got {sigma}"
                    )));
                }
                if *support <= 0.0 {
                    return Err(raw.err(None, "model.support", format!(
                        "support must be positive, got {support}"
                    )));
                }
            }
            ModelSpec::Ellipse { semi_major, semi_minor, amplitude } => {
                if *semi_major <= 0.0 || *semi_minor <= 0.0 {
                    return Err(raw.err(None, "model.semi_major", format!(
                        "semi-axes must be positive, got {semi_major} and {semi_minor}"
                    )));
                }
                if *amplitude == 0.0 {
                    return Err(raw.err(None, "model.amplitude", "amplitude must be nonzero".into()));
                }
            }
            _ => {}
        }

        let mode = match raw.take("mode") {
            None => RunMode::Frozen,
            Some((text, line)) => match text.as_str() {
                "frozen" => RunMode::Frozen,
                "self-consistent" => {
                    if !model.is_patch_kind() {
                        return Err(raw.err(Some(line), "mode", format!(
                            "self-consistent contour runs need a patch-type vorticity \
                             (circular-patch, radial, or ellipse), got {}",
                            model.kind_name()
                        )));
                    }
                    RunMode::SelfConsistent
                }
                other => {
                    return Err(raw.err(Some(line), "mode", format!(
                        "unknown mode `{other}` (expected frozen or self-consistent)"
                    )))
                }
            },
        };

        let y0 = match raw.take("y0.kind") {
            None => YSpec::Rotational,
            Some((text, line)) => match text.as_str() {
                "rotational" => YSpec::Rotational,
                "azimuthal" => YSpec::Azimuthal,
                "constant" => {
                    let (x1, x1_line) = raw.take_f64("y0.x1")?.ok_or_else(|| {
                        raw.err(Some(line), "y0.x1", "constant Y0 needs y0.x1".into())
                    })?;
                    let (x2, _) = raw.take_f64("y0.x2")?.ok_or_else(|| {
                        raw.err(Some(line), "y0.x2", "constant Y0 needs y0.x2".into())
                    })?;
                    let v = Vec2::new(x1, x2);
                    if v.norm() == 0.0 {
                        return Err(raw.err(Some(x1_line), "y0.x1", "constant Y0 must be nonzero".into()));
                    }
                    YSpec::Constant(v)
                }
                other => {
                    return Err(raw.err(Some(line), "y0.kind", format!(
                        "unknown Y0 `{other}` (expected constant, rotational, or azimuthal)"
                    )))
                }
            },
        };

        let (alpha, alpha_line) = raw.require_f64("alpha")?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(raw.err(Some(alpha_line), "alpha", format!(
                "must lie strictly between 0 and 1, got {alpha}"
            )));
        }
        let (dt, dt_line) = raw.require_f64("dt")?;
        if dt <= 0.0 {
            return Err(raw.err(Some(dt_line), "dt", format!("must be positive, got {dt}")));
        }
        let (horizon, horizon_line) = raw.require_f64("horizon")?;
        if horizon < 0.0 {
            return Err(raw.err(Some(horizon_line), "horizon", format!(
                "must be nonnegative, got {horizon}"
            )));
        }
        let steps = (horizon / dt).round();
        if (steps * dt - horizon).abs() > 1e-9 * horizon.max(1.0) {
            return Err(raw.err(Some(horizon_line), "horizon", format!(
                "must be an integer multiple of dt = {dt}, got {horizon}"
            )));
        }
        let steps = steps as usize;

        let checkpoints = raw.take_usize("checkpoints")?.map_or(8, |(v, _)| v);
        if checkpoints == 0 {
            return Err(raw.err(None, "checkpoints", "at least one record is required".into()));
        }
        if horizon > 0.0 {
            if checkpoints < 2 {
                return Err(raw.err(Some(horizon_line), "checkpoints", format!(
                    "a positive horizon needs at least 2 checkpoints, got {checkpoints}"
                )));
            }
            if steps < checkpoints - 1 {
                return Err(raw.err(Some(horizon_line), "horizon", format!(
                    "horizon/dt = {steps} steps cannot fill {} checkpoint intervals",
                    checkpoints - 1
                )));
            }
        }

        let grid = raw.take_usize("markers.grid")?.map_or(8, |(v, _)| v);
        let boundary_nodes = raw.take_usize("markers.boundary_nodes")?.map_or(128, |(v, _)| v);
        if boundary_nodes < 8 {
            return Err(raw.err(None, "markers.boundary_nodes", format!(
                "need at least 8 nodes for a sane polygon, got {boundary_nodes}"
            )));
        }
        let cells = raw.take_usize("markers.cells")?.map_or(10, |(v, _)| v);
        if cells == 0 {
            return Err(raw.err(None, "markers.cells", "need at least one cell".into()));
        }

        let x1_min = raw.take_f64("window.x1_min")?.map_or(-2.0, |(v, _)| v);
        let x1_max = raw.take_f64("window.x1_max")?.map_or(2.0, |(v, _)| v);
        let x2_min = raw.take_f64("window.x2_min")?.map_or(-2.0, |(v, _)| v);
        let x2_max = raw.take_f64("window.x2_max")?.map_or(2.0, |(v, _)| v);
        if x1_min >= x1_max || x2_min >= x2_max {
            return Err(raw.err(None, "window.x1_min", format!(
                "window must have positive extent, got [{x1_min}, {x1_max}] x [{x2_min}, {x2_max}]"
            )));
        }
        let window = Window { x1_min, x1_max, x2_min, x2_max };

        let seed = raw.take_u64("seed")?.map_or(0, |(v, _)| v);

        let records_name = match raw.take("output.records") {
            None => "records.csv".to_string(),
            Some((name, line)) => validated_name(&raw, "output.records", name, line)?,
        };
        let trajectories_name = match raw.take("output.trajectories") {
            None => "trajectories.csv".to_string(),
            Some((name, line)) => validated_name(&raw, "output.trajectories", name, line)?,
        };

        raw.reject_unknown()?;

        Ok(Scenario {
            path: raw.path,
            model,
            mode,
            y0,
            alpha,
            horizon,
            dt,
            checkpoints,
            grid,
            boundary_nodes,
            cells,
            window,
            seed,
            records_name,
            trajectories_name,
        })
    }

    pub fn config_err(&self, field: &str, message: String) -> CliError {
        CliError::Config { path: self.path.clone(), line: None, field: Some(field.into()), message }
    }

    pub fn total_steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    /// Step counts per checkpoint interval (fair split; empty at horizon 0).
    pub fn checkpoint_blocks(&self) -> Vec<usize> {
        if self.horizon == 0.0 {
            return Vec::new();
        }
        let steps = self.total_steps();
        let blocks = self.checkpoints - 1;
        let base = steps / blocks;
        let rem = steps % blocks;
        let sizes: Vec<usize> = (0..blocks).map(|b| base + usize::from(b < rem)).collect();
        assert!(sizes.iter().sum::<usize>() == steps);
        assert!(sizes.iter().all(|&s| s > 0));
        sizes
    }

    pub fn build_model(&self) -> CliResult<VorticityModel> {
        match &self.model {
            ModelSpec::CircularPatch => Ok(VorticityModel::circular_patch()),
            ModelSpec::Radial { radius, amplitude } => {
                let (r, a) = (*radius, *amplitude);
                Ok(VorticityModel::radial(
                    move |s| if s <= r { a } else { 0.0 },
                    vec![r],
                    r,
                ))
            }
            ModelSpec::ShearSine { width } => {
                let w = *width;
                VorticityModel::shear(move |s| (PI * s / w).sin(), -w, w, vec![]).map_err(|e| {
                    self.config_err("model.width", format!("shear profile rejected: {e}"))
                })
            }
            ModelSpec::Gaussian { sigma, support } => {
                let twice_var = 2.0 * sigma * sigma;
                Ok(VorticityModel::smooth(
                    move |x: Vec2| (-x.norm_sq() / twice_var).exp(),
                    *support,
                ))
            }
            ModelSpec::Ellipse { amplitude, .. } => {
                let nodes = self.initial_contour().expect("ellipse carries a contour");
                let curve = ClosedCurve::new(nodes).map_err(|e| {
                    self.config_err("model.semi_major", format!("ellipse contour rejected: {e}"))
                })?;
                Ok(VorticityModel::patch(curve, *amplitude))
            }
        }
    }

    /// Initial boundary polygon for patch-type kinds; None otherwise.
    pub fn initial_contour(&self) -> Option<Vec<Vec2>> {
        let n = self.boundary_nodes;
        let ring = |rx: f64, ry: f64| -> Vec<Vec2> {
            (0..n)
                .map(|i| {
                    let th = 2.0 * PI * i as f64 / n as f64;
                    Vec2::new(rx * th.cos(), ry * th.sin())
                })
                .collect()
        };
        match &self.model {
            ModelSpec::CircularPatch => Some(ring(1.0, 1.0)),
            ModelSpec::Radial { radius, .. } => Some(ring(*radius, *radius)),
            ModelSpec::Ellipse { semi_major, semi_minor, .. } => {
                Some(ring(*semi_major, *semi_minor))
            }
            _ => None,
        }
    }

    /// Patch amplitude for contour dynamics (patch-type kinds only).
    pub fn amplitude(&self) -> f64 {
        match &self.model {
            ModelSpec::CircularPatch => 1.0,
            ModelSpec::Radial { amplitude, .. } => *amplitude,
            ModelSpec::Ellipse { amplitude, .. } => *amplitude,
            _ => 1.0,
        }
    }

    /// Radius of a circle near the vorticity interface, used to center the
    /// corrector cutoff and to calibrate the |Y| floor. None for shear
    /// strips, whose interface is a horizontal line.
    pub fn interface_radius(&self) -> Option<f64> {
        match &self.model {
            ModelSpec::CircularPatch => Some(1.0),
            ModelSpec::Radial { radius, .. } => Some(*radius),
            ModelSpec::Ellipse { semi_major, semi_minor, .. } => {
                Some(0.5 * (semi_major + semi_minor))
            }
            ModelSpec::Gaussian { support, .. } => Some(0.5 * support),
            ModelSpec::ShearSine { .. } => None,
        }
    }

    /// Lagrangian cutoff at t = 0: an annular bump around the interface
    /// circle (so it vanishes at the origin, where azimuthal and rotational
    /// direction fields degenerate), or identically 1 for shear strips.
    pub fn chi0(&self) -> Box<dyn Fn(Vec2) -> f64 + Send + Sync> {
        match self.interface_radius() {
            Some(r) => {
                let delta = (2.0 * r).min(1.0);
                Box::new(boundary_cutoff(r, delta))
            }
            None => Box::new(|_| 1.0),
        }
    }

    /// Points straddling the vorticity interface, used to calibrate the
    /// |Y| floor and to reject degenerate Y0 choices up front.
    pub fn interface_samples(&self) -> Vec<Vec2> {
        if let Some(contour) = self.initial_contour() {
            return contour;
        }
        match &self.model {
            ModelSpec::Gaussian { support, .. } => {
                let r = 0.5 * support;
                (0..64)
                    .map(|i| {
                        let th = 2.0 * PI * i as f64 / 64.0;
                        Vec2::new(r * th.cos(), r * th.sin())
                    })
                    .collect()
            }
            ModelSpec::ShearSine { width } => (0..21)
                .map(|i| Vec2::new(0.3, width - 0.1 + 0.01 * i as f64))
                .collect(),
            _ => unreachable!("patch kinds returned their contour above"),
        }
    }

    pub fn y_field(&self) -> YField {
        match &self.y0 {
            YSpec::Constant(v) => YField::constant(*v),
            YSpec::Rotational => YField::rotational(),
            YSpec::Azimuthal => YField::azimuthal_unit(),
        }
    }

    /// Y0 at a point, or None where the field is undefined (the azimuthal
    /// unit field at the origin). Callers only need a value where the
    /// cutoff is active; elsewhere the corrector never evaluates Y.
    pub fn y0_value(&self, x: Vec2) -> Option<Vec2> {
        match &self.y0 {
            YSpec::Constant(v) => Some(*v),
            YSpec::Rotational => Some(x.perp()),
            YSpec::Azimuthal => {
                let r = x.norm();
                if r == 0.0 {
                    None
                } else {
                    Some(x.perp().scale(1.0 / r))
                }
            }
        }
    }

    /// Tracer grid across the window, row-major, endpoints included.
    pub fn grid_points(&self) -> Vec<Vec2> {
        let g = self.grid;
        if g == 0 {
            return Vec::new();
        }
        let w = self.window;
        let coord = |lo: f64, hi: f64, i: usize| {
            if g == 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * i as f64 / (g - 1) as f64
            }
        };
        let mut points = Vec::with_capacity(g * g);
        for j in 0..g {
            for i in 0..g {
                points.push(Vec2::new(
                    coord(w.x1_min, w.x1_max, i),
                    coord(w.x2_min, w.x2_max, j),
                ));
            }
        }
        points
    }

    /// Characteristic distance between neighboring tracers.
    pub fn grid_spacing(&self) -> f64 {
        let w = self.window;
        if self.grid < 2 {
            return (w.x1_max - w.x1_min).min(w.x2_max - w.x2_min);
        }
        let n = (self.grid - 1) as f64;
        ((w.x1_max - w.x1_min) / n).min((w.x2_max - w.x2_min) / n)
    }

    /// Fixed cell centers and areas for the discrete vorticity norms.
    pub fn cell_grid(&self) -> (Vec<Vec2>, Vec<f64>) {
        let n = self.cells;
        let w = self.window;
        let dx = (w.x1_max - w.x1_min) / n as f64;
        let dy = (w.x2_max - w.x2_min) / n as f64;
        let mut centers = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                centers.push(Vec2::new(
                    w.x1_min + dx * (i as f64 + 0.5),
                    w.x2_min + dy * (j as f64 + 0.5),
                ));
            }
        }
        let areas = vec![dx * dy; n * n];
        (centers, areas)
    }
}

fn validated_name(raw: &Raw, key: &str, name: String, line: usize) -> CliResult<String> {
    if name.contains('/') || name.contains('\\') {
        return Err(raw.err(Some(line), key, format!(
            "output names must be plain file names inside --out, got `{name}`"
        )));
    }
    Ok(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn load_from(body: &str) -> CliResult<Scenario> {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(body.as_bytes()).unwrap();
        Scenario::load(file.path())
    }

    const MINIMAL: &str = "model.kind = circular-patch\nalpha = 0.5\nhorizon = 0.0\ndt = 1e-3\n";

    #[test]
    fn minimal_scenario_gets_defaults() {
        let s = load_from(MINIMAL).unwrap();
        assert_eq!(s.mode, RunMode::Frozen);
        assert_eq!(s.y0, YSpec::Rotational);
        assert_eq!(s.grid, 8);
        assert_eq!(s.boundary_nodes, 128);
        assert_eq!(s.cells, 10);
        assert_eq!(s.seed, 0);
        assert_eq!(s.records_name, "records.csv");
        assert!(s.checkpoint_blocks().is_empty());
    }

    #[test]
    fn unknown_key_is_rejected_with_its_line() {
        let err = load_from("model.kind = circular-patch\nalpha = 0.5\nhorizon = 0.0\ndt = 1e-3\nmodle.radius = 2\n")
            .unwrap_err();
        let text = err.to_string();
        assert!(text.contains(":5"), "{text}");
        assert!(text.contains("modle.radius"), "{text}");
        assert!(text.contains("unknown key"), "{text}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn duplicate_key_cites_both_lines() {
        let err = load_from("model.kind = circular-patch\nalpha = 0.5\nalpha = 0.6\nhorizon = 0.0\ndt = 1e-3\n")
            .unwrap_err();
        let text = err.to_string();
        assert!(text.contains(":3"), "{text}");
        assert!(text.contains("line 2"), "{text}");
    }

    #[test]
    fn alpha_bounds_are_strict() {
        for bad in ["0", "1", "1.5", "-0.25"] {
            let body = format!("model.kind = circular-patch\nalpha = {bad}\nhorizon = 0.0\ndt = 1e-3\n");
            let err = load_from(&body).unwrap_err();
            assert!(err.to_string().contains("alpha"), "{err}");
        }
        assert!(load_from("model.kind = circular-patch\nalpha = 0.999\nhorizon = 0.0\ndt = 1e-3\n").is_ok());
    }

    #[test]
    fn nonpositive_dt_is_a_config_error() {
        for bad in ["0", "-1e-3", "nan"] {
            let body = format!("model.kind = circular-patch\nalpha = 0.5\nhorizon = 0.0\ndt = {bad}\n");
            let err = load_from(&body).unwrap_err();
            assert_eq!(err.exit_code(), 2);
            assert!(err.to_string().contains("dt"), "{err}");
        }
    }

    #[test]
    fn horizon_must_tile_into_steps() {
        let err = load_from("model.kind = circular-patch\nalpha = 0.5\nhorizon = 0.0015\ndt = 1e-3\n")
            .unwrap_err();
        assert!(err.to_string().contains("integer multiple"), "{err}");
        let s = load_from("model.kind = circular-patch\nalpha = 0.5\nhorizon = 0.01\ndt = 1e-3\ncheckpoints = 3\n")
            .unwrap();
        assert_eq!(s.total_steps(), 10);
        assert_eq!(s.checkpoint_blocks(), vec![5, 5]);
    }

    #[test]
    fn uneven_step_split_stays_fair() {
        let s = load_from("model.kind = circular-patch\nalpha = 0.5\nhorizon = 0.011\ndt = 1e-3\ncheckpoints = 4\n")
            .unwrap();
        assert_eq!(s.checkpoint_blocks(), vec![4, 4, 3]);
    }

    #[test]
    fn self_consistent_mode_requires_a_patch_kind() {
        let err = load_from("model.kind = gaussian\nmode = self-consistent\nalpha = 0.5\nhorizon = 0.0\ndt = 1e-3\n")
            .unwrap_err();
        assert!(err.to_string().contains("patch-type"), "{err}");
    }

    #[test]
    fn constant_y0_must_be_nonzero_and_complete() {
        let err = load_from("model.kind = circular-patch\ny0.kind = constant\ny0.x1 = 0\ny0.x2 = 0\nalpha = 0.5\nhorizon = 0.0\ndt = 1e-3\n")
            .unwrap_err();
        assert!(err.to_string().contains("nonzero"), "{err}");
        let err = load_from("model.kind = circular-patch\ny0.kind = constant\ny0.x1 = 1\nalpha = 0.5\nhorizon = 0.0\ndt = 1e-3\n")
            .unwrap_err();
        assert!(err.to_string().contains("y0.x2"), "{err}");
    }

    #[test]
    fn trailing_comments_and_blank_lines_are_ignored()
    {
        let s = load_from("# patch demo\nmodel.kind = circular-patch # unit disk\n\nalpha = 0.5\nhorizon = 0.0\ndt = 1e-3\n")
            .unwrap();
        assert_eq!(s.model, ModelSpec::CircularPatch);
    }

    #[test]
    fn cutoff_vanishes_at_origin_and_covers_the_interface() {
        let s = load_from(MINIMAL).unwrap();
        let chi = s.chi0();
        assert_eq!(chi(Vec2::ZERO), 0.0);
        assert_eq!(chi(Vec2::new(1.0, 0.0)), 1.0);
        assert_eq!(chi(Vec2::new(0.95, 0.0)), 1.0);
    }

    #[test]
    fn grid_layout_matches_counts_and_window() {
        let s = load_from("model.kind = circular-patch\nalpha = 0.5\nhorizon = 0.0\ndt = 1e-3\nmarkers.grid = 3\nwindow.x1_min = -1\nwindow.x1_max = 1\nwindow.x2_min = -1\nwindow.x2_max = 1\n")
            .unwrap();
        let pts = s.grid_points();
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[0], Vec2::new(-1.0, -1.0));
        assert_eq!(pts[4], Vec2::ZERO);
        assert_eq!(pts[8], Vec2::new(1.0, 1.0));
        assert_eq!(s.grid_spacing(), 1.0);
        let (centers, areas) = s.cell_grid();
        assert_eq!(centers.len(), 100);
        assert!((areas.iter().sum::<f64>() - 4.0).abs() < 1e-12);
    }
}
