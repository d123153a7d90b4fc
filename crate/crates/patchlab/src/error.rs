//! Error types shared across the library.

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Kernel evaluated exactly at its singular point.
    #[error("kernel evaluated at its singular point")]
    KernelSingularity,

    /// Matrix operations refuse near-singular inputs instead of amplifying
    /// noise; the reconstruction and bound both carry 1/det factors.
    #[error("matrix too close to singular: det = {det:.3e}, threshold {threshold:.3e}")]
    DegenerateMatrix { det: f64, threshold: f64 },

    #[error("empty sample")]
    EmptySample,

    #[error("Hölder exponent must lie in (0,1): alpha = {0}")]
    InvalidAlpha(f64),

    /// The annular cutoff needs the inner bridge to finish before the
    /// plateau starts.
    #[error("annular cutoff requires 0 < 2h < r: r = {r}, h = {h}")]
    InvalidCutoffRadii { r: f64, h: f64 },

    #[error("quadrature failed to converge ({context}): last gap {gap:.3e}")]
    QuadratureNonConvergence { context: &'static str, gap: f64 },

    #[error("degenerate curve: {0}")]
    DegenerateCurve(&'static str),

    #[error("operation requires a radial or shear model")]
    ModelKindMismatch,

    /// Evaluation requested inside the snap band around a vorticity jump,
    /// where the velocity gradient genuinely jumps; flagged, never averaged.
    #[error("point within {distance:.3e} of a vorticity jump (snap tolerance {snap:.3e})")]
    BoundaryProximity { distance: f64, snap: f64 },

    #[error("|Y| = {norm:.3e} below floor {floor:.3e} inside the cutoff support")]
    VectorFloorViolation { norm: f64, floor: f64 },

    #[error("marker {index}: {source}")]
    MarkerEvaluation {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("Gronwall envelope h must be monotone (nondecreasing or nonincreasing)")]
    NonMonotoneEnvelope,

    #[error("flow state carries no {0} labels")]
    MissingCarriedData(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Wraps an error with the index of the marker that produced it.
    pub fn at_marker(self, index: usize) -> Error {
        Error::MarkerEvaluation {
            index,
            source: Box::new(self),
        }
    }
}
