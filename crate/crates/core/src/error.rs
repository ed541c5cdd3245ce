use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("quadrature did not converge after {nodes} nodes (last relative change {estimate:.3e})")]
    QuadratureNonConvergence { nodes: usize, estimate: f64 },

    #[error("grid resolution insufficient: halving the step changed the value by {relative:.3e} (relative)")]
    GridResolution { coarse: f64, fine: f64, relative: f64 },

    #[error("truncation tail certificate {tail:.3e} exceeds tolerance {tolerance:.3e} in sector l = {l}")]
    TruncationTail { l: usize, tail: f64, tolerance: f64 },

    #[error("|k| = {modulus:.3e} lies outside the punctured disk of radius {radius:.3e}")]
    OutsideDisk { modulus: f64, radius: f64 },

    #[error("|z| = {modulus:.3e} exceeds the enforced series radius {radius:.3e}")]
    SeriesRadius { modulus: f64, radius: f64 },

    #[error("near-singular contour node at k = {re:.6e}{im:+.6e}i (pivot ratio {ratio:.3e}); perturb the contour")]
    NearSingularNode { re: f64, im: f64, ratio: f64 },

    #[error("contour integral not integral: value {value:.6e}, residual {residual:.3e} with {nodes} nodes")]
    NonIntegerIndex { value: f64, residual: f64, nodes: usize },

    #[error("derivative estimates disagree: Richardson error {error:.3e} exceeds tolerance {tolerance:.3e}")]
    NoisyDerivative { error: f64, tolerance: f64 },

    #[error("index additivity violated: parent {parent}, children sum {children}")]
    IndexAdditivity { parent: i64, children: i64 },

    #[error("spectral parameter collides with the spectrum of the spin-down block: {0}")]
    SpectrumCollision(String),

    #[error("power-law hypothesis violated: {0}")]
    PowerLawViolated(String),
}

pub type Result<T> = std::result::Result<T, Error>;
