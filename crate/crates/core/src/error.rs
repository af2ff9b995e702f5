use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma function pole at z = {z}")]
    GammaPole { z: Complex64 },

    #[error("no vertical contour separates the pole families: {0}")]
    NonSeparable(String),

    #[error(
        "quadrature did not converge: tail {tail:.3e} above tolerance {bound:.3e} \
         (half-width {half_width}, {nodes} nodes, limit {max_nodes})"
    )]
    NonConvergent { tail: f64, bound: f64, half_width: f64, nodes: usize, max_nodes: usize },

    #[error("imaginary residual {imag:.3e} exceeds bound {bound:.3e} (real part {real:.6e})")]
    ImaginaryResidual { real: f64, imag: f64, bound: f64 },

    #[error("parameter-degenerate configuration: {0}")]
    ParameterDegenerate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
