//! Tolerances used by the checks and the acceptance battery.

/// Pure Clifford and curvature identities: only rounding error is expected.
pub const IDENTITY: f64 = 1e-11;

/// Checks on model data, which carry kernel-extraction noise.
pub const MODEL: f64 = 1e-9;

/// Relative singular-value threshold for numeric kernels.
pub const KERNEL_RELATIVE: f64 = 1e-8;

/// Exact index symmetries of generated tensors.
pub const SYMMETRY: f64 = 1e-12;

/// Parallel-constraint residual a datum must meet before it is accepted.
pub const PARALLEL: f64 = 1e-9;
