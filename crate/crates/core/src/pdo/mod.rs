//! Pseudo-differential operators on sampled fields.

mod apply;
mod oracle;
mod quant;

pub use apply::{apply_op, apply_op_mode, full_quadrature_limit, ApplyMode, OperatorPlan};
pub use oracle::{kernel_oracle, KernelMatrix, ORACLE_MAX_N};
pub use quant::{calibration, convert_quantization, convert_symbol, quantization_sign, Calibration, CALIBRATION_TOLERANCE};
