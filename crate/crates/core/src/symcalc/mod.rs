//! Symbol classes, composition, characteristic sets and parametrices.

mod charset;
mod class;
mod compose;
mod parametrix;
mod sampled;
mod symbol;

pub use charset::{char_set, CharRecord, CharSetConfig, CharSetEstimate};
pub use class::{check_symbol_class, check_symbol_class_with, ellipticity_margin};
pub use compose::{compose_symbols, MAX_ORDER};
pub use parametrix::{parametrix, ParametrixConfig, ParametrixResult, ResidualReport, RESIDUAL_FLOOR, RESIDUAL_SLOPE};
pub use sampled::{SampledSymbol, SymbolGrid};
pub use symbol::{smooth_step_s, ConeRegion, SymbolDef, SymbolFile, SymbolSpec};
