//! Multilinear Fourier multipliers: symbols, fast and reference evaluation,
//! Sobolev and Hörmander norms, symbol-class estimates and the
//! inhomogeneous decomposition of a symbol.

mod apply;
mod class;
mod decompose;
mod oracle;
mod sobolev;
mod symbol;

pub use apply::{apply_multiplier, apply_multiplier_naive, apply_multiplier_with, ApplyOptions};
pub use class::{critical_order, symbol_class_check, symbol_class_check_on, ClassConstant, ClassReport, TestFrequencies};
pub use decompose::{decompose_symbol, Decomposition, DecompositionReport};
pub use oracle::{apply_multiplier_oracle, CubicInterpolant};
pub use sobolev::{hormander_sup_norm, sobolev_norm, sobolev_norm_shifted, HormanderNorm};
pub use symbol::{model_symbol, model_symbol_centered, SymbolClass, SymbolKind, SymbolSpec};
