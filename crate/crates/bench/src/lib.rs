//! Criterion benches for the numerical kernels; see `benches/`.
