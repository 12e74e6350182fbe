//! Power-type weights, sampled Muckenhoupt constants and the counterexample
//! weights used by the sharpness experiments.

mod constants;
mod counterexample;
mod expr;
mod norm;

pub use constants::{
    ap_constant, ap_cube_value, cube_average, infimum_on_cube, lemma_g_check, multi_ap_constant,
    multi_ap_cube_value, self_improvement_probe, ComponentConstant, LemmaGReport, Verdict,
};
pub use counterexample::{counterexample_weights, CounterexampleParams};
pub use expr::{power_membership, v_weight, ExponentTuple, Factor, MultiWeight, WeightExpr};
pub use norm::{weighted_lp_norm, weighted_lp_norm_on, Region};
