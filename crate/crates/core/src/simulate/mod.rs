//! Sample paths of Hermite motions and pathwise integration against them.

mod fgn;
mod hermite;
mod path;
mod stratonovich;

pub use fgn::{fgn_autocovariance, gen_fgn, FgnSampler, GaussianSequence};
pub use hermite::hermite_polynomial;
pub(crate) use path::interpolate as interpolate_clamped;
pub use path::{
    partial_sum_scale, simulate_fbm_exact, simulate_hermite_path, subordinate, subordinate_indexed, HermiteSimulator,
    PathMethod, SamplePath,
};
pub use stratonovich::{chain_rule_residual, stratonovich_integral, ChainRuleFn, StratonovichConfig};
