//! Code and carrier tracking machinery: discriminators, scalar loop
//! filters, open/closed-loop error-variance models, C/N0 estimation and
//! lock detection.

pub mod cn0;
pub mod discriminators;
pub mod loops;
pub mod variance;

pub use cn0::{Cn0Estimator, LockConfig, LockDetector, LockStatus};
pub use discriminators::{costas_discriminator, ddcp_fll_discriminator, emlp_discriminator};
pub use loops::{
    dll_filter_update, pll_filter_update, DllConfig, FllConfig, LoopFilterState, PllConfig,
};
pub use variance::{closed_loop_variance, open_loop_code_variance, open_loop_freq_variance};
