//! Gamma and Mittag-Leffler functions on the real line.

pub mod gamma;
pub mod mittag_leffler;

pub use gamma::{gamma, ln_gamma, rgamma};
pub use mittag_leffler::{
    ml_asymptotic, ml_eval, ml_general, ml_negative_integral, ml_series, ml_y_eval, phi_eval,
    AsymptoticSum, EvalConfig, MLIndex, SeriesSum,
};
