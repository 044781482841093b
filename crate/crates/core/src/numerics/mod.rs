//! Scalar building blocks shared by every other module.

pub mod dd;
pub mod gamma;
pub mod quadrature;
pub mod quadrature_dd;
pub mod series;
pub mod signed_log;

pub use dd::DoubleDouble;
pub use gamma::{ln_factorial, ln_gamma, log_gamma, log_pochhammer, log_recip_gamma, recip_gamma, sin_pi};
pub use quadrature_dd::{Abscissa, DdIntegrator, DdRule};
pub use quadrature::{
    integrate_half_line, integrate_interval, integrate_weighted, integrate_weighted_power, rational_denominator, GaussRule,
};
pub use series::{sum_series, NeumaierSum, SeriesConfig, SeriesSum};
pub use signed_log::{sum_signed_logs, SignedLogValue};
