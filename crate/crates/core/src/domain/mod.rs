//! Abstract domains: intervals, normalized interval unions with a
//! divergence atom, and the built-in forward analyses.

pub mod analyze;
pub mod interval;
pub mod output;

pub use analyze::{interval_analyze, sign_analyze, AbstractEnv};
pub use interval::{Interval, IntervalError};
pub use output::{signs, AbstractOutput};
