//! Constants, thresholds and certificates from the analysis of the
//! penalized log-determinant estimator.

mod bounds;
mod gamma;
mod tail;
mod witness;

pub use bounds::{
    delta_bar, lambda_practical, lambda_theory, predicted_bounds, threshold_ellinf, threshold_model_selection,
    PredictedBounds,
};
pub use gamma::{diagnostics, gamma_blocks, Diagnostics, GammaBlocks};
pub use tail::TailModel;
pub use witness::{
    noise_event_check, remainder, remainder_check, witness_construct, witness_construct_with, NoiseEvent,
    RemainderCheck, WitnessReport,
};

#[cfg(test)]
mod tests;
