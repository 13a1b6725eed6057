pub mod correlate;
pub mod delta_ratio;
pub mod dropout_baseline;
pub mod fit_estimator;
pub mod prepare_data;
pub mod run_ensemble;
