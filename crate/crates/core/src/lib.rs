//! Pluralistic well-being modelling: value functions over scoped layers,
//! cross-scope coupling, survey-fitted targets, simulated policy sweeps,
//! ranking, and logic-model impact propagation.

pub mod cli;
pub mod coupling;
pub mod error;
pub mod evaluator;
pub mod format;
pub mod logicmodel;
pub mod matrix;
pub mod scenario;
pub mod sim;
pub mod survey;
pub mod valuefn;
pub mod we_model;

pub use error::{Error, Result};
