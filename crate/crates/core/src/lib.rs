//! Exact input-output equations, transfer functions and identifiability
//! certificates for linear ODE and linear compartment models.

pub mod algebra;
pub mod error;
pub mod graph;
pub mod identifiability;
pub mod io_equations;
pub mod model;
pub mod report;
pub mod series;
pub mod transfer;

pub use error::{AlgebraError, AnalysisError, GraphError, ModelError, SeriesError};
