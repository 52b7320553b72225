//! Model types, the model description language, and the compartment to
//! state-space conversion.

mod compartment;
pub mod expr;
mod linear;
mod parse;
mod print;

pub use compartment::{CompartmentModel, Edge};
pub use linear::LinearModel;
pub use parse::parse_model;
pub use print::print_model;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Model {
    Linear(LinearModel),
    Compartment(CompartmentModel),
}

impl Model {
    pub fn name(&self) -> &str {
        match self {
            Model::Linear(m) => &m.name,
            Model::Compartment(m) => &m.name,
        }
    }

    /// State-space form; compartment models are converted.
    pub fn to_linear(&self) -> LinearModel {
        match self {
            Model::Linear(m) => m.clone(),
            Model::Compartment(cm) => cm.to_state_space(),
        }
    }

    pub fn as_compartment(&self) -> Option<&CompartmentModel> {
        match self {
            Model::Compartment(cm) => Some(cm),
            Model::Linear(_) => None,
        }
    }
}

impl std::str::FromStr for Model {
    type Err = crate::error::ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_model(s)
    }
}
