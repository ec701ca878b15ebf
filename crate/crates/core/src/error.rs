use thiserror::Error;

use crate::exact::ExactError;
use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("algorithm inapplicable: {0}")]
    Inapplicable(String),
    #[error("no-instance: habitat {habitat} induces a subgraph of diameter above two")]
    NoInstance { habitat: usize },
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}
