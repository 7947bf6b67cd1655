use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} = {value} is outside the domain of the function")]
    Domain { name: &'static str, value: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("no base station fell inside the simulation region after {attempts} attempts")]
    EmptyRegion { attempts: usize },

    #[error("no feasible assignment: {0}")]
    Infeasible(String),

    #[error("instance too large for exhaustive search ({combinations} combinations, limit {limit})")]
    TooLarge { combinations: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field: field.to_string(),
        reason: reason.into(),
    }
}
