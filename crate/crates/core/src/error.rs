use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient precision: {0}")]
    Precision(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("pole at index {index}: x coincides with an unperturbed phase carrying weight")]
    Pole { index: usize },

    #[error("trivial perturbation: lambda/hbar = {0} is a multiple of 2*pi")]
    TrivialPerturbation(f64),

    #[error("ensemble error: {0}")]
    Ensemble(String),

    #[error("unitarity defect {defect:e} exceeds tolerance {tolerance:e}")]
    Unitarity { defect: f64, tolerance: f64 },

    #[error("range error: {0}")]
    Range(String),

    #[error("provenance mismatch: {0}")]
    Provenance(String),

    #[error("resource limit: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;
