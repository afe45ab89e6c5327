//! Input data model shared by the analysis and the reference oracle:
//! pipeline descriptions and programs (CFGs of classified instructions).
//! Deliberately free of any diagram machinery.

pub mod loops;
pub mod pipeline;
pub mod program;

pub use pipeline::{FuncUnit, PipelineSpec, Queue, Stage, StageRole};
pub use program::{
    AccessKind, BasicBlock, BlockId, Cfg, Classification, EventSpec, InstrClass,
    InstructionDescriptor,
};

use thiserror::Error;

#[derive(Error, Debug)]
pub enum IrError {
    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },

    #[error("invalid input at {location}: {message}")]
    Validation { location: String, message: String },

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl IrError {
    pub fn invalid(location: impl Into<String>, message: impl Into<String>) -> IrError {
        IrError::Validation {
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn from_toml(err: toml::de::Error) -> IrError {
        let location = err
            .span()
            .map(|s| format!("bytes {}..{}", s.start, s.end))
            .unwrap_or_else(|| "document".to_string());
        IrError::Schema {
            location,
            message: err.message().to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, IrError>;

/// Reads and validates a pipeline description file.
pub fn load_pipeline(path: &std::path::Path) -> Result<PipelineSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| IrError::Io {
        path: path.display().to_string(),
        source,
    })?;
    PipelineSpec::parse(&text)
}

/// Reads and validates a program file.
pub fn load_program(path: &std::path::Path) -> Result<Cfg> {
    let text = std::fs::read_to_string(path).map_err(|source| IrError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Cfg::parse(&text)
}
