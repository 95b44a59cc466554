use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("invalid input: {0}")]
    Validation(String),

    /// Every s-t path is made of infinite-capacity arcs, so no finite cut exists.
    #[error("no finite s-t cut exists (contradictory hard constraints)")]
    InfeasibleCut,

    #[error("refinement seeds cannot be satisfied together: {}", describe_conflicts(.conflicts))]
    ConflictingRefinements { conflicts: Vec<(String, String)> },
}

fn describe_conflicts(conflicts: &[(String, String)]) -> String {
    conflicts
        .iter()
        .map(|(a, b)| format!("{a} vs {b}"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn format(offset: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for errors caused by bad caller input rather than a failed operation.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation(_) | Error::Format { .. })
    }
}
