use std::fmt;

/// Failure classified by exit code: 2 for usage or configuration problems,
/// 1 for everything that goes wrong at run time.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn usage(msg: impl fmt::Display) -> Self {
        CliError {
            code: 2,
            error: anyhow::anyhow!("{msg}"),
        }
    }

    pub fn runtime(err: impl Into<anyhow::Error>) -> Self {
        CliError {
            code: 1,
            error: err.into(),
        }
    }

    pub fn kind(&self) -> &'static str {
        if self.code == 2 {
            "usage"
        } else {
            "runtime"
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::runtime(e)
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;
