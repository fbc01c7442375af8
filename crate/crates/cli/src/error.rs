use thiserror::Error;
use tweetscope_core::aggregate::AggregateError;
use tweetscope_core::controversy::ControversyError;
use tweetscope_core::ingest::IngestError;
use tweetscope_core::lexicon::LexiconError;
use tweetscope_core::topics::TopicError;

/// Failure classes, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn write(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Internal(format!("writing {}: {e}", path.display()))
    }
}

macro_rules! data_errors {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.to_string())
            }
        })*
    };
}

data_errors!(IngestError, LexiconError, ControversyError, AggregateError, tweetscope_api::LoadError);

impl From<TopicError> for CliError {
    fn from(e: TopicError) -> Self {
        match e {
            TopicError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}
