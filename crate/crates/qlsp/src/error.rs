use std::path::PathBuf;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] qlsp_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },
}

impl CliError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    /// Process exit status: 2 invalid config, 3 conditioning, 4 post-selection,
    /// 5 fit failure, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use qlsp_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e.root() {
                E::InvalidInput(_) => 2,
                E::Conditioning { .. } => 3,
                E::PostSelection { .. } => 4,
                E::Fit(_) => 5,
                _ => 1,
            },
            _ => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qlsp_core::Error as E;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::config("x").exit_code(), 2);
        assert_eq!(CliError::from(E::Conditioning { sigma_min: 0.01, max_kappa: 32.0 }).exit_code(), 3);
        let wrapped = E::AtStep { step: 4, source: Box::new(E::PostSelection { probability: 0.0 }) };
        assert_eq!(CliError::from(wrapped).exit_code(), 4);
        assert_eq!(CliError::from(E::Fit("nan".into())).exit_code(), 5);
        assert_eq!(CliError::from(E::NonConvergence { residual: 1.0 }).exit_code(), 1);
    }
}
