use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// The selected ancilla outcome has zero amplitude.
    #[error("post-selection failed: outcome probability {probability:e}")]
    PostSelection { probability: f64 },

    /// No κ on the ladder satisfies `1/κ < σ_min`.
    #[error("matrix too ill-conditioned: sigma_min = {sigma_min:e}, largest allowed kappa = {max_kappa}")]
    Conditioning { sigma_min: f64, max_kappa: f64 },

    #[error("phase finding stalled with max node residual {residual:e}")]
    NonConvergence { residual: f64 },

    #[error("phase conversion identity violated by {distance:e}")]
    Conversion { distance: f64 },

    #[error("explicit integration unstable: {0}")]
    Stability(String),

    #[error("curve fit failed: {0}")]
    Fit(String),

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::ResourceLimit(msg.into())
    }

    /// Strips [`Error::AtStep`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            other => other,
        }
    }
}
