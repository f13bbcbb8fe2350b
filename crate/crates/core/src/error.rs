use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("{what} is not a probability distribution (sum {sum}, min entry {min})")]
    NotADistribution { what: String, sum: f64, min: f64 },
    #[error("reward of state {state} is not finite")]
    NonFiniteReward { state: usize },
    #[error("length mismatch in {what}: expected {expected}, found {found}")]
    LengthMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("{what} index {index} out of range (bound {bound})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },
    #[error("agent returned action {action} at time {time}, which is not admissible")]
    AgentOutOfRange { time: usize, action: usize },
    #[error("action {action} is not admissible in state {state}")]
    InadmissibleAction { state: usize, action: usize },
    #[error("state {state} has no admissible action")]
    NoAdmissibleAction { state: usize },
    #[error("no admissible action sequence from the current state")]
    NoAdmissibleSequence,
    #[error("time {time} out of range for horizon {horizon}")]
    TimeOutOfRange { time: usize, horizon: usize },
    #[error("{what}: enumeration size {size} exceeds guard {limit}")]
    TooLarge {
        what: &'static str,
        size: u128,
        limit: u128,
    },
    #[error("inverse temperature must be positive and finite, got {0}")]
    NonPositiveBeta(f64),
    #[error("observations have zero probability under the model (first failure at time {time})")]
    ImpossibleObservation { time: usize },
    #[error("Dirichlet column for state {state} has no positive entry")]
    ZeroColumn { state: usize },
    #[error("parameter {param} = {value} out of range")]
    OutOfRange { param: &'static str, value: f64 },
}

impl Error {
    /// True for errors raised by an enumeration guard.
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::TooLarge { .. })
    }

    pub(crate) fn dims(what: &str, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            what: what.into(),
            expected,
            found,
        }
    }

    pub(crate) fn len(what: &str, expected: usize, found: usize) -> Self {
        Error::LengthMismatch {
            what: what.into(),
            expected,
            found,
        }
    }
}
