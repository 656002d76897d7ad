use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("xml parse error at line {line}: {message}")]
    Xml { line: usize, message: String },

    #[error("case '{case_id}': event {event_index} is missing {missing}")]
    MissingAttribute {
        case_id: String,
        event_index: usize,
        missing: &'static str,
    },

    #[error("csv row {row}: {message}")]
    Csv { row: usize, message: String },

    #[error("configuration: {0}")]
    Config(String),

    #[error("invalid log: {0}")]
    InvalidLog(String),

    #[error("log is empty")]
    EmptyLog,

    #[error("split: {0}")]
    Split(String),

    #[error("prediction time {t0} lies before the first event at {start}")]
    BeforeCaseStart { t0: i64, start: i64 },

    #[error("transition {0} is not enabled")]
    NotEnabled(usize),

    #[error("invalid net: {0}")]
    InvalidNet(String),

    #[error("not a workflow net: {0}")]
    WorkflowShape(String),

    #[error("unsound workflow net: {0}")]
    Unsound(String),

    #[error("replay failed at event {event_index} ('{activity}'): {reason}")]
    Replay {
        event_index: usize,
        activity: String,
        reason: String,
    },

    #[error("enrichment failed on case '{case_id}': {source}")]
    Enrich {
        case_id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("pnml: {0}")]
    Pnml(String),

    #[error("simulation: {aborted} of {runs} runs aborted")]
    SimulationAborted { aborted: usize, runs: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag, used for one-line error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io(_) => "io",
            Error::Xml { .. } => "xml",
            Error::MissingAttribute { .. } => "missing_attribute",
            Error::Csv { .. } => "csv",
            Error::Config(_) => "config",
            Error::InvalidLog(_) | Error::EmptyLog => "log",
            Error::Split(_) => "split",
            Error::BeforeCaseStart { .. } => "prefix",
            Error::NotEnabled(_) | Error::InvalidNet(_) => "net",
            Error::WorkflowShape(_) | Error::Unsound(_) => "workflow_net",
            Error::Replay { .. } => "replay",
            Error::Enrich { .. } => "enrich",
            Error::Pnml(_) => "pnml",
            Error::SimulationAborted { .. } => "simulation",
            Error::InvalidArgument(_) => "argument",
            Error::Json(_) => "json",
        }
    }
}
