use std::process::ExitCode;

use serde_json::json;

#[derive(Debug)]
pub enum Failure {
    /// Bad invocation: unknown name, missing argument, invalid value.
    Usage { message: String, valid: Vec<String> },
    Config(String),
    Core(readtask::Error),
}

impl From<readtask::Error> for Failure {
    fn from(e: readtask::Error) -> Self {
        match e {
            readtask::Error::UnknownName { ref valid, .. } => Failure::Usage {
                message: e.to_string(),
                valid: valid.clone(),
            },
            e => Failure::Core(e),
        }
    }
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Failure {
        Failure::Usage {
            message: message.into(),
            valid: Vec::new(),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage { .. } => "usage",
            Failure::Config(_) => "config",
            Failure::Core(e) => e.kind(),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Usage { .. } | Failure::Config(_) | Failure::Core(readtask::Error::Parameter(_)) => ExitCode::from(2),
            Failure::Core(_) => ExitCode::from(1),
        }
    }

    /// One-line JSON error record.
    pub fn record(&self) -> String {
        let message = match self {
            Failure::Usage { message, .. } | Failure::Config(message) => message.clone(),
            Failure::Core(e) => e.to_string(),
        };
        let mut v = json!({"error": {"kind": self.kind(), "message": message}});
        if let Failure::Usage { valid, .. } = self {
            if !valid.is_empty() {
                v["error"]["valid"] = json!(valid);
            }
        }
        v.to_string()
    }
}
