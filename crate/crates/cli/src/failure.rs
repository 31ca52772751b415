//! Exit codes: 0 ok, 2 validation, 3 not informative, 4 inconsistent initial
//! conditions, 5 rank deficiency, 6 stage failure.

use std::path::Path;

use jetsim_core::Error;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
    pub hint: Option<String>,
}

impl Failure {
    pub fn new(code: u8, kind: &'static str, message: impl Into<String>) -> Self {
        Self { code, kind, message: message.into(), hint: None }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(2, "validation", message)
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(2, "parse", message)
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self::new(2, "io", format!("{}: {err}", path.display()))
    }

    pub fn with_hint(mut self, hint: impl Into<String>) -> Self {
        self.hint = Some(hint.into());
        self
    }

    /// Prefixes the message with the file it concerns.
    pub fn in_file(mut self, path: &Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let message = err.to_string();
        match err {
            Error::NotInformative(_) => Self::new(3, "not_informative", message)
                .with_hint("use --force to simulate anyway"),
            Error::InconsistentInitialConditions { .. } => Self::new(4, "init_inconsistent", message),
            Error::RankDeficient { .. } => {
                Self::new(5, "rank_deficient", message).with_hint("retry with --mode implicit_lsq")
            }
            Error::StageFailure { .. } => Self::new(6, "stage_failure", message),
            Error::Parse { .. } | Error::Csv(_) => Self::parse(message),
            Error::Io(_) => Self::new(2, "io", message),
            _ => Self::validation(message),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simulator_errors_get_distinct_codes() {
        let codes: Vec<u8> = [
            Error::NotInformative("not_informative".into()),
            Error::InconsistentInitialConditions { residual: 1.0, tol: 1e-6 },
            Error::RankDeficient { t: 0.0, rank: 4, rows: 5 },
            Error::StageFailure { t: 0.0, residual: 1.0, tol: 1e-6 },
            Error::InvalidArgument("x".into()),
        ]
        .into_iter()
        .map(|e| Failure::from(e).code)
        .collect();
        assert_eq!(codes, vec![3, 4, 5, 6, 2]);
    }
}
