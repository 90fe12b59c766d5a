//! Gateway configuration and its `key = value` file format.
//!
//! ```text
//! # challenge policy
//! challenge_width = 2
//! max_attempts = 3
//! session_ttl = 300      # seconds
//! lockout_ttl = 1800     # seconds
//! rng_seed = 42          # optional, for reproducible runs
//! template.grades = RESULT {matric} S{sem} {session}: {body}
//! ```
//!
//! Template values may use `{matric}`, `{sem}`, `{session}` and `{body}`.

use std::path::Path;

use crate::auth::AuthPolicy;
use crate::clock::Seconds;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplyTemplates {
    pub grades: String,
    pub cgpa: String,
    pub questions: String,
    pub retry: String,
    pub locked: String,
    /// Shared by lockout refusals and unknown matric numbers.
    pub refused: String,
    pub no_results: String,
    pub expired: String,
    pub parse_error: String,
}

impl Default for ReplyTemplates {
    fn default() -> Self {
        ReplyTemplates {
            grades: "RESULT {matric} S{sem} {session}: {body}".into(),
            cgpa: "CGPA {matric} S{sem} {session}: {body}".into(),
            questions: "SECURITY CHECK {matric}: {body} Reply with the answers in order, separated by ;".into(),
            retry: "INCORRECT ANSWERS. {body} Reply with the answers in order, separated by ;".into(),
            locked: "TOO MANY INCORRECT ANSWERS. Requests for {matric} from this phone are suspended. Try again later."
                .into(),
            refused: "REQUEST CANNOT BE PROCESSED. Check your details or try again later.".into(),
            no_results: "No results published for {matric} S{sem} {session}.".into(),
            expired: "SESSION EXPIRED. Send your request again.".into(),
            parse_error: "INVALID REQUEST: {body}. Send H for help.".into(),
        }
    }
}

impl ReplyTemplates {
    fn slot(&mut self, name: &str) -> Option<&mut String> {
        Some(match name {
            "grades" => &mut self.grades,
            "cgpa" => &mut self.cgpa,
            "questions" => &mut self.questions,
            "retry" => &mut self.retry,
            "locked" => &mut self.locked,
            "refused" => &mut self.refused,
            "no_results" => &mut self.no_results,
            "expired" => &mut self.expired,
            "parse_error" => &mut self.parse_error,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GatewayConfig {
    pub auth: AuthPolicy,
    pub rng_seed: Option<u64>,
    pub templates: ReplyTemplates,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("config: {0}")]
    Invalid(String),
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
}

impl GatewayConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let a = &self.auth;
        if a.challenge_width < 1 {
            return Err(ConfigError::Invalid("challenge_width must be at least 1".into()));
        }
        if a.max_attempts < 1 {
            return Err(ConfigError::Invalid("max_attempts must be at least 1".into()));
        }
        if a.session_ttl.0 == 0 || a.lockout_ttl.0 == 0 {
            return Err(ConfigError::Invalid("ttls must be positive".into()));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Parses the `key = value` format, starting from the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config = GatewayConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| ConfigError::Line { line: line_no, message };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());

            if let Some(name) = key.strip_prefix("template.") {
                let slot = config
                    .templates
                    .slot(name)
                    .ok_or_else(|| err(format!("unknown template {name:?}")))?;
                *slot = value.to_owned();
                continue;
            }

            // Numeric values may carry a trailing comment.
            let value = value.split('#').next().unwrap_or_default().trim();
            let number = || {
                value
                    .parse::<u64>()
                    .map_err(|_| err(format!("{key}: expected a non-negative integer, got {value:?}")))
            };
            match key {
                "challenge_width" => config.auth.challenge_width = number()? as usize,
                "max_attempts" => {
                    config.auth.max_attempts =
                        u32::try_from(number()?).map_err(|_| err("max_attempts too large".into()))?
                }
                "session_ttl" => config.auth.session_ttl = Seconds(number()?),
                "lockout_ttl" => config.auth.lockout_ttl = Seconds(number()?),
                "rng_seed" => config.rng_seed = Some(number()?),
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        config.validate()?;
        Ok(config)
    }
}
