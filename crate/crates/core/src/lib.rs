//! Pull-SMS examination result checking with knowledge-based challenge
//! authentication.
//!
//! A student texts `G <matric> <semester> <session>` (grades) or
//! `C <matric> <semester> <session>` (GPA/CGPA). The gateway answers with
//! security questions drawn from the student's enrolment record, checks the
//! reply, and only then sends the requested results.
//!
//! - [`grammar`]: command parsing, answer normalization, segmentation
//! - [`auth`]: challenge sessions, attempts, expiry, lockout
//! - [`records`]: students, results, GPA/CGPA, message and audit logs
//! - [`gateway`]: the per-message dispatcher and reply rendering
//! - [`sim`]: simulated modem/SMSC, script replay, HTTP interface

pub mod auth;
pub mod clock;
pub mod gateway;
pub mod grammar;
pub mod message;
pub mod records;
pub mod sim;

pub use auth::{AuthEngine, AuthPolicy, ChallengeOutcome, SecurityQA};
pub use clock::{Clock, Seconds, SystemClock, Timestamp, VirtualClock};
pub use gateway::{Gateway, GatewayConfig};
pub use grammar::{format_command, normalize_answer, parse_command, segment_text, Command, MatricNo};
pub use message::{Direction, Msisdn, SmsMessage};
pub use records::{RecordsStore, StudentRecord};
pub use sim::SmsCenter;
