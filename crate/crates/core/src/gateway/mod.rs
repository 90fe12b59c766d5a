//! The dispatcher for the four-leg exchange:
//!
//! 1. handset sends `G`/`C` request
//! 2. gateway replies with security questions
//! 3. handset sends answers
//! 4. gateway replies with grades or GPA/CGPA
//!
//! Every inbound message gets at least one reply. Faults never surface on
//! the wire as anything other than a well-formed reply; only storage errors
//! propagate to the caller.

mod config;
mod render;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tracing::debug;

pub use config::{ConfigError, GatewayConfig, ReplyTemplates};
pub use render::{fill, render_cgpa_reply, render_grades_reply, render_help};

use crate::auth::{AuthEngine, AuthError, AuthSession, ChallengeOutcome, SessionState};
use crate::clock::Timestamp;
use crate::grammar::{format_command, parse_command, segment_text, Command, MatricNo, Query};
use crate::message::{Direction, Msisdn, SmsMessage};
use crate::records::{AuditEvent, RecordsError, RecordsStore};

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error(transparent)]
    Storage(#[from] RecordsError),
    #[error("handle_inbound called with an outbound message")]
    NotInbound,
}

pub struct Gateway {
    config: GatewayConfig,
    store: RecordsStore,
    auth: AuthEngine,
    rng: ChaCha8Rng,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("config", &self.config)
            .field("store", &self.store.data_dir())
            .finish_non_exhaustive()
    }
}

/// What the dispatcher decided to say, before segmentation.
struct Reply {
    text: String,
    matric: Option<MatricNo>,
}

impl Reply {
    fn new(text: String, matric: Option<&MatricNo>) -> Self {
        Reply {
            text,
            matric: matric.cloned(),
        }
    }
}

impl Gateway {
    pub fn new(config: GatewayConfig, store: RecordsStore) -> Self {
        let rng = match config.rng_seed {
            Some(seed) => ChaCha8Rng::seed_from_u64(seed),
            None => ChaCha8Rng::from_os_rng(),
        };
        Gateway {
            auth: AuthEngine::new(config.auth),
            config,
            store,
            rng,
        }
    }

    pub fn config(&self) -> &GatewayConfig {
        &self.config
    }

    pub fn store(&self) -> &RecordsStore {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut RecordsStore {
        &mut self.store
    }

    pub fn auth(&self) -> &AuthEngine {
        &self.auth
    }

    pub fn into_store(self) -> RecordsStore {
        self.store
    }

    /// Runs one inbound SMS through parse, authenticate, fulfil and render,
    /// returning the outbound segments in send order.
    pub fn handle_inbound(&mut self, msg: &SmsMessage, now: Timestamp) -> Result<Vec<SmsMessage>, GatewayError> {
        if msg.direction != Direction::Inbound {
            return Err(GatewayError::NotInbound);
        }
        let phone = &msg.phone;
        self.store.log_message(Direction::Inbound, phone, &msg.body, now)?;

        for expired in self.auth.expire_sessions_detailed(now) {
            self.store.log_audit(
                now,
                &expired.phone,
                Some(&expired.matric),
                AuditEvent::SessionExpired,
                format!("deadline {} passed", expired.deadline),
            )?;
        }

        let in_answer_context = self
            .auth
            .session(phone)
            .is_some_and(|s| matches!(s.state, SessionState::AwaitingAnswers | SessionState::Expired));
        let reply = match parse_command(&msg.body, in_answer_context) {
            Ok(cmd) => {
                let detail = match &cmd {
                    Command::Answers(items) => format!("answers ({} items)", items.len()),
                    other => format_command(other),
                };
                let matric = cmd.query().map(|q| &q.matric);
                self.store
                    .log_audit(now, phone, matric, AuditEvent::CommandParsed, detail)?;
                self.dispatch(phone, cmd, now)?
            }
            Err(err) => {
                self.store
                    .log_audit(now, phone, None, AuditEvent::ParseRejected, err.to_string())?;
                Reply::new(self.config.templates.render_parse_error(&err), None)
            }
        };

        let segments = segment_text(&reply.text).unwrap_or_else(|e| {
            debug!(error = %e, "reply could not be segmented");
            vec![self.config.templates.render_refused()]
        });
        let mut out = Vec::with_capacity(segments.len());
        for body in segments {
            self.store.log_message(Direction::Outbound, phone, &body, now)?;
            out.push(SmsMessage {
                direction: Direction::Outbound,
                phone: phone.clone(),
                body,
                timestamp: now,
            });
        }
        self.store.log_audit(
            now,
            phone,
            reply.matric.as_ref(),
            AuditEvent::ReplySent,
            format!("{} segment(s)", out.len()),
        )?;
        Ok(out)
    }

    fn dispatch(&mut self, phone: &Msisdn, cmd: Command, now: Timestamp) -> Result<Reply, GatewayError> {
        match cmd {
            Command::Answers(items) => self.on_answers(phone, &items, now),
            Command::Help(_) => {
                self.supersede(phone, now)?;
                Ok(Reply::new(render_help(), None))
            }
            Command::Grades(_) | Command::Cgpa(_) => {
                self.supersede(phone, now)?;
                self.on_request(phone, cmd, now)
            }
        }
    }

    /// Drops any session the phone holds; a live one is audited as superseded.
    fn supersede(&mut self, phone: &Msisdn, now: Timestamp) -> Result<(), GatewayError> {
        if let Some(old) = self.auth.cancel(phone) {
            if old.state == SessionState::AwaitingAnswers {
                self.store.log_audit(
                    now,
                    phone,
                    Some(&old.matric),
                    AuditEvent::SessionExpired,
                    "superseded by a new request",
                )?;
            }
        }
        Ok(())
    }

    fn on_request(&mut self, phone: &Msisdn, cmd: Command, now: Timestamp) -> Result<Reply, GatewayError> {
        let matric = cmd.query().expect("G or C request").matric.clone();
        let templates = &self.config.templates;
        let Some(student) = self.store.student(&matric) else {
            self.store.log_audit(
                now,
                phone,
                Some(&matric),
                AuditEvent::ChallengeFailed,
                "unknown matric number",
            )?;
            return Ok(Reply::new(templates.render_refused(), Some(&matric)));
        };
        let seed = self.rng.next_u64();
        match self.auth.begin_challenge(phone, &cmd, student, seed, now) {
            Ok(challenge) => {
                let text = templates.render_questions(&matric, &challenge.questions);
                self.store.log_audit(
                    now,
                    phone,
                    Some(&matric),
                    AuditEvent::ChallengeIssued,
                    format!("questions {:?}", challenge.session.question_indices),
                )?;
                Ok(Reply::new(text, Some(&matric)))
            }
            Err(AuthError::LockedOut { until }) => {
                self.store.log_audit(
                    now,
                    phone,
                    Some(&matric),
                    AuditEvent::LockoutApplied,
                    format!("request refused, locked until {until}"),
                )?;
                Ok(Reply::new(templates.render_refused(), Some(&matric)))
            }
            Err(e) => {
                let text = templates.render_refused();
                self.store
                    .log_audit(now, phone, Some(&matric), AuditEvent::ChallengeFailed, e.to_string())?;
                Ok(Reply::new(text, Some(&matric)))
            }
        }
    }

    fn on_answers(&mut self, phone: &Msisdn, items: &[String], now: Timestamp) -> Result<Reply, GatewayError> {
        let session = self
            .auth
            .session(phone)
            .cloned()
            .expect("answers parsed only when a session exists");
        let templates = &self.config.templates;
        let Some(student) = self.store.student(&session.matric) else {
            self.auth.cancel(phone);
            self.store.log_audit(
                now,
                phone,
                Some(&session.matric),
                AuditEvent::ChallengeFailed,
                "student record disappeared",
            )?;
            return Ok(Reply::new(templates.render_refused(), Some(&session.matric)));
        };

        match self.auth.evaluate_answers(phone, items, student, now) {
            Ok(eval) => match eval.outcome {
                ChallengeOutcome::Passed => {
                    self.store.log_audit(
                        now,
                        phone,
                        Some(&session.matric),
                        AuditEvent::ChallengePassed,
                        format_command(&session.pending),
                    )?;
                    self.fulfil(&eval.session)
                }
                ChallengeOutcome::Retry {
                    attempts_remaining,
                    reasked_questions,
                } => {
                    let text = templates.render_retry(&session.matric, attempts_remaining, &reasked_questions);
                    self.store.log_audit(
                        now,
                        phone,
                        Some(&session.matric),
                        AuditEvent::ChallengeFailed,
                        format!("{attempts_remaining} attempt(s) left"),
                    )?;
                    Ok(Reply::new(text, Some(&session.matric)))
                }
                ChallengeOutcome::Locked { until } => {
                    let text = templates.render_locked(&session.matric);
                    self.store.log_audit(
                        now,
                        phone,
                        Some(&session.matric),
                        AuditEvent::ChallengeFailed,
                        "attempts exhausted",
                    )?;
                    self.store.log_audit(
                        now,
                        phone,
                        Some(&session.matric),
                        AuditEvent::LockoutApplied,
                        format!("locked until {until}"),
                    )?;
                    Ok(Reply::new(text, Some(&session.matric)))
                }
            },
            Err(AuthError::SessionExpired) => {
                self.auth.cancel(phone);
                let text = templates.render_expired();
                self.store.log_audit(
                    now,
                    phone,
                    Some(&session.matric),
                    AuditEvent::SessionExpired,
                    "answers arrived after the deadline",
                )?;
                Ok(Reply::new(text, Some(&session.matric)))
            }
            Err(e) => {
                self.auth.cancel(phone);
                let text = templates.render_refused();
                self.store.log_audit(
                    now,
                    phone,
                    Some(&session.matric),
                    AuditEvent::ChallengeFailed,
                    e.to_string(),
                )?;
                Ok(Reply::new(text, Some(&session.matric)))
            }
        }
    }

    /// Leg 4: the pending request, now authorised.
    fn fulfil(&self, session: &AuthSession) -> Result<Reply, GatewayError> {
        let templates = &self.config.templates;
        let (
            is_grades,
            Query {
                matric,
                semester,
                session: term,
            },
        ) = match &session.pending {
            Command::Grades(q) => (true, q),
            Command::Cgpa(q) => (false, q),
            _ => unreachable!("only G and C are challenged"),
        };
        let results = self.store.get_results(matric, *semester, *term)?;
        if results.is_empty() {
            return Ok(Reply::new(
                templates.render_no_results(matric, *semester, *term),
                Some(matric),
            ));
        }
        let text = if is_grades {
            templates.render_grades(matric, *semester, *term, &results)
        } else {
            let gpa = self.store.compute_gpa(&results)?;
            let cgpa = self.store.compute_cgpa(matric, *semester, *term)?;
            templates.render_cgpa(matric, *semester, *term, gpa, cgpa)
        };
        Ok(Reply::new(text, Some(matric)))
    }
}
