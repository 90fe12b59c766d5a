//! Knowledge-based challenge/response.
//!
//! A G or C request opens an [`AuthSession`] for the sending phone: `k`
//! distinct security questions are drawn from the student's stored set and
//! sent back. The next answers message passes only if every answer matches,
//! after normalization, the stored answer for the question at that position.
//! Failed rounds re-ask the same questions until attempts run out, at which
//! point the (phone, matric) pair is locked out for a while.
//!
//! Sessions are keyed by phone. Callers serialize operations per phone.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clock::{Seconds, Timestamp};
use crate::grammar::{normalize_answer, Command, MatricNo};
use crate::message::Msisdn;
use crate::records::StudentRecord;

/// Longest accepted question text, in chars.
pub const MAX_QUESTION_CHARS: usize = 120;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecurityQA {
    question: String,
    canonical_answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SecurityQAError {
    #[error("security question is empty")]
    EmptyQuestion,
    #[error("security question exceeds {MAX_QUESTION_CHARS} chars")]
    QuestionTooLong,
    #[error("security answer is empty")]
    EmptyAnswer,
}

impl SecurityQA {
    /// Stores `answer` in normalized form.
    pub fn new(question: impl Into<String>, answer: &str) -> Result<Self, SecurityQAError> {
        let question = question.into().trim().to_owned();
        if question.is_empty() {
            return Err(SecurityQAError::EmptyQuestion);
        }
        if question.chars().count() > MAX_QUESTION_CHARS {
            return Err(SecurityQAError::QuestionTooLong);
        }
        let canonical_answer = normalize_answer(answer);
        if canonical_answer.is_empty() {
            return Err(SecurityQAError::EmptyAnswer);
        }
        Ok(SecurityQA {
            question,
            canonical_answer,
        })
    }

    pub fn question(&self) -> &str {
        &self.question
    }

    pub fn canonical_answer(&self) -> &str {
        &self.canonical_answer
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuthPolicy {
    /// Questions asked per challenge.
    pub challenge_width: usize,
    pub max_attempts: u32,
    pub session_ttl: Seconds,
    pub lockout_ttl: Seconds,
}

impl Default for AuthPolicy {
    fn default() -> Self {
        AuthPolicy {
            challenge_width: 2,
            max_attempts: 3,
            session_ttl: Seconds::minutes(5),
            lockout_ttl: Seconds::minutes(30),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SessionState {
    AwaitingAnswers,
    Passed,
    Failed,
    Expired,
}

impl SessionState {
    /// Edges of the session state machine. A failed round that leaves
    /// attempts is the `AwaitingAnswers -> AwaitingAnswers` self-loop.
    pub fn can_transition(self, to: SessionState) -> bool {
        matches!(
            (self, to),
            (SessionState::AwaitingAnswers, SessionState::AwaitingAnswers)
                | (SessionState::AwaitingAnswers, SessionState::Passed)
                | (SessionState::AwaitingAnswers, SessionState::Failed)
                | (SessionState::AwaitingAnswers, SessionState::Expired)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthSession {
    pub phone: Msisdn,
    /// The G or C request that will be fulfilled on a pass.
    pub pending: Command,
    pub matric: MatricNo,
    pub question_indices: Vec<usize>,
    pub state: SessionState,
    pub attempts_remaining: u32,
    pub deadline: Timestamp,
}

impl AuthSession {
    pub fn questions<'a>(&self, student: &'a StudentRecord) -> Vec<&'a str> {
        self.question_indices
            .iter()
            .map(|&i| student.security[i].question())
            .collect()
    }

    fn answers_match(&self, answers: &[String], student: &StudentRecord) -> bool {
        answers.len() == self.question_indices.len()
            && self
                .question_indices
                .iter()
                .zip(answers)
                .all(|(&i, given)| normalize_answer(given) == student.security[i].canonical_answer())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChallengeOutcome {
    Passed,
    Retry {
        attempts_remaining: u32,
        reasked_questions: Vec<String>,
    },
    Locked {
        until: Timestamp,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AuthError {
    #[error("student has {have} security questions, challenge needs {need}")]
    NotEnoughQuestions { have: usize, need: usize },
    #[error("locked out until {until}")]
    LockedOut { until: Timestamp },
    #[error("only G and C requests are challenged")]
    NotChallengeable,
    #[error("challenge session expired")]
    SessionExpired,
    #[error("no challenge session for this phone")]
    NoSession,
    #[error("session is {0:?}, not awaiting answers")]
    NotAwaiting(SessionState),
    #[error("answers evaluated against a different student's record")]
    StudentMismatch,
}

/// Issued challenge: the stored session plus question texts in asked order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Challenge {
    pub session: AuthSession,
    pub questions: Vec<String>,
}

/// Result of one answers round, with the session as it stood afterwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub outcome: ChallengeOutcome,
    pub session: AuthSession,
}

/// Draws `k` distinct indices out of `0..n`, uniformly over `k`-subsets.
pub fn select_questions(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rand::seq::index::sample(&mut rng, n, k).into_vec()
}

#[derive(Debug, Default)]
pub struct AuthEngine {
    policy: AuthPolicy,
    sessions: HashMap<Msisdn, AuthSession>,
    lockouts: HashMap<(Msisdn, MatricNo), Timestamp>,
}

impl AuthEngine {
    pub fn new(policy: AuthPolicy) -> Self {
        AuthEngine {
            policy,
            ..Default::default()
        }
    }

    pub fn policy(&self) -> &AuthPolicy {
        &self.policy
    }

    /// The live or expired session for `phone`, if any.
    pub fn session(&self, phone: &Msisdn) -> Option<&AuthSession> {
        self.sessions.get(phone)
    }

    pub fn awaiting_answers(&self, phone: &Msisdn) -> bool {
        self.session(phone)
            .is_some_and(|s| s.state == SessionState::AwaitingAnswers)
    }

    /// Drops whatever session `phone` holds.
    pub fn cancel(&mut self, phone: &Msisdn) -> Option<AuthSession> {
        self.sessions.remove(phone)
    }

    pub fn begin_challenge(
        &mut self,
        phone: &Msisdn,
        cmd: &Command,
        student: &StudentRecord,
        rng_seed: u64,
        now: Timestamp,
    ) -> Result<Challenge, AuthError> {
        if !matches!(cmd, Command::Grades(_) | Command::Cgpa(_)) {
            return Err(AuthError::NotChallengeable);
        }
        if let Some(until) = self.lockout_until(phone, &student.matric, now) {
            return Err(AuthError::LockedOut { until });
        }
        let k = self.policy.challenge_width;
        let have = student.security.len();
        if have < k {
            return Err(AuthError::NotEnoughQuestions { have, need: k });
        }
        let session = AuthSession {
            phone: phone.clone(),
            pending: cmd.clone(),
            matric: student.matric.clone(),
            question_indices: select_questions(have, k, rng_seed),
            state: SessionState::AwaitingAnswers,
            attempts_remaining: self.policy.max_attempts,
            deadline: now + self.policy.session_ttl,
        };
        let questions = session.questions(student).into_iter().map(str::to_owned).collect();
        self.sessions.insert(phone.clone(), session.clone());
        Ok(Challenge { session, questions })
    }

    /// Scores one answers round for `phone`'s open session.
    ///
    /// Passed and Failed sessions leave the table; an expired one stays
    /// marked Expired until cancelled or replaced.
    pub fn evaluate_answers(
        &mut self,
        phone: &Msisdn,
        answers: &[String],
        student: &StudentRecord,
        now: Timestamp,
    ) -> Result<Evaluation, AuthError> {
        let session = self.sessions.get_mut(phone).ok_or(AuthError::NoSession)?;
        match session.state {
            SessionState::AwaitingAnswers => {}
            SessionState::Expired => return Err(AuthError::SessionExpired),
            other => return Err(AuthError::NotAwaiting(other)),
        }
        if session.matric != student.matric {
            return Err(AuthError::StudentMismatch);
        }
        if now > session.deadline {
            session.state = SessionState::Expired;
            return Err(AuthError::SessionExpired);
        }

        if session.answers_match(answers, student) {
            session.state = SessionState::Passed;
            let session = self.sessions.remove(phone).expect("session present");
            return Ok(Evaluation {
                outcome: ChallengeOutcome::Passed,
                session,
            });
        }

        if session.attempts_remaining > 1 {
            session.attempts_remaining -= 1;
            let outcome = ChallengeOutcome::Retry {
                attempts_remaining: session.attempts_remaining,
                reasked_questions: session.questions(student).into_iter().map(str::to_owned).collect(),
            };
            return Ok(Evaluation {
                outcome,
                session: session.clone(),
            });
        }

        session.attempts_remaining = 0;
        session.state = SessionState::Failed;
        let session = self.sessions.remove(phone).expect("session present");
        let until = now + self.policy.lockout_ttl;
        self.lockouts.insert((phone.clone(), session.matric.clone()), until);
        Ok(Evaluation {
            outcome: ChallengeOutcome::Locked { until },
            session,
        })
    }

    /// Marks every awaiting session whose deadline has passed as Expired and
    /// returns those sessions. A session is still live at its deadline.
    pub fn expire_sessions_detailed(&mut self, now: Timestamp) -> Vec<AuthSession> {
        let mut expired: Vec<AuthSession> = self
            .sessions
            .values_mut()
            .filter(|s| s.state == SessionState::AwaitingAnswers && s.deadline < now)
            .map(|s| {
                s.state = SessionState::Expired;
                s.clone()
            })
            .collect();
        expired.sort_by(|a, b| a.phone.cmp(&b.phone));
        self.lockouts.retain(|_, until| *until > now);
        expired
    }

    pub fn expire_sessions(&mut self, now: Timestamp) -> usize {
        self.expire_sessions_detailed(now).len()
    }

    pub fn is_locked(&self, phone: &Msisdn, matric: &MatricNo, now: Timestamp) -> bool {
        self.lockout_until(phone, matric, now).is_some()
    }

    pub fn lockout_until(&self, phone: &Msisdn, matric: &MatricNo, now: Timestamp) -> Option<Timestamp> {
        self.lockouts
            .get(&(phone.clone(), matric.clone()))
            .copied()
            .filter(|until| *until > now)
    }

    /// Installs a lockout directly; used when restoring state and in tests.
    pub fn insert_lockout(&mut self, phone: Msisdn, matric: MatricNo, until: Timestamp) {
        self.lockouts.insert((phone, matric), until);
    }

    #[cfg(test)]
    fn insert_session(&mut self, session: AuthSession) {
        self.sessions.insert(session.phone.clone(), session);
    }
}
