//! Outbound reply text.

use crate::grammar::{MatricNo, ParseError, ParseErrorKind, Semester, SessionId};
use crate::records::{format_gpa, CourseResult, Gpa};

use super::config::ReplyTemplates;

const USAGE: &str = "RESULT CHECK HELP: G <matric> <semester> <session> = course grades; \
C <matric> <semester> <session> = GPA and CGPA; H = this help. \
Example: G SSE/010/7600 1 2012/2013";

/// Fills `{matric}`, `{sem}`, `{session}` and `{body}` in a template.
pub fn fill(template: &str, matric: Option<&MatricNo>, term: Option<(Semester, SessionId)>, body: &str) -> String {
    let mut out = template.to_owned();
    if let Some(m) = matric {
        out = out.replace("{matric}", m.as_str());
    }
    if let Some((sem, session)) = term {
        out = out
            .replace("{sem}", &sem.to_string())
            .replace("{session}", &session.to_string());
    }
    out.replace("{body}", body)
}

fn numbered(questions: &[String]) -> String {
    questions
        .iter()
        .enumerate()
        .map(|(i, q)| format!("{}) {}", i + 1, q))
        .collect::<Vec<_>>()
        .join(" ")
}

impl ReplyTemplates {
    pub fn render_grades(
        &self,
        matric: &MatricNo,
        semester: Semester,
        session: SessionId,
        results: &[CourseResult],
    ) -> String {
        assert!(!results.is_empty(), "grades reply needs at least one result");
        let body = results
            .iter()
            .map(|r| format!("{} {}", r.course_code(), r.grade))
            .collect::<Vec<_>>()
            .join("; ");
        fill(&self.grades, Some(matric), Some((semester, session)), &body)
    }

    pub fn render_cgpa(
        &self,
        matric: &MatricNo,
        semester: Semester,
        session: SessionId,
        gpa: Gpa,
        cgpa: Gpa,
    ) -> String {
        let body = format!("GPA {} CGPA {}", format_gpa(gpa), format_gpa(cgpa));
        fill(&self.cgpa, Some(matric), Some((semester, session)), &body)
    }

    pub fn render_questions(&self, matric: &MatricNo, questions: &[String]) -> String {
        fill(&self.questions, Some(matric), None, &numbered(questions))
    }

    pub fn render_retry(&self, matric: &MatricNo, attempts_remaining: u32, questions: &[String]) -> String {
        let noun = if attempts_remaining == 1 { "attempt" } else { "attempts" };
        let body = format!("{attempts_remaining} {noun} left. {}", numbered(questions));
        fill(&self.retry, Some(matric), None, &body)
    }

    pub fn render_locked(&self, matric: &MatricNo) -> String {
        fill(&self.locked, Some(matric), None, "")
    }

    pub fn render_refused(&self) -> String {
        fill(&self.refused, None, None, "")
    }

    pub fn render_no_results(&self, matric: &MatricNo, semester: Semester, session: SessionId) -> String {
        fill(&self.no_results, Some(matric), Some((semester, session)), "")
    }

    pub fn render_expired(&self) -> String {
        fill(&self.expired, None, None, "")
    }

    pub fn render_parse_error(&self, err: &ParseError) -> String {
        fill(&self.parse_error, None, None, &describe_parse_error(err))
    }
}

fn describe_parse_error(err: &ParseError) -> String {
    let token = &err.detail;
    match err.kind {
        ParseErrorKind::UnknownKeyword => format!("unknown command '{token}'"),
        ParseErrorKind::WrongArity => token.clone(),
        ParseErrorKind::BadMatric => format!("bad matric number '{token}'"),
        ParseErrorKind::BadSemester => format!("semester must be 1 or 2, got '{token}'"),
        ParseErrorKind::BadSession => format!("session must look like 2012/2013, got '{token}'"),
        ParseErrorKind::Empty => "empty message".to_owned(),
    }
}

/// `RESULT <matric> S<sem> <session>: <code> <grade>; ...` with the default template.
pub fn render_grades_reply(
    matric: &MatricNo,
    semester: Semester,
    session: SessionId,
    results: &[CourseResult],
) -> String {
    ReplyTemplates::default().render_grades(matric, semester, session, results)
}

/// `CGPA <matric> S<sem> <session>: GPA x.xx CGPA y.yy` with the default template.
pub fn render_cgpa_reply(matric: &MatricNo, semester: Semester, session: SessionId, gpa: Gpa, cgpa: Gpa) -> String {
    ReplyTemplates::default().render_cgpa(matric, semester, session, gpa, cgpa)
}

pub fn render_help() -> String {
    USAGE.to_owned()
}
