#![allow(dead_code)]

use resultline_core::grammar::{MatricNo, Semester, SessionId};
use resultline_core::records::{CourseResult, Grade, RecordsStore, StudentRecord};
use resultline_core::{Gateway, GatewayConfig, SecurityQA};

pub const MATRIC: &str = "SSE/010/7600";
pub const PHONE: &str = "+2348030000001";
pub const OTHER_PHONE: &str = "+2348030000002";

pub const QAS: [(&str, &str); 3] = [
    ("What is your favourite colour?", "Blue"),
    ("In which city were you born?", "Lagos"),
    ("What is your mother's maiden name?", "Adeyemi"),
];

pub const OTHER_MATRIC: &str = "SSE/010/7601";
pub const OTHER_QAS: [(&str, &str); 3] = [
    ("What was your first pet's name?", "Bingo"),
    ("Which secondary school did you attend?", "Kings College"),
    ("What is your favourite food?", "Jollof Rice"),
];

pub fn matric(s: &str) -> MatricNo {
    MatricNo::parse(s).unwrap()
}

pub fn session(start: u16) -> SessionId {
    SessionId::from_start_year(start).unwrap()
}

pub fn student_with(m: &str, qas: &[(&str, &str)]) -> StudentRecord {
    StudentRecord {
        matric: matric(m),
        full_name: "Ada Obi".into(),
        department: "Computer Science".into(),
        security: qas.iter().map(|(q, a)| SecurityQA::new(*q, a).unwrap()).collect(),
    }
}

pub fn result(m: &str, code: &str, units: u8, grade: Grade, sem: u8, year: u16) -> CourseResult {
    CourseResult::new(
        matric(m),
        code,
        units,
        grade,
        Semester::from_number(sem).unwrap(),
        session(year),
    )
    .unwrap()
}

/// Primary fixture: 3 QAs, CSC101 (3u, A) and MTH101 (4u, B) in S1 2012/2013.
/// A second student has results in both semesters.
pub fn fixture_store() -> RecordsStore {
    let mut store = RecordsStore::in_memory(2);
    store.upsert_student(student_with(MATRIC, &QAS)).unwrap();
    store
        .upsert_result(result(MATRIC, "CSC101", 3, Grade::A, 1, 2012))
        .unwrap();
    store
        .upsert_result(result(MATRIC, "MTH101", 4, Grade::B, 1, 2012))
        .unwrap();
    store.upsert_student(student_with(OTHER_MATRIC, &OTHER_QAS)).unwrap();
    store
        .upsert_result(result(OTHER_MATRIC, "CSC101", 3, Grade::A, 1, 2012))
        .unwrap();
    store
        .upsert_result(result(OTHER_MATRIC, "MTH101", 4, Grade::B, 1, 2012))
        .unwrap();
    store
        .upsert_result(result(OTHER_MATRIC, "CSC102", 2, Grade::C, 2, 2012))
        .unwrap();
    store
}

pub fn seeded_config(seed: u64) -> GatewayConfig {
    GatewayConfig {
        rng_seed: Some(seed),
        ..Default::default()
    }
}

pub fn fixture_gateway(seed: u64) -> Gateway {
    Gateway::new(seeded_config(seed), fixture_store())
}

/// `(position, question, answer)` for each question in `qas` that appears
/// in `reply`, in reply order.
pub fn asked(reply: &str, qas: &[(&'static str, &'static str)]) -> Vec<(usize, &'static str, &'static str)> {
    let mut found: Vec<_> = qas
        .iter()
        .filter_map(|&(q, a)| reply.find(q).map(|pos| (pos, q, a)))
        .collect();
    found.sort();
    found
}

/// The correct answers message for a questions reply.
pub fn answers_for(reply: &str, qas: &[(&'static str, &'static str)]) -> String {
    asked(reply, qas)
        .into_iter()
        .map(|(_, _, a)| a)
        .collect::<Vec<_>>()
        .join("; ")
}

/// True if any stored question text appears in `text`.
pub fn contains_any_question(text: &str) -> bool {
    QAS.iter().chain(OTHER_QAS.iter()).any(|(q, _)| text.contains(q))
}
