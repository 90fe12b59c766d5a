mod common;

use std::collections::BTreeMap;

use num_rational::Ratio;
use proptest::prelude::*;

use common::*;
use resultline_core::clock::Timestamp;
use resultline_core::grammar::Semester;
use resultline_core::records::{
    compute_gpa, format_gpa, AuditEvent, CourseResult, Grade, GradeScale, RecordsError, RecordsStore,
};
use resultline_core::{Direction, Msisdn};

fn grade() -> impl Strategy<Value = Grade> {
    prop::sample::select(Grade::ALL.to_vec())
}

/// Brute force: walk the rows one at a time in floating point.
fn oracle_gpa(rows: &[(u8, Grade)]) -> f64 {
    let points = |g: Grade| match g {
        Grade::A => 5.0,
        Grade::B => 4.0,
        Grade::C => 3.0,
        Grade::D => 2.0,
        Grade::E => 1.0,
        Grade::F => 0.0,
    };
    let mut quality = 0.0;
    let mut units = 0.0;
    for &(u, g) in rows {
        quality += points(g) * f64::from(u);
        units += f64::from(u);
    }
    quality / units
}

fn rows_to_results(rows: &[(u8, Grade)], sem: u8, year: u16) -> Vec<CourseResult> {
    rows.iter()
        .enumerate()
        .map(|(i, &(u, g))| result(MATRIC, &format!("C{i:03}"), u, g, sem, year))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn gpa_matches_row_sum(rows in prop::collection::vec((1u8..=6, grade()), 1..15)) {
        let results = rows_to_results(&rows, 1, 2012);
        let gpa = compute_gpa(&results, &GradeScale::default()).unwrap();
        let exact = *gpa.numer() as f64 / *gpa.denom() as f64;
        let expected = oracle_gpa(&rows);
        prop_assert!((exact - expected).abs() <= 1e-12 * expected.abs().max(1.0));
        prop_assert!(gpa >= Ratio::from_integer(0) && gpa <= Ratio::from_integer(5));
    }

    #[test]
    fn cgpa_pooling_identity(
        terms in prop::collection::vec(prop::collection::vec((1u8..=6, grade()), 1..8), 1..6)
    ) {
        // Terms fill S1, S2 of consecutive sessions starting 2010.
        let mut store = RecordsStore::in_memory(2);
        store.upsert_student(student_with(MATRIC, &QAS)).unwrap();
        let scale = GradeScale::default();
        let mut quality = 0u64;
        let mut units = 0u64;
        let mut last = (Semester::First, session(2010));
        for (t, rows) in terms.iter().enumerate() {
            let sem = (t % 2) as u8 + 1;
            let year = 2010 + (t / 2) as u16;
            for r in rows_to_results(rows, sem, year) {
                store.upsert_result(r).unwrap();
            }
            // Per-term quality points and units, combined afterwards.
            quality += rows.iter().map(|&(u, g)| u64::from(scale.points(g)) * u64::from(u)).sum::<u64>();
            units += rows.iter().map(|&(u, _)| u64::from(u)).sum::<u64>();
            last = (Semester::from_number(sem).unwrap(), session(year));
        }
        let cgpa = store.compute_cgpa(&matric(MATRIC), last.0, last.1).unwrap();
        prop_assert_eq!(cgpa, Ratio::new(quality, units));

        // Cutoff at the first term sees only that term.
        let first = store.compute_cgpa(&matric(MATRIC), Semester::First, session(2010)).unwrap();
        let first_rows = store.get_results(&matric(MATRIC), Semester::First, session(2010)).unwrap();
        prop_assert_eq!(first, compute_gpa(&first_rows, &scale).unwrap());
    }
}

#[test]
fn fixture_values_render() {
    let store = fixture_store();
    let m = matric(OTHER_MATRIC);
    let s1 = store.get_results(&m, Semester::First, session(2012)).unwrap();
    let gpa = store.compute_gpa(&s1).unwrap();
    assert_eq!(gpa, Ratio::new(31, 7));
    assert_eq!(format_gpa(gpa), "4.43");
    let cgpa = store.compute_cgpa(&m, Semester::Second, session(2012)).unwrap();
    assert_eq!(cgpa, Ratio::new(37, 9));
    assert_eq!(format_gpa(cgpa), "4.11");
}

fn populate(store: &mut RecordsStore) {
    store.upsert_student(student_with(MATRIC, &QAS)).unwrap();
    store.upsert_student(student_with(OTHER_MATRIC, &OTHER_QAS)).unwrap();
    store
        .upsert_result(result(MATRIC, "CSC101", 3, Grade::A, 1, 2012))
        .unwrap();
    store
        .upsert_result(result(MATRIC, "MTH101", 4, Grade::B, 1, 2012))
        .unwrap();
    // Replaced by the next line on reload.
    store
        .upsert_result(result(MATRIC, "PHY101", 2, Grade::F, 1, 2012))
        .unwrap();
    store
        .upsert_result(result(MATRIC, "PHY101", 2, Grade::C, 1, 2012))
        .unwrap();
    let phone = Msisdn::parse(PHONE).unwrap();
    let t = Timestamp::from_unix(1_357_545_600);
    store
        .log_message(Direction::Inbound, &phone, "G SSE/010/7600 1 2012/2013", t)
        .unwrap();
    store
        .log_message(Direction::Outbound, &phone, "tabs\tand\nnewlines \\ kept", t)
        .unwrap();
    store
        .log_audit(
            t,
            &phone,
            Some(&matric(MATRIC)),
            AuditEvent::ChallengeIssued,
            "questions [0, 2]",
        )
        .unwrap();
    store
        .log_audit(t, &phone, None, AuditEvent::ParseRejected, "UnknownKeyword: X")
        .unwrap();
}

#[test]
fn store_survives_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let (students, results, messages, audit) = {
        let mut store = RecordsStore::open(dir.path(), 2).unwrap();
        populate(&mut store);
        (
            store.students().cloned().collect::<Vec<_>>(),
            store.all_results().cloned().collect::<Vec<_>>(),
            store.messages().to_vec(),
            store.audit().to_vec(),
        )
    };
    let mut reopened = RecordsStore::open(dir.path(), 2).unwrap();
    assert_eq!(reopened.students().cloned().collect::<Vec<_>>(), students);
    assert_eq!(reopened.all_results().cloned().collect::<Vec<_>>(), results);
    assert_eq!(reopened.messages(), messages.as_slice());
    assert_eq!(reopened.audit(), audit.as_slice());
    assert_eq!(results.len(), 3);

    // Ids continue after the reopen.
    let phone = Msisdn::parse(PHONE).unwrap();
    let id = reopened
        .log_message(Direction::Inbound, &phone, "H", Timestamp::from_unix(0))
        .unwrap();
    assert_eq!(id, 3);

    // The superseded PHY101 line was compacted away.
    let text = std::fs::read_to_string(dir.path().join("results.tsv")).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn corrupt_lines_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    {
        let mut store = RecordsStore::open(dir.path(), 2).unwrap();
        populate(&mut store);
    }
    let audit = dir.path().join("audit.log");
    let mut text = std::fs::read_to_string(&audit).unwrap();
    text.push_str("id=3\tts=yesterday\n");
    std::fs::write(&audit, text).unwrap();
    match RecordsStore::open(dir.path(), 2) {
        Err(RecordsError::Corrupt { file, line, .. }) => {
            assert_eq!(file, audit);
            assert_eq!(line, 3);
        }
        other => panic!("expected corruption, got {other:?}"),
    }
}

#[test]
fn out_of_order_ids_are_corrupt() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("messages.log"),
        "id=2\tts=2013-01-01T00:00:00Z\tdirection=inbound\tphone=08030000001\tbody=H\n",
    )
    .unwrap();
    assert!(matches!(
        RecordsStore::open(dir.path(), 2),
        Err(RecordsError::Corrupt { line: 1, .. })
    ));
}

#[test]
fn width_raised_above_stored_questions_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    {
        let mut store = RecordsStore::open(dir.path(), 2).unwrap();
        populate(&mut store);
    }
    assert!(matches!(
        RecordsStore::open(dir.path(), 4),
        Err(RecordsError::Corrupt { .. })
    ));
}

#[test]
fn logs_only_grow() {
    let mut store = RecordsStore::in_memory(2);
    let phone = Msisdn::parse(PHONE).unwrap();
    let mut snapshots: BTreeMap<u64, String> = BTreeMap::new();
    for i in 0..50 {
        let id = store
            .log_message(Direction::Inbound, &phone, &format!("msg {i}"), Timestamp::from_unix(i))
            .unwrap();
        snapshots.insert(id, format!("msg {i}"));
        for entry in store.messages() {
            assert_eq!(snapshots[&entry.id], entry.body);
        }
    }
    let ids: Vec<u64> = store.messages().iter().map(|m| m.id).collect();
    assert!(ids.windows(2).all(|w| w[0] < w[1]));
}
