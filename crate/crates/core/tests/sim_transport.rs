mod common;

use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use proptest::prelude::*;
use serde_json::{json, Value};
use tower::ServiceExt;

use common::*;
use resultline_core::clock::{Clock, Seconds, VirtualClock};
use resultline_core::sim::http::router;
use resultline_core::sim::{run_script, InboxEntry, ModemPort, Script, SimConfig, DEFAULT_SCRIPT_START};
use resultline_core::{Direction, Msisdn, SmsCenter, SmsMessage};

const PHONES: [&str; 3] = ["+2348030000001", "+2348030000002", "+2348030000003"];

fn center(latency: u64) -> SmsCenter {
    SmsCenter::with_config(
        fixture_gateway(17),
        SimConfig {
            latency: Seconds(latency),
        },
    )
}

#[test]
fn arrival_order_is_preserved() {
    let c = center(5);
    let t = DEFAULT_SCRIPT_START;
    // Three phones interleave; nothing is delivered until the latency elapses.
    for (i, phone) in PHONES.iter().cycle().take(9).enumerate() {
        c.submit_inbound(phone, &format!("X{i}"), t).unwrap();
    }
    assert_eq!(c.event_count(), 9);
    assert_eq!(c.next_delivery(), Some(t + Seconds(5)));
    c.pump(t + Seconds(5)).unwrap();

    let inbound: Vec<String> = c.with_gateway(|g| {
        g.store()
            .messages()
            .iter()
            .filter(|m| m.direction == Direction::Inbound)
            .map(|m| m.body.clone())
            .collect()
    });
    let expected: Vec<String> = (0..9).map(|i| format!("X{i}")).collect();
    assert_eq!(inbound, expected);

    // Submissions land in the thread at once; replies follow after the delay.
    for phone in PHONES {
        let thread = c.fetch_inbox(phone, 0).unwrap();
        assert_eq!(thread.len(), 6);
        for (i, e) in thread.iter().enumerate() {
            assert_eq!(e.seq, i as u64 + 1);
            let want = if i < 3 { Direction::Inbound } else { Direction::Outbound };
            assert_eq!(e.direction, want);
        }
        assert_eq!(thread[3].timestamp, t + Seconds(5));
    }
}

#[test]
fn polling_reconstructs_the_outbound_log() {
    let c = center(0);
    let clock = VirtualClock::new(DEFAULT_SCRIPT_START);
    let mut cursors: HashMap<&str, u64> = HashMap::new();
    let mut seen: HashMap<&str, Vec<String>> = HashMap::new();
    let bodies = [
        "H",
        "G SSE/010/7600 1 2012/2013",
        "blue; lagos",
        "X",
        "C SSE/010/7601 2 2012/2013",
    ];
    for (i, body) in bodies.iter().cycle().take(15).enumerate() {
        let phone = PHONES[i % 3];
        c.submit_inbound(phone, body, clock.now()).unwrap();
        clock.advance(Seconds(7));
        // Poll at uneven intervals.
        if i % 2 == 0 {
            for p in PHONES {
                let after = cursors.get(p).copied().unwrap_or(0);
                let new = c.fetch_inbox(p, after).unwrap();
                if let Some(last) = new.last() {
                    cursors.insert(p, last.seq);
                }
                seen.entry(p).or_default().extend(
                    new.into_iter()
                        .filter(|e| e.direction == Direction::Outbound)
                        .map(|e| e.body),
                );
            }
        }
    }
    for p in PHONES {
        let after = cursors.get(p).copied().unwrap_or(0);
        let rest = c.fetch_inbox(p, after).unwrap();
        seen.entry(p).or_default().extend(
            rest.into_iter()
                .filter(|e| e.direction == Direction::Outbound)
                .map(|e| e.body),
        );
    }

    let log = c.with_gateway(|g| g.store().messages().to_vec());
    for p in PHONES {
        let from_log: Vec<String> = log
            .iter()
            .filter(|m| m.direction == Direction::Outbound && m.phone.as_str() == p)
            .map(|m| m.body.clone())
            .collect();
        assert_eq!(seen[p], from_log, "phone {p}");
    }
}

#[test]
fn drain_returns_outbound_in_order() {
    let c = center(0);
    let t = DEFAULT_SCRIPT_START;
    let msg = SmsMessage::inbound(Msisdn::parse(PHONES[0]).unwrap(), "X", t).unwrap();
    ModemPort::submit_inbound(&c, msg).unwrap();
    c.submit_inbound(PHONES[1], "H", t).unwrap();
    let drained = c.drain_outbound();
    assert_eq!(drained.len(), 3);
    assert_eq!(drained[0].phone.as_str(), PHONES[0]);
    assert!(drained[1].body.starts_with("(1/2) "));
    assert!(c.drain_outbound().is_empty());
}

fn script_text(seed: u64) -> String {
    let mut lines = vec!["# two students, three phones".to_string()];
    let bodies = [
        "G SSE/010/7600 1 2012/2013",
        "Blue; Lagos",
        "C sse/010/7601 2 2012/2013",
        "bingo; kings college",
        "H",
        "nonsense",
        "wrong; wrong",
    ];
    let mut x = seed;
    for _ in 0..25 {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let delay = (x >> 33) % 90;
        let phone = PHONES[((x >> 20) % 3) as usize];
        let body = bodies[((x >> 40) % bodies.len() as u64) as usize];
        lines.push(format!("{delay} {phone} {body}"));
    }
    lines.join("\n")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn messages_are_conserved(seed in any::<u64>(), latency in 0u64..20) {
        let script = Script::parse(&script_text(seed)).unwrap();
        let run = run_script(fixture_gateway(seed), &script, DEFAULT_SCRIPT_START, SimConfig { latency: Seconds(latency) }).unwrap();
        let log = run.gateway.store().messages();
        prop_assert_eq!(run.transcript.inbound_count(), script.steps.len());
        prop_assert_eq!(run.transcript.len(), log.len());
        let transcript_out: Vec<&str> = run
            .transcript
            .entries
            .iter()
            .filter(|e| e.entry.direction == Direction::Outbound)
            .map(|e| e.entry.body.as_str())
            .collect();
        let log_out: Vec<&str> = log.iter().filter(|m| m.direction == Direction::Outbound).map(|m| m.body.as_str()).collect();
        prop_assert_eq!(transcript_out, log_out);
    }

    #[test]
    fn script_runs_are_deterministic(seed in any::<u64>()) {
        let script = Script::parse(&script_text(seed)).unwrap();
        let a = run_script(fixture_gateway(seed), &script, DEFAULT_SCRIPT_START, SimConfig::default()).unwrap();
        let b = run_script(fixture_gateway(seed), &script, DEFAULT_SCRIPT_START, SimConfig::default()).unwrap();
        prop_assert_eq!(a.transcript.to_string(), b.transcript.to_string());
        prop_assert_eq!(a.gateway.store().audit(), b.gateway.store().audit());
    }
}

// HTTP surface.

fn app() -> (axum::Router, Arc<VirtualClock>) {
    let clock = Arc::new(VirtualClock::new(DEFAULT_SCRIPT_START));
    let center = Arc::new(center(0));
    (router(center, clock.clone()), clock)
}

async fn call(app: &axum::Router, req: Request<Body>) -> (StatusCode, Value) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn send(phone: &str, body: &str) -> Request<Body> {
    Request::post(format!("/sim/phones/{phone}/send"))
        .header("content-type", "application/json")
        .body(Body::from(json!({ "body": body }).to_string()))
        .unwrap()
}

fn inbox(phone: &str, after: Option<u64>) -> Request<Body> {
    let uri = match after {
        Some(a) => format!("/sim/phones/{phone}/inbox?after={a}"),
        None => format!("/sim/phones/{phone}/inbox"),
    };
    Request::get(uri).body(Body::empty()).unwrap()
}

#[tokio::test]
async fn healthz_reports_ok() {
    let (app, _) = app();
    let (status, body) = call(&app, Request::get("/healthz").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!({ "status": "ok" }));
}

#[tokio::test]
async fn send_then_poll_four_legs() {
    let (app, clock) = app();
    let phone = "+2348030000001";
    let (status, body) = call(&app, send(phone, "G SSE/010/7600 1 2012/2013")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!({ "seq": 1 }));

    let (_, thread) = call(&app, inbox(phone, None)).await;
    let thread: Vec<InboxEntry> = serde_json::from_value(thread).unwrap();
    assert_eq!(thread.len(), 2);
    assert_eq!(thread[0].direction, Direction::Inbound);
    assert_eq!(thread[1].direction, Direction::Outbound);
    assert_eq!(thread[0].timestamp.to_iso8601(), "2013-01-07T08:00:00Z");
    let answers = answers_for(&thread[1].body, &QAS);

    clock.advance(Seconds(20));
    let (_, body) = call(&app, send(phone, &answers)).await;
    assert_eq!(body["seq"], 3);

    let (_, newer) = call(&app, inbox(phone, Some(2))).await;
    let newer = newer.as_array().unwrap();
    assert_eq!(newer.len(), 2);
    assert_eq!(newer[1]["direction"], "outbound");
    assert_eq!(newer[1]["body"], "RESULT SSE/010/7600 S1 2012/2013: CSC101 A; MTH101 B");
    assert_eq!(newer[1]["timestamp"], "2013-01-07T08:00:20Z");

    let (_, none) = call(&app, inbox(phone, Some(4))).await;
    assert_eq!(none, json!([]));
}

#[tokio::test]
async fn unknown_phone_has_empty_inbox() {
    let (app, _) = app();
    let (status, body) = call(&app, inbox("08031112222", None)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!([]));
}

#[tokio::test]
async fn bad_input_is_a_client_error() {
    let (app, _) = app();
    for req in [
        send("not-a-phone", "H"),
        inbox("12", None),
        send("+2348030000001", "   "),
    ] {
        let (status, body) = call(&app, req).await;
        assert_eq!(status, StatusCode::BAD_REQUEST);
        assert!(body["error"].as_str().is_some_and(|e| !e.is_empty()));
    }
}
