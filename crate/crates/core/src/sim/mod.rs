//! Simulated modem/SMSC.
//!
//! Stands in for the SIM-equipped modem: handsets submit messages, the sim
//! hands them to the [`Gateway`] in arrival order, and each phone's replies
//! land in that phone's thread. [`ModemPort`] is the seam a hardware modem
//! driver or a carrier SMSC link would implement instead.

#[cfg(feature = "http")]
pub mod http;
mod script;

use std::collections::{HashMap, VecDeque};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

pub use script::{
    run_script, Script, ScriptError, ScriptRun, ScriptStep, Transcript, TranscriptEntry, DEFAULT_SCRIPT_START,
};

use crate::clock::{Seconds, Timestamp};
use crate::gateway::{Gateway, GatewayError};
use crate::message::{BadMsisdn, Direction, EmptyBody, Msisdn, SmsMessage};

/// Gateway-side view of a modem.
pub trait ModemPort {
    /// Accepts a message from the network, returning its thread sequence number.
    fn submit_inbound(&self, msg: SmsMessage) -> Result<u64, SimError>;
    /// Every message sent to handsets since the previous drain, in send order.
    fn drain_outbound(&self) -> Vec<SmsMessage>;
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    BadMsisdn(#[from] BadMsisdn),
    #[error(transparent)]
    EmptyBody(#[from] EmptyBody),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InboxEntry {
    pub seq: u64,
    pub direction: Direction,
    pub body: String,
    pub timestamp: Timestamp,
}

/// One handset's thread: its own sends and the gateway's replies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhoneInbox {
    pub msisdn: Msisdn,
    entries: Vec<InboxEntry>,
}

impl PhoneInbox {
    fn new(msisdn: Msisdn) -> Self {
        PhoneInbox {
            msisdn,
            entries: Vec::new(),
        }
    }

    fn push(&mut self, direction: Direction, body: String, timestamp: Timestamp) -> u64 {
        let seq = self.entries.last().map_or(1, |e| e.seq + 1);
        self.entries.push(InboxEntry {
            seq,
            direction,
            body,
            timestamp,
        });
        seq
    }

    pub fn entries(&self) -> &[InboxEntry] {
        &self.entries
    }

    pub fn after(&self, after_seq: u64) -> Vec<InboxEntry> {
        let start = self.entries.partition_point(|e| e.seq <= after_seq);
        self.entries[start..].to_vec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimConfig {
    /// Delay between a handset submitting and the gateway seeing the message.
    pub latency: Seconds,
}

#[derive(Debug)]
struct SimState {
    gateway: Gateway,
    latency: Seconds,
    threads: HashMap<Msisdn, PhoneInbox>,
    pending: VecDeque<(Timestamp, SmsMessage)>,
    /// Every thread append, in order, tagged with its phone.
    events: Vec<(Msisdn, InboxEntry)>,
    outbound: Vec<SmsMessage>,
    drained: usize,
}

impl SimState {
    fn thread(&mut self, phone: &Msisdn) -> &mut PhoneInbox {
        self.threads
            .entry(phone.clone())
            .or_insert_with(|| PhoneInbox::new(phone.clone()))
    }

    fn record(&mut self, phone: &Msisdn, direction: Direction, body: &str, ts: Timestamp) -> u64 {
        let seq = self.thread(phone).push(direction, body.to_owned(), ts);
        let entry = self.thread(phone).entries.last().cloned().expect("just pushed");
        self.events.push((phone.clone(), entry));
        seq
    }

    fn submit(&mut self, msg: SmsMessage) -> Result<u64, SimError> {
        let seq = self.record(&msg.phone, Direction::Inbound, &msg.body, msg.timestamp);
        let submitted_at = msg.timestamp;
        self.pending.push_back((submitted_at + self.latency, msg));
        self.pump(submitted_at)?;
        Ok(seq)
    }

    fn pump(&mut self, now: Timestamp) -> Result<usize, SimError> {
        let mut delivered = 0;
        while self.pending.front().is_some_and(|(at, _)| *at <= now) {
            let (at, msg) = self.pending.pop_front().expect("front checked");
            let replies = self.gateway.handle_inbound(&msg, at)?;
            for reply in replies {
                self.record(&reply.phone, Direction::Outbound, &reply.body, reply.timestamp);
                self.outbound.push(reply);
            }
            delivered += 1;
        }
        Ok(delivered)
    }
}

/// The simulated SMS centre. All methods take `&self` and are safe to call
/// from many threads; deliveries to the gateway happen one at a time.
#[derive(Debug)]
pub struct SmsCenter {
    state: Mutex<SimState>,
}

impl SmsCenter {
    pub fn new(gateway: Gateway) -> Self {
        Self::with_config(gateway, SimConfig::default())
    }

    pub fn with_config(gateway: Gateway, config: SimConfig) -> Self {
        SmsCenter {
            state: Mutex::new(SimState {
                gateway,
                latency: config.latency,
                threads: HashMap::new(),
                pending: VecDeque::new(),
                events: Vec::new(),
                outbound: Vec::new(),
                drained: 0,
            }),
        }
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, SimState> {
        self.state.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    /// A handset sends `body`. With zero latency the gateway has processed it,
    /// and the replies are in the inbox, by the time this returns.
    pub fn submit_inbound(&self, from: &str, body: &str, now: Timestamp) -> Result<u64, SimError> {
        let phone = Msisdn::parse(from)?;
        let msg = SmsMessage::inbound(phone, body, now)?;
        self.lock().submit(msg)
    }

    /// Delivers every queued message whose delivery time has arrived.
    pub fn pump(&self, now: Timestamp) -> Result<usize, SimError> {
        self.lock().pump(now)
    }

    /// Earliest delivery time still queued.
    pub fn next_delivery(&self) -> Option<Timestamp> {
        self.lock().pending.front().map(|(at, _)| *at)
    }

    /// Thread entries for `msisdn` with sequence above `after_seq`.
    pub fn fetch_inbox(&self, msisdn: &str, after_seq: u64) -> Result<Vec<InboxEntry>, SimError> {
        let phone = Msisdn::parse(msisdn)?;
        Ok(self
            .lock()
            .threads
            .get(&phone)
            .map(|t| t.after(after_seq))
            .unwrap_or_default())
    }

    /// Number of thread events recorded so far.
    pub fn event_count(&self) -> usize {
        self.lock().events.len()
    }

    /// Thread events from index `from` on.
    pub fn events_since(&self, from: usize) -> Vec<(Msisdn, InboxEntry)> {
        let state = self.lock();
        state.events[from.min(state.events.len())..].to_vec()
    }

    /// Runs `f` with exclusive access to the gateway.
    pub fn with_gateway<R>(&self, f: impl FnOnce(&mut Gateway) -> R) -> R {
        f(&mut self.lock().gateway)
    }

    pub fn into_gateway(self) -> Gateway {
        self.state
            .into_inner()
            .unwrap_or_else(|poisoned| poisoned.into_inner())
            .gateway
    }
}

impl ModemPort for SmsCenter {
    fn submit_inbound(&self, msg: SmsMessage) -> Result<u64, SimError> {
        if msg.direction != Direction::Inbound {
            return Err(GatewayError::NotInbound.into());
        }
        self.lock().submit(msg)
    }

    fn drain_outbound(&self) -> Vec<SmsMessage> {
        let mut state = self.lock();
        let out = state.outbound[state.drained..].to_vec();
        state.drained = state.outbound.len();
        out
    }
}
