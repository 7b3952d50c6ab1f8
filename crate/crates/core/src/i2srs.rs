//! I2SRS: PRNG-based mutual authentication with rolling key pairs.
//!
//! Every link is insecure, so the interceptor sees all five messages:
//!
//! ```text
//! step 1.2  reader -> tag     R_r
//! step 2.5  tag -> reader     M_1, β, γ, α
//! step 3.2  reader -> server  M_1, β, γ, α, R_r, V = H(ID_r ^ R_r)
//! step 4.8  server -> reader  M_2, Info, MAC
//! step 5.3  reader -> tag     M_2
//! ```
//!
//! The tag holds `(K, P, α, EPC)`; the server keeps an old and a new triple
//! per tag so that a lost `M_2` can be recovered from.
//!
//! | | original | improved |
//! |---|---|---|
//! | `M_1` | `P(EPC ^ R_r ^ R_t) ^ K` | `P(EPC ^ R_r) ^ P(R_t) ^ K` |
//! | `α` sent | `α` | `α ^ R_new` |
//! | `γ` | `R_t ^ P(α ^ K)` | `R_t ^ P(α_sent ^ K) ^ P` |
//! | next `K` | `P(K)` | `P(K ^ R_new)` |
//! | next `α` | `P(R_t ^ R_r)` | `P(R_t ^ R_r ^ P)` |
//!
//! `β = R_t ^ K` and the next `P = P(P)` in both.

use std::collections::BTreeSet;

use crate::primitives::PrimitiveSuite;
use crate::protocol::{ParamError, Protocol};
use crate::rng::SeededRng;
use crate::session::{
    Direction, Interceptor, OnAir, Party, Passive, ProtocolId, SessionTranscript, Slot, Variant,
};
use crate::word::Word;

pub mod steps {
    pub const QUERY: &str = "1.2";
    pub const RESPONSE: &str = "2.5";
    pub const FORWARD: &str = "3.2";
    pub const SERVER: &str = "4.8";
    pub const FINAL: &str = "5.3";
    pub const ALL: &[&str] = &[QUERY, RESPONSE, FORWARD, SERVER, FINAL];
}

const READER_TO_TAG: Direction = Direction::new(Party::Reader, Party::Tag);
const TAG_TO_READER: Direction = Direction::new(Party::Tag, Party::Reader);
const READER_TO_SERVER: Direction = Direction::new(Party::Reader, Party::Server);
const SERVER_TO_READER: Direction = Direction::new(Party::Server, Party::Reader);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct I2srsParams {
    width: u32,
    variant: Variant,
}

impl I2srsParams {
    pub const DEFAULT_WIDTH: u32 = 16;

    /// Widths above 32 would make the key searches unenumerable.
    pub fn new(width: u32, variant: Variant) -> Result<Self, ParamError> {
        if !(1..=32).contains(&width) {
            return Err(ParamError::Width {
                protocol: ProtocolId::I2srs,
                width,
                rule: "in 1..=32",
            });
        }
        Ok(Self { width, variant })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }
}

/// The secrets a tag (or one server slot) holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyTriple {
    pub k: Word,
    pub p: Word,
    pub alpha: Word,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct I2srsTagState {
    pub keys: KeyTriple,
    pub epc: Word,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct I2srsServerRecord {
    pub old: KeyTriple,
    pub new: KeyTriple,
    pub epc: Word,
    pub data: Word,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct I2srsServer {
    pub records: Vec<I2srsServerRecord>,
    pub known_reader_ids: BTreeSet<Word>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct I2srsBackend {
    pub reader_id: Word,
    pub server: I2srsServer,
}

impl I2srsBackend {
    pub fn record_of(&self, epc: Word) -> Option<&I2srsServerRecord> {
        self.server.records.iter().find(|r| r.epc == epc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct I2srsTagMessage {
    pub m1: Word,
    pub beta: Word,
    pub gamma: Word,
    pub alpha: Word,
}

/// What the reader sends the server.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct I2srsBundle {
    pub tag: I2srsTagMessage,
    pub r_r: Word,
    pub v: Word,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct I2srsServerMessage {
    pub m2: Word,
    pub info: Word,
    pub mac: Word,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PendingSession {
    r_t: Word,
    r_new: Option<Word>,
    r_r: Word,
}

impl PendingSession {
    pub fn r_t(&self) -> Word {
        self.r_t
    }

    pub fn r_new(&self) -> Option<Word> {
        self.r_new
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ServerDecision {
    Accept {
        record: usize,
        slot: Slot,
        message: I2srsServerMessage,
    },
    UnknownReader,
    Reject,
}

impl ServerDecision {
    pub fn accepted(&self) -> bool {
        matches!(self, ServerDecision::Accept { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum I2srsMessage {
    Query(Word),
    Response(I2srsTagMessage),
    Forward(I2srsBundle),
    Server(I2srsServerMessage),
    Final(Word),
}

impl OnAir for I2srsMessage {
    fn fields(&self) -> Vec<(&'static str, Word)> {
        fn tag(m: &I2srsTagMessage) -> Vec<(&'static str, Word)> {
            vec![("m1", m.m1), ("beta", m.beta), ("gamma", m.gamma), ("alpha", m.alpha)]
        }
        match self {
            I2srsMessage::Query(r_r) => vec![("r_r", *r_r)],
            I2srsMessage::Response(m) => tag(m),
            I2srsMessage::Forward(b) => {
                let mut f = tag(&b.tag);
                f.push(("r_r", b.r_r));
                f.push(("v", b.v));
                f
            }
            I2srsMessage::Server(m) => vec![("m2", m.m2), ("info", m.info), ("mac", m.mac)],
            I2srsMessage::Final(m2) => vec![("m2", *m2)],
        }
    }

    fn same_kind(&self, other: &Self) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

#[derive(Debug, Clone)]
pub struct I2srs {
    params: I2srsParams,
    suite: PrimitiveSuite,
}

impl I2srs {
    pub fn new(params: I2srsParams, suite_seed: u64) -> Self {
        Self {
            params,
            suite: PrimitiveSuite::uniform(suite_seed, params.width()),
        }
    }

    pub fn params(&self) -> I2srsParams {
        self.params
    }

    fn p(&self, x: Word) -> Word {
        self.suite.prng_p(x)
    }

    fn h(&self, x: Word) -> Word {
        self.suite.hash_h(&[x])
    }

    pub fn tag_respond(
        &self,
        tag: &I2srsTagState,
        r_r: Word,
        rng: &mut SeededRng,
    ) -> (I2srsTagMessage, PendingSession) {
        let w = self.params.width;
        let KeyTriple { k, p, alpha } = tag.keys;
        let r_t = rng.draw(w);
        match self.params.variant {
            Variant::Original => (
                I2srsTagMessage {
                    m1: self.p(tag.epc ^ r_r ^ r_t) ^ k,
                    beta: r_t ^ k,
                    gamma: r_t ^ self.p(alpha ^ k),
                    alpha,
                },
                PendingSession { r_t, r_new: None, r_r },
            ),
            Variant::Improved => {
                let r_new = rng.draw(w);
                let masked = alpha ^ r_new;
                (
                    I2srsTagMessage {
                        m1: self.p(tag.epc ^ r_r) ^ self.p(r_t) ^ k,
                        beta: r_t ^ k,
                        gamma: r_t ^ self.p(masked ^ k) ^ p,
                        alpha: masked,
                    },
                    PendingSession {
                        r_t,
                        r_new: Some(r_new),
                        r_r,
                    },
                )
            }
        }
    }

    pub fn reader_forward(&self, reader_id: Word, r_r: Word, msg: &I2srsTagMessage) -> I2srsBundle {
        I2srsBundle {
            tag: *msg,
            r_r,
            v: self.h(reader_id ^ r_r),
        }
    }

    fn slot_matches(&self, keys: &KeyTriple, epc: Word, b: &I2srsBundle) -> bool {
        let m = &b.tag;
        let r_t = m.beta ^ keys.k;
        match self.params.variant {
            Variant::Original => {
                m.m1 ^ keys.k == self.p(epc ^ b.r_r ^ r_t)
                    && r_t ^ self.p(m.alpha ^ keys.k) == m.gamma
            }
            Variant::Improved => {
                m.m1 ^ keys.k == self.p(epc ^ b.r_r) ^ self.p(r_t)
                    && r_t ^ self.p(m.alpha ^ keys.k) ^ keys.p == m.gamma
            }
        }
    }

    /// Triple both sides move to after a session that used `keys`.
    fn advance(&self, keys: &KeyTriple, r_t: Word, r_r: Word, r_new: Option<Word>) -> KeyTriple {
        match self.params.variant {
            Variant::Original => KeyTriple {
                k: self.p(keys.k),
                p: self.p(keys.p),
                alpha: self.p(r_t ^ r_r),
            },
            Variant::Improved => {
                let r_new = r_new.expect("improved sessions carry R_new");
                KeyTriple {
                    k: self.p(keys.k ^ r_new),
                    p: self.p(keys.p),
                    alpha: self.p(r_t ^ r_r ^ keys.p),
                }
            }
        }
    }

    /// Verifies one record against a bundle and, on a match, answers and
    /// rotates the record.
    ///
    /// A new-slot match shifts new into old. An old-slot match keeps old and
    /// recomputes new from it, which is where the tag will land if this
    /// session completes.
    pub fn authenticate_record(
        &self,
        record: &mut I2srsServerRecord,
        reader_id: Word,
        b: &I2srsBundle,
    ) -> Option<(Slot, I2srsServerMessage)> {
        let mut candidates = vec![(Slot::New, record.new)];
        if record.old != record.new {
            candidates.push((Slot::Old, record.old));
        }
        let (slot, keys) = candidates
            .into_iter()
            .find(|(_, keys)| self.slot_matches(keys, record.epc, b))?;
        let r_t = b.tag.beta ^ keys.k;
        let r_new = match self.params.variant {
            Variant::Original => None,
            Variant::Improved => Some(b.tag.alpha ^ keys.alpha),
        };
        let message = I2srsServerMessage {
            m2: self.p(record.epc ^ r_t) ^ keys.p,
            info: record.data ^ reader_id,
            mac: self.h(record.data ^ b.r_r),
        };
        let next = self.advance(&keys, r_t, b.r_r, r_new);
        if slot == Slot::New {
            record.old = record.new;
        }
        record.new = next;
        Some((slot, message))
    }

    pub fn server_authenticate(&self, server: &mut I2srsServer, b: &I2srsBundle) -> ServerDecision {
        let Some(&reader_id) = server
            .known_reader_ids
            .iter()
            .find(|id| self.h(**id ^ b.r_r) == b.v)
        else {
            return ServerDecision::UnknownReader;
        };
        for (idx, record) in server.records.iter_mut().enumerate() {
            if let Some((slot, message)) = self.authenticate_record(record, reader_id, b) {
                return ServerDecision::Accept {
                    record: idx,
                    slot,
                    message,
                };
            }
        }
        ServerDecision::Reject
    }

    /// Returns `M_2` to forward when the MAC verifies.
    pub fn reader_finalize(&self, reader_id: Word, r_r: Word, m: &I2srsServerMessage) -> Option<Word> {
        let data = m.info ^ reader_id;
        (self.h(data ^ r_r) == m.mac).then_some(m.m2)
    }

    pub fn tag_finalize(&self, tag: &mut I2srsTagState, pending: PendingSession, m2: Word) -> bool {
        if m2 ^ tag.keys.p != self.p(tag.epc ^ pending.r_t) {
            return false;
        }
        tag.keys = self.advance(&tag.keys, pending.r_t, pending.r_r, pending.r_new);
        true
    }

    fn transcript(&self) -> SessionTranscript {
        SessionTranscript::new(ProtocolId::I2srs, self.params.variant, self.params.width)
    }

    /// Server and reader half of a session, from the bundle onwards.
    fn serve(
        &self,
        t: &mut SessionTranscript,
        backend: &mut I2srsBackend,
        r_r: Word,
        bundle: I2srsBundle,
        interceptor: &mut dyn Interceptor<I2srsMessage>,
    ) -> Option<Word> {
        let Some(I2srsMessage::Forward(bundle)) = t.transmit(
            interceptor,
            steps::FORWARD,
            READER_TO_SERVER,
            I2srsMessage::Forward(bundle),
        ) else {
            return None;
        };
        let ServerDecision::Accept { slot, message, .. } =
            self.server_authenticate(&mut backend.server, &bundle)
        else {
            t.outcome.server_accepted = Some(false);
            return None;
        };
        t.outcome.server_accepted = Some(true);
        t.outcome.server_slot = Some(slot);
        t.outcome.server_updated = true;

        let Some(I2srsMessage::Server(message)) = t.transmit(
            interceptor,
            steps::SERVER,
            SERVER_TO_READER,
            I2srsMessage::Server(message),
        ) else {
            return None;
        };
        let m2 = self.reader_finalize(backend.reader_id, r_r, &message);
        t.outcome.reader_accepted = Some(m2.is_some());
        m2
    }

    pub fn run_session(
        &self,
        tag: &mut I2srsTagState,
        backend: &mut I2srsBackend,
        rng: &mut SeededRng,
        interceptor: &mut dyn Interceptor<I2srsMessage>,
    ) -> SessionTranscript {
        let mut t = self.transcript();
        let r_r = rng.draw(self.params.width);

        let Some(I2srsMessage::Query(tag_r_r)) =
            t.transmit(interceptor, steps::QUERY, READER_TO_TAG, I2srsMessage::Query(r_r))
        else {
            return t;
        };
        let (response, pending) = self.tag_respond(tag, tag_r_r, rng);

        let Some(I2srsMessage::Response(response)) = t.transmit(
            interceptor,
            steps::RESPONSE,
            TAG_TO_READER,
            I2srsMessage::Response(response),
        ) else {
            return t;
        };
        let bundle = self.reader_forward(backend.reader_id, r_r, &response);
        let Some(m2) = self.serve(&mut t, backend, r_r, bundle, interceptor) else {
            return t;
        };

        let Some(I2srsMessage::Final(m2)) =
            t.transmit(interceptor, steps::FINAL, READER_TO_TAG, I2srsMessage::Final(m2))
        else {
            return t;
        };
        let accepted = self.tag_finalize(tag, pending, m2);
        t.outcome.tag_accepted = Some(accepted);
        t.outcome.tag_updated = accepted;
        t
    }

    /// Adversary as tag: the honest reader issues `R_r`, `forge` answers it,
    /// and the reader and server run as usual.
    pub fn impersonate_tag(
        &self,
        backend: &mut I2srsBackend,
        rng: &mut SeededRng,
        forge: impl FnOnce(Word) -> I2srsTagMessage,
    ) -> SessionTranscript {
        let mut t = self.transcript();
        let r_r = rng.draw(self.params.width);
        t.transmit(&mut Passive, steps::QUERY, READER_TO_TAG, I2srsMessage::Query(r_r));
        let response = forge(r_r);
        t.inject(steps::RESPONSE, TAG_TO_READER, &I2srsMessage::Response(response));
        let bundle = self.reader_forward(backend.reader_id, r_r, &response);
        if let Some(m2) = self.serve(&mut t, backend, r_r, bundle, &mut Passive) {
            t.transmit(&mut Passive, steps::FINAL, READER_TO_TAG, I2srsMessage::Final(m2));
        }
        t
    }
}

impl Protocol for I2srs {
    type Tag = I2srsTagState;
    type Backend = I2srsBackend;
    type Secrets = I2srsTagState;
    type Message = I2srsMessage;

    fn id(&self) -> ProtocolId {
        ProtocolId::I2srs
    }

    fn variant(&self) -> Variant {
        self.params.variant
    }

    fn width(&self) -> u32 {
        self.params.width
    }

    fn suite(&self) -> &PrimitiveSuite {
        &self.suite
    }

    fn steps(&self) -> &'static [&'static str] {
        steps::ALL
    }

    fn new_backend(&self, rng: &mut SeededRng) -> I2srsBackend {
        let reader_id = rng.draw(self.params.width);
        I2srsBackend {
            reader_id,
            server: I2srsServer {
                records: Vec::new(),
                known_reader_ids: [reader_id].into(),
            },
        }
    }

    fn enroll(&self, backend: &mut I2srsBackend, rng: &mut SeededRng) -> I2srsTagState {
        let w = self.params.width;
        let tag = I2srsTagState {
            keys: KeyTriple {
                k: rng.draw(w),
                p: rng.draw(w),
                alpha: rng.draw(w),
            },
            epc: rng.draw(w),
        };
        backend.server.records.push(I2srsServerRecord {
            old: tag.keys,
            new: tag.keys,
            epc: tag.epc,
            data: rng.draw(w),
        });
        tag
    }

    fn run_session(
        &self,
        tag: &mut I2srsTagState,
        backend: &mut I2srsBackend,
        rng: &mut SeededRng,
        interceptor: &mut dyn Interceptor<I2srsMessage>,
    ) -> SessionTranscript {
        I2srs::run_session(self, tag, backend, rng, interceptor)
    }

    fn secrets(&self, tag: &I2srsTagState) -> I2srsTagState {
        *tag
    }

    fn synchronized(&self, tag: &I2srsTagState, backend: &I2srsBackend) -> bool {
        backend
            .server
            .records
            .iter()
            .any(|r| r.epc == tag.epc && r.new == tag.keys)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::{Action, BlockStep};

    fn setup(width: u32, variant: Variant, seed: u64) -> (I2srs, I2srsTagState, I2srsBackend, SeededRng) {
        let proto = I2srs::new(I2srsParams::new(width, variant).unwrap(), seed ^ 0x51);
        let mut rng = SeededRng::new(seed);
        let mut backend = proto.new_backend(&mut rng);
        let tag = proto.enroll(&mut backend, &mut rng);
        (proto, tag, backend, rng)
    }

    fn residue(m: &I2srsTagMessage) -> Word {
        m.beta ^ m.gamma ^ m.alpha
    }

    #[test]
    fn params_validation() {
        assert!(I2srsParams::new(16, Variant::Original).is_ok());
        assert!(I2srsParams::new(33, Variant::Original).is_err());
        assert!(I2srsParams::new(0, Variant::Improved).is_err());
    }

    #[test]
    fn honest_sessions_stay_synchronized() {
        for variant in Variant::ALL {
            for seed in 0..100 {
                let (p, mut tag, mut backend, mut rng) = setup(16, variant, seed);
                for _ in 0..3 {
                    let t = p.run_session(&mut tag, &mut backend, &mut rng, &mut Passive);
                    assert!(t.outcome.mutual(), "{variant} seed {seed}");
                    assert_eq!(t.outcome.reader_accepted, Some(true));
                    assert_eq!(t.outcome.server_slot, Some(Slot::New));
                    assert!(p.synchronized(&tag, &backend));
                }
            }
        }
    }

    #[test]
    fn original_residue_matches_closed_form() {
        let (p, tag, _, mut rng) = setup(16, Variant::Original, 2);
        let KeyTriple { k, alpha, .. } = tag.keys;
        let expected = k ^ alpha ^ p.suite.prng_p(alpha ^ k);
        for _ in 0..50 {
            let (m, pending) = p.tag_respond(&tag, rng.draw(16), &mut rng);
            assert_eq!(residue(&m), expected);
            assert_eq!(m.beta ^ k, pending.r_t());
        }
    }

    #[test]
    fn improved_residue_varies() {
        let (p, tag, _, mut rng) = setup(16, Variant::Improved, 2);
        let mut same = 0;
        for _ in 0..10_000 {
            let (a, _) = p.tag_respond(&tag, rng.draw(16), &mut rng);
            let (b, _) = p.tag_respond(&tag, rng.draw(16), &mut rng);
            same += usize::from(residue(&a) == residue(&b));
        }
        assert!(same <= 5, "{same}");
    }

    #[test]
    fn blocked_m2_recovers_via_old_slot() {
        for variant in Variant::ALL {
            for seed in 0..50 {
                let (p, mut tag, mut backend, mut rng) = setup(16, variant, seed);
                let before = tag;
                let t = p.run_session(&mut tag, &mut backend, &mut rng, &mut BlockStep(steps::FINAL));
                assert_eq!(t.outcome.server_accepted, Some(true));
                assert_eq!(tag, before);
                assert!(!p.synchronized(&tag, &backend));

                let t = p.run_session(&mut tag, &mut backend, &mut rng, &mut Passive);
                assert!(t.outcome.mutual(), "{variant} seed {seed}");
                assert_eq!(t.outcome.server_slot, Some(Slot::Old));
                assert!(p.synchronized(&tag, &backend));

                let t = p.run_session(&mut tag, &mut backend, &mut rng, &mut Passive);
                assert!(t.outcome.mutual());
                assert_eq!(t.outcome.server_slot, Some(Slot::New));
            }
        }
    }

    #[test]
    fn original_key_chain_is_predictable() {
        let (p, mut tag, mut backend, mut rng) = setup(16, Variant::Original, 9);
        let mut k = tag.keys.k;
        for _ in 0..8 {
            p.run_session(&mut tag, &mut backend, &mut rng, &mut Passive);
            k = p.suite.prng_p(k);
            assert_eq!(tag.keys.k, k);
        }
    }

    #[test]
    fn tampered_r_r_fails_reader_check() {
        let (p, mut tag, mut backend, mut rng) = setup(16, Variant::Original, 4);
        let mut unknown = 0;
        for _ in 0..10_000 {
            let mask = rng.draw_mask(16);
            let mut tamper = |step: &'static str, m: &I2srsMessage| match (step, m) {
                (steps::FORWARD, I2srsMessage::Forward(b)) => {
                    Action::Replace(I2srsMessage::Forward(I2srsBundle { r_r: b.r_r ^ mask, ..*b }))
                }
                _ => Action::Deliver,
            };
            let snapshot = (tag, backend.clone());
            let t = p.run_session(&mut tag, &mut backend, &mut rng, &mut tamper);
            if t.outcome.server_accepted == Some(false) {
                unknown += 1;
                assert_eq!((tag, backend.clone()), snapshot);
            } else {
                (tag, backend) = snapshot;
            }
        }
        assert!(unknown >= 9_990, "{unknown}");
    }

    #[test]
    fn tampered_info_fails_mac() {
        let (p, mut tag, mut backend, mut rng) = setup(16, Variant::Improved, 5);
        let mut rejected = 0;
        for _ in 0..10_000 {
            let mask = rng.draw_mask(16);
            let mut tamper = |step: &'static str, m: &I2srsMessage| match (step, m) {
                (steps::SERVER, I2srsMessage::Server(s)) => {
                    Action::Replace(I2srsMessage::Server(I2srsServerMessage { info: s.info ^ mask, ..*s }))
                }
                _ => Action::Deliver,
            };
            let t = p.run_session(&mut tag, &mut backend, &mut rng, &mut tamper);
            if t.outcome.reader_accepted == Some(false) {
                rejected += 1;
                assert!(!t.delivered(steps::FINAL));
            }
            // Recover for the next round.
            p.run_session(&mut tag, &mut backend, &mut rng, &mut Passive);
        }
        assert!(rejected >= 9_990, "{rejected}");
    }

    #[test]
    fn improved_rejects_replayed_m2() {
        let (p, mut tag, mut backend, mut rng) = setup(16, Variant::Improved, 6);
        let first = p.run_session(&mut tag, &mut backend, &mut rng, &mut BlockStep(steps::FINAL));
        let m2 = first.field(steps::FINAL, "m2").unwrap();
        let mut rejected = 0;
        for _ in 0..10_000 {
            let before = tag;
            let (_, pending) = p.tag_respond(&tag, rng.draw(16), &mut rng);
            if p.tag_finalize(&mut tag, pending, m2) {
                tag = before;
            } else {
                assert_eq!(tag, before);
                rejected += 1;
            }
        }
        assert!(rejected >= 9_990, "{rejected}");
    }

    #[test]
    fn unknown_reader_is_rejected_without_state_change() {
        let (p, tag, mut backend, mut rng) = setup(16, Variant::Original, 7);
        let (m, _) = p.tag_respond(&tag, Word::new(3, 16), &mut rng);
        let stranger = backend.reader_id ^ Word::new(1, 16);
        let bundle = p.reader_forward(stranger, Word::new(3, 16), &m);
        let before = backend.clone();
        assert_eq!(
            p.server_authenticate(&mut backend.server, &bundle),
            ServerDecision::UnknownReader
        );
        assert_eq!(backend, before);
    }

    #[test]
    fn transcript_covers_every_link() {
        let (p, mut tag, mut backend, mut rng) = setup(16, Variant::Original, 8);
        let t = p.run_session(&mut tag, &mut backend, &mut rng, &mut Passive);
        let got: Vec<_> = t.messages.iter().map(|m| m.step.as_str()).collect();
        assert_eq!(got, steps::ALL);
        for name in ["m1", "beta", "gamma", "alpha", "r_r", "v"] {
            assert!(t.field(steps::FORWARD, name).is_some(), "{name}");
        }
        assert_eq!(
            t.field(steps::RESPONSE, "m1"),
            t.field(steps::FORWARD, "m1")
        );
    }
}
