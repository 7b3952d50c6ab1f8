//! IHRMA: hash-based mutual authentication between a tag and a back-end
//! server, in its original form and the improved form.
//!
//! Message flow (reader–server link is secure, reader–tag link is not):
//!
//! ```text
//! step 1    reader -> tag     R_r
//! step 2    tag -> reader     C_1, D = C_2 ^ R_t
//!           reader -> server  (secure) R_r, C_1, D
//! step 5.1  reader -> tag     DATA, C_3 [, C_4, C_5]
//! ```
//!
//! The tag draws `R_t`, blinds it with `C_2 = H(S_j)` and binds it into
//! `C_1 = H(ID_k ^ R_t ^ R_r ^ RID)`. The server unblinds `R_t` under each of
//! its two stored secrets, recomputes `C_1`, and answers with the values the
//! tag needs to verify it and move to `S_{j+1} = H(S_j ^ R_t)`.
//!
//! `RID` is where the variants differ. The original builds it from
//! `R_t mod S_j`, which collapses to `1 || S_j` whenever `R_t < S_j`; the
//! improved variant uses `H(S_j ^ R_t)`.

use crate::primitives::PrimitiveSuite;
use crate::protocol::{ParamError, Protocol};
use crate::rng::SeededRng;
use crate::session::{
    Direction, Interceptor, OnAir, Party, ProtocolId, SessionTranscript, Slot, Variant,
};
use crate::word::{Word, WordError};

/// Interceptable step ids.
pub mod steps {
    pub const QUERY: &str = "1";
    pub const RESPONSE: &str = "2";
    pub const FINAL: &str = "5.1";
    pub const ALL: &[&str] = &[QUERY, RESPONSE, FINAL];
}

const READER_TO_TAG: Direction = Direction::new(Party::Reader, Party::Tag);
const TAG_TO_READER: Direction = Direction::new(Party::Tag, Party::Reader);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IhrmaParams {
    width: u32,
    variant: Variant,
}

impl IhrmaParams {
    pub const DEFAULT_WIDTH: u32 = 96;

    pub fn new(width: u32, variant: Variant) -> Result<Self, ParamError> {
        if !(2..=128).contains(&width) || width % 2 != 0 {
            return Err(ParamError::Width {
                protocol: ProtocolId::Ihrma,
                width,
                rule: "even and in 2..=128",
            });
        }
        Ok(Self { width, variant })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn half_width(&self) -> u32 {
        self.width / 2
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IhrmaTagState {
    pub id_k: Word,
    pub s_j: Word,
    /// Number of completed sessions.
    pub session_index: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IhrmaServerRecord {
    pub id_k: Word,
    pub s_old: Word,
    pub s_new: Word,
    pub data: Word,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IhrmaServer {
    pub records: Vec<IhrmaServerRecord>,
}

impl IhrmaServer {
    pub fn record_of(&self, id_k: Word) -> Option<&IhrmaServerRecord> {
        self.records.iter().find(|r| r.id_k == id_k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IhrmaTagResponse {
    pub c1: Word,
    /// `C_2 ^ R_t` as sent on the air.
    pub d: Word,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IhrmaServerMessage {
    pub data: Word,
    pub c3: Word,
    /// Present only in the original variant.
    pub c4: Option<Word>,
    pub c5: Option<Word>,
}

/// Tag-side state kept between responding and finalizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PendingSession {
    r_t: Word,
    rid: Word,
}

impl PendingSession {
    pub fn r_t(&self) -> Word {
        self.r_t
    }

    pub fn rid(&self) -> Word {
        self.rid
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ServerDecision {
    Accept {
        record: usize,
        slot: Slot,
        message: IhrmaServerMessage,
    },
    Reject,
}

impl ServerDecision {
    pub fn accepted(&self) -> bool {
        matches!(self, ServerDecision::Accept { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IhrmaMessage {
    Query(Word),
    Response(IhrmaTagResponse),
    Final(IhrmaServerMessage),
}

impl OnAir for IhrmaMessage {
    fn fields(&self) -> Vec<(&'static str, Word)> {
        match self {
            IhrmaMessage::Query(r_r) => vec![("r_r", *r_r)],
            IhrmaMessage::Response(r) => vec![("c1", r.c1), ("d", r.d)],
            IhrmaMessage::Final(m) => {
                let mut f = vec![("data", m.data), ("c3", m.c3)];
                f.extend(m.c4.map(|w| ("c4", w)));
                f.extend(m.c5.map(|w| ("c5", w)));
                f
            }
        }
    }

    fn same_kind(&self, other: &Self) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

/// A configured IHRMA instance.
#[derive(Debug, Clone)]
pub struct Ihrma {
    params: IhrmaParams,
    suite: PrimitiveSuite,
}

impl Ihrma {
    pub fn new(params: IhrmaParams, suite_seed: u64) -> Self {
        Self {
            params,
            suite: PrimitiveSuite::uniform(suite_seed, params.width()),
        }
    }

    pub fn params(&self) -> IhrmaParams {
        self.params
    }

    /// `RID` for secret `s_j` and tag nonce `r_t`.
    ///
    /// Original: `(R_t - R_t mod S_j + 1) || (R_t + S_j - R_t mod S_j)`, both
    /// halves computed with wraparound in the full width and truncated to the
    /// low half-width bits, the first half most significant.
    /// Improved: `H(S_j ^ R_t)`.
    pub fn compute_rid(&self, s_j: Word, r_t: Word) -> Result<Word, WordError> {
        match self.params.variant {
            Variant::Original => {
                let half = self.params.half_width();
                let rem = r_t.mod_reduce(s_j)?;
                let one = Word::new(1, r_t.width());
                let hi = r_t.wrapping_sub(rem).wrapping_add(one).low_bits(half);
                let lo = r_t.wrapping_add(s_j).wrapping_sub(rem).low_bits(half);
                Ok(Word::concat_halves(hi, lo))
            }
            Variant::Improved => {
                if s_j.is_zero() {
                    return Err(WordError::ModulusZero);
                }
                Ok(self.suite.hash_h(&[s_j ^ r_t]))
            }
        }
    }

    /// The blind factor `C_2 = H(S_j)`.
    pub fn blind(&self, s_j: Word) -> Word {
        self.suite.hash_h(&[s_j])
    }

    /// `S_{j+1} = H(S_j ^ R_t)`, with zero mapped to one so that the next
    /// secret is always a valid modulus.
    pub fn next_secret(&self, s_j: Word, r_t: Word) -> Word {
        let s = self.suite.hash_h(&[s_j ^ r_t]);
        if s.is_zero() {
            Word::new(1, s.width())
        } else {
            s
        }
    }

    fn c1(&self, id_k: Word, r_t: Word, r_r: Word, rid: Word) -> Word {
        self.suite.hash_h(&[id_k ^ r_t ^ r_r ^ rid])
    }

    pub fn tag_respond(
        &self,
        tag: &IhrmaTagState,
        r_r: Word,
        rng: &mut SeededRng,
    ) -> (IhrmaTagResponse, PendingSession) {
        let r_t = rng.draw(self.params.width);
        let rid = self
            .compute_rid(tag.s_j, r_t)
            .expect("tag secret is nonzero by construction");
        let response = IhrmaTagResponse {
            c1: self.c1(tag.id_k, r_t, r_r, rid),
            d: self.blind(tag.s_j) ^ r_t,
        };
        (response, PendingSession { r_t, rid })
    }

    /// Tries the new secret, then the old one. On acceptance the record
    /// moves to `(s_old, s_new) = (matched, H(matched ^ R_t))`.
    pub fn authenticate_record(
        &self,
        record: &mut IhrmaServerRecord,
        r_r: Word,
        response: &IhrmaTagResponse,
    ) -> Option<(Slot, IhrmaServerMessage)> {
        let mut candidates = vec![(Slot::New, record.s_new)];
        if record.s_old != record.s_new {
            candidates.push((Slot::Old, record.s_old));
        }
        for (slot, s) in candidates {
            let c2 = self.blind(s);
            let r_t = response.d ^ c2;
            let Ok(rid) = self.compute_rid(s, r_t) else {
                continue;
            };
            if self.c1(record.id_k, r_t, r_r, rid) != response.c1 {
                continue;
            }
            let s_next = self.next_secret(s, r_t);
            let message = match self.params.variant {
                Variant::Original => IhrmaServerMessage {
                    data: record.data,
                    c3: self.suite.hash_h(&[record.data, rid]),
                    c4: Some(r_t ^ s_next),
                    c5: Some(r_t ^ self.suite.hash_h(&[s_next])),
                },
                Variant::Improved => IhrmaServerMessage {
                    data: record.data,
                    c3: self.suite.hash_h(&[c2, rid]),
                    c4: None,
                    c5: None,
                },
            };
            record.s_old = s;
            record.s_new = s_next;
            return Some((slot, message));
        }
        None
    }

    /// Linear scan over every record.
    pub fn server_authenticate(
        &self,
        server: &mut IhrmaServer,
        r_r: Word,
        response: &IhrmaTagResponse,
    ) -> ServerDecision {
        for (idx, record) in server.records.iter_mut().enumerate() {
            if let Some((slot, message)) = self.authenticate_record(record, r_r, response) {
                return ServerDecision::Accept {
                    record: idx,
                    slot,
                    message,
                };
            }
        }
        ServerDecision::Reject
    }

    /// Verifies the server's answer; on success moves the tag to the next
    /// secret. A rejection leaves the tag untouched.
    pub fn tag_finalize(
        &self,
        tag: &mut IhrmaTagState,
        pending: PendingSession,
        message: &IhrmaServerMessage,
    ) -> bool {
        let PendingSession { r_t, rid } = pending;
        let next = match self.params.variant {
            Variant::Original => {
                let (Some(c4), Some(c5)) = (message.c4, message.c5) else {
                    return false;
                };
                let s_next = c4 ^ r_t;
                let ok = !s_next.is_zero()
                    && c5 == r_t ^ self.suite.hash_h(&[s_next])
                    && message.c3 == self.suite.hash_h(&[message.data, rid]);
                ok.then_some(s_next)
            }
            Variant::Improved => {
                let expected = self.suite.hash_h(&[self.blind(tag.s_j), rid]);
                (message.c3 == expected).then(|| self.next_secret(tag.s_j, r_t))
            }
        };
        match next {
            Some(s) => {
                tag.s_j = s;
                tag.session_index += 1;
                true
            }
            None => false,
        }
    }

    fn transcript(&self) -> SessionTranscript {
        SessionTranscript::new(ProtocolId::Ihrma, self.params.variant, self.params.width)
    }

    /// Drives one session over the insecure reader–tag link.
    pub fn run_session(
        &self,
        tag: &mut IhrmaTagState,
        server: &mut IhrmaServer,
        rng: &mut SeededRng,
        interceptor: &mut dyn Interceptor<IhrmaMessage>,
    ) -> SessionTranscript {
        let mut t = self.transcript();
        let r_r = rng.draw(self.params.width);

        let Some(IhrmaMessage::Query(tag_r_r)) =
            t.transmit(interceptor, steps::QUERY, READER_TO_TAG, IhrmaMessage::Query(r_r))
        else {
            return t;
        };
        let (response, pending) = self.tag_respond(tag, tag_r_r, rng);

        let Some(IhrmaMessage::Response(response)) = t.transmit(
            interceptor,
            steps::RESPONSE,
            TAG_TO_READER,
            IhrmaMessage::Response(response),
        ) else {
            return t;
        };

        let ServerDecision::Accept { slot, message, .. } =
            self.server_authenticate(server, r_r, &response)
        else {
            t.outcome.server_accepted = Some(false);
            return t;
        };
        t.outcome.server_accepted = Some(true);
        t.outcome.server_slot = Some(slot);
        t.outcome.server_updated = true;

        let Some(IhrmaMessage::Final(message)) = t.transmit(
            interceptor,
            steps::FINAL,
            READER_TO_TAG,
            IhrmaMessage::Final(message),
        ) else {
            return t;
        };
        let accepted = self.tag_finalize(tag, pending, &message);
        t.outcome.tag_accepted = Some(accepted);
        t.outcome.tag_updated = accepted;
        t
    }

    /// Adversary as reader: sends `r_r` to the tag, lets `forge` build the
    /// final message from the tag's response, and delivers it.
    pub fn probe_tag(
        &self,
        tag: &mut IhrmaTagState,
        r_r: Word,
        rng: &mut SeededRng,
        forge: impl FnOnce(&IhrmaTagResponse) -> Option<IhrmaServerMessage>,
    ) -> SessionTranscript {
        let mut t = self.transcript();
        t.inject(steps::QUERY, READER_TO_TAG, &IhrmaMessage::Query(r_r));
        let (response, pending) = self.tag_respond(tag, r_r, rng);
        t.transmit(
            &mut crate::session::Passive,
            steps::RESPONSE,
            TAG_TO_READER,
            IhrmaMessage::Response(response),
        );
        if let Some(message) = forge(&response) {
            t.inject(steps::FINAL, READER_TO_TAG, &IhrmaMessage::Final(message));
            let accepted = self.tag_finalize(tag, pending, &message);
            t.outcome.tag_accepted = Some(accepted);
            t.outcome.tag_updated = accepted;
        }
        t
    }

    /// Adversary as tag: the honest reader issues `R_r`, `forge` answers it,
    /// and the server's reply goes out on the air.
    pub fn impersonate_tag(
        &self,
        server: &mut IhrmaServer,
        rng: &mut SeededRng,
        forge: impl FnOnce(Word) -> IhrmaTagResponse,
    ) -> SessionTranscript {
        let mut t = self.transcript();
        let r_r = rng.draw(self.params.width);
        t.transmit(
            &mut crate::session::Passive,
            steps::QUERY,
            READER_TO_TAG,
            IhrmaMessage::Query(r_r),
        );
        let response = forge(r_r);
        t.inject(steps::RESPONSE, TAG_TO_READER, &IhrmaMessage::Response(response));
        match self.server_authenticate(server, r_r, &response) {
            ServerDecision::Accept { slot, message, .. } => {
                t.outcome.server_accepted = Some(true);
                t.outcome.server_slot = Some(slot);
                t.outcome.server_updated = true;
                t.transmit(
                    &mut crate::session::Passive,
                    steps::FINAL,
                    READER_TO_TAG,
                    IhrmaMessage::Final(message),
                );
            }
            ServerDecision::Reject => t.outcome.server_accepted = Some(false),
        }
        t
    }
}

impl Protocol for Ihrma {
    type Tag = IhrmaTagState;
    type Backend = IhrmaServer;
    type Secrets = IhrmaTagState;
    type Message = IhrmaMessage;

    fn id(&self) -> ProtocolId {
        ProtocolId::Ihrma
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

    fn new_backend(&self, _rng: &mut SeededRng) -> IhrmaServer {
        IhrmaServer::default()
    }

    fn enroll(&self, server: &mut IhrmaServer, rng: &mut SeededRng) -> IhrmaTagState {
        let w = self.params.width;
        let tag = IhrmaTagState {
            id_k: rng.draw(w),
            s_j: rng.draw_nonzero(w),
            session_index: 0,
        };
        server.records.push(IhrmaServerRecord {
            id_k: tag.id_k,
            s_old: tag.s_j,
            s_new: tag.s_j,
            data: rng.draw(w),
        });
        tag
    }

    fn run_session(
        &self,
        tag: &mut IhrmaTagState,
        server: &mut IhrmaServer,
        rng: &mut SeededRng,
        interceptor: &mut dyn Interceptor<IhrmaMessage>,
    ) -> SessionTranscript {
        Ihrma::run_session(self, tag, server, rng, interceptor)
    }

    fn secrets(&self, tag: &IhrmaTagState) -> IhrmaTagState {
        tag.clone()
    }

    fn synchronized(&self, tag: &IhrmaTagState, server: &IhrmaServer) -> bool {
        server
            .record_of(tag.id_k)
            .is_some_and(|r| r.s_new == tag.s_j)
    }
}
