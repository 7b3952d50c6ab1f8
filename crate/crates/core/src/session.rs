//! Vocabulary shared by both protocol families: identifiers, the insecure
//! channel with its interception hook, and session transcripts.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::word::Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolId {
    Ihrma,
    I2srs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Original,
    Improved,
}

/// Which of the server's two stored secrets matched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Old,
    New,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 2] = [ProtocolId::Ihrma, ProtocolId::I2srs];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolId::Ihrma => "ihrma",
            ProtocolId::I2srs => "i2srs",
        }
    }
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Original, Variant::Improved];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Original => "original",
            Variant::Improved => "improved",
        }
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ihrma" => Ok(ProtocolId::Ihrma),
            "i2srs" => Ok(ProtocolId::I2srs),
            _ => Err(format!("unknown protocol {s:?}")),
        }
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "original" => Ok(Variant::Original),
            "improved" => Ok(Variant::Improved),
            _ => Err(format!("unknown variant {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Tag,
    Reader,
    Server,
}

impl Party {
    fn as_str(self) -> &'static str {
        match self {
            Party::Tag => "tag",
            Party::Reader => "reader",
            Party::Server => "server",
        }
    }

    fn parse(s: &str) -> Option<Party> {
        match s {
            "tag" => Some(Party::Tag),
            "reader" => Some(Party::Reader),
            "server" => Some(Party::Server),
            _ => None,
        }
    }
}

/// Sender and receiver of a message; serialized as `"reader->tag"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Direction {
    pub from: Party,
    pub to: Party,
}

impl Direction {
    pub const fn new(from: Party, to: Party) -> Self {
        Self { from, to }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from.as_str(), self.to.as_str())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (from, to) = s
            .split_once("->")
            .ok_or_else(|| format!("bad direction {s:?}"))?;
        match (Party::parse(from), Party::parse(to)) {
            (Some(from), Some(to)) => Ok(Direction { from, to }),
            _ => Err(format!("bad direction {s:?}")),
        }
    }
}

impl Serialize for Direction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// What happened to a message on the insecure channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delivery {
    Delivered,
    Blocked,
    /// Sent, but swapped by the adversary; the substitute follows as `Injected`.
    Replaced,
    Injected,
}

/// Decision of an interceptor for one message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action<M> {
    Deliver,
    Block,
    Replace(M),
}

/// Hook on the insecure channel. Sees every on-air message, identified by
/// its protocol step, and may pass, block or substitute it.
pub trait Interceptor<M> {
    fn intercept(&mut self, step: &'static str, message: &M) -> Action<M>;
}

impl<M, F> Interceptor<M> for F
where
    F: FnMut(&'static str, &M) -> Action<M>,
{
    fn intercept(&mut self, step: &'static str, message: &M) -> Action<M> {
        self(step, message)
    }
}

/// Lets everything through.
#[derive(Debug, Clone, Copy, Default)]
pub struct Passive;

impl<M> Interceptor<M> for Passive {
    fn intercept(&mut self, _: &'static str, _: &M) -> Action<M> {
        Action::Deliver
    }
}

/// Blocks every message of one step.
#[derive(Debug, Clone, Copy)]
pub struct BlockStep(pub &'static str);

impl<M> Interceptor<M> for BlockStep {
    fn intercept(&mut self, step: &'static str, _: &M) -> Action<M> {
        if step == self.0 {
            Action::Block
        } else {
            Action::Deliver
        }
    }
}

/// A protocol message as it appears on the air.
pub trait OnAir: Clone {
    /// Named fields in a fixed order.
    fn fields(&self) -> Vec<(&'static str, Word)>;
    /// Whether `other` is the same kind of message, i.e. a legal substitute.
    fn same_kind(&self, other: &Self) -> bool;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageRecord {
    pub step: String,
    pub direction: Direction,
    pub fields: BTreeMap<String, Word>,
    pub delivery: Delivery,
}

/// Per-party results of a session. `None` means the party never got to decide.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionOutcome {
    pub server_accepted: Option<bool>,
    pub server_slot: Option<Slot>,
    pub reader_accepted: Option<bool>,
    pub tag_accepted: Option<bool>,
    pub server_updated: bool,
    pub tag_updated: bool,
}

impl SessionOutcome {
    /// Both sides authenticated each other.
    pub fn mutual(&self) -> bool {
        self.server_accepted == Some(true) && self.tag_accepted == Some(true)
    }
}

/// Ordered record of one session on the insecure channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionTranscript {
    pub protocol: ProtocolId,
    pub variant: Variant,
    pub width: u32,
    pub seed: u64,
    pub session: u64,
    pub messages: Vec<MessageRecord>,
    pub outcome: SessionOutcome,
}

impl SessionTranscript {
    pub fn new(protocol: ProtocolId, variant: Variant, width: u32) -> Self {
        Self {
            protocol,
            variant,
            width,
            seed: 0,
            session: 0,
            messages: Vec::new(),
            outcome: SessionOutcome::default(),
        }
    }

    /// First record of `step` as originally sent.
    pub fn sent(&self, step: &str) -> Option<&MessageRecord> {
        self.messages
            .iter()
            .find(|m| m.step == step && m.delivery != Delivery::Injected)
    }

    /// Field of the message sent at `step`.
    pub fn field(&self, step: &str, name: &str) -> Option<Word> {
        self.sent(step).and_then(|m| m.fields.get(name).copied())
    }

    /// Whether the message of `step` reached its receiver, possibly altered.
    pub fn delivered(&self, step: &str) -> bool {
        self.messages.iter().any(|m| {
            m.step == step && matches!(m.delivery, Delivery::Delivered | Delivery::Injected)
        })
    }

    fn push(&mut self, step: &str, direction: Direction, fields: Vec<(&str, Word)>, delivery: Delivery) {
        self.messages.push(MessageRecord {
            step: step.to_string(),
            direction,
            fields: fields
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            delivery,
        });
    }

    /// Puts `message` on the air at `step`, letting the interceptor act on
    /// it, and returns what the receiver gets.
    pub(crate) fn transmit<M: OnAir>(
        &mut self,
        interceptor: &mut dyn Interceptor<M>,
        step: &'static str,
        direction: Direction,
        message: M,
    ) -> Option<M> {
        match interceptor.intercept(step, &message) {
            Action::Deliver => {
                self.push(step, direction, message.fields(), Delivery::Delivered);
                Some(message)
            }
            Action::Block => {
                self.push(step, direction, message.fields(), Delivery::Blocked);
                None
            }
            Action::Replace(substitute) => {
                assert!(
                    message.same_kind(&substitute),
                    "substitute at step {step} has the wrong message kind"
                );
                self.push(step, direction, message.fields(), Delivery::Replaced);
                self.push(step, direction, substitute.fields(), Delivery::Injected);
                Some(substitute)
            }
        }
    }

    /// Records a message the adversary put on the air itself.
    pub(crate) fn inject<M: OnAir>(&mut self, step: &'static str, direction: Direction, message: &M) {
        self.push(step, direction, message.fields(), Delivery::Injected);
    }
}
