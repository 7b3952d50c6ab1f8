//! Attack procedures against both protocol families.
//!
//! Each attack is a plain function over [`Oracles`](crate::game::Oracles)
//! or a [`Strategy`](crate::game::Strategy) for the game, and is registered
//! under a stable [`AttackId`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::session::ProtocolId;
use crate::word::Word;

pub mod i2srs;
pub mod ihrma;
pub mod search;

/// What one attack run achieved.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AttackOutcome {
    pub succeeded: bool,
    /// Material the adversary claims to have learned, e.g. `"k_i"`.
    pub recovered: BTreeMap<String, Word>,
    pub primitive_evaluations: u64,
    /// Largest number of evaluations spent against a single transcript.
    pub max_transcript_cost: u64,
    pub sessions_used: u64,
    /// Denial of service only: whether the honest session after the attack
    /// also failed.
    pub lasting: Option<bool>,
}

/// Stable identifiers used by the CLI, the reports and the logs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttackId {
    IhrmaTagImpersonation,
    IhrmaReaderImpersonation,
    IhrmaDesyncDos,
    IhrmaTraceability,
    I2srsSecretReveal,
    I2srsReplay,
    I2srsTagImpersonation,
    I2srsDesyncDos,
    I2srsTraceability,
    I2srsForwardTraceability,
    I2srsBackwardTraceability,
}

/// How an attack's result is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackKind {
    /// Succeeds with some constant probability.
    Probabilistic,
    /// Succeeds every time when the target is vulnerable.
    Deterministic,
    /// Played as the indistinguishability game.
    Game,
}

impl AttackId {
    pub const ALL: [AttackId; 11] = [
        AttackId::IhrmaTagImpersonation,
        AttackId::IhrmaReaderImpersonation,
        AttackId::IhrmaDesyncDos,
        AttackId::IhrmaTraceability,
        AttackId::I2srsSecretReveal,
        AttackId::I2srsReplay,
        AttackId::I2srsTagImpersonation,
        AttackId::I2srsDesyncDos,
        AttackId::I2srsTraceability,
        AttackId::I2srsForwardTraceability,
        AttackId::I2srsBackwardTraceability,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AttackId::IhrmaTagImpersonation => "ihrma-tag-impersonation",
            AttackId::IhrmaReaderImpersonation => "ihrma-reader-impersonation",
            AttackId::IhrmaDesyncDos => "ihrma-desync-dos",
            AttackId::IhrmaTraceability => "ihrma-traceability",
            AttackId::I2srsSecretReveal => "i2srs-secret-reveal",
            AttackId::I2srsReplay => "i2srs-replay",
            AttackId::I2srsTagImpersonation => "i2srs-tag-impersonation",
            AttackId::I2srsDesyncDos => "i2srs-desync-dos",
            AttackId::I2srsTraceability => "i2srs-traceability",
            AttackId::I2srsForwardTraceability => "i2srs-forward-traceability",
            AttackId::I2srsBackwardTraceability => "i2srs-backward-traceability",
        }
    }

    pub fn protocol(self) -> ProtocolId {
        match self {
            AttackId::IhrmaTagImpersonation
            | AttackId::IhrmaReaderImpersonation
            | AttackId::IhrmaDesyncDos
            | AttackId::IhrmaTraceability => ProtocolId::Ihrma,
            _ => ProtocolId::I2srs,
        }
    }

    /// Row of the feature matrix this attack decides.
    pub fn feature(self) -> &'static str {
        match self {
            AttackId::IhrmaTagImpersonation => "v_1",
            AttackId::IhrmaReaderImpersonation => "v_2",
            AttackId::IhrmaDesyncDos => "v_3",
            AttackId::IhrmaTraceability => "v_4",
            AttackId::I2srsSecretReveal => "W_1",
            AttackId::I2srsReplay => "W_2",
            AttackId::I2srsTagImpersonation => "W_3",
            AttackId::I2srsDesyncDos => "W_4",
            AttackId::I2srsTraceability => "W_5",
            AttackId::I2srsForwardTraceability => "W_6",
            AttackId::I2srsBackwardTraceability => "W_7",
        }
    }

    pub fn feature_name(self) -> &'static str {
        match self {
            AttackId::IhrmaTagImpersonation => "Protection from tag impersonation",
            AttackId::IhrmaReaderImpersonation => "Protection from reader impersonation",
            AttackId::IhrmaDesyncDos | AttackId::I2srsDesyncDos => "Prevention DoS attack",
            AttackId::IhrmaTraceability | AttackId::I2srsTraceability => {
                "Prevention of traceability attack"
            }
            AttackId::I2srsSecretReveal => "Secret parameter reveal resistance",
            AttackId::I2srsReplay => "Protection of replay attack",
            AttackId::I2srsTagImpersonation => "Protection impersonation attack",
            AttackId::I2srsForwardTraceability => "Prevention of forward traceability attack",
            AttackId::I2srsBackwardTraceability => "Prevention of backward traceability attack",
        }
    }

    pub fn kind(self) -> AttackKind {
        match self {
            AttackId::IhrmaTagImpersonation | AttackId::IhrmaReaderImpersonation => {
                AttackKind::Probabilistic
            }
            AttackId::IhrmaTraceability
            | AttackId::I2srsTraceability
            | AttackId::I2srsForwardTraceability
            | AttackId::I2srsBackwardTraceability => AttackKind::Game,
            _ => AttackKind::Deterministic,
        }
    }

    pub fn for_protocol(protocol: ProtocolId) -> impl Iterator<Item = AttackId> {
        AttackId::ALL
            .into_iter()
            .filter(move |a| a.protocol() == protocol)
    }
}

impl fmt::Display for AttackId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttackId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AttackId::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown attack {s:?}"))
    }
}
