pub mod attacks;
pub mod codec;
pub mod game;
pub mod i2srs;
pub mod ihrma;
pub mod lab;
pub mod primitives;
pub mod protocol;
pub mod rng;
pub mod session;
pub mod word;

pub use attacks::{AttackId, AttackOutcome};
pub use lab::{LabConfig, LabReport, Tolerances};
pub use session::{ProtocolId, Variant};
pub use word::Word;
