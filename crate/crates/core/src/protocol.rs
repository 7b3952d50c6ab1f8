//! The seam between protocol families and the oracle layer.

use std::fmt::Debug;

use crate::primitives::PrimitiveSuite;
use crate::rng::SeededRng;
use crate::session::{Interceptor, ProtocolId, SessionTranscript, Variant};

/// A configured protocol (family, variant, width, primitives) that can
/// enroll tags and drive sessions between them and its back end.
pub trait Protocol {
    type Tag: Clone + Debug;
    /// Reader(s) and server database.
    type Backend: Clone + Debug;
    /// Everything a Corrupt query reveals about a tag.
    type Secrets: Clone + Debug + PartialEq;
    type Message: Clone + Debug;

    fn id(&self) -> ProtocolId;
    fn variant(&self) -> Variant;
    fn width(&self) -> u32;
    fn suite(&self) -> &PrimitiveSuite;
    /// Step ids of every interceptable message, in protocol order.
    fn steps(&self) -> &'static [&'static str];

    fn new_backend(&self, rng: &mut SeededRng) -> Self::Backend;
    /// Provisions a fresh tag with random secrets and registers it.
    fn enroll(&self, backend: &mut Self::Backend, rng: &mut SeededRng) -> Self::Tag;

    fn run_session(
        &self,
        tag: &mut Self::Tag,
        backend: &mut Self::Backend,
        rng: &mut SeededRng,
        interceptor: &mut dyn Interceptor<Self::Message>,
    ) -> SessionTranscript;

    fn secrets(&self, tag: &Self::Tag) -> Self::Secrets;

    /// Whether the server's current ("new") secrets equal the tag's.
    fn synchronized(&self, tag: &Self::Tag, backend: &Self::Backend) -> bool;
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParamError {
    #[error("{protocol} word width must be {rule}, got {width}")]
    Width {
        protocol: ProtocolId,
        width: u32,
        rule: &'static str,
    },
}
