//! Compiles every chapter of the guide as a doc-test.

#[doc = include_str!("src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("src/words.md")]
pub mod words {}
#[doc = include_str!("src/ihrma.md")]
pub mod ihrma {}
#[doc = include_str!("src/i2srs.md")]
pub mod i2srs {}
#[doc = include_str!("src/game.md")]
pub mod game {}
#[doc = include_str!("src/attacks.md")]
pub mod attacks {}
#[doc = include_str!("src/lab.md")]
pub mod lab {}
