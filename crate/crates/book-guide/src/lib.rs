//! Keeps the book honest: every chapter is inlined as module
//! documentation, so each of its Rust code blocks runs as a doc-test
//! under `cargo test`. A snippet that drifts from the library API fails
//! the build instead of rotting in the book.
//!
//! The crate exports nothing; its only purpose is to be tested.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/twists.md")]
pub mod twists {}

#[doc = include_str!("../../../book/src/taylor.md")]
pub mod taylor {}

#[doc = include_str!("../../../book/src/operators.md")]
pub mod operators {}

#[doc = include_str!("../../../book/src/norms.md")]
pub mod norms {}

#[doc = include_str!("../../../book/src/confluence.md")]
pub mod confluence {}

#[doc = include_str!("../../../book/src/connections.md")]
pub mod connections {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
