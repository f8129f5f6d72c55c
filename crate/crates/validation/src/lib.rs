//! Acceptance checks live in `tests/acceptance.rs`; this crate has no code.
