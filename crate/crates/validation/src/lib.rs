//! Acceptance suite for the workspace; the checks live in `tests/acceptance.rs`
//! and run with `cargo test -p angcorr-validation --test acceptance`.
