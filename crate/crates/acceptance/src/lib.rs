//! Holds no code; the criteria live in `tests/acceptance.rs` and run last in
//! `cargo test --workspace`, so a red criterion does not hide other suites.
