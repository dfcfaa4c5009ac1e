//! Acceptance checks for the full simulator live in `tests/acceptance.rs`.
//! They are kept in their own package so that `cargo test --workspace` runs
//! them after every unit and integration test of the other crates.
