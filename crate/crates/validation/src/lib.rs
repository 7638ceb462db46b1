//! Acceptance suite for `kinterp`; run it with `cargo test -p kinterp-validation`.
