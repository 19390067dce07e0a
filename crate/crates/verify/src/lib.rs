//! Holds the end-to-end acceptance checks in `tests/acceptance.rs`. Run them
//! with `cargo test -p ccmckp-verify`.
