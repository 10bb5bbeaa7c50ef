//! Holds the `acceptance` test target, kept in its own package so it runs
//! after the ric-core suites. Run it with `cargo test -p ric-validation`.
