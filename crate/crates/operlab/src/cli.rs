//! Command line entry point (placeholder during bring-up).

pub fn main() {}
