//! Scenario-driven front end (config parsing, checks, reports).
