//! CLI experiment configs (under construction).
