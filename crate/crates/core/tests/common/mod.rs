#![allow(dead_code)]

pub mod checks;
pub mod feeders;
pub mod flow;
pub mod oracle;
