#![allow(clippy::needless_range_loop)]

pub mod geometry;
pub mod lp;
pub mod objective;
pub mod oracle;
pub mod closed_form;
pub mod certificates;
pub mod proof;
pub mod cli;
