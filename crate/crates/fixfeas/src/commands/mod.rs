pub mod bench;
pub mod diagnose;
pub mod run;
