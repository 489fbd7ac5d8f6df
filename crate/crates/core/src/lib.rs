pub mod agents;
pub mod exact;
pub mod game;
pub mod harness;
pub mod memory;
pub mod neural;
