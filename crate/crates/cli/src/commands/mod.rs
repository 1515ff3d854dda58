pub mod derive;
pub mod replay;
pub mod retrieve;
pub mod stats;
pub mod verify;
