pub mod gamemap;
pub mod metrics;
pub mod race;
pub mod sim;
pub mod warc;
