pub mod client;
pub mod clock;
pub mod error;
pub mod group;
pub mod http;
pub mod pake;
pub mod realm;
pub mod server;
pub mod validation;
pub mod wire;
