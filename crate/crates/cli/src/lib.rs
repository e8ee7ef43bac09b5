pub mod config;
pub mod fetch;
pub mod passwd;
pub mod password;
pub mod serve;
