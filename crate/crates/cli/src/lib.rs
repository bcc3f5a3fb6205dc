//! Command-line entry points and the HTTP chat service for `rekindle-core`.

pub mod commands;
pub mod config;
pub mod service;

pub use config::{ConfigError, Overrides, ServiceConfig};
pub use service::{router, ChatService, MessageReply, ServiceError};
