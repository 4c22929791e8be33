//! HTTP editor for a harvested rule set. See `docs/api.md` for the contract.

pub mod api;
pub mod session;

pub use api::{router, serve, Shared};
pub use session::{replay, Session, SessionError};
