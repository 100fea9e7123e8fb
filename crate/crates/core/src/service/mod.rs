//! Live elicitation sessions for people: a session store with an
//! append-only event log per session, and an HTTP API over it.

mod error;
mod http;
mod registry;
mod store;

pub use error::{ErrorBody, ServiceError};
pub use http::{router, serve, Created, FeedbackRequest};
pub use registry::{SetInfo, SetRegistry};
pub use store::{
    read_events, replay_events, CreateSession, EstimateView, FeedbackAck, QueryPair, QueryView,
    ServiceConfig, SessionEvent, SessionState, SessionStore,
};
