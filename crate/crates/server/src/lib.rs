//! JSON-over-HTTP API for reviewers: annotation queue and label intake,
//! agreement and adjudication views, and scan reports with their triage
//! queues.

mod error;
mod routes;
mod state;

pub use error::ApiError;
pub use routes::router;
pub use state::{AppState, Clock};

use std::sync::Arc;

/// Serves the API on `listener` until the process ends.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}
