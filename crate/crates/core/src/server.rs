//! HTTP front end for [`crate::api`].

use std::future::Future;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Request, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use tokio::net::TcpListener;
use tower_http::services::ServeDir;

use crate::api;
use crate::store::Store;

#[derive(Debug, Clone)]
pub struct ServerOptions {
    /// Adds `Access-Control-Allow-Origin: *` to every response.
    pub cors: bool,
    /// Directory with the built UI, served at `/`.
    pub ui_dir: Option<PathBuf>,
}

impl Default for ServerOptions {
    fn default() -> Self {
        ServerOptions {
            cors: true,
            ui_dir: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServerError {
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error("server failed: {0}")]
    Serve(#[source] std::io::Error),
}

fn json_response(status: StatusCode, body: Vec<u8>) -> Response {
    (status, [(header::CONTENT_TYPE, HeaderValue::from_static("application/json"))], body).into_response()
}

async fn api_handler(State(store): State<Arc<Store>>, request: Request) -> Response {
    let uri = request.uri();
    let path = uri.path().to_string();
    let query = uri.query().unwrap_or("").to_string();
    // Aggregations over multi-year scopes can take a few milliseconds; keep
    // them off the reactor threads.
    let result = tokio::task::spawn_blocking(move || api::handle(&store, &path, &query)).await;
    match result {
        Ok(Ok(body)) => json_response(StatusCode::OK, body),
        Ok(Err(err)) => {
            let status = StatusCode::from_u16(err.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
            json_response(status, err.to_json())
        }
        Err(join) => json_response(
            StatusCode::INTERNAL_SERVER_ERROR,
            api::ApiError {
                status: 500,
                code: "internal",
                message: join.to_string(),
            }
            .to_json(),
        ),
    }
}

async fn not_found(request: Request) -> Response {
    let err = api::ApiError {
        status: 404,
        code: "not_found",
        message: format!("no endpoint at {}", request.uri().path()),
    };
    json_response(StatusCode::NOT_FOUND, err.to_json())
}

async fn allow_any_origin(request: Request, next: Next) -> Response {
    let mut response = next.run(request).await;
    response
        .headers_mut()
        .insert(header::ACCESS_CONTROL_ALLOW_ORIGIN, HeaderValue::from_static("*"));
    response
}

/// Builds the application router over a shared, read-only store.
pub fn router(store: Arc<Store>, options: &ServerOptions) -> Router {
    let mut app = Router::new()
        .route("/api/{*rest}", get(api_handler))
        .with_state(store);
    app = match &options.ui_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir).append_index_html_on_directories(true)),
        None => app.fallback(not_found),
    };
    if options.cors {
        app = app.layer(middleware::from_fn(allow_any_origin));
    }
    app
}

/// Serves on an already bound listener until `shutdown` resolves.
pub async fn serve_listener(
    listener: TcpListener,
    store: Arc<Store>,
    options: &ServerOptions,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServerError> {
    axum::serve(listener, router(store, options))
        .with_graceful_shutdown(shutdown)
        .await
        .map_err(ServerError::Serve)
}

/// Binds `addr` and serves until Ctrl-C / SIGTERM.
pub async fn serve(store: Arc<Store>, addr: SocketAddr, options: &ServerOptions) -> Result<(), ServerError> {
    let listener = TcpListener::bind(addr)
        .await
        .map_err(|source| ServerError::Bind { addr, source })?;
    serve_listener(listener, store, options, shutdown_signal()).await
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}
