//! Hosting the gateway and sim over HTTP.

use std::future::Future;
use std::net::SocketAddr;
use std::sync::Arc;

use tokio::net::TcpListener;
use tracing::info;

use resultline_core::sim::http::{router, serve};
use resultline_core::{Gateway, SmsCenter, SystemClock};

use crate::CliError;

pub struct Server {
    listener: TcpListener,
    center: Arc<SmsCenter>,
}

impl Server {
    pub async fn bind(addr: SocketAddr, gateway: Gateway) -> Result<Self, CliError> {
        let listener = TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::io(format!("bind {addr}"), e))?;
        Ok(Server {
            listener,
            center: Arc::new(SmsCenter::new(gateway)),
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr, CliError> {
        self.listener.local_addr().map_err(|e| CliError::io("listener", e))
    }

    /// Serves until `shutdown` resolves, then flushes the store.
    pub async fn run(self, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<(), CliError> {
        let app = router(self.center.clone(), Arc::new(SystemClock));
        serve(self.listener, app, shutdown)
            .await
            .map_err(|e| CliError::io("server", e))?;
        info!("shutting down, flushing store");
        self.center.with_gateway(|g| g.store_mut().sync_all())?;
        Ok(())
    }
}

/// Resolves on ctrl-c, or SIGTERM on unix.
pub async fn shutdown_signal() {
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
        _ = ctrl_c => {}
        _ = term => {}
    }
}
