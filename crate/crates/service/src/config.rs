use std::time::Duration;

use hetree::VisBounds;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub port: u16,
    /// Sessions and datasets untouched for this long are dropped.
    pub idle_ttl: Duration,
    /// Used when a session request omits ℓ and d.
    pub bounds: VisBounds,
    pub d_max: usize,
    pub max_upload_bytes: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            port: 8080,
            idle_ttl: Duration::from_secs(30 * 60),
            bounds: VisBounds::default(),
            d_max: 6,
            max_upload_bytes: 256 << 20,
        }
    }
}
