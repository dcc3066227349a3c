//! Single-line JSON records on standard error, filtered by `LASSO_GEO_LOG`.

use log::{Level, Log, Metadata, Record};

struct JsonLogger;

impl Log for JsonLogger {
    fn enabled(&self, metadata: &Metadata) -> bool {
        metadata.level() <= log::max_level()
    }

    fn log(&self, record: &Record) {
        if !self.enabled(record.metadata()) {
            return;
        }
        let line = serde_json::json!({
            "level": record.level().as_str().to_ascii_lowercase(),
            "target": record.target(),
            "message": record.args().to_string(),
        });
        eprintln!("{line}");
    }

    fn flush(&self) {}
}

static LOGGER: JsonLogger = JsonLogger;

/// Installs the logger. Unknown or missing values of `LASSO_GEO_LOG` mean
/// `error`.
pub fn init() {
    let level = match std::env::var("LASSO_GEO_LOG").as_deref() {
        Ok("debug") => Level::Debug,
        Ok("info") => Level::Info,
        _ => Level::Error,
    };
    if log::set_logger(&LOGGER).is_ok() {
        log::set_max_level(level.to_level_filter());
    }
}
