use std::io::Read;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::series::{parse_series_csv, RawSeries};
use crate::error::{Error, Result};

/// Cache location for a URL: `<dir>/<sha256(url) hex>`.
pub fn cache_path(cache_dir: &Path, url: &str) -> PathBuf {
    let digest = Sha256::digest(url.as_bytes());
    let name: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    cache_dir.join(name)
}

/// Loads a CSV series from `url`, serving it from `cache_dir` when a cached
/// copy exists. Successful payloads are written to the cache verbatim.
pub fn fetch_remote_series(url: &str, date_column: &str, value_column: &str, cache_dir: &Path) -> Result<RawSeries> {
    let cached = cache_path(cache_dir, url);
    if cached.exists() {
        let bytes = std::fs::read(&cached).map_err(|e| Error::io(&cached, e))?;
        return parse_payload(&bytes, url, date_column, value_column);
    }

    let bytes = download(url)?;
    let series = parse_payload(&bytes, url, date_column, value_column)?;
    std::fs::create_dir_all(cache_dir).map_err(|e| Error::io(cache_dir, e))?;
    std::fs::write(&cached, &bytes).map_err(|e| Error::io(&cached, e))?;
    Ok(series)
}

fn download(url: &str) -> Result<Vec<u8>> {
    let response = match ureq::get(url).call() {
        Ok(r) => r,
        Err(ureq::Error::Status(status, _)) => {
            return Err(Error::FetchFailed {
                url: url.to_string(),
                status,
            })
        }
        Err(e) => {
            return Err(Error::Network {
                url: url.to_string(),
                message: e.to_string(),
            })
        }
    };
    let mut bytes = Vec::new();
    response
        .into_reader()
        .read_to_end(&mut bytes)
        .map_err(|e| Error::Network {
            url: url.to_string(),
            message: e.to_string(),
        })?;
    Ok(bytes)
}

fn parse_payload(bytes: &[u8], url: &str, date_column: &str, value_column: &str) -> Result<RawSeries> {
    let head = bytes.iter().skip_while(|b| b.is_ascii_whitespace()).next();
    if head == Some(&b'<') || std::str::from_utf8(bytes).is_err() {
        return Err(Error::NotCsv(url.to_string()));
    }
    parse_series_csv(bytes, date_column, value_column, url)
}
