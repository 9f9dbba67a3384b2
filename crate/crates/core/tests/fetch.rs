//! Remote CSV loading against a local one-shot HTTP fixture.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::thread;

use chrono::NaiveDate;
use condcorr::data::{cache_path, fetch_remote_series};
use condcorr::Error;

/// Serves `responses` in order, one per connection, and returns the base URL.
fn serve(responses: Vec<(u16, String)>) -> (String, thread::JoinHandle<usize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let handle = thread::spawn(move || {
        let mut served = 0;
        for (status, body) in responses {
            let (mut stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut line = String::new();
            while reader.read_line(&mut line).unwrap() > 0 && line != "\r\n" {
                line.clear();
            }
            let reason = if status == 200 { "OK" } else { "Not Found" };
            write!(
                stream,
                "HTTP/1.1 {status} {reason}\r\nContent-Type: text/csv\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
            served += 1;
        }
        served
    });
    (url, handle)
}

fn csv_rows(n: usize) -> String {
    let start = NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
    let mut s = String::from("date,close\n");
    for k in 0..n {
        s.push_str(&format!("{},{}\n", start + chrono::Days::new(k as u64), 100.0 + k as f64 * 0.5));
    }
    s
}

#[test]
fn fetches_parses_and_caches() {
    let cache = tempfile::tempdir().unwrap();
    let (base, server) = serve(vec![(200, csv_rows(166))]);
    let url = format!("{base}/series.csv");

    let s = fetch_remote_series(&url, "date", "close", cache.path()).unwrap();
    assert_eq!(s.len(), 166);
    assert_eq!(s.values[165], 100.0 + 165.0 * 0.5);
    assert_eq!(server.join().unwrap(), 1);

    // the server is gone; a second call must be served from the cache
    let cached = cache_path(cache.path(), &url);
    assert_eq!(std::fs::read_to_string(&cached).unwrap(), csv_rows(166));
    let again = fetch_remote_series(&url, "date", "close", cache.path()).unwrap();
    assert_eq!(again, s);
}

#[test]
fn not_found_is_a_network_error_without_cache_write() {
    let cache = tempfile::tempdir().unwrap();
    let (base, server) = serve(vec![(404, "missing".into())]);
    let url = format!("{base}/nope.csv");
    let err = fetch_remote_series(&url, "date", "close", cache.path()).unwrap_err();
    assert!(matches!(err, Error::FetchFailed { status: 404, .. }), "{err}");
    assert!(err.to_string().contains("fetch failed"));
    assert_eq!(err.exit_code(), 3);
    assert!(!cache_path(cache.path(), &url).exists());
    server.join().unwrap();
}

#[test]
fn html_payload_is_rejected_and_not_cached() {
    let cache = tempfile::tempdir().unwrap();
    let (base, server) = serve(vec![(200, "<html><body>login</body></html>".into())]);
    let url = format!("{base}/page");
    let err = fetch_remote_series(&url, "date", "close", cache.path()).unwrap_err();
    assert!(matches!(err, Error::NotCsv(_)), "{err}");
    assert!(!cache_path(cache.path(), &url).exists());
    server.join().unwrap();
}

#[test]
fn refused_connection_maps_to_exit_3() {
    let port = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let cache = tempfile::tempdir().unwrap();
    let err = fetch_remote_series(&format!("http://127.0.0.1:{port}/x.csv"), "date", "close", cache.path()).unwrap_err();
    assert!(matches!(err, Error::Network { .. }), "{err}");
    assert_eq!(err.exit_code(), 3);
}
