//! Load ragged daily CSVs, window them, inner-join on dates and transform.
//!
//! ```text
//! cargo run --example ingest_align
//! ```

use std::fs;

use chrono::NaiveDate;
use condcorr::data::{align_panel, apply_transform, load_series_csv, TransformSpec};

fn main() -> condcorr::Result<()> {
    let dir = std::env::temp_dir().join(format!("condcorr-ingest-{}", std::process::id()));
    fs::create_dir_all(&dir).map_err(|e| condcorr::Error::Io { path: dir.clone(), source: e })?;

    // `b` skips 2020-03-04 and has an unparseable row; `c` uses its own column names.
    let files = [
        ("a.csv", "date,value\n2020-03-02,100\n2020-03-03,101\n2020-03-04,99.5\n2020-03-05,102\n2020-03-06,103\n"),
        ("b.csv", "date,value\n2020-03-02,20\n2020-03-03,21\n2020-03-05,n/a\n2020-03-06,19\n2020-03-09,18\n"),
        ("c.csv", "day,close\n2020-03-06,7\n2020-03-05,6\n2020-03-03,5\n2020-03-02,4\n"),
    ];
    for (name, body) in files {
        let p = dir.join(name);
        fs::write(&p, body).map_err(|e| condcorr::Error::Io { path: p, source: e })?;
    }

    let start = NaiveDate::from_ymd_opt(2020, 3, 2).unwrap();
    let end = NaiveDate::from_ymd_opt(2020, 3, 6).unwrap();
    let mut series = Vec::new();
    for (file, date_col, value_col) in [("a.csv", "date", "value"), ("b.csv", "date", "value"), ("c.csv", "day", "close")] {
        let mut s = load_series_csv(dir.join(file), date_col, value_col)?.window(start, end);
        s.name = file.trim_end_matches(".csv").to_string();
        series.push(s);
    }
    for s in &series {
        println!("{:<6} {} rows in window, {} dropped", s.name, s.len(), s.dropped_rows);
    }

    let panel = align_panel(&series)?;
    println!("\naligned on {} common dates", panel.len());
    for (t, d) in panel.dates.iter().enumerate() {
        println!("  {d} {:?}", panel.matrix.row(t));
    }

    let specs = [TransformSpec::new(true, 1)?, TransformSpec::IDENTITY, TransformSpec::new(false, 1)?];
    let out = apply_transform(&panel, &specs)?;
    println!("\nlog-diff / level / diff: {} rows", out.len());
    for (t, d) in out.dates.iter().enumerate() {
        let r = out.matrix.row(t);
        println!("  {d} {:>9.5} {:>6.1} {:>6.1}", r[0], r[1], r[2]);
    }
    fs::remove_dir_all(&dir).ok();
    Ok(())
}
