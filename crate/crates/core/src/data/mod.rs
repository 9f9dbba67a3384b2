//! Loading, aligning and transforming raw daily series into the panel used
//! for estimation.

mod fetch;
mod panel;
mod series;

pub use fetch::{cache_path, fetch_remote_series};
pub use panel::{
    align_panel, apply_transform, read_panel_csv, write_panel_csv, AlignedPanel, TransformSpec,
    MIN_ESTIMATION_LENGTH,
};
pub use series::{load_series_csv, parse_date, parse_series_csv, RawSeries};
