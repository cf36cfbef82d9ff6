//! On-disk formats: the crossing trace is CSV with a header row, one
//! encounter per line; metrics are flat `key = value` TOML.

use std::io::{Read, Write};

use super::crossing::CrossingEvent;
use super::metrics::MetricsReport;
use crate::{Error, Result};

/// Columns: `time,av_id,hv_id,av_intent,signal,hv_posterior_go,hv_action,outcome,crosser`.
pub fn write_trace<W: Write>(events: &[CrossingEvent], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    if events.is_empty() {
        writer
            .write_record([
                "time",
                "av_id",
                "hv_id",
                "av_intent",
                "signal",
                "hv_posterior_go",
                "hv_action",
                "outcome",
                "crosser",
            ])
            .map_err(io_err)?;
    }
    for event in events {
        writer.serialize(event).map_err(io_err)?;
    }
    writer.flush().map_err(|e| Error::Config(e.to_string()))
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<CrossingEvent>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(io_err)
}

pub fn metrics_to_toml(report: &MetricsReport) -> String {
    toml::to_string(report).expect("flat struct serializes")
}

pub fn metrics_from_toml(text: &str) -> Result<MetricsReport> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

fn io_err(e: csv::Error) -> Error {
    Error::Config(format!("trace I/O: {e}"))
}
