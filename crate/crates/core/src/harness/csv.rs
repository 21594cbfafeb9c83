//! CSV output of sweep records.

use super::SweepRecord;
use crate::constellation::Modulation;
use crate::error::{Error, Result};
use crate::framing::DelayScheme;
use crate::schedulers::Scheme;

pub const CSV_HEADER: [&str; 20] = [
    "scheme",
    "mod",
    "delay",
    "N",
    "K",
    "tn",
    "W",
    "iters",
    "ebn0_db",
    "eta",
    "frames",
    "bit_errors",
    "frame_errors",
    "ber",
    "fer",
    "mean_bp_iters",
    "demap_passes",
    "point_evals",
    "decode_calls",
    "truncated",
];

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub scheme: Scheme,
    pub modulation: Modulation,
    pub delay: DelayScheme,
    pub n: usize,
    pub k: usize,
    pub tn: usize,
    pub window: usize,
    pub iters: usize,
    pub ebn0_db: f64,
    pub eta: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub mean_bp_iters: f64,
    pub demap_passes: u64,
    pub point_evals: u64,
    pub decode_calls: u64,
    pub truncated: bool,
}

fn fields(r: &SweepRecord) -> Vec<String> {
    vec![
        r.scheme.to_string(),
        r.modulation.to_string(),
        r.delay.to_string(),
        r.n.to_string(),
        r.k.to_string(),
        r.tn.to_string(),
        r.window.to_string(),
        r.iters.to_string(),
        r.ebn0_db.to_string(),
        r.eta.to_string(),
        r.frames.to_string(),
        r.bit_errors.to_string(),
        r.frame_errors.to_string(),
        format!("{:.5e}", r.ber),
        format!("{:.5e}", r.fer),
        format!("{:.4}", r.mean_bp_iters),
        r.counters.demap_passes.to_string(),
        r.counters.point_evals.to_string(),
        r.counters.decode_calls.to_string(),
        r.truncated.to_string(),
    ]
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("csv: {other:?}")),
    }
}

/// Header plus one row per record. Rates carry six significant digits.
pub fn emit_csv(records: &[SweepRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("writing to memory");
    for r in records {
        w.write_record(fields(r)).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv output is UTF-8")
}

/// Parses text produced by [`emit_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_err)?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse { line: 1, msg: "unexpected CSV header".into() });
    }
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(csv_err)?;
            let line = i + 2;
            let bad = |col: &str| Error::Parse { line, msg: format!("bad `{col}` value") };
            macro_rules! col {
                ($idx:expr) => {
                    rec[$idx].parse().map_err(|_| bad(CSV_HEADER[$idx]))?
                };
            }
            Ok(CsvRow {
                scheme: col!(0),
                modulation: col!(1),
                delay: col!(2),
                n: col!(3),
                k: col!(4),
                tn: col!(5),
                window: col!(6),
                iters: col!(7),
                ebn0_db: col!(8),
                eta: col!(9),
                frames: col!(10),
                bit_errors: col!(11),
                frame_errors: col!(12),
                ber: col!(13),
                fer: col!(14),
                mean_bp_iters: col!(15),
                demap_passes: col!(16),
                point_evals: col!(17),
                decode_calls: col!(18),
                truncated: col!(19),
            })
        })
        .collect()
}
