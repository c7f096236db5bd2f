use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::landscape::LandscapeGrid;
use super::run::{ExpressivityRecord, RunRecord};
use super::verify::BoundsReport;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::invalid(format!("unknown format '{s}'"))),
        }
    }
}

pub const RUN_CSV_HEADER: [&str; 15] = [
    "run_id",
    "experiment",
    "ansatz",
    "layers",
    "qubits",
    "sample_kind",
    "schmidt_rank",
    "entanglement_entropy",
    "seed",
    "radius",
    "raw_min_loss",
    "envelope_min_loss",
    "start_loss",
    "distance_to_min",
    "improvement",
];

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `printf("%.12g")`.
pub fn format_g(x: f64) -> String {
    const SIG: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (SIG - 1) as usize, x);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIG {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_fraction(mant), sign, exp.abs())
    } else {
        let fixed = format!("{:.*}", (SIG - 1 - exp) as usize, x);
        trim_fraction(&fixed).to_string()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_g).unwrap_or_default()
}

fn open(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// One row per swept radius; a failed run with no curve gets one row with
/// empty radius columns.
pub fn write_runs_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUN_CSV_HEADER)?;
    for r in records {
        let head = [
            r.run_id.to_string(),
            r.experiment.as_str().to_string(),
            r.ansatz.as_str().to_string(),
            r.layers.to_string(),
            r.qubits.to_string(),
            r.sample_kind.as_str().to_string(),
            r.schmidt_rank.to_string(),
            format_g(r.entanglement_entropy),
            r.seed.to_string(),
        ];
        let tail = [format_g(r.start_loss), opt(r.distance_to_min), format_g(r.improvement)];
        let rows: Vec<[String; 3]> = if r.curve.points.is_empty() {
            vec![Default::default()]
        } else {
            r.curve
                .points
                .iter()
                .map(|p| [format_g(p.radius), format_g(p.raw_min_loss), format_g(p.envelope_min_loss)])
                .collect()
        };
        for mid in rows {
            w.write_record(head.iter().chain(&mid).chain(&tail))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_expressivity_csv<W: Write>(records: &[ExpressivityRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["ansatz", "layers", "qubits", "pairs", "bins", "seed", "expressivity"])?;
    for r in records {
        w.write_record([
            r.ansatz.as_str().to_string(),
            r.layers.to_string(),
            r.qubits.to_string(),
            r.pairs.to_string(),
            r.bins.to_string(),
            r.seed.to_string(),
            format_g(r.expressivity),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_landscape_csv<W: Write>(grids: &[LandscapeGrid], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sample_kind", "theta1", "theta2", "loss"])?;
    for g in grids {
        for (i, a) in g.angles.iter().enumerate() {
            for (j, b) in g.angles.iter().enumerate() {
                w.write_record([g.sample_kind.as_str().to_string(), format_g(*a), format_g(*b), format_g(g.losses[i][j])])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_bounds_csv<W: Write>(report: &BoundsReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["check", "dimension", "trials", "tolerance", "max_error", "failures", "passed"])?;
    for c in &report.checks {
        w.write_record([
            c.name.clone(),
            c.dimension.map(|d| d.to_string()).unwrap_or_default(),
            c.trials.to_string(),
            format_g(c.tolerance),
            format_g(c.max_error),
            c.failures.to_string(),
            c.passed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_runs_json(path: &Path) -> Result<Vec<RunRecord>> {
    read_json(path)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?)
}

/// Write to `path`, or to stdout when `path` is `None`.
fn with_output<F>(path: Option<&Path>, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match path {
        Some(p) => {
            let mut w = open(p)?;
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)?;
        }
    }
    Ok(())
}

pub fn emit_runs(records: &[RunRecord], format: Format, path: Option<&Path>) -> Result<()> {
    with_output(path, |w| match format {
        Format::Csv => write_runs_csv(records, w),
        Format::Json => write_json(records, w),
    })
}

pub fn emit_expressivity(records: &[ExpressivityRecord], format: Format, path: Option<&Path>) -> Result<()> {
    with_output(path, |w| match format {
        Format::Csv => write_expressivity_csv(records, w),
        Format::Json => write_json(records, w),
    })
}

pub fn emit_landscape(grids: &[LandscapeGrid], format: Format, path: Option<&Path>) -> Result<()> {
    with_output(path, |w| match format {
        Format::Csv => write_landscape_csv(grids, w),
        Format::Json => write_json(grids, w),
    })
}

pub fn emit_bounds(report: &BoundsReport, format: Format, path: Option<&Path>) -> Result<()> {
    with_output(path, |w| match format {
        Format::Csv => write_bounds_csv(report, w),
        Format::Json => write_json(report, w),
    })
}
