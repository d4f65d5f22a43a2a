//! Report files: z-statistic tables, biased-feature sets, plot data, traces.
//!
//! TSV files carry a header row `feature  label  n  p_hat  z`. Floats are
//! written in shortest round-trip form so a file read back gives the same
//! values bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::data::Label;
use crate::error::{Error, Result};
use crate::features::{FeatureId, FeatureVector};
use crate::zfilter::{BatchTrace, Rejection};
use crate::zstats::{BiasedFeatureSets, ZReport, ZRow};

pub const TSV_HEADER: &str = "feature\tlabel\tn\tp_hat\tz";

fn write_row<W: Write>(out: &mut W, r: &ZRow) -> std::io::Result<()> {
    writeln!(out, "{}\t{}\t{}\t{}\t{}", r.feature, r.label, r.n, r.p_hat, r.z)
}

pub fn write_report_tsv<W: Write>(out: &mut W, report: &ZReport) -> std::io::Result<()> {
    writeln!(out, "{TSV_HEADER}")?;
    for r in &report.rows {
        write_row(out, r)?;
    }
    Ok(())
}

/// `B(l)` rows grouped by label index, each group in rank order.
pub fn write_biased_tsv<W: Write>(out: &mut W, biased: &BiasedFeatureSets) -> std::io::Result<()> {
    writeln!(out, "{TSV_HEADER}")?;
    for label in Label::ALL {
        for r in biased.rows(label) {
            write_row(out, r)?;
        }
    }
    Ok(())
}

pub fn read_biased_tsv(path: &Path) -> Result<BiasedFeatureSets> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut sets: [Vec<ZRow>; 3] = Default::default();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line_no == 1 {
            if line != TSV_HEADER {
                return Err(Error::parse(1, "unexpected header in biased-feature file"));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let [feature, label, n, p_hat, z] = cols[..] else {
            return Err(Error::parse(line_no, "expected 5 tab-separated columns"));
        };
        let bad = |what: &str| Error::parse(line_no, format!("invalid {what}"));
        let label: Label = label.parse().map_err(|m| Error::parse(line_no, m))?;
        sets[label.index()].push(ZRow {
            feature: FeatureId::new(feature),
            label,
            n: n.parse().map_err(|_| bad("n"))?,
            p_hat: p_hat.parse().map_err(|_| bad("p_hat"))?,
            z: z.parse().map_err(|_| bad("z"))?,
        });
    }
    Ok(BiasedFeatureSets::from_rows(sets))
}

/// Top features per label in `label  rank  feature  z` layout.
pub fn write_topk_tsv<W: Write>(out: &mut W, biased: &BiasedFeatureSets) -> std::io::Result<()> {
    writeln!(out, "label\trank\tfeature\tz")?;
    for label in Label::ALL {
        for (rank, r) in biased.rows(label).iter().enumerate() {
            writeln!(out, "{}\t{}\t{}\t{}", label, rank + 1, r.feature, r.z)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct PlotPoint<'a> {
    feature: &'a str,
    label: Label,
    n: u64,
    z: f64,
}

/// One JSON object per `(feature, label)`: enough to plot z against n.
pub fn write_plot_jsonl<W: Write>(out: &mut W, report: &ZReport) -> std::io::Result<()> {
    for r in &report.rows {
        let point = PlotPoint {
            feature: r.feature.as_str(),
            label: r.label,
            n: r.n,
            z: r.z,
        };
        serde_json::to_writer(&mut *out, &point)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_trace_jsonl<W: Write>(out: &mut W, trace: &[BatchTrace]) -> std::io::Result<()> {
    for t in trace {
        serde_json::to_writer(&mut *out, t)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_rejections_jsonl<W: Write>(out: &mut W, rejections: &[Rejection]) -> std::io::Result<()> {
    for r in rejections {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_rejections(path: &Path) -> Result<Vec<Rejection>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse(i + 1, e.to_string()))?);
    }
    Ok(out)
}

#[derive(Serialize)]
struct FeatureDump<'a> {
    id: &'a str,
    features: &'a [FeatureId],
}

pub fn write_feature_line<W: Write>(out: &mut W, id: &str, features: &FeatureVector) -> std::io::Result<()> {
    serde_json::to_writer(
        &mut *out,
        &FeatureDump {
            id,
            features: features.as_slice(),
        },
    )?;
    out.write_all(b"\n")
}

/// Creates `path`, hands a buffered writer to `body`, and flushes.
pub fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    body(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}
