//! Readers for run outputs and gnuplot-ready data blocks.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{BasinDiff, CheckpointHeader};
use crate::classify::{label_order, ResonanceLabel};
use crate::error::{Error, Result};
use crate::models::PhaseState;

/// One row of a labels file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelRow {
    pub index: u64,
    pub ic: PhaseState,
    pub label: ResonanceLabel,
}

fn schema(line: usize, what: impl std::fmt::Display) -> Error {
    Error::Schema(format!("line {line}: {what}"))
}

fn label_from_fields(p: &str, q: &str, variant: &str) -> Option<ResonanceLabel> {
    match (p, q, variant) {
        ("", "", "") => Some(ResonanceLabel::Unclassified),
        ("0", "1", "") => Some(ResonanceLabel::Origin),
        _ => Some(ResonanceLabel::Resonance {
            p: p.parse().ok()?,
            q: q.parse().ok()?,
            variant: variant.parse().ok()?,
        }),
    }
}

/// Parses a labels file written by [`super::BasinReport::labels_csv`].
pub fn parse_labels_csv(text: &str) -> Result<(CheckpointHeader, Vec<LabelRow>)> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .and_then(|(_, l)| CheckpointHeader::parse(l))
        .ok_or_else(|| schema(1, "missing `#seed=.. fingerprint=.. n=..` line"))?;
    match lines.next() {
        Some((_, l)) if l.starts_with("index,q0,v0,label,p,q,variant") => {}
        _ => return Err(schema(2, "missing column header")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(schema(i + 1, "expected 7 fields"));
        }
        let num = |s: &str, name: &str| -> Result<f64> {
            s.parse().map_err(|_| schema(i + 1, format!("column `{name}` is not a number")))
        };
        rows.push(LabelRow {
            index: f[0]
                .parse()
                .map_err(|_| schema(i + 1, "column `index` is not an integer"))?,
            ic: PhaseState {
                q: num(f[1], "q0")?,
                v: num(f[2], "v0")?,
                t: 0.0,
            },
            label: label_from_fields(f[4], f[5], f[6])
                .ok_or_else(|| schema(i + 1, "bad `p,q,variant` fields"))?,
        });
    }
    Ok((header, rows))
}

/// Membership diff of `target` (any variant) between two label sets drawn
/// from the same initial conditions.
pub fn diff_label_rows(
    a: &(CheckpointHeader, Vec<LabelRow>),
    b: &(CheckpointHeader, Vec<LabelRow>),
    target: &ResonanceLabel,
) -> Result<BasinDiff> {
    if a.0.seed != b.0.seed {
        return Err(Error::Mismatch(format!("seeds differ: {} vs {}", a.0.seed, b.0.seed)));
    }
    if a.1.len() != b.1.len() {
        return Err(Error::Mismatch(format!(
            "sample sizes differ: {} vs {}",
            a.1.len(),
            b.1.len()
        )));
    }
    let mut diff = BasinDiff::default();
    for (ra, rb) in a.1.iter().zip(&b.1) {
        if ra.index != rb.index || ra.ic != rb.ic {
            return Err(Error::Mismatch(format!(
                "initial condition {} differs between runs",
                ra.index
            )));
        }
        match (ra.label.same_frequency(target), rb.label.same_frequency(target)) {
            (false, true) => diff.gained.push(ra.ic),
            (true, false) => diff.lost.push(ra.ic),
            (true, true) => diff.both.push(ra.ic),
            (false, false) => {}
        }
    }
    Ok(diff)
}

/// Scatter blocks of initial conditions per label (`q v` lines), in
/// report order, separated by two blank lines.
pub fn scatter_data(rows: &[(PhaseState, ResonanceLabel)]) -> String {
    let mut labels: Vec<ResonanceLabel> = rows.iter().map(|r| r.1).collect();
    labels.sort_by(label_order);
    labels.dedup();
    let mut s = String::new();
    for label in labels {
        let _ = writeln!(s, "# {label}");
        for (ic, _) in rows.iter().filter(|r| r.1 == label) {
            let _ = writeln!(s, "{:?} {:?}", ic.q, ic.v);
        }
        s.push_str("\n\n");
    }
    s
}

/// One frequency row of a full-precision report, variants summed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub label: ResonanceLabel,
    pub area_pct: f64,
    pub gamma0: f64,
    pub delta: f64,
}

/// Reads a `basins_full.csv` file, merging variants of each frequency.
pub fn parse_full_report(text: &str) -> Result<Vec<ReportRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Schema("empty report".into()))?
        .1
        .split(',')
        .collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))
    };
    let (cp, cq, cv, ca, cg, cd) = (
        col("p")?,
        col("q")?,
        col("variant")?,
        col("area_pct")?,
        col("gamma0")?,
        col("delta")?,
    );
    let mut rows: Vec<ReportRow> = Vec::new();
    for (i, line) in lines {
        let f: Vec<&str> = line.split(',').collect();
        let get = |c: usize| f.get(c).copied().ok_or_else(|| schema(i + 1, "short row"));
        let num = |c: usize| -> Result<f64> {
            get(c)?
                .parse()
                .map_err(|_| schema(i + 1, format!("column `{}` is not a number", header[c])))
        };
        let label = label_from_fields(get(cp)?, get(cq)?, get(cv)?)
            .ok_or_else(|| schema(i + 1, "bad `p,q,variant` fields"))?;
        let row = ReportRow {
            label: match label {
                ResonanceLabel::Resonance { p, q, .. } => ResonanceLabel::Resonance { p, q, variant: 0 },
                other => other,
            },
            area_pct: num(ca)?,
            gamma0: num(cg)?,
            delta: num(cd)?,
        };
        match rows.iter_mut().find(|r| r.label == row.label) {
            Some(r) => r.area_pct += row.area_pct,
            None => rows.push(row),
        }
    }
    Ok(rows)
}

/// Area versus `log10 γ0` curves: one block per frequency, with lines
/// `log10_gamma0 area_pct`, ordered by γ0.
pub fn area_curves(reports: &[Vec<ReportRow>]) -> String {
    let mut curves: BTreeMap<String, (ResonanceLabel, Vec<(f64, f64)>)> = BTreeMap::new();
    for report in reports {
        for r in report {
            curves
                .entry(r.label.frequency_name())
                .or_insert_with(|| (r.label, Vec::new()))
                .1
                .push((r.gamma0.log10(), r.area_pct));
        }
    }
    let mut blocks: Vec<_> = curves.into_values().collect();
    blocks.sort_by(|a, b| label_order(&a.0, &b.0));
    let mut s = String::new();
    for (label, mut pts) in blocks {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let _ = writeln!(s, "# {}", label.frequency_name());
        for (x, y) in pts {
            let _ = writeln!(s, "{x:?} {y:?}");
        }
        s.push_str("\n\n");
    }
    s
}
