use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::classify::{label_order, variant_letter, ResonanceLabel};
use crate::error::Result;

use super::SamplingDomain;

/// z-value of a two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

/// Half-width, in percent, of the 95% normal-approximation binomial
/// interval for `count` successes out of `n`.
pub fn ci_half_width_pct(count: u64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = count as f64 / n as f64;
    Z95 * (p * (1.0 - p) / n as f64).sqrt() * 100.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinEntry {
    pub label: ResonanceLabel,
    pub count: u64,
    pub area_pct: f64,
    pub ci_half_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinReport {
    /// One entry per label in report order; unclassified is always present.
    pub entries: Vec<BasinEntry>,
    pub n_total: u64,
    pub n_unclassified: u64,
    pub seed: u64,
    pub fingerprint: String,
    pub domain: SamplingDomain,
    pub gamma0: f64,
    pub delta: f64,
    pub schedule: String,
    pub wall_time_s: f64,
    /// Resonances split into more variants than expected.
    pub flagged: Vec<(i64, u32)>,
    /// Final label of every initial condition, by index.
    pub labels: Vec<ResonanceLabel>,
}

impl BasinReport {
    pub(crate) fn from_labels(
        labels: Vec<ResonanceLabel>,
        seed: u64,
        fingerprint: String,
        domain: SamplingDomain,
        schedule: &crate::models::DampingSchedule,
        flagged: Vec<(i64, u32)>,
        wall_time_s: f64,
    ) -> Self {
        let n = labels.len() as u64;
        let mut distinct: Vec<ResonanceLabel> = labels
            .iter()
            .copied()
            .chain(std::iter::once(ResonanceLabel::Unclassified))
            .collect::<std::collections::HashSet<_>>()
            .into_iter()
            .collect();
        distinct.sort_by(label_order);
        let entries: Vec<BasinEntry> = distinct
            .into_iter()
            .map(|label| {
                let count = labels.iter().filter(|&&l| l == label).count() as u64;
                BasinEntry {
                    label,
                    count,
                    area_pct: if n == 0 { 0.0 } else { 100.0 * count as f64 / n as f64 },
                    ci_half_pct: ci_half_width_pct(count, n),
                }
            })
            .collect();
        let n_unclassified = entries
            .iter()
            .find(|e| e.label == ResonanceLabel::Unclassified)
            .map_or(0, |e| e.count);
        Self {
            entries,
            n_total: n,
            n_unclassified,
            seed,
            fingerprint,
            domain,
            gamma0: schedule.gamma0(),
            delta: schedule.delta(),
            schedule: schedule.canonical(),
            wall_time_s,
            flagged,
            labels,
        }
    }

    pub fn entry(&self, label: &ResonanceLabel) -> Option<&BasinEntry> {
        self.entries.iter().find(|e| e.label == *label)
    }

    /// Count of every variant of the `p:q` resonance together
    /// (`(0, 1)` is the origin).
    pub fn frequency_count(&self, p: i64, q: u32) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.label.ratio() == Some((p, q)))
            .map(|e| e.count)
            .sum()
    }

    /// Area, in percent, of all variants of `p:q` together.
    pub fn frequency_area(&self, p: i64, q: u32) -> f64 {
        if self.n_total == 0 {
            return 0.0;
        }
        100.0 * self.frequency_count(p, q) as f64 / self.n_total as f64
    }

    pub fn frequency_ci(&self, p: i64, q: u32) -> f64 {
        ci_half_width_pct(self.frequency_count(p, q), self.n_total)
    }

    pub fn unclassified_fraction(&self) -> f64 {
        if self.n_total == 0 {
            0.0
        } else {
            self.n_unclassified as f64 / self.n_total as f64
        }
    }

    /// Name for tables: the variant letter is shown only when a resonance
    /// has more than one variant.
    pub fn display_label(&self, label: &ResonanceLabel) -> String {
        match label {
            ResonanceLabel::Resonance { p, q, variant } => {
                let split = self
                    .entries
                    .iter()
                    .filter(|e| e.label.ratio() == Some((*p, *q)))
                    .count()
                    > 1;
                if split {
                    format!("{}{}", label.frequency_name(), variant_letter(*variant))
                } else {
                    label.frequency_name()
                }
            }
            _ => label.frequency_name(),
        }
    }

    pub(crate) fn label_fields(label: &ResonanceLabel) -> String {
        match label {
            ResonanceLabel::Origin => "0,1,".to_string(),
            ResonanceLabel::Resonance { p, q, variant } => format!("{p},{q},{variant}"),
            ResonanceLabel::Unclassified => ",,".to_string(),
        }
    }

    /// Table with areas rounded to one decimal, as in published tables.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("label,p,q,variant,count,area_pct,ci_half_pct\n");
        for e in &self.entries {
            let _ = writeln!(
                s,
                "{},{},{},{:.1},{:.1}",
                self.display_label(&e.label),
                Self::label_fields(&e.label),
                e.count,
                e.area_pct,
                e.ci_half_pct
            );
        }
        s
    }

    /// Full-precision table with run metadata.
    pub fn to_full_csv(&self) -> String {
        let mut s = String::from(
            "label,p,q,variant,count,area_pct,ci_half_pct,n_total,seed,fingerprint,gamma0,delta,schedule,wall_time_s\n",
        );
        for e in &self.entries {
            let _ = writeln!(
                s,
                "{},{},{},{:?},{:?},{},{},{},{:?},{:?},{},{:.3}",
                self.display_label(&e.label),
                Self::label_fields(&e.label),
                e.count,
                e.area_pct,
                e.ci_half_pct,
                self.n_total,
                self.seed,
                self.fingerprint,
                self.gamma0,
                self.delta,
                self.schedule.replace(',', ";"),
                self.wall_time_s
            );
        }
        s
    }

    /// One row per initial condition: `index,q0,v0,label,p,q,variant`,
    /// after a `#seed=.. fingerprint=.. n=..` line.
    pub fn labels_csv(&self) -> String {
        let mut s = super::CheckpointHeader {
            seed: self.seed,
            fingerprint: self.fingerprint.clone(),
            n: self.n_total,
        }
        .render();
        s.push_str("index,q0,v0,label,p,q,variant\n");
        for (i, label) in self.labels.iter().enumerate() {
            let ic = self.domain.sample(self.seed, i as u64);
            let _ = writeln!(
                s,
                "{i},{:?},{:?},{},{}",
                ic.q,
                ic.v,
                self.display_label(label),
                Self::label_fields(label)
            );
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_csv())
    }

    pub fn write_full_csv(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_full_csv())
    }

    pub fn write_labels_csv(&self, path: &Path) -> Result<()> {
        write_file(path, &self.labels_csv())
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

/// Combined Δ-sweep table: `delta,label,area_pct,ci_half_pct`, one block
/// of rows per Δ, with variants of a resonance summed.
pub fn sweep_csv(deltas: &[f64], reports: &[BasinReport]) -> String {
    let mut s = String::from("delta,label,area_pct,ci_half_pct\n");
    for (delta, r) in deltas.iter().zip(reports) {
        let mut seen = BTreeSet::new();
        for e in &r.entries {
            match e.label.ratio() {
                Some((p, q)) => {
                    if !seen.insert((p, q)) {
                        continue;
                    }
                    let _ = writeln!(
                        s,
                        "{delta},{},{:.1},{:.1}",
                        e.label.frequency_name(),
                        r.frequency_area(p, q),
                        r.frequency_ci(p, q)
                    );
                }
                None => {
                    let _ = writeln!(
                        s,
                        "{delta},unclassified,{:.1},{:.1}",
                        e.area_pct, e.ci_half_pct
                    );
                }
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::DampingSchedule;

    fn report(labels: Vec<ResonanceLabel>) -> BasinReport {
        BasinReport::from_labels(
            labels,
            1,
            "f".into(),
            SamplingDomain::cubic_default(),
            &DampingSchedule::constant(0.01).unwrap(),
            vec![],
            0.0,
        )
    }

    #[test]
    fn ci_formula() {
        let h = ci_half_width_pct(2090, 10_000);
        let p: f64 = 0.209;
        assert!((h - 1.96 * (p * (1.0 - p) / 1e4).sqrt() * 100.0).abs() < 1e-12);
        assert!((h - 0.797).abs() < 1e-3);
        assert_eq!(ci_half_width_pct(0, 100), 0.0);
    }

    #[test]
    fn accounting_and_csv() {
        let r12 = ResonanceLabel::Resonance { p: 1, q: 2, variant: 0 };
        let r1a = ResonanceLabel::Resonance { p: 1, q: 1, variant: 0 };
        let r1b = ResonanceLabel::Resonance { p: 1, q: 1, variant: 1 };
        let mut labels = vec![ResonanceLabel::Origin; 7];
        labels.extend([r12, r12, r1a, r1b]);
        let r = report(labels);
        assert_eq!(r.n_total, 11);
        assert_eq!(r.entries.iter().map(|e| e.count).sum::<u64>(), 11);
        assert_eq!(r.n_unclassified, 0);
        let total: f64 = r.entries.iter().map(|e| e.area_pct).sum();
        assert!((total - 100.0).abs() < 1e-9);
        let csv = r.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "label,p,q,variant,count,area_pct,ci_half_pct");
        assert!(lines[1].starts_with("0,0,1,,7,63.6,"));
        assert!(lines[2].starts_with("1/2,1,2,0,2,18.2,"));
        assert!(lines[3].starts_with("1a,1,1,0,1,"));
        assert!(lines[4].starts_with("1b,1,1,1,1,"));
        assert!(lines[5].starts_with("unclassified,,,,0,0.0,0.0"));
        assert_eq!(r.frequency_count(1, 1), 2);
    }
}
