//! Monte Carlo estimation of basin areas.
//!
//! Initial conditions are drawn from a counter-based generator keyed by
//! `(seed, index)`, so a run is reproducible regardless of worker count,
//! processing order, or interruption and resume.

mod checkpoint;
mod plot;
mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

pub use checkpoint::{checkpoint_load, checkpoint_save, Checkpoint, CheckpointHeader, IcRecord};
pub use plot::{
    area_curves, diff_label_rows, parse_full_report, parse_labels_csv, scatter_data, LabelRow, ReportRow,
};
pub use report::{ci_half_width_pct, sweep_csv, BasinEntry, BasinReport, Z95};

use crate::classify::{classify, cluster_variants, ClassifierConfig, ResonanceLabel};
use crate::error::{invalid, Error, Result};
use crate::integrate::IntegratorConfig;
use crate::models::{DampingSchedule, Model, ModelKind, PhaseState};
use checkpoint::CheckpointWriter;

/// Smallest sample accepted by [`estimate_basins`].
pub const MIN_SAMPLES: u64 = 100;
const CHUNK: u64 = 256;

/// Axis-aligned rectangle of initial conditions `[q_lo, q_hi] × [v_lo, v_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingDomain {
    pub q_lo: f64,
    pub q_hi: f64,
    pub v_lo: f64,
    pub v_hi: f64,
}

impl SamplingDomain {
    pub fn new(q_lo: f64, q_hi: f64, v_lo: f64, v_hi: f64) -> Result<Self> {
        let d = Self {
            q_lo,
            q_hi,
            v_lo,
            v_hi,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |lo: f64, hi: f64| lo.is_finite() && hi.is_finite() && lo < hi;
        if !ok(self.q_lo, self.q_hi) {
            return Err(invalid(
                "domain",
                format!("need q_lo < q_hi, got [{}, {}]", self.q_lo, self.q_hi),
            ));
        }
        if !ok(self.v_lo, self.v_hi) {
            return Err(invalid(
                "domain",
                format!("need v_lo < v_hi, got [{}, {}]", self.v_lo, self.v_hi),
            ));
        }
        Ok(())
    }

    /// The square `[-1, 1] × [-1, 1]`.
    pub fn cubic_default() -> Self {
        Self {
            q_lo: -1.0,
            q_hi: 1.0,
            v_lo: -1.0,
            v_hi: 1.0,
        }
    }

    /// `θ ∈ [0, 2π)`, `θ' ∈ [0, 4]`: every positive resonance up to 7/2.
    pub fn spin_orbit_default() -> Self {
        Self {
            q_lo: 0.0,
            q_hi: std::f64::consts::TAU,
            v_lo: 0.0,
            v_hi: 4.0,
        }
    }

    pub fn for_model(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Cubic => Self::cubic_default(),
            ModelKind::SpinOrbit => Self::spin_orbit_default(),
        }
    }

    pub fn area(&self) -> f64 {
        (self.q_hi - self.q_lo) * (self.v_hi - self.v_lo)
    }

    /// Initial condition number `index` of the stream `seed`, at `t = 0`.
    pub fn sample(&self, seed: u64, index: u64) -> PhaseState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let q = unit(rng.next_u64());
        let v = unit(rng.next_u64());
        PhaseState {
            q: self.q_lo + (self.q_hi - self.q_lo) * q,
            v: self.v_lo + (self.v_hi - self.v_lo) * v,
            t: 0.0,
        }
    }

    pub(crate) fn canonical(&self) -> String {
        format!(
            "domain(q=[{:?},{:?}],v=[{:?},{:?}])",
            self.q_lo, self.q_hi, self.v_lo, self.v_hi
        )
    }
}

/// Top 53 bits as a float in `[0, 1)`.
fn unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Initial condition `index` of the stream `seed`.
pub fn sample_ic(domain: &SamplingDomain, seed: u64, index: u64) -> PhaseState {
    domain.sample(seed, index)
}

/// The first `n` initial conditions of the stream `seed`.
pub fn sample_ics(domain: &SamplingDomain, n: u64, seed: u64) -> Vec<PhaseState> {
    (0..n).map(|i| domain.sample(seed, i)).collect()
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub integrator: IntegratorConfig,
    pub classifier: ClassifierConfig,
    /// Worker threads; `None` uses every available core.
    pub workers: Option<usize>,
    /// Per-IC log written as results complete.
    pub checkpoint: Option<PathBuf>,
    /// Continue from an existing checkpoint instead of starting over.
    pub resume: bool,
}

/// Hash of everything that determines the per-IC results except the seed.
pub fn run_fingerprint(
    model: &Model,
    domain: &SamplingDomain,
    icfg: &IntegratorConfig,
    ccfg: &ClassifierConfig,
) -> String {
    let text = format!(
        "{};{};{};{}",
        model.canonical(),
        domain.canonical(),
        icfg.canonical(),
        ccfg.canonical()
    );
    let digest = Sha256::digest(text.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    if workers == Some(0) {
        return Err(invalid("workers", "must be >= 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| invalid("workers", e.to_string()))
}

fn classify_one(
    model: &Model,
    domain: &SamplingDomain,
    seed: u64,
    index: u64,
    opts: &RunOptions,
) -> IcRecord {
    let ic = domain.sample(seed, index);
    let (label, representative) = match classify(model, &ic, &opts.classifier, &opts.integrator) {
        Ok(c) => {
            if let Some(note) = &c.note {
                log::debug!("ic {index} ({:?}, {:?}): {note}", ic.q, ic.v);
            }
            (c.label, c.representative.map(|s| (s.q, s.v)))
        }
        Err(e) => {
            log::warn!("ic {index}: {e}");
            (ResonanceLabel::Unclassified, None)
        }
    };
    IcRecord {
        index,
        label,
        representative,
    }
}

/// Records already on disk, after checking that they belong to this run.
fn resume_records(path: &Path, header: &CheckpointHeader) -> Result<Vec<IcRecord>> {
    let ck = checkpoint_load(path)?;
    if ck.header.fingerprint != header.fingerprint {
        return Err(Error::FingerprintMismatch {
            expected: header.fingerprint.clone(),
            found: ck.header.fingerprint,
        });
    }
    if ck.header.seed != header.seed || ck.header.n != header.n {
        return Err(Error::Mismatch(format!(
            "checkpoint has seed {} and n {}, run has seed {} and n {}",
            ck.header.seed, ck.header.n, header.seed, header.n
        )));
    }
    Ok(ck.records)
}

/// Classifies `n` initial conditions drawn uniformly from `domain` and
/// reports the relative area of each attractor's basin.
pub fn estimate_basins(
    model: &Model,
    domain: &SamplingDomain,
    n: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<BasinReport> {
    let start = Instant::now();
    if n < MIN_SAMPLES {
        return Err(invalid("n", format!("must be >= {MIN_SAMPLES}, got {n}")));
    }
    domain.validate()?;
    model.schedule().validate()?;
    opts.integrator.validate()?;
    opts.classifier.validate()?;
    let header = CheckpointHeader {
        seed,
        fingerprint: run_fingerprint(model, domain, &opts.integrator, &opts.classifier),
        n,
    };

    let mut slots: Vec<Option<IcRecord>> = vec![None; n as usize];
    let mut writer = match &opts.checkpoint {
        Some(path) if opts.resume && path.exists() => {
            let done = resume_records(path, &header)?;
            log::info!("resuming {}: {} of {n} done", path.display(), done.len());
            for r in done {
                slots[r.index as usize] = Some(r);
            }
            Some(CheckpointWriter::reopen(path)?)
        }
        Some(path) => Some(CheckpointWriter::create(path, &header)?),
        None => None,
    };
    if let Some(w) = writer.as_mut() {
        w.flush()?;
    }

    let pending: Vec<u64> = (0..n).filter(|&i| slots[i as usize].is_none()).collect();
    let pool = thread_pool(opts.workers)?;
    for chunk in pending.chunks(CHUNK as usize) {
        let records: Vec<IcRecord> = pool.install(|| {
            chunk
                .par_iter()
                .map(|&i| classify_one(model, domain, seed, i, opts))
                .collect()
        });
        if let Some(w) = writer.as_mut() {
            w.append(&records)?;
            w.flush()?;
        }
        for r in records {
            slots[r.index as usize] = Some(r);
        }
    }
    let records: Vec<IcRecord> = slots.into_iter().map(|r| r.expect("every index classified")).collect();

    let (labels, flagged) = assign_variants(model.kind(), &records, opts.classifier.variant_cluster_radius);
    Ok(BasinReport::from_labels(
        labels,
        seed,
        header.fingerprint,
        *domain,
        model.schedule(),
        flagged,
        start.elapsed().as_secs_f64(),
    ))
}

/// Splits each `p:q` resonance into variants by clustering representatives.
fn assign_variants(
    kind: ModelKind,
    records: &[IcRecord],
    radius: f64,
) -> (Vec<ResonanceLabel>, Vec<(i64, u32)>) {
    let mut labels: Vec<ResonanceLabel> = records.iter().map(|r| r.label).collect();
    let mut groups: std::collections::BTreeMap<(i64, u32), Vec<usize>> = Default::default();
    for (i, r) in records.iter().enumerate() {
        if let ResonanceLabel::Resonance { p, q, .. } = r.label {
            groups.entry((p, q)).or_default().push(i);
        }
    }
    let mut flagged = Vec::new();
    for ((p, q), members) in groups {
        let reps: Vec<PhaseState> = members
            .iter()
            .map(|&i| {
                let (rq, rv) = records[i].representative.unwrap_or((0.0, 0.0));
                PhaseState { q: rq, v: rv, t: 0.0 }
            })
            .collect();
        let clusters = cluster_variants(&reps, kind, radius);
        if clusters.flagged {
            log::warn!(
                "{p}/{q} split into {} variants; check the cluster radius",
                clusters.centroids.len()
            );
            flagged.push((p, q));
        }
        for (&i, &variant) in members.iter().zip(&clusters.variants) {
            labels[i] = ResonanceLabel::Resonance { p, q, variant };
        }
    }
    (labels, flagged)
}

/// Shape of the damping ramp in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RampFamily {
    Linear,
    Exp,
}

impl RampFamily {
    pub fn schedule(&self, gamma0: f64, delta: f64) -> Result<DampingSchedule> {
        match self {
            RampFamily::Linear => DampingSchedule::linear_ramp(gamma0, delta),
            RampFamily::Exp => DampingSchedule::exp_ramp(gamma0, delta),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RampFamily::Linear => "linear",
            RampFamily::Exp => "exp",
        }
    }
}

impl std::str::FromStr for RampFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(RampFamily::Linear),
            "exp" => Ok(RampFamily::Exp),
            other => Err(invalid("ramp", format!("unknown ramp family `{other}`"))),
        }
    }
}

/// One basin estimate per Δ, all on the same initial conditions so that
/// columns can be compared IC by IC. With a checkpoint path `p`, Δ number
/// `i` is logged to `p.<i>`.
pub fn ramp_sweep(
    model: &Model,
    domain: &SamplingDomain,
    n: u64,
    seed: u64,
    family: RampFamily,
    deltas: &[f64],
    opts: &RunOptions,
) -> Result<Vec<BasinReport>> {
    if deltas.is_empty() {
        return Err(invalid("deltas", "need at least one value"));
    }
    let gamma0 = model.schedule().gamma0();
    deltas
        .iter()
        .enumerate()
        .map(|(i, &delta)| {
            let m = model.with_schedule(family.schedule(gamma0, delta)?);
            let mut o = opts.clone();
            o.checkpoint = opts.checkpoint.as_ref().map(|p| {
                let mut s = p.clone().into_os_string();
                s.push(format!(".{i}"));
                PathBuf::from(s)
            });
            log::info!("sweep: delta = {delta}");
            estimate_basins(&m, domain, n, seed, &o)
        })
        .collect()
}

/// Initial conditions whose membership in one basin differs between runs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BasinDiff {
    /// Labelled `target` in run b only.
    pub gained: Vec<PhaseState>,
    /// Labelled `target` in run a only.
    pub lost: Vec<PhaseState>,
    /// Labelled `target` in both runs.
    pub both: Vec<PhaseState>,
}

/// Compares two runs on the same initial conditions. `target` matches
/// every variant of its frequency.
pub fn basin_diff(a: &BasinReport, b: &BasinReport, target: &ResonanceLabel) -> Result<BasinDiff> {
    if a.seed != b.seed {
        return Err(Error::Mismatch(format!("seeds differ: {} vs {}", a.seed, b.seed)));
    }
    if a.domain != b.domain {
        return Err(Error::Mismatch("sampling domains differ".into()));
    }
    if a.labels.len() != b.labels.len() {
        return Err(Error::Mismatch(format!(
            "sample sizes differ: {} vs {}",
            a.labels.len(),
            b.labels.len()
        )));
    }
    let mut diff = BasinDiff::default();
    for (i, (la, lb)) in a.labels.iter().zip(&b.labels).enumerate() {
        let (in_a, in_b) = (la.same_frequency(target), lb.same_frequency(target));
        let ic = || a.domain.sample(a.seed, i as u64);
        match (in_a, in_b) {
            (false, true) => diff.gained.push(ic()),
            (true, false) => diff.lost.push(ic()),
            (true, true) => diff.both.push(ic()),
            (false, false) => {}
        }
    }
    Ok(diff)
}

/// Scatter data for plotting: blocks `gained`, `lost`, `both` of `q v` lines,
/// separated by two blank lines.
pub fn basin_diff_data(diff: &BasinDiff) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    for (name, pts) in [("gained", &diff.gained), ("lost", &diff.lost), ("both", &diff.both)] {
        let _ = writeln!(s, "# {name}");
        for p in pts {
            let _ = writeln!(s, "{:?} {:?}", p.q, p.v);
        }
        s.push_str("\n\n");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::CubicParams;

    fn cubic(gamma: f64) -> Model {
        Model::Cubic(CubicParams::new(0.1, DampingSchedule::constant(gamma).unwrap()).unwrap())
    }

    #[test]
    fn sampling_is_keyed_by_index() {
        let d = SamplingDomain::cubic_default();
        assert_eq!(sample_ics(&d, 10, 7), sample_ics(&d, 10, 7));
        assert_ne!(sample_ics(&d, 10, 7), sample_ics(&d, 10, 8));
        let forward = sample_ics(&d, 50, 3);
        for i in (0..50).rev() {
            assert_eq!(sample_ic(&d, 3, i), forward[i as usize]);
        }
    }

    #[test]
    fn sampling_is_uniform() {
        let d = SamplingDomain::new(-1.0, 3.0, 0.0, 1.0).unwrap();
        let n = 1_000_000u64;
        let (mut sq, mut sv) = (0.0, 0.0);
        for i in 0..n {
            let s = d.sample(11, i);
            assert!((-1.0..3.0).contains(&s.q) && (0.0..1.0).contains(&s.v));
            sq += s.q;
            sv += s.v;
        }
        // uniform on [a, b] has standard deviation (b − a)/√12
        let (mq, mv) = (sq / n as f64, sv / n as f64);
        let sigma = |w: f64| w / 12f64.sqrt() / (n as f64).sqrt();
        assert!((mq - 1.0).abs() < 3.0 * sigma(4.0), "{mq}");
        assert!((mv - 0.5).abs() < 3.0 * sigma(1.0), "{mv}");
    }

    #[test]
    fn domain_validation() {
        assert!(SamplingDomain::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(SamplingDomain::new(0.0, 1.0, 2.0, 1.0).is_err());
        assert!(SamplingDomain::new(0.0, f64::NAN, 0.0, 1.0).is_err());
    }

    #[test]
    fn fingerprint_tracks_parameters() {
        let d = SamplingDomain::cubic_default();
        let (i, c) = (IntegratorConfig::default(), ClassifierConfig::default());
        let f = run_fingerprint(&cubic(0.01), &d, &i, &c);
        assert_eq!(f.len(), 16);
        assert_eq!(f, run_fingerprint(&cubic(0.01), &d, &i, &c));
        assert_ne!(f, run_fingerprint(&cubic(0.011), &d, &i, &c));
        let ramp0 = cubic(0.01).with_schedule(DampingSchedule::linear_ramp(0.01, 0.0).unwrap());
        assert_eq!(f, run_fingerprint(&ramp0, &d, &i, &c));
    }

    #[test]
    fn above_global_bound_everything_reaches_origin() {
        let opts = RunOptions {
            workers: Some(2),
            ..RunOptions::default()
        };
        let r = estimate_basins(&cubic(0.06), &SamplingDomain::cubic_default(), 100, 5, &opts).unwrap();
        assert_eq!(r.entries[0].label, ResonanceLabel::Origin);
        assert_eq!(r.entries[0].count, 100);
        assert_eq!(r.n_unclassified, 0);
        assert!(estimate_basins(&cubic(0.06), &SamplingDomain::cubic_default(), 99, 5, &opts).is_err());
    }

    #[test]
    fn diff_rejects_other_streams() {
        let mk = |seed| {
            BasinReport::from_labels(
                vec![ResonanceLabel::Origin; 3],
                seed,
                String::new(),
                SamplingDomain::cubic_default(),
                &DampingSchedule::constant(0.01).unwrap(),
                vec![],
                0.0,
            )
        };
        assert!(matches!(
            basin_diff(&mk(1), &mk(2), &ResonanceLabel::Origin),
            Err(Error::Mismatch(_))
        ));
        let d = basin_diff(&mk(1), &mk(1), &ResonanceLabel::Origin).unwrap();
        assert!(d.gained.is_empty() && d.lost.is_empty());
        assert_eq!(d.both.len(), 3);
    }
}
