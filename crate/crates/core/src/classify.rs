//! Attractor identification from the stroboscopic map.
//!
//! A trajectory is integrated through its transient, then sampled once per
//! forcing period. A p:q resonance shows up as a cycle of length q in the
//! samples; p is read off from the oscillations (cubic) or revolutions
//! (spin-orbit) completed during one cycle.

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};
use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::integrate::{IntegratorConfig, Propagator};
use crate::models::{energy, DampingSchedule, Model, ModelKind, PhaseState};

/// Sub-samples per forcing period used to count zero crossings.
const CROSSING_SAMPLES: u32 = 16;
/// Largest accepted distance of the winding ratio from an integer.
const WINDING_TOL: f64 = 0.1;
/// Clusters beyond this count are reported for manual review.
pub const MAX_EXPECTED_VARIANTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResonanceLabel {
    Origin,
    Resonance { p: i64, q: u32, variant: u32 },
    Unclassified,
}

impl ResonanceLabel {
    /// One-letter tag used in checkpoint records.
    pub fn code(&self) -> char {
        match self {
            ResonanceLabel::Origin => 'O',
            ResonanceLabel::Resonance { .. } => 'R',
            ResonanceLabel::Unclassified => 'U',
        }
    }

    /// `(p, q)` of a resonance; the origin is reported as 0:1.
    pub fn ratio(&self) -> Option<(i64, u32)> {
        match *self {
            ResonanceLabel::Origin => Some((0, 1)),
            ResonanceLabel::Resonance { p, q, .. } => Some((p, q)),
            ResonanceLabel::Unclassified => None,
        }
    }

    pub fn omega(&self) -> Option<f64> {
        self.ratio().map(|(p, q)| p as f64 / q as f64)
    }

    /// `p/q` without the variant letter, e.g. `1/2` or `1`.
    pub fn frequency_name(&self) -> String {
        match *self {
            ResonanceLabel::Origin => "0".to_string(),
            ResonanceLabel::Resonance { p, q: 1, .. } => p.to_string(),
            ResonanceLabel::Resonance { p, q, .. } => format!("{p}/{q}"),
            ResonanceLabel::Unclassified => "unclassified".to_string(),
        }
    }

    /// Same resonance regardless of variant.
    pub fn same_frequency(&self, other: &ResonanceLabel) -> bool {
        match (self, other) {
            (ResonanceLabel::Origin, ResonanceLabel::Origin) => true,
            (ResonanceLabel::Unclassified, ResonanceLabel::Unclassified) => true,
            (
                ResonanceLabel::Resonance { p, q, .. },
                ResonanceLabel::Resonance { p: p2, q: q2, .. },
            ) => p == p2 && q == q2,
            _ => false,
        }
    }
}

/// Letter of a variant index: 0 → `a`, 1 → `b`, …
pub fn variant_letter(variant: u32) -> char {
    char::from_u32('a' as u32 + variant.min(25)).unwrap_or('z')
}

impl fmt::Display for ResonanceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResonanceLabel::Resonance { variant, .. } => {
                write!(f, "{}{}", self.frequency_name(), variant_letter(*variant))
            }
            _ => f.write_str(&self.frequency_name()),
        }
    }
}

impl std::str::FromStr for ResonanceLabel {
    type Err = Error;

    /// Parses `0`, `unclassified`, `p`, `p/q`, optionally followed by a
    /// variant letter (`1/2b`).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || invalid("label", format!("cannot parse `{s}`"));
        let s = s.trim();
        match s {
            "0" => return Ok(ResonanceLabel::Origin),
            "unclassified" => return Ok(ResonanceLabel::Unclassified),
            _ => {}
        }
        let (body, variant) = match s.chars().last() {
            Some(c) if c.is_ascii_lowercase() => (&s[..s.len() - 1], c as u32 - 'a' as u32),
            _ => (s, 0),
        };
        let (p, q) = match body.split_once('/') {
            Some((p, q)) => (p.parse().map_err(|_| bad())?, q.parse().map_err(|_| bad())?),
            None => (body.parse().map_err(|_| bad())?, 1),
        };
        if q == 0 || gcd(i64::unsigned_abs(p), q as u64) != 1 {
            return Err(bad());
        }
        if p == 0 {
            return Ok(ResonanceLabel::Origin);
        }
        Ok(ResonanceLabel::Resonance { p, q, variant })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierConfig {
    /// `N` in the transient time `N/γ0`.
    pub n_transient_factor: f64,
    pub q_max: u32,
    pub origin_energy_tol: f64,
    pub period_match_tol: f64,
    pub variant_cluster_radius: f64,
    pub n_confirm_periods: u32,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            n_transient_factor: 20.0,
            q_max: 16,
            origin_energy_tol: 1e-8,
            period_match_tol: 1e-5,
            variant_cluster_radius: 0.05,
            n_confirm_periods: 48,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_transient_factor", self.n_transient_factor),
            ("origin_energy_tol", self.origin_energy_tol),
            ("period_match_tol", self.period_match_tol),
            ("variant_cluster_radius", self.variant_cluster_radius),
        ];
        for (name, x) in positive {
            if !(x.is_finite() && x > 0.0) {
                return Err(invalid(name, format!("must be finite and > 0, got {x}")));
            }
        }
        if self.q_max == 0 {
            return Err(invalid("q_max", "must be >= 1"));
        }
        if self.n_confirm_periods <= self.q_max {
            return Err(invalid(
                "n_confirm_periods",
                format!("must exceed q_max = {}, got {}", self.q_max, self.n_confirm_periods),
            ));
        }
        Ok(())
    }

    pub(crate) fn canonical(&self) -> String {
        format!(
            "classifier(N={:?},q_max={},origin_tol={:?},match_tol={:?},radius={:?},confirm={})",
            self.n_transient_factor,
            self.q_max,
            self.origin_energy_tol,
            self.period_match_tol,
            self.variant_cluster_radius,
            self.n_confirm_periods
        )
    }
}

fn ceil_to_period(t: f64) -> f64 {
    let periods = (t / TAU).ceil();
    periods * TAU
}

/// `N/γ0` rounded up to a whole number of forcing periods.
pub fn transient_time(gamma0: f64, cfg: &ClassifierConfig) -> Result<f64> {
    if !(gamma0.is_finite() && gamma0 > 0.0) {
        return Err(invalid("gamma0", format!("must be finite and > 0, got {gamma0}")));
    }
    Ok(ceil_to_period(cfg.n_transient_factor / gamma0))
}

/// Transient time for a full schedule: the ramp time `T0` plus `N/γ0`,
/// rounded up to a whole number of forcing periods.
pub fn schedule_transient_time(schedule: &DampingSchedule, cfg: &ClassifierConfig) -> Result<f64> {
    schedule.validate()?;
    Ok(ceil_to_period(
        schedule.ramp_time() + cfg.n_transient_factor / schedule.gamma0(),
    ))
}

/// Wraps `x` into `[0, period)`.
fn wrap(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Signed difference `a − b` reduced to `(−period/2, period/2]`.
fn wrapped_diff(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    if d > period / 2.0 {
        d - period
    } else {
        d
    }
}

/// One stroboscopic sample. `wrapped_q` is θ mod 2π for the spin-orbit
/// model and equal to `state.q` for the cubic oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StroboscopicSample {
    pub state: PhaseState,
    pub wrapped_q: f64,
}

impl StroboscopicSample {
    fn new(kind: ModelKind, state: PhaseState) -> Self {
        let wrapped_q = match kind {
            ModelKind::Cubic => state.q,
            ModelKind::SpinOrbit => wrap(state.q, TAU),
        };
        Self { state, wrapped_q }
    }
}

fn section_distance(kind: ModelKind, a: &StroboscopicSample, b: &StroboscopicSample) -> f64 {
    let dq = match kind {
        ModelKind::Cubic => a.wrapped_q - b.wrapped_q,
        ModelKind::SpinOrbit => wrapped_diff(a.wrapped_q, b.wrapped_q, TAU),
    };
    dq.hypot(a.state.v - b.state.v)
}

fn strobe_with(
    prop: &mut Propagator,
    state: &PhaseState,
    n: u32,
) -> Result<Vec<StroboscopicSample>> {
    let kind = prop.model().kind();
    let mut out = Vec::with_capacity(n as usize);
    let mut s = *state;
    for k in 1..=n {
        s = prop.advance(&s, state.t + TAU * k as f64)?;
        out.push(StroboscopicSample::new(kind, s));
    }
    Ok(out)
}

/// `n` samples at `state.t + 2πk`, `k = 1..=n`.
pub fn strobe(
    model: &Model,
    state: &PhaseState,
    n: u32,
    icfg: &IntegratorConfig,
) -> Result<Vec<StroboscopicSample>> {
    let mut prop = Propagator::new(model, icfg)?;
    strobe_with(&mut prop, state, n)
}

/// Smallest `q ≤ q_max` for which every sample matches the one `q`
/// periods later.
pub fn detect_period(
    samples: &[StroboscopicSample],
    kind: ModelKind,
    cfg: &ClassifierConfig,
) -> Option<u32> {
    if samples.len() < cfg.n_confirm_periods as usize {
        return None;
    }
    (1..=cfg.q_max).find(|&q| {
        let q = q as usize;
        q < samples.len()
            && samples
                .windows(q + 1)
                .all(|w| section_distance(kind, &w[0], &w[q]) <= cfg.period_match_tol)
    })
}

/// Winding number over one cycle of `q` forcing periods starting at `state`,
/// or `None` if it is not an integer.
pub fn winding_count(
    model: &Model,
    state: &PhaseState,
    q: u32,
    icfg: &IntegratorConfig,
) -> Result<Option<i64>> {
    let mut prop = Propagator::new(model, icfg)?;
    Ok(winding_with(&mut prop, state, q)?.0)
}

fn winding_with(
    prop: &mut Propagator,
    state: &PhaseState,
    q: u32,
) -> Result<(Option<i64>, PhaseState)> {
    match prop.model().kind() {
        ModelKind::SpinOrbit => {
            let end = prop.advance(state, state.t + TAU * q as f64)?;
            let turns = (end.q - state.q) / TAU;
            let p = turns.round();
            Ok((((turns - p).abs() <= WINDING_TOL).then_some(p as i64), end))
        }
        ModelKind::Cubic => {
            let n = CROSSING_SAMPLES * q;
            let dt = TAU / CROSSING_SAMPLES as f64;
            let mut s = *state;
            let mut sign = state.q.signum();
            let mut changes = 0u32;
            for k in 1..=n {
                s = prop.advance(&s, state.t + dt * k as f64)?;
                if s.q != 0.0 {
                    let sg = s.q.signum();
                    if sign != 0.0 && sg != sign {
                        changes += 1;
                    }
                    sign = sg;
                }
            }
            Ok(((changes % 2 == 0).then_some((changes / 2) as i64), s))
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Canonical point of a locked cycle, so that every trajectory on the same
/// attractor yields the same representative whatever its phase.
fn cycle_representative(kind: ModelKind, cycle: &[StroboscopicSample]) -> PhaseState {
    let key = |s: &StroboscopicSample| match kind {
        ModelKind::Cubic => (s.state.q, s.state.v),
        ModelKind::SpinOrbit => (s.state.v, wrap(s.state.q, PI)),
    };
    let best = cycle
        .iter()
        .min_by(|a, b| {
            let (ka, kb) = (key(a), key(b));
            ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
        })
        .expect("non-empty cycle");
    let mut rep = best.state;
    if kind == ModelKind::SpinOrbit {
        // The spin-orbit field is π-periodic in θ.
        rep.q = wrap(rep.q, PI);
    }
    rep
}

/// Result of classifying one initial condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub label: ResonanceLabel,
    /// Canonical stroboscopic point of the attractor (resonances only).
    pub representative: Option<PhaseState>,
    pub note: Option<String>,
}

impl Classification {
    fn unclassified(note: impl Into<String>) -> Self {
        Self {
            label: ResonanceLabel::Unclassified,
            representative: None,
            note: Some(note.into()),
        }
    }
}

/// Classifies the attractor reached from `ic`. Variants are provisional
/// (always 0) until [`cluster_variants`] runs over a population.
pub fn classify(
    model: &Model,
    ic: &PhaseState,
    cfg: &ClassifierConfig,
    icfg: &IntegratorConfig,
) -> Result<Classification> {
    cfg.validate()?;
    let mut prop = Propagator::new(model, icfg)?;
    match run_classifier(&mut prop, ic, cfg) {
        Ok(c) => Ok(c),
        Err(e @ (Error::StepUnderflow { .. } | Error::NonFinite { .. })) => {
            Ok(Classification::unclassified(format!("integration failed: {e}")))
        }
        Err(e) => Err(e),
    }
}

fn run_classifier(
    prop: &mut Propagator,
    ic: &PhaseState,
    cfg: &ClassifierConfig,
) -> Result<Classification> {
    let model = *prop.model();
    let kind = model.kind();
    let t_int = schedule_transient_time(model.schedule(), cfg)?;
    let transient_periods = (t_int / TAU).round() as u64;
    let period_time = |k: u64| ic.t + TAU * k as f64;
    let is_origin = |s: &PhaseState| kind == ModelKind::Cubic && energy(s) < cfg.origin_energy_tol;

    let mut k = transient_periods;
    let mut state = prop.advance(ic, period_time(k))?;
    // One extra transient time is granted to slow convergers.
    let deadline = 2 * transient_periods;
    let mut last_note;
    loop {
        if is_origin(&state) {
            return Ok(Classification {
                label: ResonanceLabel::Origin,
                representative: None,
                note: None,
            });
        }
        let mut window = Vec::with_capacity(cfg.n_confirm_periods as usize);
        for _ in 0..cfg.n_confirm_periods {
            k += 1;
            state = prop.advance(&state, period_time(k))?;
            window.push(StroboscopicSample::new(kind, state));
        }
        if is_origin(&state) {
            continue;
        }
        if let Some(q) = detect_period(&window, kind, cfg) {
            let cycle = &window[window.len() - q as usize..];
            let rep = cycle_representative(kind, cycle);
            let (winding, end) = winding_with(prop, &state, q)?;
            match winding {
                Some(p) if valid_ratio(kind, p, q) => {
                    return Ok(Classification {
                        label: ResonanceLabel::Resonance { p, q, variant: 0 },
                        representative: Some(rep),
                        note: None,
                    })
                }
                // A slowly decaying spiral can match at a multiple of the true
                // period before the true period itself matches; keep going.
                Some(p) => last_note = format!("period {q} with winding {p} is not a reduced resonance"),
                None => last_note = format!("non-integer winding over period {q}"),
            }
            k += q as u64;
            state = end;
        } else {
            last_note = format!("no period <= {} detected", cfg.q_max);
        }
        if k >= deadline {
            return Ok(Classification::unclassified(format!(
                "{last_note} by t = {:.1}",
                state.t
            )));
        }
    }
}

fn valid_ratio(kind: ModelKind, p: i64, q: u32) -> bool {
    if kind == ModelKind::Cubic && p <= 0 {
        return false;
    }
    gcd(p.unsigned_abs(), q as u64) == 1
}

/// Variant indices for representatives of one `p:q` resonance.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantClusters {
    /// Variant index of each input, in input order.
    pub variants: Vec<u32>,
    /// `(q, v)` centroid of each variant.
    pub centroids: Vec<(f64, f64)>,
    /// More clusters than [`MAX_EXPECTED_VARIANTS`].
    pub flagged: bool,
}

/// Greedy radius clustering of representatives, with variants numbered
/// by the lexicographic `(q, v)` order of the cluster centroids.
pub fn cluster_variants(reps: &[PhaseState], kind: ModelKind, radius: f64) -> VariantClusters {
    let period = match kind {
        ModelKind::Cubic => None,
        ModelKind::SpinOrbit => Some(PI),
    };
    let dq = |a: f64, b: f64| match period {
        Some(p) => wrapped_diff(a, b, p),
        None => a - b,
    };
    let mut order: Vec<usize> = (0..reps.len()).collect();
    order.sort_by(|&i, &j| {
        reps[i]
            .q
            .total_cmp(&reps[j].q)
            .then(reps[i].v.total_cmp(&reps[j].v))
    });

    struct Cluster {
        seed: (f64, f64),
        sum_dq: f64,
        sum_v: f64,
        count: usize,
    }
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut member = vec![0usize; reps.len()];
    for &i in &order {
        let r = &reps[i];
        let found = clusters
            .iter()
            .position(|c| dq(r.q, c.seed.0).hypot(r.v - c.seed.1) <= radius);
        let c = match found {
            Some(c) => c,
            None => {
                clusters.push(Cluster {
                    seed: (r.q, r.v),
                    sum_dq: 0.0,
                    sum_v: 0.0,
                    count: 0,
                });
                clusters.len() - 1
            }
        };
        let cl = &mut clusters[c];
        cl.sum_dq += dq(r.q, cl.seed.0);
        cl.sum_v += r.v;
        cl.count += 1;
        member[i] = c;
    }

    let centroids: Vec<(f64, f64)> = clusters
        .iter()
        .map(|c| {
            let q = c.seed.0 + c.sum_dq / c.count as f64;
            let q = match period {
                Some(p) => wrap(q, p),
                None => q,
            };
            (q, c.sum_v / c.count as f64)
        })
        .collect();
    let mut ranked: Vec<usize> = (0..clusters.len()).collect();
    ranked.sort_by(|&a, &b| {
        let (ca, cb) = (centroids[a], centroids[b]);
        ca.0.total_cmp(&cb.0).then(ca.1.total_cmp(&cb.1))
    });
    let mut variant_of = vec![0u32; clusters.len()];
    for (v, &c) in ranked.iter().enumerate() {
        variant_of[c] = v as u32;
    }
    VariantClusters {
        variants: member.iter().map(|&c| variant_of[c]).collect(),
        centroids: ranked.iter().map(|&c| centroids[c]).collect(),
        flagged: clusters.len() > MAX_EXPECTED_VARIANTS,
    }
}

/// Orders labels as they appear in reports: origin, resonances by
/// increasing frequency then `q` and variant, unclassified last.
pub fn label_order(a: &ResonanceLabel, b: &ResonanceLabel) -> Ordering {
    use ResonanceLabel::*;
    match (a, b) {
        (Origin, Origin) | (Unclassified, Unclassified) => Ordering::Equal,
        (Origin, _) | (_, Unclassified) => Ordering::Less,
        (_, Origin) | (Unclassified, _) => Ordering::Greater,
        (
            Resonance { p, q, variant },
            Resonance {
                p: p2,
                q: q2,
                variant: v2,
            },
        ) => (p * *q2 as i64)
            .cmp(&(p2 * *q as i64))
            .then(q.cmp(q2))
            .then(variant.cmp(v2)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{CubicParams, SpinOrbitParams};

    fn sample(kind: ModelKind, q: f64, v: f64) -> StroboscopicSample {
        StroboscopicSample::new(kind, PhaseState { q, v, t: 0.0 })
    }

    #[test]
    fn transient_time_examples() {
        let cfg = ClassifierConfig::default();
        let t = transient_time(0.01, &cfg).unwrap();
        assert!((t - 319.0 * TAU).abs() < 1e-9);
        let t = transient_time(0.015, &cfg).unwrap();
        assert!((t - 213.0 * TAU).abs() < 1e-9);
        let t = transient_time(0.0005, &cfg).unwrap();
        assert!(t >= 40000.0 && t < 40000.0 + TAU);
        assert!(transient_time(0.0, &cfg).is_err());
        let ramp = DampingSchedule::linear_ramp(0.015, 25.0).unwrap();
        let t = schedule_transient_time(&ramp, &cfg).unwrap();
        assert!(t >= 25.0 / 0.015 + 20.0 / 0.015 && t < 45.0 / 0.015 + TAU);
    }

    #[test]
    fn detect_constant_and_alternating() {
        let cfg = ClassifierConfig::default();
        let k = ModelKind::Cubic;
        let constant: Vec<_> = (0..48).map(|_| sample(k, 0.3, 0.1)).collect();
        assert_eq!(detect_period(&constant, k, &cfg), Some(1));
        let alt: Vec<_> = (0..48)
            .map(|i| if i % 2 == 0 { sample(k, 0.3, 0.1) } else { sample(k, -0.3, -0.1) })
            .collect();
        assert_eq!(detect_period(&alt, k, &cfg), Some(2));
        let five: Vec<_> = (0..48).map(|i| sample(k, (i % 5) as f64, 0.0)).collect();
        assert_eq!(detect_period(&five, k, &cfg), Some(5));
        // too few samples
        assert_eq!(detect_period(&constant[..20], k, &cfg), None);
    }

    #[test]
    fn detect_random_walk_none() {
        use rand::{Rng, SeedableRng};
        let cfg = ClassifierConfig::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut x = 0.0;
        let walk: Vec<_> = (0..48)
            .map(|_| {
                x += rng.random::<f64>() - 0.5;
                sample(ModelKind::Cubic, x, 0.0)
            })
            .collect();
        assert_eq!(detect_period(&walk, ModelKind::Cubic, &cfg), None);
    }

    #[test]
    fn detect_wraps_angle() {
        let cfg = ClassifierConfig::default();
        let k = ModelKind::SpinOrbit;
        let s: Vec<_> = (0..48)
            .map(|i| sample(k, if i % 2 == 0 { TAU - 1e-7 } else { 1e-7 }, 1.0))
            .collect();
        assert_eq!(detect_period(&s, k, &cfg), Some(1));
    }

    #[test]
    fn clusters_sorted_and_permutation_invariant() {
        let k = ModelKind::Cubic;
        let p = |q, v| PhaseState { q, v, t: 0.0 };
        let reps = vec![p(0.5, 0.1), p(-0.5, -0.1), p(0.51, 0.1), p(-0.49, -0.1), p(0.5, 0.11)];
        let c = cluster_variants(&reps, k, 0.05);
        assert_eq!(c.variants, vec![1, 0, 1, 0, 1]);
        assert!(!c.flagged);
        let mut rev = reps.clone();
        rev.reverse();
        let c2 = cluster_variants(&rev, k, 0.05);
        let mut back = c2.variants.clone();
        back.reverse();
        assert_eq!(back, c.variants);

        let single = cluster_variants(&reps[..1], k, 0.05);
        assert_eq!(single.variants, vec![0]);
        let many: Vec<_> = (0..6).map(|i| p(i as f64, 0.0)).collect();
        assert!(cluster_variants(&many, k, 0.05).flagged);
    }

    #[test]
    fn spin_orbit_clusters_across_the_seam() {
        let p = |q, v| PhaseState { q, v, t: 0.0 };
        let reps = vec![p(0.001, 1.0), p(PI - 0.001, 1.0)];
        let c = cluster_variants(&reps, ModelKind::SpinOrbit, 0.05);
        assert_eq!(c.variants, vec![0, 0]);
    }

    #[test]
    fn label_rendering_and_order() {
        let r = ResonanceLabel::Resonance { p: 1, q: 3, variant: 1 };
        assert_eq!(r.to_string(), "1/3b");
        assert_eq!(ResonanceLabel::Origin.to_string(), "0");
        let mut v = vec![
            ResonanceLabel::Unclassified,
            ResonanceLabel::Resonance { p: 1, q: 2, variant: 0 },
            ResonanceLabel::Resonance { p: 1, q: 4, variant: 0 },
            ResonanceLabel::Origin,
        ];
        v.sort_by(label_order);
        assert_eq!(v[0], ResonanceLabel::Origin);
        assert_eq!(v[1], ResonanceLabel::Resonance { p: 1, q: 4, variant: 0 });
        assert_eq!(v[3], ResonanceLabel::Unclassified);
    }

    #[test]
    fn strong_damping_goes_to_origin() {
        let m = Model::Cubic(CubicParams::new(0.1, DampingSchedule::constant(0.06).unwrap()).unwrap());
        let cfg = ClassifierConfig::default();
        let icfg = IntegratorConfig::default();
        for (q, v) in [(1.0, 1.0), (-0.7, 0.2), (0.05, -0.9)] {
            let c = classify(&m, &PhaseState { q, v, t: 0.0 }, &cfg, &icfg).unwrap();
            assert_eq!(c.label, ResonanceLabel::Origin);
        }
    }

    #[test]
    fn origin_strobe_stays_quiet() {
        let m = Model::Cubic(CubicParams::new(0.1, DampingSchedule::constant(0.01).unwrap()).unwrap());
        let s = strobe(&m, &PhaseState { q: 0.0, v: 0.0, t: 0.0 }, 10, &IntegratorConfig::default())
            .unwrap();
        assert!(s.iter().all(|x| energy(&x.state) < 1e-8));
        assert!((s[9].state.t - 10.0 * TAU).abs() < 1e-9);
    }

    #[test]
    fn synchronous_spin_orbit_winding() {
        let m = Model::SpinOrbit(
            SpinOrbitParams::new(0.0, 0.0, DampingSchedule::constant(0.01).unwrap()).unwrap(),
        );
        let p = winding_count(&m, &PhaseState { q: 0.3, v: 1.0, t: 0.0 }, 1, &IntegratorConfig::default())
            .unwrap();
        assert_eq!(p, Some(1));
    }
}
