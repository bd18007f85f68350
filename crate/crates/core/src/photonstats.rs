//! Pulsed photon streams and HBT autocorrelation.
//!
//! Pulse `k` fires at `k·rep_period + SYNC_OFFSET`. A two-level emitter
//! cannot still be emitting the previous photon when the next pulse
//! arrives, so emission delays follow the T1 exponential truncated to the
//! period (minus a jitter guard on either side). Coincidence peaks are
//! integrated by sync pulse: a click belongs to pulse ⌊t / rep_period⌋, and
//! the k-th peak collects every (A, B) pair whose pulse indices differ by k.
//! That is the full-period window around each peak, anchored to the laser
//! clock instead of to the time difference, so the radiative tail of one
//! pulse never spills into a neighbouring peak.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::substream;

/// Delay of each excitation pulse after its sync tick, as a fraction of the
/// repetition period. Leaves room for negative jitter.
const SYNC_OFFSET_FRACTION: f64 = 0.04;

const CHUNK_PULSES: u64 = 1 << 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PhotonSource {
    /// 0, 1 or 2 photons per pulse with probabilities (1 − p1 − p2, p1, p2).
    #[default]
    TwoLevel,
    /// Poisson photon number with mean p1 + 2p2 (coherent-state reference).
    Poissonian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HbtConfig {
    pub rep_period_ns: f64,
    pub n_pulses: u64,
    pub p1: f64,
    pub p2: f64,
    pub eta: f64,
    pub jitter_ns: f64,
    pub bin_ns: f64,
    pub window_peaks: usize,
    /// Radiative lifetime setting the emission delay after each pulse, ns.
    pub t1_ns: f64,
    pub source: PhotonSource,
}

impl Default for HbtConfig {
    fn default() -> Self {
        Self {
            rep_period_ns: crate::REP_PERIOD_NS,
            n_pulses: 10_000_000,
            p1: 0.5,
            p2: solve_p2_for_g2(0.5, 0.07).unwrap_or(0.0094),
            eta: 0.1,
            jitter_ns: 0.05,
            bin_ns: 0.1,
            window_peaks: 4,
            t1_ns: 1.95,
            source: PhotonSource::TwoLevel,
        }
    }
}

impl HbtConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !(self.rep_period_ns > 0.0 && self.rep_period_ns.is_finite()) {
            return Err(Error::param("rep_period_ns", "must be finite and > 0"));
        }
        if self.n_pulses == 0 {
            return Err(Error::param("n_pulses", "must be >= 1"));
        }
        if !unit(self.p1) || !unit(self.p2) || self.p1 + self.p2 > 1.0 {
            return Err(Error::param("p1", "p1, p2 must be probabilities with p1 + p2 <= 1"));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::param("eta", "must lie in (0, 1]"));
        }
        if !(self.jitter_ns >= 0.0 && self.jitter_ns.is_finite()) {
            return Err(Error::param("jitter_ns", "must be finite and >= 0"));
        }
        if !(self.bin_ns > 0.0 && self.bin_ns < self.rep_period_ns / 4.0) {
            return Err(Error::param("bin_ns", "must lie in (0, rep_period_ns / 4)"));
        }
        if self.window_peaks < 1 {
            return Err(Error::param("window_peaks", "need at least one side peak each side"));
        }
        if !(self.t1_ns > 0.0 && self.t1_ns.is_finite()) {
            return Err(Error::param("t1_ns", "must be finite and > 0"));
        }
        Ok(())
    }

    pub fn mean_photons(&self) -> f64 {
        self.p1 + 2.0 * self.p2
    }

    fn sync_offset_ns(&self) -> f64 {
        SYNC_OFFSET_FRACTION * self.rep_period_ns
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Detector {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClickRecord {
    pub detector: Detector,
    pub time_ns: f64,
}

/// Click stream for `cfg.n_pulses` pulses, sorted by time.
///
/// One master value is drawn from `rng`; each block of 2¹⁸ pulses then runs
/// on its own derived stream, so the output does not depend on the number of
/// worker threads.
pub fn simulate_photon_stream<R: Rng + ?Sized>(cfg: &HbtConfig, rng: &mut R) -> Result<Vec<ClickRecord>> {
    cfg.validate()?;
    let master: u64 = rng.random();
    let n_chunks = cfg.n_pulses.div_ceil(CHUNK_PULSES);
    let window = (1.0 - 2.0 * SYNC_OFFSET_FRACTION) * cfg.rep_period_ns;
    let tail = (-window / cfg.t1_ns).exp();
    let jitter = Normal::new(0.0, cfg.jitter_ns).map_err(|e| Error::param("jitter_ns", e.to_string()))?;
    let poisson = match cfg.source {
        PhotonSource::Poissonian if cfg.mean_photons() > 0.0 => Some(
            Poisson::new(cfg.mean_photons()).map_err(|e| Error::param("p1", e.to_string()))?,
        ),
        _ => None,
    };
    let offset = cfg.sync_offset_ns();

    let chunks: Vec<Vec<ClickRecord>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(master, &[c]);
            let first = c * CHUNK_PULSES;
            let last = (first + CHUNK_PULSES).min(cfg.n_pulses);
            let mut out = Vec::new();
            for k in first..last {
                let n_photons = match (&poisson, cfg.source) {
                    (Some(p), _) => p.sample(&mut rng) as u64,
                    (None, PhotonSource::Poissonian) => 0,
                    (None, PhotonSource::TwoLevel) => {
                        let u: f64 = rng.random();
                        if u < cfg.p1 {
                            1
                        } else if u < cfg.p1 + cfg.p2 {
                            2
                        } else {
                            0
                        }
                    }
                };
                let t_pulse = k as f64 * cfg.rep_period_ns + offset;
                for _ in 0..n_photons {
                    if !rng.random_bool(cfg.eta) {
                        continue;
                    }
                    let detector = if rng.random_bool(0.5) { Detector::A } else { Detector::B };
                    // inverse CDF of the exponential truncated to [0, window)
                    let u: f64 = rng.random();
                    let delay = -cfg.t1_ns * (1.0 - u * (1.0 - tail)).ln();
                    let mut t = t_pulse + delay;
                    if cfg.jitter_ns > 0.0 {
                        t += jitter.sample(&mut rng);
                    }
                    out.push(ClickRecord {
                        detector,
                        time_ns: t.max(0.0),
                    });
                }
            }
            out
        })
        .collect();
    let mut clicks: Vec<ClickRecord> = chunks.into_iter().flatten().collect();
    clicks.sort_by(|a, b| a.time_ns.total_cmp(&b.time_ns).then(a.detector.cmp(&b.detector)));
    Ok(clicks)
}

/// Writes clicks as `detector time_ns` lines.
pub fn write_clicks<W: Write>(clicks: &[ClickRecord], mut out: W) -> Result<()> {
    writeln!(out, "# detector time_ns")?;
    for c in clicks {
        let d = match c.detector {
            Detector::A => "A",
            Detector::B => "B",
        };
        writeln!(out, "{d} {:.6}", c.time_ns)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoincidenceHistogram {
    /// Bin centres of t_B − t_A, ns.
    pub centers_ns: Vec<f64>,
    pub counts: Vec<u64>,
    /// Peak index k for each entry of `peak_areas`, from −window to +window.
    pub peak_offsets: Vec<i64>,
    /// Coincidences between clicks whose pulses differ by k.
    pub peak_areas: Vec<u64>,
    pub clicks_a: u64,
    pub clicks_b: u64,
    /// Set when the click stream had no A/B pairs at all.
    pub empty: bool,
}

impl CoincidenceHistogram {
    pub fn central_area(&self) -> u64 {
        self.area(0).unwrap_or(0)
    }

    pub fn area(&self, k: i64) -> Option<u64> {
        self.peak_offsets
            .iter()
            .position(|&o| o == k)
            .map(|i| self.peak_areas[i])
    }

    pub fn side_areas(&self) -> Vec<u64> {
        self.peak_offsets
            .iter()
            .zip(&self.peak_areas)
            .filter(|(&k, _)| k != 0)
            .map(|(_, &a)| a)
            .collect()
    }
}

/// Per-pulse click counts of one detector, sorted by pulse index.
fn pulse_counts(clicks: &[ClickRecord], detector: Detector, rep: f64) -> Vec<(i64, u64)> {
    let mut idx: Vec<i64> = clicks
        .iter()
        .filter(|c| c.detector == detector)
        .map(|c| (c.time_ns / rep).floor() as i64)
        .collect();
    idx.sort_unstable();
    let mut out: Vec<(i64, u64)> = Vec::new();
    for i in idx {
        match out.last_mut() {
            Some((j, n)) if *j == i => *n += 1,
            _ => out.push((i, 1)),
        }
    }
    out
}

/// Σ_j n_A(j) · n_B(j + k) over two sorted sparse count lists.
fn lagged_product(a: &[(i64, u64)], b: &[(i64, u64)], k: i64) -> u64 {
    let (mut i, mut j, mut sum) = (0, 0, 0u64);
    while i < a.len() && j < b.len() {
        let target = a[i].0 + k;
        match b[j].0.cmp(&target) {
            std::cmp::Ordering::Less => j += 1,
            std::cmp::Ordering::Greater => i += 1,
            std::cmp::Ordering::Equal => {
                sum += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    sum
}

/// Start-stop histogram of t_B − t_A over ±(window_peaks + ½) periods plus
/// the sync-gated peak areas.
pub fn coincidence_histogram(clicks: &[ClickRecord], cfg: &HbtConfig) -> Result<CoincidenceHistogram> {
    cfg.validate()?;
    let rep = cfg.rep_period_ns;
    let half_span = (cfg.window_peaks as f64 + 0.5) * rep;
    let n_bins = (2.0 * half_span / cfg.bin_ns).ceil() as usize;
    let lo = -half_span;
    let centers_ns: Vec<f64> = (0..n_bins).map(|i| lo + (i as f64 + 0.5) * cfg.bin_ns).collect();
    let mut counts = vec![0u64; n_bins];

    let ta: Vec<f64> = clicks.iter().filter(|c| c.detector == Detector::A).map(|c| c.time_ns).collect();
    let tb: Vec<f64> = clicks.iter().filter(|c| c.detector == Detector::B).map(|c| c.time_ns).collect();
    if ta.windows(2).any(|w| w[1] < w[0]) || tb.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Data("click stream must be sorted by time".into()));
    }
    let mut start = 0;
    for &a in &ta {
        while start < tb.len() && tb[start] < a - half_span {
            start += 1;
        }
        for &b in &tb[start..] {
            let d = b - a;
            if d >= half_span {
                break;
            }
            let bin = ((d - lo) / cfg.bin_ns) as usize;
            if bin < n_bins {
                counts[bin] += 1;
            }
        }
    }

    let na = pulse_counts(clicks, Detector::A, rep);
    let nb = pulse_counts(clicks, Detector::B, rep);
    let w = cfg.window_peaks as i64;
    let peak_offsets: Vec<i64> = (-w..=w).collect();
    let peak_areas: Vec<u64> = peak_offsets.iter().map(|&k| lagged_product(&na, &nb, k)).collect();
    Ok(CoincidenceHistogram {
        centers_ns,
        counts,
        empty: ta.is_empty() || tb.is_empty(),
        peak_offsets,
        peak_areas,
        clicks_a: ta.len() as u64,
        clicks_b: tb.len() as u64,
    })
}

/// Raw g²(0): central peak area over the mean side-peak area.
pub fn g2_zero(hist: &CoincidenceHistogram) -> Result<f64> {
    let sides = hist.side_areas();
    if sides.len() < 2 {
        return Err(Error::Data("need at least two side peaks".into()));
    }
    let total: u64 = sides.iter().sum();
    if total == 0 {
        return Err(Error::Data("side peaks are empty; g2(0) is undefined".into()));
    }
    Ok(hist.central_area() as f64 * sides.len() as f64 / total as f64)
}

/// Counting-statistics standard error of [`g2_zero`].
pub fn g2_zero_std_error(hist: &CoincidenceHistogram) -> Result<f64> {
    let g = g2_zero(hist)?;
    let sides = hist.side_areas();
    let total: u64 = sides.iter().sum();
    let mean_side = total as f64 / sides.len() as f64;
    let c = hist.central_area() as f64;
    // an empty central peak still carries about one count of uncertainty
    let rel_c = 1.0 / c.max(1.0);
    Ok((g * g * (1.0 / total as f64) + (c.max(1.0) / mean_side).powi(2) * rel_c).sqrt())
}

/// 2p2 / (p1 + 2p2)².
pub fn analytic_g2_zero(p1: f64, p2: f64) -> Result<f64> {
    if !(p1 >= 0.0 && p2 >= 0.0 && p1 + p2 <= 1.0) {
        return Err(Error::param("p1", "p1, p2 must be probabilities with p1 + p2 <= 1"));
    }
    let mu = p1 + 2.0 * p2;
    if mu == 0.0 {
        return Err(Error::param("p1", "mean photon number is zero"));
    }
    Ok(2.0 * p2 / (mu * mu))
}

/// Smallest p2 with 2p2/(p1 + 2p2)² = g2, i.e. the root of
/// 4g·p2² + (4g·p1 − 2)·p2 + g·p1² = 0 on the small branch.
pub fn solve_p2_for_g2(p1: f64, g2: f64) -> Result<f64> {
    if !(p1 > 0.0 && p1 <= 1.0) {
        return Err(Error::param("p1", "must lie in (0, 1]"));
    }
    if !(g2 >= 0.0) {
        return Err(Error::param("g2", "must be >= 0"));
    }
    if g2 == 0.0 {
        return Ok(0.0);
    }
    let a = 4.0 * g2;
    let b = 4.0 * g2 * p1 - 2.0;
    let c = g2 * p1 * p1;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Err(Error::param("g2", "not reachable with this p1"));
    }
    // numerically stable small root
    let p2 = 2.0 * c / (-b + disc.sqrt());
    if p1 + p2 > 1.0 {
        return Err(Error::param("g2", "requires p1 + p2 > 1"));
    }
    Ok(p2)
}
