//! Seeded Monte Carlo transcripts of the prepare-and-measure process, and
//! a histogram estimate of the mutual information used as an independent
//! check on the analytic engine.

use std::f64::consts::TAU;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::infotheory::mutual_information;
use crate::keyrate::ProtocolParams;
use crate::likelihood::{homodyne_mean, homodyne_variance, HomodyneOutcome, Outcome, PolarOutcome, Scheme};

/// Draws per independent generator stream.
const CHUNK: usize = 1 << 16;
const JACKKNIFE_GROUPS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub k: u32,
    pub outcome: Outcome,
}

/// Alice's choices and Bob's outcomes. Chunk `i` of the sample is drawn
/// from ChaCha8 seeded with `seed` on stream `i`, so the entries depend only
/// on `(seed, params)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub d: u32,
    pub seed: u64,
    pub entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn n(&self) -> usize {
        self.entries.len()
    }

    /// CSV with header `k,beta_x` (homodyne) or `k,beta_x,beta_y`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let polar = matches!(self.entries.first().map(|e| e.outcome), Some(Outcome::Polar(_)));
        writeln!(w, "{}", if polar { "k,beta_x,beta_y" } else { "k,beta_x" })?;
        for e in &self.entries {
            match e.outcome {
                Outcome::Homodyne(o) => writeln!(w, "{},{}", e.k, o.beta_x)?,
                Outcome::Polar(o) => {
                    // β = β_r e^{−iφ}
                    writeln!(w, "{},{},{}", e.k, o.beta_r * o.phi.cos(), -o.beta_r * o.phi.sin())?
                }
            }
        }
        Ok(())
    }
}

/// Pair of independent standard normals.
fn box_muller<R: Rng>(rng: &mut R) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let rad = (-2.0 * u1.ln()).sqrt();
    (rad * (TAU * u2).cos(), rad * (TAU * u2).sin())
}

fn draw<R: Rng>(p: &ProtocolParams, rng: &mut R) -> TranscriptEntry {
    let (c, ch) = (&p.constellation, &p.channel);
    let k = rng.gen_range(0..c.d);
    let (z0, z1) = box_muller(rng);
    let outcome = match p.scheme {
        Scheme::Homodyne => {
            HomodyneOutcome { beta_x: homodyne_mean(c, ch, k) + homodyne_variance(c, ch).sqrt() * z0 }.into()
        }
        Scheme::DualHomodyne => {
            let sd = (0.5 * (1.0 + ch.delta)).sqrt();
            let mean = (0.5 * ch.eta).sqrt() * c.amplitude;
            let angle = c.state_angle(k);
            let x = mean * angle.cos() + sd * z0;
            let y = mean * angle.sin() + sd * z1;
            PolarOutcome { beta_r: x.hypot(y), phi: (-y.atan2(x)).rem_euclid(TAU) }.into()
        }
    };
    TranscriptEntry { k, outcome }
}

pub fn sample_transcript(p: &ProtocolParams, n: usize, seed: u64) -> Result<Transcript> {
    p.validate()?;
    if n == 0 {
        return Err(Error::Config("need at least one sample".into()));
    }
    let chunks: Vec<Vec<TranscriptEntry>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let len = CHUNK.min(n - i * CHUNK);
            (0..len).map(|_| draw(p, &mut rng)).collect()
        })
        .collect();
    Ok(Transcript { d: p.constellation.d, seed, entries: chunks.concat() })
}

/// Plug-in estimate with its jackknife standard error, base `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Joint counts of `(k, outcome cell)`.
struct Histogram {
    d: usize,
    counts: Vec<u64>,
}

impl Histogram {
    fn new(d: usize, cells: usize) -> Self {
        Self { d, counts: vec![0; d * cells] }
    }

    fn cells(&self) -> usize {
        self.counts.len() / self.d
    }

    fn merge(&mut self, other: &Histogram, sign: i64) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a = (*a as i64 + sign * *b as i64) as u64;
        }
    }

    fn mutual_information(&self) -> f64 {
        let (d, cells) = (self.d, self.cells());
        let total: u64 = self.counts.iter().sum();
        if total == 0 {
            return 0.0;
        }
        let n = total as f64;
        let pk: Vec<f64> =
            (0..d).map(|k| self.counts[k * cells..(k + 1) * cells].iter().sum::<u64>() as f64 / n).collect();
        let mut mi = 0.0;
        for b in 0..cells {
            let pb = (0..d).map(|k| self.counts[k * cells + b]).sum::<u64>() as f64 / n;
            for (k, &pk) in pk.iter().enumerate() {
                let c = self.counts[k * cells + b];
                if c > 0 {
                    let pkb = c as f64 / n;
                    mi += pkb * (pkb / (pk * pb)).ln();
                }
            }
        }
        mi / (d as f64).ln()
    }
}

/// Maps outcomes to histogram cells: `bins` equal cells over the sampled
/// range for homodyne data, a `√bins × √bins` Cartesian grid for
/// dual-homodyne data.
struct Binner {
    polar: bool,
    per_axis: usize,
    lo: [f64; 2],
    width: [f64; 2],
}

fn cartesian(o: &Outcome) -> [f64; 2] {
    match *o {
        Outcome::Homodyne(h) => [h.beta_x, 0.0],
        Outcome::Polar(p) => [p.beta_r * p.phi.cos(), -p.beta_r * p.phi.sin()],
    }
}

impl Binner {
    fn new(t: &Transcript, bins: usize) -> Self {
        let polar = matches!(t.entries[0].outcome, Outcome::Polar(_));
        let per_axis = if polar { (bins as f64).sqrt().ceil() as usize } else { bins };
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for e in &t.entries {
            let xy = cartesian(&e.outcome);
            for a in 0..2 {
                lo[a] = lo[a].min(xy[a]);
                hi[a] = hi[a].max(xy[a]);
            }
        }
        let width = [0, 1].map(|a| ((hi[a] - lo[a]) / per_axis as f64).max(f64::MIN_POSITIVE));
        Self { polar, per_axis, lo, width }
    }

    fn cells(&self) -> usize {
        if self.polar {
            self.per_axis * self.per_axis
        } else {
            self.per_axis
        }
    }

    fn cell(&self, o: &Outcome) -> usize {
        let xy = cartesian(o);
        let idx = |a: usize| (((xy[a] - self.lo[a]) / self.width[a]) as usize).min(self.per_axis - 1);
        if self.polar {
            idx(0) * self.per_axis + idx(1)
        } else {
            idx(0)
        }
    }
}

/// Histogram plug-in estimate of `I(A:B)` with a 20-group delete-one
/// jackknife standard error.
pub fn empirical_mutual_information(t: &Transcript, bins: usize) -> Result<MiEstimate> {
    if bins < 16 {
        return Err(Error::Config(format!("need at least 16 bins, got {bins}")));
    }
    if t.entries.is_empty() {
        return Err(Error::Config("empty transcript".into()));
    }
    let binner = Binner::new(t, bins);
    let d = t.d as usize;
    let groups = JACKKNIFE_GROUPS.min(t.n());
    let group_len = t.n().div_ceil(groups);
    let parts: Vec<Histogram> = t
        .entries
        .chunks(group_len)
        .map(|chunk| {
            let mut h = Histogram::new(d, binner.cells());
            for e in chunk {
                h.counts[e.k as usize * binner.cells() + binner.cell(&e.outcome)] += 1;
            }
            h
        })
        .collect();
    let mut full = Histogram::new(d, binner.cells());
    for h in &parts {
        full.merge(h, 1);
    }
    let value = full.mutual_information();
    let g = parts.len() as f64;
    let leave_out: Vec<f64> = parts
        .iter()
        .map(|h| {
            let mut rest = Histogram { d, counts: full.counts.clone() };
            rest.merge(h, -1);
            rest.mutual_information()
        })
        .collect();
    let mean = leave_out.iter().sum::<f64>() / g;
    let var = leave_out.iter().map(|x| (x - mean).powi(2)).sum::<f64>() * (g - 1.0) / g;
    Ok(MiEstimate { value, std_error: var.sqrt() })
}

/// CDF of the homodyne outcome marginal.
pub fn p_bx_cdf(p: &ProtocolParams, x: f64) -> f64 {
    let (c, ch) = (&p.constellation, &p.channel);
    let sd = homodyne_variance(c, ch).sqrt();
    (0..c.d).map(|k| 0.5 * erfc(-(x - homodyne_mean(c, ch, k)) / (sd * 2f64.sqrt()))).sum::<f64>() / c.d as f64
}

/// Kolmogorov–Smirnov distance between the sampled homodyne outcomes and
/// the analytic marginal.
pub fn ks_distance(p: &ProtocolParams, t: &Transcript) -> Result<f64> {
    let mut xs: Vec<f64> = t
        .entries
        .iter()
        .map(|e| match e.outcome {
            Outcome::Homodyne(o) => Ok(o.beta_x),
            Outcome::Polar(_) => Err(Error::Config("KS distance needs homodyne outcomes".into())),
        })
        .collect::<Result<_>>()?;
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut worst: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = p_bx_cdf(p, x);
        worst = worst.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    Ok(worst)
}

/// One checked agreement band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub samples: usize,
    pub analytic: f64,
    pub empirical: MiEstimate,
    pub bands: Vec<Band>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.bands.iter().all(|b| b.pass)
    }
}

/// Absolute tolerance on the mutual-information gap.
pub const MI_TOLERANCE: f64 = 0.01;
/// Largest accepted KS distance.
pub const KS_TOLERANCE: f64 = 0.002;

/// Compares a sampled transcript with the analytic mutual information (and,
/// for homodyne detection, the analytic outcome distribution).
pub fn validate(p: &ProtocolParams, samples: usize, seed: u64, bins: usize) -> Result<ValidationReport> {
    let analytic = mutual_information(&p.constellation, &p.channel, p.scheme, &p.quad)?;
    let t = sample_transcript(p, samples, seed)?;
    let empirical = empirical_mutual_information(&t, bins)?;
    let gap = (empirical.value - analytic).abs();
    let mut bands = vec![
        Band { name: "|I_emp - I|".into(), value: gap, limit: MI_TOLERANCE, pass: gap <= MI_TOLERANCE },
        Band {
            name: "|I_emp - I| / 3 SE".into(),
            value: gap,
            limit: 3.0 * empirical.std_error,
            pass: gap <= 3.0 * empirical.std_error,
        },
    ];
    if p.scheme == Scheme::Homodyne {
        let ks = ks_distance(p, &t)?;
        bands.push(Band { name: "KS distance".into(), value: ks, limit: KS_TOLERANCE, pass: ks < KS_TOLERANCE });
    }
    Ok(ValidationReport { seed, samples, analytic, empirical, bands })
}

/// The five documented homodyne parameter sets `(d, η, |α|, χ, r, δ)`.
pub fn reference_sets() -> Vec<(u32, f64, f64, f64, f64, f64)> {
    vec![
        (4, 0.8, 2.0, (1.0f64 / 3.0).atan(), 0.0, 0.0),
        (2, 0.6, 1.0, 0.0, 0.0, 0.0),
        (3, 0.9, 1.5, 0.2, 0.0, 0.1),
        (8, 1.0, 4.0, 0.13720370805, 0.0, 0.0),
        (2, 0.7, 0.8, 0.0, 0.3, 0.0),
    ]
}
