//! Seeded synthetic drift streams.
//!
//! Five two-dimensional datasets draw each sample's class first (majority
//! C1 = negative, minority C2 = positive, 3:1 by default) and then its
//! position from an isotropic Gaussian around a class mean that moves with
//! normalized time `t = i / n_total`. Initial means are C1 = (−2, 0) and
//! C2 = (2, 0), so the initial optimal boundary is the vertical axis. With
//! drift magnitude `D` (default 6) the mean trajectories are:
//!
//! | dataset     | C1 mean                  | C2 mean                          |
//! |-------------|--------------------------|----------------------------------|
//! | Parallel    | (−2, 0) + D t (0, 1)     | (2, 0) + D t (0, 1)              |
//! | LinearShift | (−2, 0) + D t u          | (2, 0) + D t u                   |
//! | Opposite    | (−2, 0) + D t u          | (2, 0) − D t u                   |
//! | Cross       | (−2, 0) + D t u          | (2, 0) + D t (0, 1)              |
//! | Parabola    | (−2, 0)                  | (2 − 4/3 D t, 8/3 D t (1 − t))   |
//!
//! with `u = (1, 1)/√2`. The SEA3D stream samples the cube `[0, 10]³`; a
//! sample is C1 iff `p₁ + p₂ ≤ θ`, where θ is redrawn uniformly from
//! (6, 14) every 100 samples, and 10% of labels are flipped.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)`, which is
//! portable across platforms.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid_input, Error, Result};
use crate::sample::{Label, Sample};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dataset {
    Parallel,
    LinearShift,
    Opposite,
    Cross,
    Parabola,
    Sea3d,
}

impl Dataset {
    pub const ALL: [Dataset; 6] = [
        Dataset::Parallel,
        Dataset::LinearShift,
        Dataset::Opposite,
        Dataset::Cross,
        Dataset::Parabola,
        Dataset::Sea3d,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Dataset::Parallel => "Parallel",
            Dataset::LinearShift => "LinearShift",
            Dataset::Opposite => "Opposite",
            Dataset::Cross => "Cross",
            Dataset::Parabola => "Parabola",
            Dataset::Sea3d => "SEA3D",
        }
    }

    pub fn dimension(self) -> usize {
        match self {
            Dataset::Sea3d => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dataset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim();
        Dataset::ALL
            .into_iter()
            .find(|d| d.as_str().eq_ignore_ascii_case(key))
            .or_else(|| key.eq_ignore_ascii_case("3D").then_some(Dataset::Sea3d))
            .ok_or_else(|| invalid_input(format!("unknown dataset `{key}`")))
    }
}

/// Parameters of one synthetic stream.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriftSpec {
    pub dataset: Dataset,
    pub n_total: usize,
    pub n_train: usize,
    pub seed: u64,
    /// Standard deviation of the isotropic Gaussian noise (2-D datasets).
    pub noise_sigma: f64,
    /// Majority-to-minority ratio (2-D datasets).
    pub class_ratio: f64,
    /// Total displacement of the moving means over the stream (2-D datasets).
    pub drift: f64,
}

impl DriftSpec {
    pub const DEFAULT_DRIFT: f64 = 6.0;
    pub const SEA_BLOCK: usize = 100;
    pub const SEA_NOISE: f64 = 0.10;

    pub fn new(dataset: Dataset, seed: u64) -> Self {
        Self {
            dataset,
            n_total: 10_000,
            n_train: 1_000,
            seed,
            noise_sigma: 0.5,
            class_ratio: 3.0,
            drift: Self::DEFAULT_DRIFT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_total == 0 || self.n_train == 0 || self.n_train >= self.n_total {
            return Err(invalid_input(format!(
                "need 0 < n_train < n_total, got n_train={} n_total={}",
                self.n_train, self.n_total
            )));
        }
        if !(self.noise_sigma > 0.0) || !(self.class_ratio > 0.0) || !self.drift.is_finite() {
            return Err(invalid_input("noise_sigma and class_ratio must be positive, drift finite"));
        }
        Ok(())
    }

    /// Probability of drawing the minority (positive) class.
    pub fn minority_fraction(&self) -> f64 {
        1.0 / (1.0 + self.class_ratio)
    }

    /// Class means at normalized time `t` for the 2-D datasets.
    pub fn class_means(&self, t: f64) -> Result<[[f64; 2]; 2]> {
        let d = self.drift;
        let u = std::f64::consts::FRAC_1_SQRT_2;
        let (c1, c2) = ([-2.0, 0.0], [2.0, 0.0]);
        let means = match self.dataset {
            Dataset::Parallel => [[c1[0], c1[1] + d * t], [c2[0], c2[1] + d * t]],
            Dataset::LinearShift => [
                [c1[0] + d * t * u, c1[1] + d * t * u],
                [c2[0] + d * t * u, c2[1] + d * t * u],
            ],
            Dataset::Opposite => [
                [c1[0] + d * t * u, c1[1] + d * t * u],
                [c2[0] - d * t * u, c2[1] - d * t * u],
            ],
            Dataset::Cross => [[c1[0] + d * t * u, c1[1] + d * t * u], [c2[0], c2[1] + d * t]],
            Dataset::Parabola => [c1, [c2[0] - 4.0 / 3.0 * d * t, 8.0 / 3.0 * d * t * (1.0 - t)]],
            Dataset::Sea3d => {
                return Err(invalid_input("SEA3D has no class-mean trajectory"));
            }
        };
        Ok(means)
    }
}

/// An ordered stream whose arrival indices equal positions.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledStream {
    pub name: String,
    pub dimension: usize,
    pub samples: Vec<Sample>,
}

impl LabeledStream {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Generates any dataset.
pub fn generate(spec: &DriftSpec) -> Result<LabeledStream> {
    match spec.dataset {
        Dataset::Sea3d => gen_sea3d(spec),
        _ => gen_2d_drift(spec),
    }
}

/// Drifting-Gaussian streams; see the module docs for the trajectories.
pub fn gen_2d_drift(spec: &DriftSpec) -> Result<LabeledStream> {
    if spec.dataset == Dataset::Sea3d {
        return Err(invalid_input("gen_2d_drift does not generate SEA3D"));
    }
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let p_minority = spec.minority_fraction();
    let mut samples = Vec::with_capacity(spec.n_total);
    for i in 0..spec.n_total {
        let t = i as f64 / spec.n_total as f64;
        let label = if rng.random::<f64>() < p_minority {
            Label::Positive
        } else {
            Label::Negative
        };
        let means = spec.class_means(t)?;
        let mean = match label {
            Label::Negative => means[0],
            Label::Positive => means[1],
        };
        let features = mean
            .iter()
            .map(|m| {
                let z: f64 = rng.sample(StandardNormal);
                m + spec.noise_sigma * z
            })
            .collect();
        samples.push(Sample::new(features, label, i as u64));
    }
    Ok(LabeledStream {
        name: spec.dataset.to_string(),
        dimension: 2,
        samples,
    })
}

/// Abrupt-change stream in the cube `[0, 10]³`.
pub fn gen_sea3d(spec: &DriftSpec) -> Result<LabeledStream> {
    gen_sea3d_traced(spec).map(|(s, _)| s)
}

/// Like [`gen_sea3d`], also returning the threshold used for each block of
/// 100 samples.
pub fn gen_sea3d_traced(spec: &DriftSpec) -> Result<(LabeledStream, Vec<f64>)> {
    if spec.dataset != Dataset::Sea3d {
        return Err(invalid_input("gen_sea3d only generates SEA3D"));
    }
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut samples = Vec::with_capacity(spec.n_total);
    let mut thresholds = Vec::with_capacity(spec.n_total.div_ceil(DriftSpec::SEA_BLOCK));
    let mut theta = 0.0;
    for i in 0..spec.n_total {
        if i % DriftSpec::SEA_BLOCK == 0 {
            theta = rng.random_range(6.0..14.0);
            thresholds.push(theta);
        }
        let p: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..10.0)).collect();
        let clean = sea_label(&p, theta);
        let label = if rng.random::<f64>() < DriftSpec::SEA_NOISE {
            clean.opposite()
        } else {
            clean
        };
        samples.push(Sample::new(p, label, i as u64));
    }
    Ok((
        LabeledStream {
            name: Dataset::Sea3d.to_string(),
            dimension: 3,
            samples,
        },
        thresholds,
    ))
}

/// Noise-free SEA concept: C1 (negative) iff `p₁ + p₂ ≤ θ`.
pub fn sea_label(p: &[f64], theta: f64) -> Label {
    if p[0] + p[1] <= theta {
        Label::Negative
    } else {
        Label::Positive
    }
}

/// Prefix/suffix split.
pub fn split_train_test(samples: &[Sample], n_train: usize) -> Result<(Vec<Sample>, Vec<Sample>)> {
    if n_train >= samples.len() {
        return Err(invalid_input(format!(
            "n_train ({n_train}) must be smaller than the stream length ({})",
            samples.len()
        )));
    }
    let (a, b) = samples.split_at(n_train);
    Ok((a.to_vec(), b.to_vec()))
}

/// Writes `arrival_index,f1,…,fd,label` lines with 17 significant digits.
pub fn write_stream<W: Write>(mut out: W, stream: &LabeledStream) -> Result<()> {
    let mut line = String::new();
    for s in &stream.samples {
        line.clear();
        line.push_str(&s.arrival_index.to_string());
        for x in &s.features {
            line.push(',');
            line.push_str(&format!("{x:.16e}"));
        }
        line.push(',');
        line.push_str(&s.label.to_string());
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Parses the canonical serialization. Blank lines and `#` comments are skipped.
pub fn read_stream<R: BufRead>(input: R, name: &str) -> Result<LabeledStream> {
    let mut samples: Vec<Sample> = Vec::new();
    let mut dimension = None;
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: &str| invalid_input(format!("{name}:{}: {msg}", lineno + 1));
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 3 {
            return Err(bad("expected `arrival_index, f1, …, fd, label`"));
        }
        let arrival: u64 = fields[0].parse().map_err(|_| bad("bad arrival index"))?;
        let features = fields[1..fields.len() - 1]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| bad("bad feature value")))
            .collect::<Result<Vec<_>>>()?;
        let label_raw: f64 = fields[fields.len() - 1].parse().map_err(|_| bad("bad label"))?;
        let label = Label::from_int(label_raw as i64)
            .filter(|_| label_raw.fract() == 0.0)
            .ok_or_else(|| bad("label must be -1, 0 or 1"))?;
        match dimension {
            None => dimension = Some(features.len()),
            Some(d) if d != features.len() => return Err(bad("inconsistent feature dimension")),
            _ => {}
        }
        if samples.last().is_some_and(|s| s.arrival_index >= arrival) {
            return Err(bad("arrival indices must be strictly increasing"));
        }
        samples.push(Sample::new(features, label, arrival));
    }
    Ok(LabeledStream {
        name: name.to_string(),
        dimension: dimension.unwrap_or(0),
        samples,
    })
}
