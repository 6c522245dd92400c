//! Correlated piece sources and the keyed random streams that drive them.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cylinder::{predicted_q, HiddenState, ParticleKind};
use crate::error::Error;

/// How a source orients the two pieces of a broken rod.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    /// Partner orientation rotated by pi (singlet rod).
    AntiparallelSinglet,
    /// Partner orientation rotated by pi/2 (down-conversion pairs).
    OrthogonalPdc,
}

impl SourceKind {
    pub fn offset(self) -> f64 {
        match self {
            SourceKind::AntiparallelSinglet => PI,
            SourceKind::OrthogonalPdc => FRAC_PI_2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SourceKind::AntiparallelSinglet => "antiparallel",
            SourceKind::OrthogonalPdc => "orthogonal",
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SourceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "antiparallel" | "antiparallel_singlet" => Ok(SourceKind::AntiparallelSinglet),
            "orthogonal" | "orthogonal_pdc" => Ok(SourceKind::OrthogonalPdc),
            other => Err(Error::InvalidConfig(format!("unknown source kind `{other}`"))),
        }
    }
}

/// Coincidence correlation of the cylinder model for pairs from `source`
/// analysed at `a` and `b = a - delta`: `cos(n (delta + offset))`.
pub fn source_correlation(delta: f64, kind: ParticleKind, source: SourceKind) -> f64 {
    match source {
        SourceKind::AntiparallelSinglet => predicted_q(delta, kind),
        SourceKind::OrthogonalPdc => (kind.n() as f64 * (delta + FRAC_PI_2)).cos(),
    }
}

/// Identifies one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamKey {
    pub experiment: u64,
    pub setting: u64,
    pub repetition: u64,
}

impl StreamKey {
    pub fn new(experiment: u64, setting: u64, repetition: u64) -> Self {
        Self {
            experiment,
            setting,
            repetition,
        }
    }
}

/// A ChaCha8 stream whose key is `(seed, experiment, setting)` and whose
/// stream id is the repetition. Two streams with the same seed and key
/// produce identical sequences regardless of what other streams exist.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    key: StreamKey,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, key: StreamKey) -> Self {
        let mut bytes = [0u8; 32];
        bytes[0..8].copy_from_slice(&seed.to_le_bytes());
        bytes[8..16].copy_from_slice(&key.experiment.to_le_bytes());
        bytes[16..24].copy_from_slice(&key.setting.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(bytes);
        rng.set_stream(key.repetition);
        Self { seed, key, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn key(&self) -> StreamKey {
        self.key
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on `[0, 2pi)`.
    pub fn angle(&mut self) -> f64 {
        let a = TAU * self.uniform();
        if a >= TAU {
            0.0
        } else {
            a
        }
    }
}

/// Builds a pair from the first piece's draws: the partner is rotated by the
/// source offset and carries the complementary length.
pub fn pair_from_draws(theta: f64, ell: f64, source: SourceKind) -> (HiddenState, HiddenState) {
    let first = HiddenState::new(theta, ell).expect("draws lie in the hidden-state domain");
    let second = HiddenState::new(theta + source.offset(), 1.0 - ell)
        .expect("complementary length lies in [0, 1]");
    (first, second)
}

pub fn emit_pair(rng: &mut RngStream, source: SourceKind) -> (HiddenState, HiddenState) {
    let theta = rng.angle();
    let ell = rng.uniform();
    pair_from_draws(theta, ell, source)
}

/// Two independent pairs: pieces `(0, 1)` and `(2, 3)`.
pub fn emit_quad(rng: &mut RngStream, source: SourceKind) -> [HiddenState; 4] {
    let (p1, p2) = emit_pair(rng, source);
    let (p3, p4) = emit_pair(rng, source);
    [p1, p2, p3, p4]
}
