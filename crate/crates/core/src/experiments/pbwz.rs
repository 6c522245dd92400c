//! Four-piece entanglement-swapping run in the style of the PBWZ photon
//! experiment.
//!
//! Pieces 2 and 3 meet at a central analyzer; a group is kept only when the
//! central detectors accept it. Piece 1 goes to a two-channel analyzer at a
//! fixed angle and piece 4 to a single channel scanned over angle. The two
//! fourfold series `D1+ D4` and `D1- D4` are fit to `c0 + c1 cos 2t + c2 sin 2t`.

use std::f64::consts::{FRAC_PI_8, PI};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::ids;
use crate::cylinder::{respond, DetectorConfig, Outcome, ParticleKind};
use crate::error::{Error, Result};
use crate::source::{emit_quad, RngStream, SourceKind, StreamKey};
use crate::stats::{mean_and_sd, sine_fit, visibility_from_fit, SineFit, VisibilityResult};

/// Acceptance rule of the central (Bell-state) station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BsmAcceptance {
    /// Both pieces detected in opposite channels.
    Opposite,
    /// Both pieces detected in the same channel.
    Same,
    /// Every group accepted.
    Off,
}

impl BsmAcceptance {
    fn accepts(self, a: Outcome, b: Outcome) -> bool {
        match self {
            BsmAcceptance::Opposite => a.value() * b.value() == -1,
            BsmAcceptance::Same => a.value() * b.value() == 1,
            BsmAcceptance::Off => true,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BsmAcceptance::Opposite => "opposite",
            BsmAcceptance::Same => "same",
            BsmAcceptance::Off => "off",
        }
    }
}

impl fmt::Display for BsmAcceptance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BsmAcceptance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "opposite" => Ok(BsmAcceptance::Opposite),
            "same" => Ok(BsmAcceptance::Same),
            "off" => Ok(BsmAcceptance::Off),
            other => Err(Error::InvalidConfig(format!("unknown BSM acceptance `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PbwzConfig {
    pub groups: u64,
    pub repetitions: u64,
    /// Scanned detector-4 angles, radians.
    pub detector4_angles: Vec<f64>,
    pub station1_angle: f64,
    pub bsm_axis: f64,
    pub acceptance: BsmAcceptance,
    pub seed: u64,
}

impl PbwzConfig {
    /// `count` angles evenly spaced over `[0, pi]`, endpoints included.
    pub fn even_grid(count: usize) -> Vec<f64> {
        match count {
            0 => vec![],
            1 => vec![0.0],
            _ => (0..count)
                .map(|i| PI * i as f64 / (count - 1) as f64)
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.groups == 0 || self.repetitions == 0 {
            return Err(Error::InvalidConfig("groups and repetitions must be >= 1".into()));
        }
        if self.detector4_angles.is_empty() {
            return Err(Error::InvalidConfig("detector-4 angle grid is empty".into()));
        }
        Ok(())
    }

    /// Fringe visibility the model predicts for this geometry.
    pub fn oracle_visibility(&self) -> f64 {
        match self.acceptance {
            BsmAcceptance::Off => 0.0,
            _ => (2.0 * (self.station1_angle - self.bsm_axis)).cos().abs(),
        }
    }
}

impl Default for PbwzConfig {
    fn default() -> Self {
        Self {
            groups: 1800,
            repetitions: 64,
            detector4_angles: Self::even_grid(13),
            station1_angle: FRAC_PI_8,
            bsm_axis: 0.0,
            acceptance: BsmAcceptance::Opposite,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PbwzPoint {
    pub theta: f64,
    /// `D1+ D4` fourfold counts, one per repetition.
    pub plus_counts: Vec<u64>,
    /// `D1- D4` fourfold counts, one per repetition.
    pub minus_counts: Vec<u64>,
    pub accepted: u64,
    pub plus_mean: f64,
    pub plus_sd: f64,
    pub minus_mean: f64,
    pub minus_sd: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PbwzReport {
    pub config: PbwzConfig,
    pub points: Vec<PbwzPoint>,
    pub plus_fit: SineFit,
    pub minus_fit: SineFit,
    pub plus_visibility: VisibilityResult,
    pub minus_visibility: VisibilityResult,
    /// Mean of the two fitted visibilities.
    pub visibility: f64,
    pub oracle_visibility: f64,
}

#[derive(Debug, Default, Clone, Copy)]
struct Cell {
    plus: u64,
    minus: u64,
    accepted: u64,
}

fn run_cell(cfg: &PbwzConfig, angle_index: usize, rep: u64) -> Cell {
    let photon = ParticleKind::PHOTON;
    let central = DetectorConfig::new(cfg.bsm_axis, photon);
    let station1 = DetectorConfig::new(cfg.station1_angle, photon);
    let station4 = DetectorConfig::new(cfg.detector4_angles[angle_index], photon);
    let mut rng = RngStream::new(cfg.seed, StreamKey::new(ids::PBWZ, angle_index as u64, rep));
    let mut cell = Cell::default();
    for _ in 0..cfg.groups {
        let [p1, p2, p3, p4] = emit_quad(&mut rng, SourceKind::OrthogonalPdc);
        if !cfg.acceptance.accepts(respond(&central, &p2), respond(&central, &p3)) {
            continue;
        }
        cell.accepted += 1;
        if respond(&station4, &p4) != Outcome::Plus {
            continue;
        }
        match respond(&station1, &p1) {
            Outcome::Plus => cell.plus += 1,
            Outcome::Minus => cell.minus += 1,
            Outcome::Zero => {}
        }
    }
    cell
}

pub fn run_pbwz(cfg: &PbwzConfig) -> Result<PbwzReport> {
    cfg.validate()?;
    let reps = cfg.repetitions;
    let cells: Vec<Cell> = (0..cfg.detector4_angles.len() as u64 * reps)
        .into_par_iter()
        .map(|idx| run_cell(cfg, (idx / reps) as usize, idx % reps))
        .collect();

    let points: Vec<PbwzPoint> = cfg
        .detector4_angles
        .iter()
        .zip(cells.chunks(reps as usize))
        .map(|(&theta, cells)| {
            let plus_counts: Vec<u64> = cells.iter().map(|c| c.plus).collect();
            let minus_counts: Vec<u64> = cells.iter().map(|c| c.minus).collect();
            let as_f64 = |v: &[u64]| v.iter().map(|&c| c as f64).collect::<Vec<_>>();
            let (plus_mean, plus_sd) = mean_and_sd(&as_f64(&plus_counts));
            let (minus_mean, minus_sd) = mean_and_sd(&as_f64(&minus_counts));
            PbwzPoint {
                theta,
                accepted: cells.iter().map(|c| c.accepted).sum(),
                plus_counts,
                minus_counts,
                plus_mean,
                plus_sd,
                minus_mean,
                minus_sd,
            }
        })
        .collect();

    let plus_pts: Vec<(f64, f64)> = points.iter().map(|p| (p.theta, p.plus_mean)).collect();
    let minus_pts: Vec<(f64, f64)> = points.iter().map(|p| (p.theta, p.minus_mean)).collect();
    let plus_fit = sine_fit(&plus_pts, 2.0)?;
    let minus_fit = sine_fit(&minus_pts, 2.0)?;
    let plus_visibility = visibility_from_fit(&plus_fit)?;
    let minus_visibility = visibility_from_fit(&minus_fit)?;
    Ok(PbwzReport {
        config: cfg.clone(),
        visibility: 0.5 * (plus_visibility.visibility + minus_visibility.visibility),
        oracle_visibility: cfg.oracle_visibility(),
        points,
        plus_fit,
        minus_fit,
        plus_visibility,
        minus_visibility,
    })
}
