use rayon::prelude::*;
use serde::Serialize;

use super::{blocks, ids};
use crate::cylinder::{
    predicted_efficiencies, respond, DetectorConfig, EfficiencyTriple, MomentMatrix, ParticleKind,
    ProbMatrix,
};
use crate::error::{Error, Result};
use crate::source::{emit_pair, source_correlation, RngStream, SourceKind, StreamKey};
use crate::stats::{
    efficiency_from_tally, empirical_moments, estimate_q, moment_std_errors, CoincidenceTally,
    EfficiencyEstimate, Estimate,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanConfig {
    pub kind: ParticleKind,
    pub source: SourceKind,
    /// Relative angles `a - b`, radians.
    pub angles: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if self.angles.is_empty() {
            return Err(Error::InvalidConfig("angle list is empty".into()));
        }
        if let Some(a) = self.angles.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite angle {a}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint {
    pub delta: f64,
    pub tally: CoincidenceTally,
    pub q: Estimate,
    pub q_oracle: f64,
    pub efficiency: EfficiencyEstimate,
    pub moments: MomentMatrix,
    pub moment_std_errors: [[f64; 3]; 3],
    pub prob_oracle: ProbMatrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub config: ScanConfig,
    pub points: Vec<ScanPoint>,
    pub pooled_efficiency: EfficiencyEstimate,
    pub oracle_efficiency: EfficiencyTriple,
}

impl ScanReport {
    pub fn pooled_tally(&self) -> CoincidenceTally {
        self.points
            .iter()
            .fold(CoincidenceTally::new(), |acc, p| acc.merged(&p.tally))
    }
}

/// Tallies `trials` pairs. `place` draws the two analyzer angles for a trial.
fn tally_pairs<F>(
    seed: u64,
    experiment: u64,
    setting: u64,
    trials: u64,
    kind: ParticleKind,
    source: SourceKind,
    place: F,
) -> CoincidenceTally
where
    F: Fn(&mut RngStream) -> (f64, f64) + Sync,
{
    let cells: Vec<(u64, u64)> = blocks(trials).collect();
    let partial: Vec<CoincidenceTally> = cells
        .par_iter()
        .map(|&(block, n)| {
            let mut rng = RngStream::new(seed, StreamKey::new(experiment, setting, block));
            let mut tally = CoincidenceTally::new();
            for _ in 0..n {
                let (a, b) = place(&mut rng);
                let (first, second) = emit_pair(&mut rng, source);
                let out_a = respond(&DetectorConfig::new(a, kind), &first);
                let out_b = respond(&DetectorConfig::new(b, kind), &second);
                tally.record(out_a, out_b);
            }
            tally
        })
        .collect();
    partial
        .iter()
        .fold(CoincidenceTally::new(), |acc, t| acc.merged(t))
}

fn oracle_matrix(delta: f64, kind: ParticleKind, source: SourceKind) -> ProbMatrix {
    let eff = predicted_efficiencies();
    ProbMatrix::from_efficiencies(eff.singles, eff.doubles, source_correlation(delta, kind, source))
        .expect("model efficiencies are admissible")
}

/// Correlation scan over relative angles. Detector A sits at an angle drawn
/// uniformly per trial and detector B at `a - delta`, so every estimate also
/// averages over absolute orientation.
pub fn run_bipartite_scan(cfg: &ScanConfig) -> Result<ScanReport> {
    cfg.validate()?;
    let tallies: Vec<CoincidenceTally> = cfg
        .angles
        .par_iter()
        .enumerate()
        .map(|(i, &delta)| {
            tally_pairs(cfg.seed, ids::BIPARTITE, i as u64, cfg.trials, cfg.kind, cfg.source, |rng| {
                let a = rng.angle();
                (a, a - delta)
            })
        })
        .collect();

    let mut points = Vec::with_capacity(tallies.len());
    for (&delta, tally) in cfg.angles.iter().zip(tallies) {
        points.push(ScanPoint {
            delta,
            q: estimate_q(&tally)?,
            q_oracle: source_correlation(delta, cfg.kind, cfg.source),
            efficiency: efficiency_from_tally(&tally)?,
            moments: empirical_moments(&tally)?,
            moment_std_errors: moment_std_errors(&tally)?,
            prob_oracle: oracle_matrix(delta, cfg.kind, cfg.source),
            tally,
        });
    }
    let pooled = points
        .iter()
        .fold(CoincidenceTally::new(), |acc, p| acc.merged(&p.tally));
    Ok(ScanReport {
        config: cfg.clone(),
        pooled_efficiency: efficiency_from_tally(&pooled)?,
        oracle_efficiency: predicted_efficiencies(),
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshConfig {
    pub kind: ParticleKind,
    pub source: SourceKind,
    /// `(a, a', b, b')`, radians.
    pub angles: [f64; 4],
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChshSetting {
    pub a: f64,
    pub b: f64,
    pub tally: CoincidenceTally,
    pub q: Estimate,
    pub q_oracle: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChshReport {
    pub config: ChshConfig,
    /// Ordered `(a,b), (a,b'), (a',b), (a',b')`.
    pub settings: Vec<ChshSetting>,
    pub statistic: Estimate,
    pub oracle: f64,
}

fn chsh_combine(q: [f64; 4]) -> f64 {
    (q[0] - q[1]).abs() + (q[2] + q[3]).abs()
}

/// `|Q(a,b) - Q(a,b')| + |Q(a',b) + Q(a',b')|` on coincidence-conditioned
/// data, with both analyzers held fixed per setting.
pub fn run_chsh(cfg: &ChshConfig) -> Result<ChshReport> {
    if cfg.trials == 0 {
        return Err(Error::InvalidConfig("trials must be >= 1".into()));
    }
    let [a, a2, b, b2] = cfg.angles;
    let pairs = [(a, b), (a, b2), (a2, b), (a2, b2)];
    let tallies: Vec<CoincidenceTally> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            tally_pairs(cfg.seed, ids::CHSH, i as u64, cfg.trials, cfg.kind, cfg.source, |_| (x, y))
        })
        .collect();
    let mut settings = Vec::with_capacity(4);
    for (&(x, y), tally) in pairs.iter().zip(tallies) {
        settings.push(ChshSetting {
            a: x,
            b: y,
            q: estimate_q(&tally)?,
            q_oracle: source_correlation(x - y, cfg.kind, cfg.source),
            tally,
        });
    }
    let q = |i: usize| settings[i].q.value;
    let value = chsh_combine([q(0), q(1), q(2), q(3)]);
    let std_err = settings.iter().map(|s| s.q.std_err.powi(2)).sum::<f64>().sqrt();
    let oracle = chsh_combine([
        settings[0].q_oracle,
        settings[1].q_oracle,
        settings[2].q_oracle,
        settings[3].q_oracle,
    ]);
    Ok(ChshReport {
        config: cfg.clone(),
        settings,
        statistic: Estimate { value, std_err },
        oracle,
    })
}
