//! Coincidence tallies, moment and efficiency estimators, and the linear
//! least-squares sinusoid fit used for fringe visibility.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::cylinder::{wrap_angle, EfficiencyTriple, MomentMatrix, Outcome};
use crate::error::{Error, Result};

/// Joint outcome counts for one setting pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoincidenceTally {
    /// `counts[a.index()][b.index()]`
    pub counts: [[u64; 3]; 3],
    pub trials: u64,
}

impl CoincidenceTally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, a: Outcome, b: Outcome) {
        self.counts[a.index()][b.index()] += 1;
        self.trials += 1;
    }

    pub fn merge(&mut self, other: &CoincidenceTally) {
        for (row, orow) in self.counts.iter_mut().zip(other.counts.iter()) {
            for (c, o) in row.iter_mut().zip(orow.iter()) {
                *c += *o;
            }
        }
        self.trials += other.trials;
    }

    pub fn merged(mut self, other: &CoincidenceTally) -> Self {
        self.merge(other);
        self
    }

    pub fn count(&self, a: Outcome, b: Outcome) -> u64 {
        self.counts[a.index()][b.index()]
    }

    /// Trials where both sides fired.
    pub fn coincidences(&self) -> u64 {
        use Outcome::*;
        self.count(Plus, Plus) + self.count(Plus, Minus) + self.count(Minus, Plus) + self.count(Minus, Minus)
    }

    pub fn frequency(&self, a: Outcome, b: Outcome) -> Result<f64> {
        if self.trials == 0 {
            return Err(Error::UndefinedEstimate("tally has no trials"));
        }
        Ok(self.count(a, b) as f64 / self.trials as f64)
    }
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

fn binomial(successes: u64, n: u64) -> Estimate {
    let p = successes as f64 / n as f64;
    Estimate {
        value: p,
        std_err: (p * (1.0 - p) / n as f64).sqrt(),
    }
}

/// `sigma^mu` with `0^0 = 1`.
fn trit_power(v: i8, mu: usize) -> f64 {
    match mu {
        0 => 1.0,
        _ => (v as f64).powi(mu as i32),
    }
}

/// `e[mu][nu] = sum sigma^mu tau^nu counts[sigma][tau] / trials`.
pub fn empirical_moments(t: &CoincidenceTally) -> Result<MomentMatrix> {
    if t.trials == 0 {
        return Err(Error::UndefinedEstimate("moments of an empty tally"));
    }
    let mut e = [[0.0; 3]; 3];
    for (mu, row) in e.iter_mut().enumerate() {
        for (nu, cell) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for a in Outcome::ALL {
                for b in Outcome::ALL {
                    acc += trit_power(a.value(), mu) * trit_power(b.value(), nu) * t.count(a, b) as f64;
                }
            }
            *cell = acc / t.trials as f64;
        }
    }
    Ok(MomentMatrix { e })
}

/// Standard error of each entry of [`empirical_moments`]. Trit powers
/// satisfy `x^4 = x^2`, so the second moment of `A^mu B^nu` is itself an
/// entry of the moment matrix.
pub fn moment_std_errors(t: &CoincidenceTally) -> Result<[[f64; 3]; 3]> {
    let m = empirical_moments(t)?;
    let sq = |mu: usize| if mu == 0 { 0 } else { 2 };
    let mut se = [[0.0; 3]; 3];
    for (mu, row) in se.iter_mut().enumerate() {
        for (nu, cell) in row.iter_mut().enumerate() {
            let mean = m.e[mu][nu];
            let var = (m.e[sq(mu)][sq(nu)] - mean * mean).max(0.0);
            *cell = (var / t.trials as f64).sqrt();
        }
    }
    Ok(se)
}

/// Coincidence correlation: the ± product averaged over trials where both
/// sides fired.
pub fn estimate_q(t: &CoincidenceTally) -> Result<Estimate> {
    use Outcome::*;
    let same = t.count(Plus, Plus) + t.count(Minus, Minus);
    let n = t.coincidences();
    if n == 0 {
        return Err(Error::UndefinedEstimate("no coincidences"));
    }
    let p = binomial(same, n);
    Ok(Estimate {
        value: 2.0 * p.value - 1.0,
        std_err: 2.0 * p.std_err,
    })
}

/// Estimated singles (each side and averaged), doubles and conditional
/// efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyEstimate {
    pub singles_a: Estimate,
    pub singles_b: Estimate,
    pub singles: Estimate,
    pub doubles: Estimate,
    pub conditional: Estimate,
}

impl EfficiencyEstimate {
    pub fn triple(&self) -> EfficiencyTriple {
        EfficiencyTriple {
            singles: self.singles.value,
            doubles: self.doubles.value,
            conditional: self.conditional.value,
        }
    }
}

pub fn efficiency_from_tally(t: &CoincidenceTally) -> Result<EfficiencyEstimate> {
    let n = t.trials;
    if n == 0 {
        return Err(Error::UndefinedEstimate("efficiency of an empty tally"));
    }
    let zero = Outcome::Zero.index();
    let miss_a: u64 = t.counts[zero].iter().sum();
    let miss_b: u64 = t.counts.iter().map(|row| row[zero]).sum();
    let singles_a = binomial(n - miss_a, n);
    let singles_b = binomial(n - miss_b, n);
    let singles = Estimate {
        value: 0.5 * (singles_a.value + singles_b.value),
        std_err: 0.5 * (singles_a.std_err.powi(2) + singles_b.std_err.powi(2)).sqrt(),
    };
    let doubles = binomial(t.coincidences(), n);
    let conditional = if singles.value > 0.0 {
        let c = doubles.value / singles.value;
        let trials_given = singles.value * n as f64;
        Estimate {
            value: c,
            std_err: (c * (1.0 - c) / trials_given).max(0.0).sqrt(),
        }
    } else {
        Estimate {
            value: 0.0,
            std_err: 0.0,
        }
    };
    Ok(EfficiencyEstimate {
        singles_a,
        singles_b,
        singles,
        doubles,
        conditional,
    })
}

/// `y(theta) ~ offset + cos_coef cos(k theta) + sin_coef sin(k theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineFit {
    pub offset: f64,
    pub cos_coef: f64,
    pub sin_coef: f64,
    pub frequency: f64,
    pub rms: f64,
}

impl SineFit {
    pub fn eval(&self, theta: f64) -> f64 {
        let (s, c) = (self.frequency * theta).sin_cos();
        self.offset + self.cos_coef * c + self.sin_coef * s
    }

    pub fn amplitude(&self) -> f64 {
        self.cos_coef.hypot(self.sin_coef)
    }
}

fn distinct_phases(points: &[(f64, f64)], k: f64) -> usize {
    let mut phases: Vec<f64> = points.iter().map(|&(x, _)| wrap_angle(k * x)).collect();
    phases.sort_by(|a, b| a.total_cmp(b));
    let close = |a: f64, b: f64| {
        let d = (a - b).abs();
        d.min(TAU - d) < 1e-9
    };
    let mut distinct = 0;
    for (i, &p) in phases.iter().enumerate() {
        if i == 0 || !close(p, phases[i - 1]) {
            distinct += 1;
        }
    }
    if distinct > 1 && close(phases[0], phases[phases.len() - 1]) {
        distinct -= 1;
    }
    distinct
}

/// Solves a 3x3 system by Gaussian elimination with partial pivoting.
fn solve3(mut m: [[f64; 3]; 3], mut rhs: [f64; 3]) -> Option<[f64; 3]> {
    let scale = m.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for c in col..3 {
                m[row][c] -= f * m[col][c];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|c| m[row][c] * x[c]).sum();
        x[row] = (rhs[row] - tail) / m[row][row];
    }
    Some(x)
}

/// Unweighted linear least squares on the basis `{1, cos k theta, sin k theta}`.
pub fn sine_fit(points: &[(f64, f64)], k: f64) -> Result<SineFit> {
    if points.is_empty() {
        return Err(Error::RankDeficient { distinct: 0 });
    }
    let distinct = distinct_phases(points, k);
    if distinct < 3 {
        return Err(Error::RankDeficient { distinct });
    }
    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for &(theta, y) in points {
        let (s, c) = (k * theta).sin_cos();
        let row = [1.0, c, s];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            aty[i] += row[i] * y;
        }
    }
    let [offset, cos_coef, sin_coef] =
        solve3(ata, aty).ok_or(Error::RankDeficient { distinct })?;
    let mut fit = SineFit {
        offset,
        cos_coef,
        sin_coef,
        frequency: k,
        rms: 0.0,
    };
    let sse: f64 = points.iter().map(|&(x, y)| (y - fit.eval(x)).powi(2)).sum();
    fit.rms = (sse / points.len() as f64).sqrt();
    Ok(fit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VisibilityMethod {
    /// `sqrt(c1^2 + c2^2) / c0` of a sinusoid fit.
    Fit,
    /// `(max - min) / (max + min)` of discrete samples.
    Extremal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityResult {
    pub visibility: f64,
    pub method: VisibilityMethod,
}

pub fn visibility_from_fit(fit: &SineFit) -> Result<VisibilityResult> {
    if !(fit.offset > 0.0) {
        return Err(Error::UndefinedEstimate("fit offset must be positive"));
    }
    Ok(VisibilityResult {
        visibility: fit.amplitude() / fit.offset,
        method: VisibilityMethod::Fit,
    })
}

pub fn visibility_extremal(values: &[f64]) -> Result<VisibilityResult> {
    if values.is_empty() {
        return Err(Error::EmptySeries);
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max + min > 0.0) {
        return Err(Error::UndefinedEstimate("max + min must be positive"));
    }
    Ok(VisibilityResult {
        visibility: (max - min) / (max + min),
        method: VisibilityMethod::Extremal,
    })
}

/// Sample mean and (n - 1) standard deviation.
pub fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}
