//! Brute-force midpoint quadrature of the detector response over the uniform
//! `(theta, ell)` square. Shares nothing with the Monte Carlo path or the
//! closed forms except `respond` itself.

use std::f64::consts::TAU;

use cylsim::{respond, DetectorConfig, HiddenState, Outcome, ParticleKind};
use rayon::prelude::*;

pub const GRID: usize = 4096;

fn midpoint(i: usize, n: usize) -> f64 {
    (i as f64 + 0.5) / n as f64
}

/// `(<A>, <A^2>)` of one detector at `angle`.
pub fn single_moments(kind: ParticleKind, angle: f64, grid: usize) -> (f64, f64) {
    let det = DetectorConfig::new(angle, kind);
    let (m1, m2) = (0..grid)
        .into_par_iter()
        .map(|i| {
            let theta = TAU * midpoint(i, grid);
            let mut m1 = 0i64;
            let mut m2 = 0i64;
            for j in 0..grid {
                let s = HiddenState::new(theta, midpoint(j, grid)).unwrap();
                let v = respond(&det, &s).value() as i64;
                m1 += v;
                m2 += v * v;
            }
            (m1, m2)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let cells = (grid * grid) as f64;
    (m1 as f64 / cells, m2 as f64 / cells)
}

/// Joint outcome probabilities for pairs `(theta, ell)` and
/// `(theta + offset, 1 - ell)` analysed at `a = 0` and `b = -delta`.
pub fn pair_probabilities(kind: ParticleKind, offset: f64, delta: f64, grid: usize) -> [[f64; 3]; 3] {
    let det_a = DetectorConfig::new(0.0, kind);
    let det_b = DetectorConfig::new(-delta, kind);
    let counts = (0..grid)
        .into_par_iter()
        .map(|i| {
            let theta = TAU * midpoint(i, grid);
            let mut c = [[0u64; 3]; 3];
            for j in 0..grid {
                let ell = midpoint(j, grid);
                let a = respond(&det_a, &HiddenState::new(theta, ell).unwrap());
                let b = respond(&det_b, &HiddenState::new(theta + offset, 1.0 - ell).unwrap());
                c[a.index()][b.index()] += 1;
            }
            c
        })
        .reduce(
            || [[0u64; 3]; 3],
            |mut x, y| {
                for r in 0..3 {
                    for s in 0..3 {
                        x[r][s] += y[r][s];
                    }
                }
                x
            },
        );
    let cells = (grid * grid) as f64;
    counts.map(|row| row.map(|c| c as f64 / cells))
}

/// `(<AB>, <A^2 B^2>)` from a joint probability table.
pub fn product_moments(p: &[[f64; 3]; 3]) -> (f64, f64) {
    let mut ab = 0.0;
    let mut dd = 0.0;
    for a in Outcome::ALL {
        for b in Outcome::ALL {
            let w = p[a.index()][b.index()];
            let prod = (a.value() * b.value()) as f64;
            ab += prod * w;
            dd += prod * prod * w;
        }
    }
    (ab, dd)
}
