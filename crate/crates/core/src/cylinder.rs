//! Single-particle detection response of the cylinder model, plus the
//! closed-form quantities that follow from it.
//!
//! A particle carries an orientation `theta` (distance around the cylinder)
//! and a normalized half-length `ell` (distance along it). A detector rotated
//! to `angle` splits the circumference into `2n` lobes. Inside a lobe, a piece
//! is detected when `ell` lies under the rectified-sine boundary
//! `h(phi) = 1/2 + 1/2 |sin(n phi)|`; even lobes report `+1`, odd lobes `-1`,
//! and anything above the boundary is lost (`0`).

use std::f64::consts::{FRAC_1_PI, PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed in the efficiency constraints for values computed in
/// floating point (e.g. `2S - 1 == D` for the cylinder model itself).
const CONSTRAINT_EPS: f64 = 1e-12;

/// Reduce an angle to `[0, 2pi)`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid rounds tiny negative inputs up to exactly TAU
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Hidden variables of one piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HiddenState {
    theta: f64,
    ell: f64,
}

impl HiddenState {
    pub fn new(theta: f64, ell: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::Domain {
                name: "theta",
                value: theta,
                domain: "finite radians",
            });
        }
        if !(0.0..=1.0).contains(&ell) {
            return Err(Error::Domain {
                name: "ell",
                value: ell,
                domain: "[0, 1]",
            });
        }
        Ok(Self {
            theta: wrap_angle(theta),
            ell,
        })
    }

    /// Orientation in `[0, 2pi)`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Normalized half-length in `[0, 1]`.
    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// Same length, orientation replaced.
    pub fn with_theta(&self, theta: f64) -> Self {
        Self {
            theta: wrap_angle(theta),
            ell: self.ell,
        }
    }
}

/// `n = 2s`: 1 for electrons, 2 for photons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct ParticleKind(u32);

impl ParticleKind {
    pub const ELECTRON: Self = Self(1);
    pub const PHOTON: Self = Self(2);

    /// Any `n >= 1` is a valid response; experiments only use 1 and 2.
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain {
                name: "n",
                value: 0.0,
                domain: "n >= 1",
            });
        }
        Ok(Self(n))
    }

    pub fn n(self) -> u32 {
        self.0
    }

    /// `(-1)^n`
    pub fn parity(self) -> f64 {
        if self.0.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    pub fn name(self) -> &'static str {
        match self.0 {
            1 => "electron",
            2 => "photon",
            _ => "other",
        }
    }
}

impl TryFrom<u32> for ParticleKind {
    type Error = Error;
    fn try_from(n: u32) -> Result<Self> {
        Self::new(n)
    }
}

impl From<ParticleKind> for u32 {
    fn from(k: ParticleKind) -> u32 {
        k.0
    }
}

impl fmt::Display for ParticleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Analyzer orientation and the particle kind it is cut for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    angle: f64,
    kind: ParticleKind,
}

impl DetectorConfig {
    pub fn new(angle: f64, kind: ParticleKind) -> Self {
        Self {
            angle: wrap_angle(angle),
            kind,
        }
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn kind(&self) -> ParticleKind {
        self.kind
    }
}

/// Detector outcome: a trit with `0` meaning no detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8")]
pub enum Outcome {
    Minus,
    Zero,
    Plus,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Minus, Outcome::Zero, Outcome::Plus];

    pub fn value(self) -> i8 {
        match self {
            Outcome::Minus => -1,
            Outcome::Zero => 0,
            Outcome::Plus => 1,
        }
    }

    /// Row/column index into 3x3 tables, ordered `-1, 0, +1`.
    pub fn index(self) -> usize {
        match self {
            Outcome::Minus => 0,
            Outcome::Zero => 1,
            Outcome::Plus => 2,
        }
    }

    pub fn from_value(v: i8) -> Option<Self> {
        match v {
            -1 => Some(Outcome::Minus),
            0 => Some(Outcome::Zero),
            1 => Some(Outcome::Plus),
            _ => None,
        }
    }

    pub fn is_detected(self) -> bool {
        self != Outcome::Zero
    }
}

impl From<Outcome> for i8 {
    fn from(o: Outcome) -> i8 {
        o.value()
    }
}

/// Boundary height of the lobe at detector-relative angle `phi`.
pub fn lobe_height(phi: f64, kind: ParticleKind) -> f64 {
    0.5 + 0.5 * (kind.n() as f64 * phi).sin().abs()
}

/// Detection response of one detector to one piece.
///
/// Lobes are half-open (`[k pi/n, (k+1) pi/n)`) and a piece exactly on the
/// boundary height is detected.
pub fn respond(det: &DetectorConfig, state: &HiddenState) -> Outcome {
    let n = det.kind.n();
    let phi = wrap_angle(state.theta - det.angle);
    let n_phi = n as f64 * phi;
    let height = 0.5 + 0.5 * n_phi.sin().abs();
    if state.ell > height {
        return Outcome::Zero;
    }
    let lobe = ((n_phi / PI).floor() as u64) % (2 * n as u64);
    if lobe.is_multiple_of(2) {
        Outcome::Plus
    } else {
        Outcome::Minus
    }
}

fn check_unit(name: &'static str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value: x,
            domain: "[0, 1]",
        })
    }
}

/// Scallop boundary above the mid line, `f(x) = sin(pi x) / 2`.
pub fn scallop_f(x: f64) -> Result<f64> {
    check_unit("x", x)?;
    Ok(0.5 * (PI * x).sin())
}

/// Area under the scallop on `[0, x]`, `F(x) = (1 - cos pi x) / 2pi`.
pub fn scallop_area(x: f64) -> Result<f64> {
    check_unit("x", x)?;
    Ok((1.0 - (PI * x).cos()) / TAU)
}

/// Total scallop area `F(1) = 1/pi`.
pub const SCALLOP_TOTAL: f64 = FRAC_1_PI;

/// Coincidence correlation `(-1)^n cos(n delta)` for an antiparallel source.
pub fn predicted_q(delta: f64, kind: ParticleKind) -> f64 {
    kind.parity() * (kind.n() as f64 * delta).cos()
}

/// Same correlation, computed from the scallop area instead of the cosine:
/// `(-1)^n [1 - 2 F(x) / F(1)]` with `pi x = n delta` folded into `[0, pi]`.
pub fn predicted_q_from_scallop(delta: f64, kind: ParticleKind) -> f64 {
    let mut y = (kind.n() as f64 * delta).rem_euclid(TAU);
    if y > PI {
        y = TAU - y;
    }
    let x = (y / PI).clamp(0.0, 1.0);
    let area = scallop_area(x).expect("x folded into [0, 1]");
    kind.parity() * (1.0 - 2.0 * area / SCALLOP_TOTAL)
}

/// Singles, doubles and conditional detection efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyTriple {
    pub singles: f64,
    pub doubles: f64,
    pub conditional: f64,
}

impl EfficiencyTriple {
    /// Builds the triple with `C = D / S` (zero when `S == 0`).
    pub fn from_singles_doubles(singles: f64, doubles: f64) -> Self {
        let conditional = if singles > 0.0 { doubles / singles } else { 0.0 };
        Self {
            singles,
            doubles,
            conditional,
        }
    }
}

/// `S = 1/2 + 1/pi`, `D = 2/pi`, `C = 4 / (pi + 2)`.
pub fn predicted_efficiencies() -> EfficiencyTriple {
    EfficiencyTriple {
        singles: 0.5 + SCALLOP_TOTAL,
        doubles: 2.0 * SCALLOP_TOTAL,
        conditional: 4.0 / (PI + 2.0),
    }
}

/// One clause of `0 <= D <= S <= 1, 2S - 1 <= D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintClause {
    DoublesNonNegative,
    DoublesAtMostSingles,
    SinglesAtMostOne,
    SinglesAtMostHalfPlusHalfDoubles,
}

impl fmt::Display for ConstraintClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintClause::DoublesNonNegative => "0 <= D",
            ConstraintClause::DoublesAtMostSingles => "D <= S",
            ConstraintClause::SinglesAtMostOne => "S <= 1",
            ConstraintClause::SinglesAtMostHalfPlusHalfDoubles => "2S - 1 <= D",
        })
    }
}

/// Checks that `(S, D)` admit a valid joint probability matrix. The error
/// lists every violated clause.
pub fn check_constraints(singles: f64, doubles: f64) -> Result<()> {
    let mut violated = Vec::new();
    if !(doubles >= -CONSTRAINT_EPS) {
        violated.push(ConstraintClause::DoublesNonNegative);
    }
    if !(doubles <= singles + CONSTRAINT_EPS) {
        violated.push(ConstraintClause::DoublesAtMostSingles);
    }
    if !(singles <= 1.0 + CONSTRAINT_EPS) {
        violated.push(ConstraintClause::SinglesAtMostOne);
    }
    if !(2.0 * singles - 1.0 <= doubles + CONSTRAINT_EPS) {
        violated.push(ConstraintClause::SinglesAtMostHalfPlusHalfDoubles);
    }
    if violated.is_empty() {
        Ok(())
    } else {
        Err(Error::Constraint(violated))
    }
}

/// `e[mu][nu] = <A^mu B^nu>` for `mu, nu in {0, 1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentMatrix {
    pub e: [[f64; 3]; 3],
}

impl MomentMatrix {
    /// Moments implied by `(S, D, r)`.
    pub fn from_model(singles: f64, doubles: f64, r: f64) -> Self {
        Self {
            e: [
                [1.0, 0.0, singles],
                [0.0, doubles * r, 0.0],
                [singles, 0.0, doubles],
            ],
        }
    }

    pub fn get(&self, mu: usize, nu: usize) -> f64 {
        self.e[mu][nu]
    }
}

/// `p[sigma][tau] = Pr(A = sigma, B = tau)`, indexed by [`Outcome::index`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbMatrix {
    pub p: [[f64; 3]; 3],
}

impl ProbMatrix {
    /// The unique joint distribution with singles `S`, doubles `D` and
    /// coincidence correlation `r`.
    pub fn from_efficiencies(singles: f64, doubles: f64, r: f64) -> Result<Self> {
        check_constraints(singles, doubles)?;
        if !(-1.0..=1.0).contains(&r) {
            return Err(Error::Domain {
                name: "r",
                value: r,
                domain: "[-1, 1]",
            });
        }
        // entries within the constraint slack of zero are snapped to zero
        let nonneg = |x: f64| if x < 0.0 && x > -CONSTRAINT_EPS { 0.0 } else { x };
        let same = nonneg(doubles * (1.0 + r) / 4.0);
        let opposite = nonneg(doubles * (1.0 - r) / 4.0);
        let edge = nonneg((singles - doubles) / 2.0);
        let center = nonneg(1.0 + doubles - 2.0 * singles);
        Ok(Self {
            p: [
                [same, edge, opposite],
                [edge, center, edge],
                [opposite, edge, same],
            ],
        })
    }

    pub fn get(&self, a: Outcome, b: Outcome) -> f64 {
        self.p[a.index()][b.index()]
    }

    pub fn total(&self) -> f64 {
        self.p.iter().flatten().sum()
    }
}

/// Joint outcome probabilities of the cylinder model for an antiparallel
/// source at relative angle `delta`.
pub fn predicted_prob_matrix(delta: f64, kind: ParticleKind) -> ProbMatrix {
    let eff = predicted_efficiencies();
    ProbMatrix::from_efficiencies(eff.singles, eff.doubles, predicted_q(delta, kind))
        .expect("cylinder model efficiencies satisfy the constraints")
}
