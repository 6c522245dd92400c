//! Mechanical four-piece GHZ setup.
//!
//! Two sources each emit an orthogonal pair: pieces 1 and 2 from the left
//! source, 3 and 4 from the right one. Pieces 2 and 3 pass a polarizing beam
//! splitter that is duplicated per piece: the transmitted output of piece 2
//! and the reflected output of piece 3 share polarizer `P3`, the reflected
//! output of 2 and the transmitted output of 3 share `P2`. A group counts when
//! 2 and 3 leave the splitter through the same kind of port and all four
//! polarizers detect their piece.
//!
//! Pieces 2 and 4 travel against the frame of their partners and are read in
//! the mirrored partner frame before routing and analysis.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::{blocks, ids};
use crate::cylinder::{lobe_height, respond, wrap_angle, DetectorConfig, HiddenState, Outcome, ParticleKind};
use crate::error::{Error, Result};
use crate::source::{emit_quad, RngStream, SourceKind, StreamKey};
use crate::stats::{visibility_extremal, VisibilityResult};

/// Pieces (1-based) read in the mirrored partner frame.
pub const FLIPPED_PIECES: [usize; 2] = [2, 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Polarizer {
    H,
    V,
    #[serde(rename = "+45")]
    Plus45,
    #[serde(rename = "-45")]
    Minus45,
}

impl Polarizer {
    pub const ALL: [Polarizer; 4] = [Polarizer::H, Polarizer::V, Polarizer::Plus45, Polarizer::Minus45];

    pub fn axis(self) -> f64 {
        match self {
            Polarizer::H => 0.0,
            Polarizer::V => FRAC_PI_2,
            Polarizer::Plus45 => FRAC_PI_4,
            Polarizer::Minus45 => -FRAC_PI_4,
        }
    }

    fn code(self) -> u64 {
        match self {
            Polarizer::H => 0,
            Polarizer::V => 1,
            Polarizer::Plus45 => 2,
            Polarizer::Minus45 => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Polarizer::H => "H",
            Polarizer::V => "V",
            Polarizer::Plus45 => "+45",
            Polarizer::Minus45 => "-45",
        }
    }
}

impl fmt::Display for Polarizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Polarizer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" | "h" => Ok(Polarizer::H),
            "V" | "v" => Ok(Polarizer::V),
            "+45" | "45" => Ok(Polarizer::Plus45),
            "-45" => Ok(Polarizer::Minus45),
            other => Err(Error::InvalidConfig(format!("unknown polarizer `{other}`"))),
        }
    }
}

/// Polarizer seen by each splitter output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Wiring {
    pub p2_transmitted: Polarizer,
    pub p2_reflected: Polarizer,
    pub p3_transmitted: Polarizer,
    pub p3_reflected: Polarizer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GhzConfig {
    settings: [Polarizer; 4],
    groups: u64,
    seed: u64,
}

impl GhzConfig {
    pub fn new(settings: [Polarizer; 4], groups: u64, seed: u64) -> Result<Self> {
        if groups == 0 {
            return Err(Error::InvalidConfig("groups must be >= 1".into()));
        }
        Ok(Self {
            settings,
            groups,
            seed,
        })
    }

    pub fn settings(&self) -> [Polarizer; 4] {
        self.settings
    }

    pub fn groups(&self) -> u64 {
        self.groups
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `P2' = P3'' = P3` and `P2'' = P3' = P2`.
    pub fn wiring(&self) -> Wiring {
        let [_, p2, p3, _] = self.settings;
        Wiring {
            p2_transmitted: p3,
            p2_reflected: p2,
            p3_transmitted: p2,
            p3_reflected: p3,
        }
    }

    pub fn label(&self) -> String {
        let s = self.settings;
        if s.iter().all(|p| matches!(p, Polarizer::H | Polarizer::V)) {
            s.iter().map(|p| p.label()).collect()
        } else {
            format!("({},{},{},{})", s[0], s[1], s[2], s[3])
        }
    }

    fn setting_index(&self) -> u64 {
        self.settings.iter().fold(0, |acc, p| acc * 4 + p.code())
    }
}

/// Splitter output port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PbsChannel {
    /// Horizontal class, `theta mod pi` in `[-pi/4, pi/4)`.
    Transmitted,
    /// Vertical class.
    Reflected,
}

/// Routes a piece through the splitter, or `None` when it is too long to
/// pass the gate at the splitter axis.
pub fn pbs_route(state: &HiddenState) -> Option<PbsChannel> {
    let gate = lobe_height(state.theta(), ParticleKind::PHOTON);
    if state.ell() > gate {
        return None;
    }
    // reduce mod pi into [-pi/4, 3pi/4)
    let psi = (state.theta() + FRAC_PI_4).rem_euclid(PI) - FRAC_PI_4;
    if psi < FRAC_PI_4 {
        Some(PbsChannel::Transmitted)
    } else {
        Some(PbsChannel::Reflected)
    }
}

/// Orientation as seen from a counter-propagating partner's right-handed
/// frame.
pub fn partner_view(theta: f64) -> f64 {
    wrap_angle(-theta)
}

/// Single-channel polarizer: the `+` lobe of a photon detector, rotated so
/// the lobe is centred on the polarizer axis.
pub fn polarizer_passes(polarizer: Polarizer, state: &HiddenState) -> bool {
    let det = DetectorConfig::new(polarizer.axis() - FRAC_PI_4, ParticleKind::PHOTON);
    respond(&det, state) == Outcome::Plus
}

#[derive(Debug, Clone, Serialize)]
pub struct GhzResult {
    pub label: String,
    pub settings: [Polarizer; 4],
    pub groups: u64,
    pub fourfold: u64,
    /// Groups where pieces 2 and 3 left through the same kind of port.
    pub pbs_coincidences: u64,
    /// Per-piece polarizer detections among those coincidences.
    pub singles: [u64; 4],
}

#[derive(Debug, Default, Clone, Copy)]
struct Counts {
    fourfold: u64,
    coincidences: u64,
    singles: [u64; 4],
}

fn run_block(cfg: &GhzConfig, block: u64, groups: u64) -> Counts {
    let [p1, _, _, p4] = cfg.settings;
    let wiring = cfg.wiring();
    let mut rng = RngStream::new(cfg.seed, StreamKey::new(ids::GHZ, cfg.setting_index(), block));
    let mut counts = Counts::default();
    for _ in 0..groups {
        let [s1, s2, s3, s4] = emit_quad(&mut rng, SourceKind::OrthogonalPdc);
        let s2 = s2.with_theta(partner_view(s2.theta()));
        let s4 = s4.with_theta(partner_view(s4.theta()));
        let (Some(r2), Some(r3)) = (pbs_route(&s2), pbs_route(&s3)) else {
            continue;
        };
        if r2 != r3 {
            continue;
        }
        counts.coincidences += 1;
        let pol2 = match r2 {
            PbsChannel::Transmitted => wiring.p2_transmitted,
            PbsChannel::Reflected => wiring.p2_reflected,
        };
        let pol3 = match r3 {
            PbsChannel::Transmitted => wiring.p3_transmitted,
            PbsChannel::Reflected => wiring.p3_reflected,
        };
        let hits = [
            polarizer_passes(p1, &s1),
            polarizer_passes(pol2, &s2),
            polarizer_passes(pol3, &s3),
            polarizer_passes(p4, &s4),
        ];
        for (s, &h) in counts.singles.iter_mut().zip(hits.iter()) {
            *s += h as u64;
        }
        if hits.iter().all(|&h| h) {
            counts.fourfold += 1;
        }
    }
    counts
}

pub fn run_ghz(cfg: &GhzConfig) -> GhzResult {
    let cells: Vec<(u64, u64)> = blocks(cfg.groups).collect();
    let parts: Vec<Counts> = cells
        .par_iter()
        .map(|&(block, n)| run_block(cfg, block, n))
        .collect();
    let mut total = Counts::default();
    for p in &parts {
        total.fourfold += p.fourfold;
        total.coincidences += p.coincidences;
        for (t, s) in total.singles.iter_mut().zip(p.singles.iter()) {
            *t += s;
        }
    }
    GhzResult {
        label: cfg.label(),
        settings: cfg.settings,
        groups: cfg.groups,
        fourfold: total.fourfold,
        pbs_coincidences: total.coincidences,
        singles: total.singles,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GhzReport {
    pub groups: u64,
    pub seed: u64,
    /// All 16 H/V settings, `P1` most significant, H before V.
    pub hv_table: Vec<GhzResult>,
    /// `(+45,+45,+45,+45)` then `(+45,+45,+45,-45)`.
    pub diagonal: Vec<GhzResult>,
    /// `None` when neither diagonal setting produced a fourfold.
    pub visibility: Option<VisibilityResult>,
    pub flipped_pieces: [usize; 2],
}

/// The 16 H/V settings followed by the two diagonal settings.
pub fn run_ghz_suite(groups: u64, seed: u64) -> Result<GhzReport> {
    use Polarizer::*;
    let mut configs = Vec::with_capacity(18);
    for code in 0..16u32 {
        let pick = |bit: u32| if code & (1 << (3 - bit)) == 0 { H } else { V };
        configs.push(GhzConfig::new([pick(0), pick(1), pick(2), pick(3)], groups, seed)?);
    }
    configs.push(GhzConfig::new([Plus45; 4], groups, seed)?);
    configs.push(GhzConfig::new([Plus45, Plus45, Plus45, Minus45], groups, seed)?);

    let mut results: Vec<GhzResult> = configs.par_iter().map(run_ghz).collect();
    let diagonal = results.split_off(16);
    let visibility =
        visibility_extremal(&[diagonal[0].fourfold as f64, diagonal[1].fourfold as f64]).ok();
    Ok(GhzReport {
        groups,
        seed,
        hv_table: results,
        diagonal,
        visibility,
        flipped_pieces: FLIPPED_PIECES,
    })
}
