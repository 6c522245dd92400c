//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

#[path = "../../core/tests/support/quadrature.rs"]
#[allow(dead_code)]
mod quadrature;

use std::f64::consts::{PI, SQRT_2};
use std::fs;
use std::process::ExitCode;

use cylsim::experiments::{
    run_bipartite_scan, run_chsh, run_ghz_suite, run_pbwz, BsmAcceptance, ChshConfig, PbwzConfig,
    ScanConfig, ScanReport,
};
use cylsim::{
    predicted_efficiencies, predicted_prob_matrix, predicted_q, predicted_q_from_scallop,
    Outcome, ParticleKind, SourceKind,
};

const SEED: u64 = 42;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn scan(kind: ParticleKind, trials: u64) -> ScanReport {
    let period = 2.0 * PI / kind.n() as f64;
    let cfg = ScanConfig {
        kind,
        source: SourceKind::AntiparallelSinglet,
        angles: (0..25).map(|i| period * i as f64 / 24.0).collect(),
        trials,
        seed: SEED,
    };
    run_bipartite_scan(&cfg).expect("scan runs")
}

fn max_q_error(r: &ScanReport, expected: impl Fn(f64) -> f64) -> f64 {
    r.points
        .iter()
        .map(|p| (p.q.value - expected(p.delta)).abs())
        .fold(0.0, f64::max)
}

fn criterion_1(photon: &ScanReport, electron: &ScanReport) -> Verdict {
    let ep = max_q_error(photon, |d| (2.0 * d).cos());
    let ee = max_q_error(electron, |d| -d.cos());
    verdict(
        ep <= 0.01 && ee <= 0.01,
        format!("photon max|Q-cos2d| = {ep:.4}, electron max|Q+cosd| = {ee:.4} (tol 0.01)"),
    )
}

#[allow(clippy::approx_constant)]
fn criterion_2(photon: &ScanReport) -> Verdict {
    let e = &photon.pooled_efficiency;
    let close = |x: f64, t: f64| (x - t).abs() <= 0.003;
    let pooled = close(e.singles.value, 0.8183)
        && close(e.doubles.value, 0.6366)
        && close(e.conditional.value, 0.7785);
    let mut worst: f64 = 0.0;
    for p in &photon.points {
        for (x, pool) in [
            (p.efficiency.singles, e.singles.value),
            (p.efficiency.doubles, e.doubles.value),
        ] {
            worst = worst.max((x.value - pool).abs() / x.std_err);
        }
    }
    verdict(
        pooled && worst <= 4.0,
        format!(
            "S = {:.4}, D = {:.4}, C = {:.4}; per-angle max deviation {worst:.2} se",
            e.singles.value, e.doubles.value, e.conditional.value
        ),
    )
}

fn criterion_3(reports: &[&ScanReport]) -> Verdict {
    let mut worst: f64 = 0.0;
    for r in reports {
        for p in &r.points {
            let m = &p.moments.e;
            for v in [m[1][0], m[0][1], m[1][2], m[2][1]] {
                worst = worst.max(v.abs());
            }
        }
    }
    verdict(worst <= 0.004, format!("max odd moment {worst:.5} (tol 0.004)"))
}

fn criterion_4(reports: &[&ScanReport]) -> Verdict {
    let mut worst: f64 = 0.0;
    let mut center: f64 = 0.0;
    for r in reports {
        for p in &r.points {
            let model = predicted_prob_matrix(p.delta, r.config.kind);
            for a in Outcome::ALL {
                for b in Outcome::ALL {
                    let f = p.tally.frequency(a, b).expect("trials > 0");
                    worst = worst.max((f - model.get(a, b)).abs());
                }
            }
            let f = p.tally.frequency(Outcome::Zero, Outcome::Zero).expect("trials > 0");
            center = center.max(f.abs());
        }
    }
    verdict(
        worst <= 0.005 && center <= 0.002,
        format!("max cell error {worst:.5} (tol 0.005), center {center:.5} (tol 0.002)"),
    )
}

fn criterion_5() -> Verdict {
    let d = |x: f64| x.to_radians();
    let cfg = ChshConfig {
        kind: ParticleKind::PHOTON,
        source: SourceKind::AntiparallelSinglet,
        angles: [d(0.0), d(45.0), d(22.5), d(67.5)],
        trials: 1_000_000,
        seed: SEED,
    };
    let r = run_chsh(&cfg).expect("chsh runs");
    let s = r.statistic.value;
    verdict(
        (s - 2.0 * SQRT_2).abs() <= 0.02,
        format!("S_CHSH = {s:.4} +- {:.4} (target 2.828 +- 0.02)", r.statistic.std_err),
    )
}

fn criterion_6() -> Verdict {
    let cfg = PbwzConfig {
        seed: SEED,
        ..PbwzConfig::default()
    };
    let r = run_pbwz(&cfg).expect("swap runs");
    let (vp, vm) = (r.plus_visibility.visibility, r.minus_visibility.visibility);
    // complementary: the two fringes are out of phase
    let anti = r.plus_fit.cos_coef * r.minus_fit.cos_coef + r.plus_fit.sin_coef * r.minus_fit.sin_coef < 0.0;
    let off = run_pbwz(&PbwzConfig {
        acceptance: BsmAcceptance::Off,
        ..cfg.clone()
    })
    .expect("control runs");
    let voff = off.plus_visibility.visibility.max(off.minus_visibility.visibility);
    let ok = (vp - 0.707).abs() <= 0.03 && (vm - 0.707).abs() <= 0.03 && anti && voff <= 0.05;
    verdict(
        ok,
        format!(
            "{} angles, V+ = {vp:.4}, V- = {vm:.4}, complementary = {anti}; control V = {voff:.4} (tol 0.05)",
            cfg.detector4_angles.len()
        ),
    )
}

fn criterion_7() -> Verdict {
    let r = run_ghz_suite(100_000, SEED).expect("ghz runs");
    let count = |label: &str| {
        r.hv_table
            .iter()
            .chain(r.diagonal.iter())
            .find(|x| x.label == label)
            .map(|x| x.fourfold)
            .unwrap_or_else(|| panic!("missing row {label}"))
    };
    let forbidden: u64 = r
        .hv_table
        .iter()
        .filter(|x| x.label != "HVVH" && x.label != "VHHV")
        .map(|x| x.fourfold)
        .sum();
    let (a, b) = (count("HVVH") as f64, count("VHHV") as f64);
    let balanced = (a - b).abs() <= 4.0 * (a + b).sqrt();
    let plus = r.diagonal[0].fourfold;
    let minus = r.diagonal[1].fourfold;
    let vis = r.visibility.map(|v| v.visibility);
    let ok = r.hv_table.len() == 16
        && forbidden == 0
        && a > 0.0
        && b > 0.0
        && balanced
        && plus > 0
        && minus == 0
        && vis == Some(1.0);
    verdict(
        ok,
        format!(
            "14 excluded settings total {forbidden}; HVVH {a} VHHV {b}; {} = {plus}, {} = {minus}; V = {vis:?}",
            r.diagonal[0].label, r.diagonal[1].label
        ),
    )
}

fn criterion_8() -> Verdict {
    let eff = predicted_efficiencies();
    let mut worst: f64 = 0.0;
    for kind in [ParticleKind::PHOTON, ParticleKind::ELECTRON] {
        let (m1, m2) = quadrature::single_moments(kind, 0.3, quadrature::GRID);
        worst = worst.max(m1.abs()).max((m2 - eff.singles).abs());
        for delta in [0.0, 0.4, 1.1] {
            let p = quadrature::pair_probabilities(kind, PI, delta, quadrature::GRID);
            let (ab, dd) = quadrature::product_moments(&p);
            worst = worst
                .max((dd - eff.doubles).abs())
                .max((ab / dd - predicted_q(delta, kind)).abs())
                .max((dd / m2 - eff.conditional).abs());
        }
    }
    let mut identity: f64 = 0.0;
    for kind in [ParticleKind::PHOTON, ParticleKind::ELECTRON] {
        for i in 0..=720 {
            let delta = -2.0 * PI + 4.0 * PI * i as f64 / 720.0;
            identity = identity
                .max((predicted_q_from_scallop(delta, kind) - predicted_q(delta, kind)).abs());
        }
    }
    verdict(
        worst <= 1e-3 && identity <= 1e-12,
        format!("quadrature max error {worst:.2e} (tol 1e-3), scallop identity {identity:.1e} (tol 1e-12)"),
    )
}

fn criterion_9() -> Verdict {
    let tmp = tempfile::tempdir().expect("tempdir");
    let runs: [(&str, &[&str]); 3] = [
        ("bipartite", &["--trials", "200000", "--angles", "7"]),
        ("swap", &["--groups", "300", "--reps", "8"]),
        ("ghz", &["--groups", "20000"]),
    ];
    let mut mismatched = Vec::new();
    for (cmd, extra) in runs {
        let mut outputs = Vec::new();
        for threads in ["1", "4", "16"] {
            let dir = tmp.path().join(format!("{cmd}-{threads}"));
            let mut args = vec!["cylsim", cmd, "--seed", "7", "--threads", threads];
            args.extend_from_slice(extra);
            args.extend(["--out", dir.to_str().expect("utf-8 path")]);
            cylsim_cli::run_from_args(args).expect("cli run");
            outputs.push(fs::read(dir.join(format!("{cmd}.csv"))).expect("csv written"));
        }
        if outputs.iter().any(|o| o != &outputs[0]) {
            mismatched.push(cmd);
        }
    }
    verdict(
        mismatched.is_empty(),
        format!("bipartite/swap/ghz CSVs with 1, 4, 16 workers; mismatched: {mismatched:?}"),
    )
}

fn main() -> ExitCode {
    let photon = scan(ParticleKind::PHOTON, 1_000_000);
    let electron = scan(ParticleKind::ELECTRON, 1_000_000);
    let results = [
        ("1 bipartite correlation", criterion_1(&photon, &electron)),
        ("2 efficiencies", criterion_2(&photon)),
        ("3 moment structure", criterion_3(&[&photon, &electron])),
        ("4 probability matrix", criterion_4(&[&photon, &electron])),
        ("5 chsh", criterion_5()),
        ("6 entanglement swapping", criterion_6()),
        ("7 ghz", criterion_7()),
        ("8 oracle equivalence", criterion_8()),
        ("9 determinism", criterion_9()),
    ];
    let mut failed = 0;
    for (name, v) in &results {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {name}: {}", v.detail);
        failed += usize::from(!v.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
