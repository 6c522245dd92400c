//! CSV tables. Floats carry 17 significant digits so every value
//! round-trips exactly.

use cylsim::experiments::{ChshReport, GhzReport, PbwzReport, ScanReport};
use cylsim::Outcome::{Minus, Plus, Zero};

pub const BIPARTITE_HEADER: &str = "delta_rad,n_pp,n_pm,n_mp,n_mm,n_p0,n_0p,n_m0,n_0m,n_00,q_hat,q_se,q_oracle,s_hat,d_hat,c_hat";

/// Round-trip-safe float formatting.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn bipartite(report: &ScanReport) -> String {
    let mut out = String::from(BIPARTITE_HEADER);
    out.push('\n');
    for p in &report.points {
        let t = &p.tally;
        let counts = [
            t.count(Plus, Plus),
            t.count(Plus, Minus),
            t.count(Minus, Plus),
            t.count(Minus, Minus),
            t.count(Plus, Zero),
            t.count(Zero, Plus),
            t.count(Minus, Zero),
            t.count(Zero, Minus),
            t.count(Zero, Zero),
        ];
        let mut row = vec![num(p.delta)];
        row.extend(counts.iter().map(|c| c.to_string()));
        row.extend(
            [
                p.q.value,
                p.q.std_err,
                p.q_oracle,
                p.efficiency.singles.value,
                p.efficiency.doubles.value,
                p.efficiency.conditional.value,
            ]
            .iter()
            .map(|&x| num(x)),
        );
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn chsh(report: &ChshReport) -> String {
    let mut out = String::from("a_rad,b_rad,n_pp,n_pm,n_mp,n_mm,coincidences,q_hat,q_se,q_oracle\n");
    for s in &report.settings {
        let t = &s.tally;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            num(s.a),
            num(s.b),
            t.count(Plus, Plus),
            t.count(Plus, Minus),
            t.count(Minus, Plus),
            t.count(Minus, Minus),
            t.coincidences(),
            num(s.q.value),
            num(s.q.std_err),
            num(s.q_oracle),
        ));
    }
    out
}

pub fn swap(report: &PbwzReport) -> String {
    let mut out = String::from("theta_rad,accepted,plus_mean,plus_sd,minus_mean,minus_sd,plus_fit,minus_fit\n");
    for p in &report.points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            num(p.theta),
            p.accepted,
            num(p.plus_mean),
            num(p.plus_sd),
            num(p.minus_mean),
            num(p.minus_sd),
            num(report.plus_fit.eval(p.theta)),
            num(report.minus_fit.eval(p.theta)),
        ));
    }
    out
}

pub fn ghz(report: &GhzReport) -> String {
    let mut out = String::from("setting,p1,p2,p3,p4,groups,pbs_coincidences,fourfold\n");
    for r in report.hv_table.iter().chain(report.diagonal.iter()) {
        let [a, b, c, d] = r.settings;
        out.push_str(&format!(
            "{},{a},{b},{c},{d},{},{},{}\n",
            r.label, r.groups, r.pbs_coincidences, r.fourfold
        ));
    }
    out
}
