//! Deterministic report rendering.
//!
//! JSON objects serialize with alphabetically ordered keys (serde_json's
//! default map is a BTreeMap) and every real number is rounded to 12
//! significant digits before encoding, so identical configurations produce
//! byte-identical reports.

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use regionstate::density::DensityOperator;
use regionstate::lattice::Hypersurface;
use regionstate::regions::{ConsistencyReport, HierarchyReport};
use regionstate::scenarios::Check;

/// Round to 12 significant digits; normalizes negative zero.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return 0.0_f64.max(x); // maps -0.0 to 0.0, keeps inf/nan visible
    }
    let magnitude = x.abs().log10().floor();
    let factor = 10f64.powf(11.0 - magnitude);
    (x * factor).round() / factor
}

pub fn num(x: f64) -> Value {
    json!(round_sig(x))
}

pub fn complex(c: Complex64) -> Value {
    json!([round_sig(c.re), round_sig(c.im)])
}

pub fn matrix(m: &nalgebra::DMatrix<Complex64>) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|r| Value::Array((0..m.ncols()).map(|c| complex(m[(r, c)])).collect()))
        .collect();
    Value::Array(rows)
}

pub fn density(d: &DensityOperator) -> Value {
    json!({
        "dim": d.dim(),
        "matrix": matrix(d.matrix()),
    })
}

pub fn surface(sigma: &Hypersurface) -> Value {
    Value::Array(sigma.cut().iter().map(|&v| json!(v)).collect())
}

pub fn check(c: &Check) -> Value {
    json!({
        "actual": c.actual,
        "distance": num(c.distance),
        "expected": c.expected,
        "name": c.name,
        "pass": c.pass,
        "tolerance": num(c.tolerance),
    })
}

pub fn checks(list: &[Check]) -> Value {
    Value::Array(list.iter().map(check).collect())
}

pub fn consistency(report: &ConsistencyReport) -> Value {
    let classes: Vec<Value> = report
        .classes
        .iter()
        .map(|members| {
            json!({
                "members": members,
                "state": density(&report.states[members[0]]),
                "surfaces": members.iter().map(|&k| surface(&report.surfaces[k])).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "classes": classes,
        "consistent": report.consistent,
        "sites": report.region.sites(),
        "surfaces_tested": report.surfaces.len(),
    })
}

pub fn hierarchy(report: &HierarchyReport) -> Value {
    let separability: Vec<Value> = report
        .separability
        .iter()
        .map(|w| {
            json!({
                "product_distance": num(w.product_distance),
                "region_a": w.label_a,
                "region_b": w.label_b,
                "surface": surface(&w.surface),
            })
        })
        .collect();
    let contextuality: Vec<Value> = report
        .contextuality
        .iter()
        .map(|w| {
            json!({
                "assignment": w.assignment,
                "classes": consistency(&w.report)["classes"].clone(),
                "region": w.label,
                "sites": w.region.sites(),
            })
        })
        .collect();
    json!({
        "census": {
            "fraction": num(report.census.fraction),
            "inconsistent_placements": report.census.inconsistent_placements,
            "tested_placements": report.census.tested_placements,
            "threshold": num(report.census.threshold),
        },
        "contextuality_witnesses": contextuality,
        "level": report.level.name(),
        "separability_witnesses": separability,
    })
}

/// The common wrapper every command emits.
pub struct Envelope {
    pub command: String,
    pub certifies: String,
    pub parameters: Value,
    pub results: Value,
    pub checks: Vec<Check>,
}

impl Envelope {
    pub fn overall_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        map.insert("certifies".into(), json!(self.certifies));
        map.insert("checks".into(), checks(&self.checks));
        map.insert("command".into(), json!(self.command));
        map.insert("overall_pass".into(), json!(self.overall_pass()));
        map.insert("parameters".into(), self.parameters.clone());
        map.insert("results".into(), self.results.clone());
        map.insert("schema_version".into(), json!(1));
        Value::Object(map)
    }

    pub fn render_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.to_json()).expect("serializable");
        out.push('\n');
        out
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command: {}\n", self.command));
        out.push_str(&format!("certifies: {}\n", self.certifies));
        out.push_str(&format!("parameters: {}\n", self.parameters));
        for c in &self.checks {
            out.push_str(&format!(
                "  [{}] {}  distance {:.3e} (tolerance {:.1e}; expected {})\n",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                round_sig(c.distance),
                c.tolerance,
                c.expected,
            ));
        }
        out.push_str(&format!(
            "overall: {}\n",
            if self.overall_pass() { "pass" } else { "FAIL" }
        ));
        out
    }
}

/// CSV rows (surface_index, distance) for a per-surface distance profile.
pub fn emit_csv(profile: &[f64]) -> String {
    let mut out = String::from("surface_index,distance\n");
    for (k, d) in profile.iter().enumerate() {
        out.push_str(&format!("{k},{}\n", round_sig(*d)));
    }
    out
}
