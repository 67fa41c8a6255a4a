//! Machine-readable reports and their text rendering.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use twistk::scalar::C64;

pub const REPORT_TAG: &str = "twistk-report/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub inputs: Vec<String>,
    pub settings: ReportSettings,
    pub status: Status,
    pub results: Vec<TaskResult>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSettings {
    pub tolerance: f64,
    pub quadrature: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

/// `["re", "im"]` in shortest round-trip decimal form.
pub type Complex = [String; 2];

pub fn complex(z: C64) -> Complex {
    [decimal(z.re), decimal(z.im)]
}

fn decimal(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// One component of a section over the inertia groupoid. On point models
/// the coefficients are keyed by point name, otherwise by basis name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentOut {
    pub class_rep: String,
    pub coefficients: BTreeMap<String, Complex>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitRank {
    pub representative: String,
    pub stabilizer: Vec<String>,
    pub twisted_irreps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IrrepOut {
    pub dim: usize,
    /// Character values scaled to integers, one pair per stabilizer element.
    pub fingerprint: Vec<[i64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitOut {
    pub representative: String,
    pub stabilizer: Vec<String>,
    pub irreps: Vec<IrrepOut>,
    pub multiplicities: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateOut {
    pub v0_fibers: Vec<[usize; 2]>,
    pub v1_fibers: Vec<[usize; 2]>,
    /// One block per point of `E₀ ⊕ ε_{V₀} → E₁ ⊕ ε_{V₁}`.
    pub phi: Vec<Vec<Vec<Complex>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskResult {
    Validate {
        checks: Vec<Check>,
    },
    Character {
        bundle: String,
        components: Vec<ComponentOut>,
    },
    Cs {
        bundles: [String; 2],
        phi: String,
        components: Vec<ComponentOut>,
    },
    KhatRank {
        rank: usize,
        /// The fixed-point formula evaluated in exact arithmetic.
        fixed_point_sum: String,
        orbits: Vec<OrbitRank>,
    },
    KhatClass {
        bundle: String,
        zero: bool,
        orbits: Vec<OrbitOut>,
    },
    StableIso {
        bundles: [String; 2],
        holds: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reason: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        certificate: Option<CertificateOut>,
    },
    RegularClasses {
        classes: Vec<Vec<String>>,
    },
}

impl TaskResult {
    pub fn failed(&self) -> bool {
        match self {
            TaskResult::Validate { checks } => checks.iter().any(|c| !c.passed),
            TaskResult::StableIso { holds, .. } => !holds,
            _ => false,
        }
    }
}

impl Report {
    pub fn new(command: &str, inputs: Vec<String>, settings: ReportSettings, results: Vec<TaskResult>) -> Self {
        let status = if results.iter().any(TaskResult::failed) {
            Status::Failed
        } else {
            Status::Ok
        };
        Self {
            schema: REPORT_TAG.into(),
            command: command.into(),
            inputs,
            settings,
            status,
            results,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => 0,
            Status::Failed => 1,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            render(r, &mut out);
        }
        let s = &self.settings;
        let _ = writeln!(
            out,
            "# {}: tolerance {:e}, quadrature {}, seed {}",
            self.status_word(),
            s.tolerance,
            s.quadrature,
            s.seed
        );
        out
    }

    fn status_word(&self) -> &'static str {
        match self.status {
            Status::Ok => "ok",
            Status::Failed => "failed",
        }
    }
}

fn fmt_complex(c: &Complex) -> String {
    match (c[0].as_str(), c[1].as_str()) {
        (re, "0") => re.to_string(),
        ("0", im) => format!("{im}i"),
        (re, im) if im.starts_with('-') => format!("{re}{im}i"),
        (re, im) => format!("{re}+{im}i"),
    }
}

fn render_components(components: &[ComponentOut], out: &mut String) {
    for c in components {
        let terms: Vec<String> = c
            .coefficients
            .iter()
            .map(|(k, v)| format!("{k}: {}", fmt_complex(v)))
            .collect();
        let body = if terms.is_empty() { "0".to_string() } else { terms.join(", ") };
        let _ = writeln!(out, "  [{}] {body}", c.class_rep);
    }
}

fn render(r: &TaskResult, out: &mut String) {
    match r {
        TaskResult::Validate { checks } => {
            for c in checks {
                let mark = if c.passed { "ok  " } else { "FAIL" };
                let _ = writeln!(out, "{mark} {}: {}", c.name, c.detail);
            }
        }
        TaskResult::Character { bundle, components } => {
            let _ = writeln!(out, "character of {bundle}:");
            render_components(components, out);
        }
        TaskResult::Cs { bundles, phi, components } => {
            let _ = writeln!(out, "CS({}, {}; {phi}):", bundles[0], bundles[1]);
            render_components(components, out);
        }
        TaskResult::KhatRank { rank, .. } => {
            let _ = writeln!(out, "{rank}");
        }
        TaskResult::KhatClass { bundle, zero, orbits } => {
            let _ = writeln!(out, "class of {bundle}{}:", if *zero { " (zero)" } else { "" });
            for o in orbits {
                let dims: Vec<String> = o.irreps.iter().map(|i| i.dim.to_string()).collect();
                let _ = writeln!(
                    out,
                    "  orbit of {} (stabilizer {{{}}}): irrep dims [{}], multiplicities {:?}",
                    o.representative,
                    o.stabilizer.join(", "),
                    dims.join(", "),
                    o.multiplicities
                );
            }
        }
        TaskResult::StableIso {
            bundles, holds, reason, ..
        } => {
            if *holds {
                let _ = writeln!(out, "{} and {} are stably isomorphic", bundles[0], bundles[1]);
            } else {
                let _ = writeln!(
                    out,
                    "{} and {} are not stably isomorphic: {}",
                    bundles[0],
                    bundles[1],
                    reason.as_deref().unwrap_or("")
                );
            }
        }
        TaskResult::RegularClasses { classes } => {
            for c in classes {
                let _ = writeln!(out, "[{}] {{{}}}", c[0], c.join(", "));
            }
        }
    }
}
