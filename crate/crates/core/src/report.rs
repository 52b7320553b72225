//! Serializable reports with polynomials rendered as canonical strings, and
//! their plain-text rendering.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use crate::algebra::RatFunc;
use crate::graph::{Certificate, ConditionReport};
use crate::identifiability::{method_name, IdentifiabilityReport, Membership, RankLog, Solvability, Status};
use crate::io_equations::IOEquation;
use crate::model::LinearModel;
use crate::transfer::{transfer_coefficients, TransferMatrix};

pub const MEMBERSHIP_SEMANTICS: &str = "local/algebraic dependence";
pub const SOLVABILITY_CAVEAT: &str = "probabilistic, one-sided";
pub const CRAMER_PARTIAL: &str = "relation only, not a full set";
pub const OFFSET_CAVEAT: &str = "constant offsets dropped; zero initial conditions assumed";

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub model: String,
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditions: Option<ConditionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisSection>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub io: Vec<IoSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transfer: Option<TransferSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub randomness: Option<Randomness>,
}

impl Report {
    pub fn new(command: &'static str, model: &LinearModel, is_compartment: bool) -> Self {
        Report {
            command,
            model: model.name.clone(),
            kind: if is_compartment { "compartment" } else { "system" },
            conditions: None,
            analysis: None,
            io: Vec::new(),
            transfer: None,
            check: None,
            witness: None,
            randomness: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EquationEntry {
    pub output: String,
    pub order: usize,
    pub text: String,
    pub coefficients: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solvability: Option<Solvability>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IoSection {
    pub method: &'static str,
    pub ordering: Vec<String>,
    pub full_set: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caveat: Option<&'static str>,
    pub equations: Vec<EquationEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransferSection {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// `entries[output][input]`
    pub entries: Vec<Vec<String>>,
    pub coefficients: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caveat: Option<&'static str>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisSection {
    pub method: &'static str,
    pub status: Status,
    pub generators: Vec<String>,
    pub generators_sign_normalized: Vec<String>,
    pub cross_checks: BTreeMap<&'static str, bool>,
    pub membership_semantics: &'static str,
    pub solvability_caveat: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckSection {
    pub function: String,
    pub verdict: Membership,
    pub semantics: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessSection {
    pub map: String,
    pub trials: usize,
    pub preserves_outputs: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Randomness {
    pub seed: u64,
    pub primes: Vec<u64>,
    pub failure_log2: f64,
}

impl Randomness {
    pub fn new(seed: u64, log: &RankLog) -> Self {
        Randomness { seed, primes: log.primes.clone(), failure_log2: log.failure_log2 }
    }
}

pub fn ratfunc_strings(model: &LinearModel, fs: &[RatFunc]) -> Vec<String> {
    fs.iter().map(|f| f.display(&model.symbols).to_string()).collect()
}

pub fn equation_entry(model: &LinearModel, eq: &IOEquation) -> EquationEntry {
    let (output, order) = eq.leading.map_or((String::new(), 0), |(i, k)| (model.outputs[i].clone(), k));
    EquationEntry {
        output,
        order,
        text: eq.display(model).to_string(),
        coefficients: ratfunc_strings(model, &eq.coefficients()),
        verified: None,
        solvability: None,
    }
}

pub fn io_section(
    model: &LinearModel,
    method: &'static str,
    ordering: &[usize],
    eqs: &[IOEquation],
    full_set: bool,
) -> IoSection {
    IoSection {
        method,
        ordering: ordering.iter().map(|&i| model.outputs[i].clone()).collect(),
        full_set,
        caveat: (!full_set).then_some(CRAMER_PARTIAL),
        equations: eqs.iter().map(|e| equation_entry(model, e)).collect(),
    }
}

pub fn transfer_section(model: &LinearModel, h: &TransferMatrix) -> TransferSection {
    TransferSection {
        inputs: model.inputs.clone(),
        outputs: model.outputs.clone(),
        entries: h
            .entries
            .iter()
            .map(|row| row.iter().map(|e| e.display(&model.symbols).to_string()).collect())
            .collect(),
        coefficients: ratfunc_strings(model, &transfer_coefficients(h)),
        caveat: h.offsets_ignored.then_some(OFFSET_CAVEAT),
    }
}

pub fn analysis_report(r: &IdentifiabilityReport) -> Report {
    let m = &r.model;
    let mut report = Report::new("analyze", m, r.is_compartment);
    report.conditions = Some(r.conditions.clone());
    let normalized: Vec<RatFunc> = r.generators.iter().map(RatFunc::sign_normalized).collect();
    report.analysis = Some(AnalysisSection {
        method: method_name(r.method),
        status: r.status,
        generators: ratfunc_strings(m, &r.generators),
        generators_sign_normalized: ratfunc_strings(m, &normalized),
        cross_checks: r.cross_checks.clone(),
        membership_semantics: MEMBERSHIP_SEMANTICS,
        solvability_caveat: SOLVABILITY_CAVEAT,
    });
    let mut elim = io_section(m, "elimination", &r.ordering, &r.elimination, true);
    let mut cramer = r.cramer.as_ref().map(|c| io_section(m, "cramer", &[], c, r.cramer_is_full_set));
    if let Some(c) = cramer.as_mut() {
        c.ordering = m.outputs.clone();
    }
    let mut diags = r.diagnostics.iter();
    for section in std::iter::once(&mut elim).chain(cramer.as_mut()) {
        for entry in &mut section.equations {
            if let Some(d) = diags.next() {
                entry.verified = Some(d.verified);
                entry.solvability = Some(d.solvability);
            }
        }
    }
    report.io.push(elim);
    report.io.extend(cramer);
    report.transfer = r.transfer.as_ref().map(|h| transfer_section(m, h));
    report.randomness = Some(Randomness::new(r.seed, &r.rank_log));
    report
}

fn certificate_list(c: &ConditionReport) -> String {
    if c.certificates.is_empty() {
        return "None".into();
    }
    c.certificates.iter().map(|c| format!("{c:?}")).collect::<Vec<_>>().join(", ")
}

fn flag(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "yes",
        Some(false) => "no",
        None => "n/a",
    }
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::IdentifiableFieldProven => "IdentifiableFieldProven",
        Status::IOFieldOnly => "IOFieldOnly",
    }
}

/// Plain-text rendering; equations use prime notation for derivatives.
pub fn render_text(r: &Report) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "model {} ({})", r.model, r.kind);
    if let Some(c) = &r.conditions {
        let _ = writeln!(w, "conditions:");
        let _ = writeln!(w, "  single output: {}", if c.single_output { "yes" } else { "no" });
        let _ =
            writeln!(w, "  leak or input reachable from every vertex: {}", flag(c.leak_or_input_reachable_from_all));
        let _ = writeln!(w, "  strongly connected: {}", flag(c.strongly_connected));
        let _ = writeln!(w, "  has input: {}", flag(c.has_input));
        let _ = writeln!(w, "  certificates: {}", certificate_list(c));
        for cert in [Certificate::Thm1, Certificate::Thm2, Certificate::Thm3] {
            if c.has(cert) {
                let _ = writeln!(w, "    {cert:?}: {}", cert.describe());
            }
        }
    }
    if let Some(a) = &r.analysis {
        let _ = writeln!(w, "method: {}", a.method);
        let _ = writeln!(w, "status: {}", status_name(a.status));
        let _ = writeln!(w, "generators:");
        for g in &a.generators {
            let _ = writeln!(w, "  {g}");
        }
        let _ = writeln!(w, "generators (sign-normalized):");
        for g in &a.generators_sign_normalized {
            let _ = writeln!(w, "  {g}");
        }
        for (name, ok) in &a.cross_checks {
            let _ = writeln!(w, "field equivalence with {name}: {ok}");
        }
    }
    for s in &r.io {
        let _ = write!(w, "{} equations (ordering {})", s.method, s.ordering.join(" < "));
        match s.caveat {
            Some(c) => {
                let _ = writeln!(w, " [{c}]:");
            }
            None => {
                let _ = writeln!(w, ":");
            }
        }
        for e in &s.equations {
            let _ = write!(w, "  {} = 0", e.text);
            if let Some(v) = e.solvability {
                let verdict = match v {
                    Solvability::Solvable => "Solvable",
                    Solvability::RankDeficient => "RankDeficient",
                };
                let _ = write!(w, "  [verified: {}, solvability: {verdict}]", e.verified.unwrap_or(false));
            }
            let _ = writeln!(w);
        }
    }
    if let Some(t) = &r.transfer {
        let _ = writeln!(w, "transfer matrix:");
        if t.inputs.is_empty() {
            let _ = writeln!(w, "  (no inputs)");
        }
        for (i, row) in t.entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let _ = writeln!(w, "  H[{}, {}] = {e}", t.outputs[i], t.inputs[j]);
            }
        }
        if let Some(c) = t.caveat {
            let _ = writeln!(w, "  note: {c}");
        }
    }
    if let Some(c) = &r.check {
        let verdict = match c.verdict {
            Membership::Dependent => "dependent on the generators",
            Membership::Independent => "independent of the generators",
        };
        let _ = writeln!(w, "check {}: {verdict} ({})", c.function, c.semantics);
    }
    if let Some(x) = &r.witness {
        let _ = writeln!(
            w,
            "witness {}: outputs {} over {} trials",
            x.map,
            if x.preserves_outputs { "preserved" } else { "differ" },
            x.trials
        );
    }
    if let Some(a) = &r.analysis {
        let _ = writeln!(w, "membership: {}; solvability: {}", a.membership_semantics, a.solvability_caveat);
    }
    if let Some(rn) = r.randomness.as_ref().filter(|rn| !rn.primes.is_empty()) {
        let primes: Vec<String> = rn.primes.iter().map(u64::to_string).collect();
        let _ = writeln!(w, "seed {}; primes [{}]; failure bound 2^{:.1}", rn.seed, primes.join(", "), rn.failure_log2);
    }
    out
}
