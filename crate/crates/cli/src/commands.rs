use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};

use modal_filtration::algebra::{model_validates, AlgebraError};
use modal_filtration::decide::{bounded_countermodel, bounded_sat, DecideError, SearchOptions};
use modal_filtration::filtration::{
    bisim_coarsest, certificate_from_map, check_filtration as check, filter_with, min_filtered,
    quotient_model, CertificateSidecar, FilterOptions, FiltrationCertificate, FiltrationError,
    ReportJson, Strategy,
};
use modal_filtration::fusion::{self, fuse_logics, FusionError, LogicError, LogicSpec, BUILTIN_NAMES};
use modal_filtration::kripke::{eval as eval_formula, KripkeError, Model, ModelFormatError};
use modal_filtration::syntax::{parse_formula, Formula, FormulaSet, SyntaxError};

pub struct Outcome {
    pub positive: bool,
    pub report: Value,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn new(positive: bool, report: Value) -> Self {
        Outcome {
            positive,
            report,
            warnings: Vec::new(),
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    fn usage(kind: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            kind,
            message: message.into(),
        }
    }

    fn negative(kind: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            kind,
            message: message.into(),
        }
    }

    fn budget(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            kind: "budget",
            message: message.into(),
        }
    }
}

impl From<KripkeError> for Failure {
    fn from(e: KripkeError) -> Self {
        Failure::usage("model", e.to_string())
    }
}

impl From<SyntaxError> for Failure {
    fn from(e: SyntaxError) -> Self {
        Failure::usage("syntax", e.to_string())
    }
}

impl From<LogicError> for Failure {
    fn from(e: LogicError) -> Self {
        Failure::usage("logic", e.to_string())
    }
}

impl From<AlgebraError> for Failure {
    fn from(e: AlgebraError) -> Self {
        match e {
            AlgebraError::CarrierCapExceeded { .. } | AlgebraError::EvalCapExceeded { .. } => {
                Failure::budget(e.to_string())
            }
            other => Failure::usage("algebra", other.to_string()),
        }
    }
}

impl From<FiltrationError> for Failure {
    fn from(e: FiltrationError) -> Self {
        match e {
            FiltrationError::Kripke(k) => k.into(),
            FiltrationError::Algebra(a) => a.into(),
            FiltrationError::Fusion(f) => (*f).into(),
            FiltrationError::SearchTooLarge { .. } => Failure::budget(e.to_string()),
            FiltrationError::NotSubClosed(_) | FiltrationError::NonAtomicGamma(_) => {
                Failure::usage("gamma", e.to_string())
            }
            FiltrationError::Precondition(_) => Failure::negative("precondition", e.to_string()),
            FiltrationError::StrategyFailed { .. } => Failure::negative("strategy_failed", e.to_string()),
            FiltrationError::Structural(_) => Failure::negative("not_a_filtration", e.to_string()),
            FiltrationError::NotARefinement | FiltrationError::MissingWitness => {
                Failure::negative("refinement", e.to_string())
            }
        }
    }
}

impl From<FusionError> for Failure {
    fn from(e: FusionError) -> Self {
        match e {
            FusionError::Component { logic, source } => {
                let mut f: Failure = source.into();
                f.message = format!("component {logic}: {}", f.message);
                f
            }
            FusionError::Filtration(inner) => inner.into(),
            FusionError::Algebra(a) => a.into(),
            FusionError::Precondition(_) => Failure::negative("precondition", e.to_string()),
            FusionError::Check(_) => Failure::negative("not_a_filtration", e.to_string()),
            other => Failure::usage("fusion", other.to_string()),
        }
    }
}

impl From<DecideError> for Failure {
    fn from(e: DecideError) -> Self {
        match e {
            DecideError::Budget { .. } => Failure::budget(e.to_string()),
            other => Failure::usage("search", other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage("io", format!("{}: {e}", path.display())))
}

fn write(path: &Path, value: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    fs::write(path, text + "\n").map_err(|e| Failure::usage("io", format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<Model, Failure> {
    Model::from_json(&read(path)?)
        .map_err(|e: ModelFormatError| Failure::usage("model", format!("{}: {e}", path.display())))
}

fn alphabet(m: &Model) -> Vec<String> {
    m.alphabet().map(str::to_string).collect()
}

/// One formula per line; blank lines and `#` comments are skipped.
fn read_formulas(path: &Path, alphabet: &[String]) -> Result<Vec<Formula>, Failure> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f = parse_formula(line, alphabet)
            .map_err(|e| Failure::usage("syntax", format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(f);
    }
    Ok(out)
}

/// Γ from a file, Sub-closed; also returns the formulas the closure added.
fn read_gamma(path: &Path, m: &Model) -> Result<(FormulaSet, Vec<String>), Failure> {
    let given: FormulaSet = read_formulas(path, &alphabet(m))?.into_iter().collect();
    let closed = given.closure();
    let added = closed
        .iter()
        .filter(|f| !given.contains(f))
        .map(ToString::to_string)
        .collect();
    Ok((closed, added))
}

/// Splits at top-level commas (commas inside braces stay).
fn split_list(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(text[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(text[start..].trim());
    out.into_iter().filter(|s| !s.is_empty()).collect()
}

/// `a:K5,b:S4`; a bare logic applies to `default` modalities.
fn parse_logics(text: &str, default: &[String]) -> Result<Vec<LogicSpec>, Failure> {
    let mut specs = Vec::new();
    for item in split_list(text) {
        match item.split_once(':') {
            Some((m, logic)) => specs.push(LogicSpec::parse(logic, m.trim())?),
            None => {
                if default.is_empty() {
                    return Err(Failure::usage("logic", format!("`{item}` needs a MODALITY: prefix")));
                }
                for m in default {
                    specs.push(LogicSpec::parse(item, m)?);
                }
            }
        }
    }
    if specs.is_empty() {
        return Err(Failure::usage("logic", "no logic given"));
    }
    Ok(specs)
}

fn custom_warnings(specs: &[LogicSpec]) -> Vec<String> {
    specs
        .iter()
        .filter(|s| !BUILTIN_NAMES.contains(&s.name.as_str()) && !s.name.starts_with("Km("))
        .map(|s| {
            format!(
                "{s} is not a built-in logic; its frame conditions come from recognised axiom shapes"
            )
        })
        .collect()
}

fn names(m: &Model, set: &modal_filtration::StateSet) -> Value {
    json!(m.names_of(set))
}

pub fn eval(model: &Path, formula: &str) -> Result<Outcome, Failure> {
    let m = load_model(model)?;
    let phi = parse_formula(formula, &alphabet(&m))?;
    let truth = eval_formula(&m, &phi)?;
    Ok(Outcome::new(
        true,
        json!({ "formula": phi.to_string(), "truth_set": names(&m, &truth) }),
    ))
}

fn certificate_report(cert: &FiltrationCertificate, logic: &str, added: &[String]) -> Value {
    let report = cert.report.as_ref().map(|r| ReportJson::new(r, cert));
    let blocks: Vec<Value> = cert
        .partition
        .blocks()
        .iter()
        .map(|b| names(&cert.source, b))
        .collect();
    json!({
        "logic": logic,
        "strategy": cert.strategy,
        "detail": cert.detail,
        "gamma": cert.gamma.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "gamma_added": added,
        "blocks": blocks,
        "strict": cert.is_strict(),
        "certificate": CertificateSidecar::from_certificate(cert),
        "report": report,
        "logic_holds": cert.logic_check.as_ref().map(|v| v.holds),
        "quotient": cert.quotient.to_json_value(),
    })
}

fn write_outputs(cert: &FiltrationCertificate, out: Option<&Path>, report: &mut Value) -> Result<(), Failure> {
    let Some(prefix) = out else {
        return Ok(());
    };
    let model_path = prefix.with_extension("json");
    let cert_path = prefix.with_extension("cert.json");
    write(&model_path, &cert.quotient.to_json_value())?;
    write(
        &cert_path,
        &serde_json::to_value(CertificateSidecar::from_certificate(cert)).expect("sidecar serializes"),
    )?;
    report["files"] = json!([model_path.display().to_string(), cert_path.display().to_string()]);
    Ok(())
}

pub fn filter(
    model: &Path,
    gamma: &Path,
    logic: &str,
    strategy: Option<&str>,
    out: Option<&Path>,
    opts: FilterOptions,
) -> Result<Outcome, Failure> {
    let m = load_model(model)?;
    let (gamma, added) = read_gamma(gamma, &m)?;
    let specs = parse_logics(logic, &alphabet(&m))?;
    let warnings = custom_warnings(&specs);
    let spec = fuse_logics(specs).map_err(Failure::from)?;
    let strategy = match strategy {
        Some(s) => s.parse::<Strategy>().map_err(|e| Failure::usage("strategy", e))?,
        None => spec.strategy.clone(),
    };
    let started = Instant::now();
    let cert = filter_with(&m, &gamma, &strategy, &spec, &opts)?;
    eprintln!("filtered in {:.3}s", started.elapsed().as_secs_f64());
    let mut report = certificate_report(&cert, &spec.to_string(), &added);
    write_outputs(&cert, out, &mut report)?;
    Ok(Outcome {
        positive: true,
        report,
        warnings,
    })
}

pub fn fuse_filter(
    model: &Path,
    gamma: &Path,
    logics: &str,
    trace: bool,
    out: Option<&Path>,
    opts: FilterOptions,
) -> Result<Outcome, Failure> {
    let m = load_model(model)?;
    let (gamma, added) = read_gamma(gamma, &m)?;
    let specs = parse_logics(logics, &[])?;
    let warnings = custom_warnings(&specs);
    let name = specs.iter().map(ToString::to_string).collect::<Vec<_>>().join("*");
    let (cert, stages) = fusion::fuse_filter(&m, &gamma, &specs, &opts)?;
    let mut report = certificate_report(&cert, &name, &added);
    if trace {
        report["trace"] = serde_json::to_value(&stages).expect("trace serializes");
    }
    write_outputs(&cert, out, &mut report)?;
    Ok(Outcome {
        positive: true,
        report,
        warnings,
    })
}

pub fn check_filtration(model: &Path, quotient: &Path, map: &Path, gamma: &Path) -> Result<Outcome, Failure> {
    let m = load_model(model)?;
    let q = load_model(quotient)?;
    let (gamma, added) = read_gamma(gamma, &m)?;
    let text = read(map)?;
    let map: BTreeMap<String, String> = match serde_json::from_str::<CertificateSidecar>(&text) {
        Ok(side) => side.map,
        Err(_) => serde_json::from_str(&text)
            .map_err(|e| Failure::usage("map", format!("{}: {e}", map.display())))?,
    };
    let cert = match certificate_from_map(&m, &gamma, q, &map) {
        Ok(cert) => cert,
        Err(FiltrationError::Structural(msg)) => {
            return Ok(Outcome::new(false, json!({ "passed": false, "structural": msg })));
        }
        Err(e) => return Err(e.into()),
    };
    let report = match check(&cert) {
        Ok(r) => r,
        Err(FiltrationError::Structural(msg)) => {
            return Ok(Outcome::new(false, json!({ "passed": false, "structural": msg })));
        }
        Err(e) => return Err(e.into()),
    };
    let json = ReportJson::new(&report, &cert);
    let mut value = serde_json::to_value(&json).expect("report serializes");
    value["gamma_added"] = json!(added);
    Ok(Outcome::new(report.passed(), value))
}

pub struct SearchArgs {
    pub logics: String,
    pub max_states: usize,
    pub budget: u64,
    pub iso_prune: bool,
}

pub fn search(formula: &str, args: &SearchArgs, validity: bool) -> Result<Outcome, Failure> {
    let specs = parse_logics(&args.logics, &["a".to_string()])?;
    let warnings = custom_warnings(&specs);
    let alphabet: Vec<String> = specs.iter().flat_map(|s| s.alphabet.iter().cloned()).collect();
    let phi = parse_formula(formula, &alphabet)?;
    let opts = SearchOptions {
        budget: args.budget,
        iso_prune: args.iso_prune,
    };
    let started = Instant::now();
    let result = if validity {
        bounded_countermodel(&phi, &specs, args.max_states, opts)?
    } else {
        bounded_sat(&phi, &specs, args.max_states, opts)?
    };
    eprintln!("searched in {:.3}s", started.elapsed().as_secs_f64());
    let mut report = result.to_json();
    report["formula"] = phi.to_string().into();
    report["logics"] = json!(specs.iter().map(ToString::to_string).collect::<Vec<_>>());
    if validity {
        report["countermodel"] = result.is_sat().into();
    }
    Ok(Outcome {
        positive: result.is_sat() != validity,
        report,
        warnings,
    })
}

pub fn algebra(model: &Path, axioms: &Path, opts: FilterOptions) -> Result<Outcome, Failure> {
    let m = load_model(model)?;
    let axioms: FormulaSet = read_formulas(axioms, &alphabet(&m))?.into_iter().collect();
    let v = model_validates(&m, &axioms, opts.limits)?;
    let counter = v.counter.as_ref().map(|c| {
        let assignment: BTreeMap<String, Value> = c
            .assignment
            .iter()
            .map(|(var, set)| (format!("p{var}"), names(&m, set)))
            .collect();
        json!({
            "axiom": c.axiom.to_string(),
            "assignment": assignment,
            "state": m.state_name(c.state),
        })
    });
    Ok(Outcome::new(
        v.holds,
        json!({
            "holds": v.holds,
            "carrier_size": v.carrier_size,
            "evaluations": v.evaluations,
            "counter": counter,
        }),
    ))
}

fn parse_vars(text: &str) -> Result<Vec<u32>, Failure> {
    split_list(text)
        .into_iter()
        .map(|v| {
            v.strip_prefix('p')
                .and_then(|d| d.parse().ok())
                .ok_or_else(|| Failure::usage("vars", format!("`{v}` is not a variable")))
        })
        .collect()
}

pub fn bisim(model: &Path, vars: Option<&str>) -> Result<Outcome, Failure> {
    let m = load_model(model)?;
    let vars: Vec<u32> = match vars {
        Some(text) => parse_vars(text)?,
        None => m.valuation().keys().copied().collect(),
    };
    let p = bisim_coarsest(&m, &vars.iter().copied().collect())?;
    let gamma: FormulaSet = vars.iter().map(|&v| Formula::var(v)).collect();
    let mut relations = BTreeMap::new();
    for name in m.alphabet() {
        relations.insert(name.to_string(), min_filtered(&m, &p, name)?);
    }
    let q = quotient_model(&m, &gamma, &p, relations);
    let blocks: Vec<Value> = p.blocks().iter().map(|b| names(&m, b)).collect();
    Ok(Outcome::new(
        true,
        json!({ "blocks": blocks, "quotient": q.to_json_value() }),
    ))
}
