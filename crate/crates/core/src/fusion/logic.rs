//! Named normal logics: axiom schemata, frame conditions and the filtration
//! strategy used for each.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::filtration::Strategy;
use crate::kripke::FrameCondition;
use crate::syntax::{parse_formula, Formula, FormulaSet, SyntaxError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("unknown logic `{0}`")]
    Unknown(String),
    #[error("bad axiom `{text}`: {source}")]
    Axiom { text: String, source: SyntaxError },
    #[error("bad axiom `{text}`: {message}")]
    Shorthand { text: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogicSpec {
    pub name: String,
    pub alphabet: Vec<String>,
    pub axioms: FormulaSet,
    /// Frame conditions characterising the logic; `None` when unknown.
    pub frame_conditions: Option<Vec<(String, FrameCondition)>>,
    pub strategy: Strategy,
    /// Shipped with the crate (or assembled only from recognised axioms).
    pub builtin: bool,
}

impl fmt::Display for LogicSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.name, self.alphabet.join(","))
    }
}

/// Names accepted by [`LogicSpec::builtin`]; `Km(m)` takes any `m >= 1`.
pub const BUILTIN_NAMES: &[&str] = &[
    "K", "T", "K4", "S4", "S5", "K5", "K45", "D", "KB", "K+<>T", "K4+<>T", "Km(m)", "DIFF",
];

mod ax {
    use super::*;

    fn p() -> Formula {
        Formula::var(0)
    }

    pub fn t(m: &str) -> Formula {
        Formula::imp(p(), Formula::dia(m, p()))
    }
    pub fn four(m: &str) -> Formula {
        collapse(m, 2)
    }
    pub fn five(m: &str) -> Formula {
        Formula::imp(Formula::dia(m, p()), Formula::bx(m, Formula::dia(m, p())))
    }
    pub fn b(m: &str) -> Formula {
        Formula::imp(p(), Formula::bx(m, Formula::dia(m, p())))
    }
    pub fn d(m: &str) -> Formula {
        Formula::dia(m, Formula::top())
    }
    pub fn collapse(m: &str, k: usize) -> Formula {
        Formula::imp(Formula::dia_pow(m, k, p()), Formula::dia(m, p()))
    }
    pub fn weak_four(m: &str) -> Formula {
        Formula::imp(
            Formula::dia_pow(m, 2, p()),
            Formula::or(Formula::dia(m, p()), p()),
        )
    }
    pub fn box_t(m: &str) -> Formula {
        Formula::imp(Formula::bx(m, p()), p())
    }
    pub fn box_four(m: &str) -> Formula {
        Formula::imp(Formula::bx(m, p()), Formula::bx(m, Formula::bx(m, p())))
    }
    pub fn box_d(m: &str) -> Formula {
        Formula::imp(Formula::bx(m, p()), Formula::dia(m, p()))
    }
}

/// Frame condition corresponding to a single recognised axiom.
fn recognise(m: &str, f: &Formula) -> Option<FrameCondition> {
    if *f == ax::t(m) || *f == ax::box_t(m) {
        return Some(FrameCondition::Reflexive);
    }
    if *f == ax::four(m) || *f == ax::box_four(m) {
        return Some(FrameCondition::Transitive);
    }
    if *f == ax::five(m) {
        return Some(FrameCondition::Euclidean);
    }
    if *f == ax::b(m) {
        return Some(FrameCondition::Symmetric);
    }
    if *f == ax::d(m) || *f == ax::box_d(m) {
        return Some(FrameCondition::Serial);
    }
    if *f == ax::weak_four(m) {
        return Some(FrameCondition::WeaklyTransitive);
    }
    if let Formula::Imp(lhs, rhs) = f {
        if **rhs == Formula::dia(m, Formula::var(0)) {
            let mut depth = 0;
            let mut cur = &**lhs;
            while let Formula::Diamond(e, inner) = cur {
                if e.atom_name() != Some(m) {
                    return None;
                }
                depth += 1;
                cur = inner;
            }
            if *cur == Formula::var(0) && depth >= 1 {
                return Some(FrameCondition::MCollapse(depth));
            }
        }
    }
    None
}

/// Default strategy for a set of frame conditions on one modality.
fn strategy_for(conds: &BTreeSet<FrameCondition>) -> Strategy {
    use FrameCondition::*;
    let has = |c| conds.contains(&c);
    let only = |cs: &[FrameCondition]| conds.iter().all(|c| cs.contains(c));
    if conds.is_empty() {
        Strategy::Minimal
    } else if has(Equivalence) || (has(Reflexive) && has(Euclidean)) {
        if only(&[Equivalence, Reflexive, Euclidean, Transitive, Symmetric, Serial]) {
            Strategy::S5
        } else {
            Strategy::Bisim
        }
    } else if only(&[Reflexive]) {
        Strategy::Reflexive
    } else if only(&[Transitive]) || only(&[Transitive, Serial]) {
        Strategy::Lemmon
    } else if only(&[Reflexive, Transitive, Serial]) {
        Strategy::S4
    } else if only(&[Serial]) {
        Strategy::Serial
    } else if only(&[Symmetric]) {
        Strategy::Symmetric
    } else if conds.len() == 1 {
        match conds.iter().next() {
            Some(MCollapse(k)) if *k >= 3 => Strategy::Gabbay(*k),
            Some(MCollapse(2)) => Strategy::Lemmon,
            _ => Strategy::Bisim,
        }
    } else {
        Strategy::Bisim
    }
}

impl LogicSpec {
    /// A shipped logic on the single modality `m`.
    pub fn builtin(name: &str, m: &str) -> Result<LogicSpec, LogicError> {
        use FrameCondition::*;
        let (axioms, conds, strategy): (Vec<Formula>, Vec<FrameCondition>, Strategy) = match name {
            "K" => (vec![], vec![], Strategy::Minimal),
            "T" => (vec![ax::t(m)], vec![Reflexive], Strategy::Reflexive),
            "K4" => (vec![ax::four(m)], vec![Transitive], Strategy::Lemmon),
            "S4" => (vec![ax::t(m), ax::four(m)], vec![Reflexive, Transitive], Strategy::S4),
            "S5" => (vec![ax::t(m), ax::five(m)], vec![Equivalence], Strategy::S5),
            "K5" => (vec![ax::five(m)], vec![Euclidean], Strategy::Bisim),
            "K45" => (vec![ax::four(m), ax::five(m)], vec![Transitive, Euclidean], Strategy::Bisim),
            "D" | "K+<>T" => (vec![ax::d(m)], vec![Serial], Strategy::Serial),
            "KB" => (vec![ax::b(m)], vec![Symmetric], Strategy::Symmetric),
            "K4+<>T" | "K4D" => (vec![ax::four(m), ax::d(m)], vec![Transitive, Serial], Strategy::Lemmon),
            "DIFF" => (
                vec![ax::b(m), ax::weak_four(m)],
                vec![Symmetric, WeaklyTransitive],
                Strategy::Bisim,
            ),
            other => {
                let k = other
                    .strip_prefix("Km(")
                    .and_then(|s| s.strip_suffix(')'))
                    .and_then(|s| s.parse::<usize>().ok())
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| LogicError::Unknown(other.to_string()))?;
                let strategy = match k {
                    1 => Strategy::Minimal,
                    2 => Strategy::Lemmon,
                    _ => Strategy::Gabbay(k),
                };
                (vec![ax::collapse(m, k)], vec![MCollapse(k)], strategy)
            }
        };
        Ok(LogicSpec {
            name: name.to_string(),
            alphabet: vec![m.to_string()],
            axioms: axioms.into_iter().collect(),
            frame_conditions: Some(conds.into_iter().map(|c| (m.to_string(), c)).collect()),
            strategy,
            builtin: true,
        })
    }

    /// Parses `NAME` or `NAME+AXIOM` or `NAME+{AXIOM;AXIOM}` on modality `m`.
    ///
    /// Axioms use the unimodal shorthand `<>`, `[]`, `<>^k`, `T`, and the
    /// letters `p q r s` for `p0 .. p3`; `p0`-style variables work too.
    pub fn parse(text: &str, m: &str) -> Result<LogicSpec, LogicError> {
        let text = text.trim();
        if let Ok(spec) = LogicSpec::builtin(text, m) {
            return Ok(spec);
        }
        // longest builtin prefix followed by '+'
        let mut split = None;
        for (i, c) in text.char_indices() {
            if c == '+' && LogicSpec::builtin(&text[..i], m).is_ok() {
                split = Some(i);
            }
        }
        let i = split.ok_or_else(|| LogicError::Unknown(text.to_string()))?;
        let mut spec = LogicSpec::builtin(&text[..i], m)?;
        let rest = text[i + 1..].trim();
        let rest = rest
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .unwrap_or(rest);
        let mut conds: BTreeSet<FrameCondition> = spec
            .frame_conditions
            .iter()
            .flatten()
            .map(|(_, c)| *c)
            .collect();
        let mut recognised = true;
        for piece in rest.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let expanded = expand_shorthand(piece, m)?;
            let f = parse_formula(&expanded, &[m]).map_err(|source| LogicError::Axiom {
                text: piece.to_string(),
                source,
            })?;
            match recognise(m, &f) {
                Some(c) => {
                    conds.insert(c);
                }
                None => recognised = false,
            }
            spec.axioms.insert(f);
        }
        spec.name = text.to_string();
        spec.builtin = recognised;
        if recognised {
            spec.strategy = strategy_for(&conds);
            spec.frame_conditions = Some(conds.into_iter().map(|c| (m.to_string(), c)).collect());
        } else {
            spec.strategy = Strategy::Bisim;
            spec.frame_conditions = None;
        }
        Ok(spec)
    }

    pub fn has_frame_conditions(&self) -> bool {
        self.frame_conditions.is_some()
    }
}

/// Rewrites the unimodal shorthand into the formula grammar over `m`.
fn expand_shorthand(text: &str, m: &str) -> Result<String, LogicError> {
    let bad = |message: String| LogicError::Shorthand {
        text: text.to_string(),
        message,
    };
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '<' && chars.get(i + 1) == Some(&'>') {
            i += 2;
            let mut times = 1;
            if chars.get(i) == Some(&'^') {
                let start = i + 1;
                let mut end = start;
                while end < chars.len() && chars[end].is_ascii_digit() {
                    end += 1;
                }
                let digits: String = chars[start..end].iter().collect();
                times = digits
                    .parse::<usize>()
                    .map_err(|_| bad("expected a number after `<>^`".into()))?;
                i = end;
            }
            for _ in 0..times {
                out.push_str(&format!("<{m}>"));
            }
        } else if c == '[' && chars.get(i + 1) == Some(&']') {
            i += 2;
            out.push_str(&format!("[{m}]"));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let mapped = match word.as_str() {
                "T" | "true" => "true".to_string(),
                "F" | "false" => "false".to_string(),
                "p" => "p0".into(),
                "q" => "p1".into(),
                "r" => "p2".into(),
                "s" => "p3".into(),
                w if w.starts_with('p') && w[1..].bytes().all(|b| b.is_ascii_digit()) && w.len() > 1 => {
                    w.to_string()
                }
                w => return Err(bad(format!("unknown word `{w}`"))),
            };
            out.push_str(&mapped);
        } else {
            out.push(c);
            i += 1;
        }
    }
    Ok(out)
}
