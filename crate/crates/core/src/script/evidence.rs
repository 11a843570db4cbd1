use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::error::ScriptError;
use super::parser::Cursor;
use super::writer::plain;

/// An observed value: a discrete state name or a real number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Observation {
    Real(f64),
    State(String),
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observation::State(s) => f.write_str(s),
            Observation::Real(x) => f.write_str(&plain(*x)),
        }
    }
}

/// Variable assignments from an evidence script (`Name = value` per line).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Evidence {
    pub assignments: BTreeMap<String, Observation>,
}

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn get(&self, name: &str) -> Option<&Observation> {
        self.assignments.get(name)
    }

    /// Builder used throughout tests and the corpus scenarios.
    pub fn with_state(mut self, variable: &str, state: &str) -> Self {
        self.assignments.insert(variable.into(), Observation::State(state.into()));
        self
    }

    pub fn with_real(mut self, variable: &str, value: f64) -> Self {
        self.assignments.insert(variable.into(), Observation::Real(value));
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Observation)> {
        self.assignments.iter()
    }
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, value) in &self.assignments {
            writeln!(f, "{name} = {value}")?;
        }
        Ok(())
    }
}

/// Parses an evidence script. Blank lines and lines starting with `#` are
/// ignored; a trailing `;` is tolerated.
pub fn parse_evidence(text: &str) -> Result<Evidence, ScriptError> {
    let mut evidence = Evidence::new();
    let mut cur = Cursor::new(text);
    loop {
        cur.skip_inline_ws();
        if cur.at_end() {
            break;
        }
        if cur.eat("\n") {
            continue;
        }
        if cur.eat("#") {
            skip_line(&mut cur);
            continue;
        }
        let (name, pos) = cur.ident("variable name")?;
        cur.skip_inline_ws();
        if !cur.eat("=") {
            return Err(cur.syntax("`=`"));
        }
        cur.skip_inline_ws();
        if cur.at_line_end() {
            return Err(cur.syntax("state name or number"));
        }
        let value = if cur.at_number_inline() {
            Observation::Real(cur.number()?.0)
        } else {
            let (state, _) = cur.ident("state name or number")?;
            Observation::State(state)
        };
        cur.skip_inline_ws();
        cur.eat(";");
        cur.skip_inline_ws();
        if !(cur.at_end() || cur.eat("\n")) {
            return Err(cur.syntax("end of line"));
        }
        if evidence.assignments.contains_key(&name) {
            return Err(ScriptError::DuplicateAssignment { pos, variable: name });
        }
        evidence.assignments.insert(name, value);
    }
    Ok(evidence)
}

fn skip_line(cur: &mut Cursor<'_>) {
    while !cur.at_end() && !cur.eat("\n") {
        cur.advance_char();
    }
}
