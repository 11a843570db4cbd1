//! Recursive-descent parser for model scripts.
//!
//! Grammar (whitespace insignificant, `//` starts a line comment):
//!
//! ```text
//! script   := node*
//! node     := "defineNode" "(" IDENT ("," TEXT)? ")" ";"? "{" states dist_decl "}"
//! states   := "defineState" "(" ("Discrete" ("," IDENT)+ | "Continuous") ")" ";"
//! dist_decl:= "p" "(" IDENT ("|" IDENT ("," IDENT)*)? ")" "=" dist ";"?
//! dist     := leaf | "if" "(" guard ")" leaf ("else" "if" "(" guard ")" leaf)* ("else" leaf)?
//! leaf     := "{" (IDENT ":" NUMBER (";"|","))* "}" | "{" normal "}" | normal
//! normal   := "NormalDist" "(" NUMBER (("+"|"-") NUMBER "*" IDENT)* "," NUMBER ")"
//! guard    := IDENT "==" IDENT ("&&" IDENT "==" IDENT)*
//! ```

use std::collections::HashMap;

use super::ast::*;
use super::error::{Pos, ScriptError};

pub(crate) struct Cursor<'a> {
    src: &'a str,
    offset: usize,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        Cursor { src, offset: 0, line: 1, column: 1 }
    }

    pub(crate) fn pos(&self) -> Pos {
        Pos { line: self.line, column: self.column }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.offset..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    /// Skips spaces only, stopping at newlines.
    pub(crate) fn skip_inline_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c != '\n' && c.is_whitespace()) {
            self.bump();
        }
    }

    pub(crate) fn skip_ws(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.rest().starts_with("//") => {
                    while !matches!(self.peek(), None | Some('\n')) {
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    pub(crate) fn at_line_end(&self) -> bool {
        matches!(self.peek(), None | Some('\n'))
    }

    pub(crate) fn advance_char(&mut self) {
        self.bump();
    }

    /// Whether a numeric literal starts here, without crossing a newline.
    pub(crate) fn at_number_inline(&mut self) -> bool {
        self.skip_inline_ws();
        let mut chars = self.rest().chars();
        match chars.next() {
            Some(c) if c.is_ascii_digit() => true,
            Some('-') | Some('+') => matches!(chars.next(), Some(c) if c.is_ascii_digit()),
            _ => false,
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.offset >= self.src.len()
    }

    pub(crate) fn syntax(&self, expected: impl Into<String>) -> ScriptError {
        ScriptError::Syntax { pos: self.pos(), expected: expected.into() }
    }

    pub(crate) fn eat(&mut self, token: &str) -> bool {
        if self.rest().starts_with(token) {
            for _ in token.chars() {
                self.bump();
            }
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, token: &str) -> Result<(), ScriptError> {
        self.skip_ws();
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.syntax(format!("`{token}`")))
        }
    }

    fn peek_ident(&self) -> Option<&'a str> {
        let rest = self.rest();
        let mut chars = rest.char_indices();
        match chars.next() {
            Some((_, c)) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return None,
        }
        let end = chars
            .find(|(_, c)| !(c.is_ascii_alphanumeric() || *c == '_'))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        Some(&rest[..end])
    }

    /// Whether the next token is exactly the keyword `kw`.
    fn at_keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        self.peek_ident() == Some(kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ScriptError> {
        if self.at_keyword(kw) {
            self.eat(kw);
            Ok(())
        } else {
            Err(self.syntax(format!("`{kw}`")))
        }
    }

    pub(crate) fn ident(&mut self, what: &str) -> Result<(String, Pos), ScriptError> {
        self.skip_ws();
        let pos = self.pos();
        match self.peek_ident() {
            Some(id) => {
                self.eat(id);
                Ok((id.to_string(), pos))
            }
            None => Err(self.syntax(what)),
        }
    }

    /// Decimal literal with optional sign, fraction and exponent.
    pub(crate) fn number(&mut self) -> Result<(f64, Pos), ScriptError> {
        self.skip_ws();
        let pos = self.pos();
        let rest = self.rest();
        let bytes = rest.as_bytes();
        let mut i = 0;
        if i < bytes.len() && (bytes[i] == b'-' || bytes[i] == b'+') {
            i += 1;
        }
        let digits_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if i == digits_start {
            return Err(self.syntax("number"));
        }
        if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'-' || bytes[j] == b'+') {
                j += 1;
            }
            let exp_start = j;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j > exp_start {
                i = j;
            }
        }
        let text = &rest[..i];
        let value: f64 = text.parse().map_err(|_| self.syntax("number"))?;
        self.eat(text);
        Ok((value, pos))
    }

    /// Raw text up to (not including) the next `)` on the same line.
    fn text_until_paren(&mut self) -> Result<String, ScriptError> {
        let start = self.offset;
        while let Some(c) = self.peek() {
            if c == ')' {
                return Ok(self.src[start..self.offset].trim().to_string());
            }
            if c == '\n' {
                break;
            }
            self.bump();
        }
        Err(self.syntax("`)` closing the description"))
    }
}

/// Parses a model script into its syntax tree.
pub fn parse_model(text: &str) -> Result<ModelAst, ScriptError> {
    let mut cur = Cursor::new(text);
    let mut nodes: Vec<NodeDef> = Vec::new();
    let mut declared: HashMap<String, DomainDecl> = HashMap::new();
    loop {
        cur.skip_ws();
        if cur.at_end() {
            break;
        }
        let node = parse_node(&mut cur, &declared)?;
        declared.insert(node.name.clone(), node.domain.clone());
        nodes.push(node);
    }
    Ok(ModelAst { nodes })
}

fn parse_node(
    cur: &mut Cursor<'_>,
    declared: &HashMap<String, DomainDecl>,
) -> Result<NodeDef, ScriptError> {
    cur.keyword("defineNode")?;
    cur.expect("(")?;
    let (name, name_pos) = cur.ident("node name")?;
    if declared.contains_key(&name) {
        return Err(ScriptError::DuplicateNode { pos: name_pos, name });
    }
    cur.skip_ws();
    let description = if cur.eat(",") { cur.text_until_paren()? } else { String::new() };
    cur.expect(")")?;
    cur.skip_ws();
    cur.eat(";");
    cur.expect("{")?;

    let domain = parse_states(cur, &name)?;

    cur.keyword("p")?;
    cur.expect("(")?;
    let (target, target_pos) = cur.ident("node name")?;
    if target != name {
        return Err(ScriptError::Syntax { pos: target_pos, expected: format!("`{name}`") });
    }
    let mut parents: Vec<String> = Vec::new();
    cur.skip_ws();
    if cur.eat("|") {
        loop {
            let (parent, ppos) = cur.ident("parent name")?;
            if parent == name || parents.contains(&parent) {
                return Err(ScriptError::Syntax { pos: ppos, expected: "distinct parent name".into() });
            }
            parents.push(parent);
            cur.skip_ws();
            if !cur.eat(",") {
                break;
            }
        }
    }
    cur.expect(")")?;
    cur.expect("=")?;

    let scope = Scope { node: &name, domain: &domain, parents: &parents, declared };
    let distribution = parse_dist(cur, &scope)?;
    cur.skip_ws();
    cur.eat(";");
    cur.expect("}")?;

    Ok(NodeDef { name, description, domain, parents, distribution })
}

fn parse_states(cur: &mut Cursor<'_>, name: &str) -> Result<DomainDecl, ScriptError> {
    cur.keyword("defineState")?;
    cur.expect("(")?;
    cur.skip_ws();
    let kind_pos = cur.pos();
    let domain = if cur.at_keyword("Discrete") {
        cur.eat("Discrete");
        let mut states: Vec<String> = Vec::new();
        loop {
            cur.skip_ws();
            if !cur.eat(",") {
                break;
            }
            let (state, spos) = cur.ident("state name")?;
            if states.contains(&state) {
                return Err(ScriptError::DuplicateState { pos: spos, variable: name.into(), state });
            }
            states.push(state);
        }
        if states.len() < 2 {
            return Err(ScriptError::TooFewStates { pos: kind_pos, variable: name.into() });
        }
        DomainDecl::Discrete(states)
    } else if cur.at_keyword("Continuous") {
        cur.eat("Continuous");
        DomainDecl::Continuous
    } else {
        return Err(cur.syntax("`Discrete` or `Continuous`"));
    };
    cur.expect(")")?;
    cur.expect(";")?;
    Ok(domain)
}

struct Scope<'s> {
    node: &'s str,
    domain: &'s DomainDecl,
    parents: &'s [String],
    declared: &'s HashMap<String, DomainDecl>,
}

impl Scope<'_> {
    fn check_reference(&self, name: &str, pos: Pos) -> Result<(), ScriptError> {
        if self.parents.iter().any(|p| p == name) || self.declared.contains_key(name) {
            Ok(())
        } else {
            Err(ScriptError::UndeclaredReference { pos, name: name.into() })
        }
    }
}

fn parse_dist(cur: &mut Cursor<'_>, scope: &Scope<'_>) -> Result<DistExpr, ScriptError> {
    if !cur.at_keyword("if") {
        return Ok(match parse_leaf(cur, scope)? {
            LeafDist::Table(t) => DistExpr::Table(t),
            LeafDist::Gaussian(g) => DistExpr::Gaussian(g),
        });
    }
    let mut branches = Vec::new();
    cur.keyword("if")?;
    loop {
        let guard = parse_guard(cur, scope)?;
        let body = parse_leaf(cur, scope)?;
        branches.push(Branch { guard, body });
        if !cur.at_keyword("else") {
            break;
        }
        cur.keyword("else")?;
        if cur.at_keyword("if") {
            cur.keyword("if")?;
            continue;
        }
        let body = parse_leaf(cur, scope)?;
        branches.push(Branch { guard: Vec::new(), body });
        break;
    }
    Ok(DistExpr::Conditional(branches))
}

fn parse_guard(cur: &mut Cursor<'_>, scope: &Scope<'_>) -> Result<Vec<GuardTest>, ScriptError> {
    cur.expect("(")?;
    let mut tests = Vec::new();
    loop {
        let (variable, vpos) = cur.ident("parent name")?;
        scope.check_reference(&variable, vpos)?;
        cur.expect("==")?;
        let (state, spos) = cur.ident("state name")?;
        if let Some(DomainDecl::Discrete(states)) = scope.declared.get(&variable) {
            if !states.contains(&state) {
                return Err(ScriptError::UnknownStateReference { pos: spos, variable, state });
            }
        }
        if matches!(scope.declared.get(&variable), Some(DomainDecl::Continuous)) {
            return Err(ScriptError::KindMismatch {
                pos: vpos,
                message: format!("guard tests continuous variable `{variable}`"),
            });
        }
        tests.push(GuardTest { variable, state });
        cur.skip_ws();
        if !cur.eat("&&") {
            break;
        }
    }
    cur.expect(")")?;
    Ok(tests)
}

fn parse_leaf(cur: &mut Cursor<'_>, scope: &Scope<'_>) -> Result<LeafDist, ScriptError> {
    cur.skip_ws();
    let pos = cur.pos();
    let leaf = if cur.at_keyword("NormalDist") {
        LeafDist::Gaussian(parse_normal(cur, scope)?)
    } else {
        cur.expect("{")?;
        if cur.at_keyword("NormalDist") {
            let g = parse_normal(cur, scope)?;
            cur.skip_ws();
            cur.eat(";");
            cur.expect("}")?;
            LeafDist::Gaussian(g)
        } else {
            LeafDist::Table(parse_table_body(cur, scope)?)
        }
    };
    match (scope.domain, &leaf) {
        (DomainDecl::Discrete(_), LeafDist::Gaussian(_)) => Err(ScriptError::KindMismatch {
            pos,
            message: format!("discrete node `{}` given a NormalDist", scope.node),
        }),
        (DomainDecl::Continuous, LeafDist::Table(_)) => Err(ScriptError::KindMismatch {
            pos,
            message: format!("continuous node `{}` given a probability table", scope.node),
        }),
        _ => Ok(leaf),
    }
}

/// Parses table entries after the opening brace, through the closing brace.
fn parse_table_body(cur: &mut Cursor<'_>, scope: &Scope<'_>) -> Result<TableLiteral, ScriptError> {
    let open_pos = cur.pos();
    let states: &[String] = scope.domain.states().unwrap_or(&[]);
    let mut values: Vec<Option<f64>> = vec![None; states.len()];
    loop {
        cur.skip_ws();
        if cur.eat("}") {
            break;
        }
        let (state, spos) = cur.ident("state name or `}`")?;
        let Some(idx) = states.iter().position(|s| *s == state) else {
            if scope.domain.states().is_none() {
                return Err(ScriptError::KindMismatch {
                    pos: spos,
                    message: format!("continuous node `{}` given a probability table", scope.node),
                });
            }
            return Err(ScriptError::UnknownStateReference { pos: spos, variable: scope.node.into(), state });
        };
        if values[idx].is_some() {
            return Err(ScriptError::DuplicateState { pos: spos, variable: scope.node.into(), state });
        }
        cur.expect(":")?;
        let (value, vpos) = cur.number()?;
        if !(0.0..=1.0).contains(&value) {
            return Err(ScriptError::ProbabilityOutOfRange { pos: vpos, value });
        }
        values[idx] = Some(value);
        cur.skip_ws();
        if !(cur.eat(";") || cur.eat(",")) {
            cur.expect("}")?;
            break;
        }
    }
    let mut probabilities = Vec::with_capacity(states.len());
    for (state, value) in states.iter().zip(values) {
        match value {
            Some(v) => probabilities.push(v),
            None => {
                return Err(ScriptError::MissingState {
                    pos: open_pos,
                    variable: scope.node.into(),
                    state: state.clone(),
                })
            }
        }
    }
    Ok(TableLiteral { probabilities })
}

fn parse_normal(cur: &mut Cursor<'_>, scope: &Scope<'_>) -> Result<GaussianLiteral, ScriptError> {
    cur.keyword("NormalDist")?;
    cur.expect("(")?;
    let (mean, _) = cur.number()?;
    let mut terms = Vec::new();
    loop {
        cur.skip_ws();
        let sign = if cur.eat("+") {
            1.0
        } else if cur.eat("-") {
            -1.0
        } else {
            break;
        };
        let (magnitude, _) = cur.number()?;
        cur.expect("*")?;
        let (parent, ppos) = cur.ident("parent name")?;
        scope.check_reference(&parent, ppos)?;
        if matches!(scope.declared.get(&parent), Some(DomainDecl::Discrete(_))) {
            return Err(ScriptError::KindMismatch {
                pos: ppos,
                message: format!("linear term uses discrete variable `{parent}`"),
            });
        }
        terms.push(LinearTerm { coefficient: sign * magnitude, parent });
    }
    cur.expect(",")?;
    let (variance, vpos) = cur.number()?;
    if !(variance > 0.0) {
        return Err(ScriptError::NonPositiveVariance { pos: vpos, value: variance });
    }
    cur.expect(")")?;
    Ok(GaussianLiteral { mean, terms, variance })
}
