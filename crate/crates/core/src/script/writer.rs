use std::fmt::Write as _;

use super::ast::*;

/// Renders a syntax tree in canonical layout. Re-parsing the output yields
/// an equal tree.
pub fn serialize_model(ast: &ModelAst) -> String {
    let mut out = String::new();
    for (i, node) in ast.nodes.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        write_node(&mut out, node);
    }
    out
}

fn write_node(out: &mut String, node: &NodeDef) {
    if node.description.is_empty() {
        let _ = writeln!(out, "defineNode({});", node.name);
    } else {
        let _ = writeln!(out, "defineNode({}, {});", node.name, node.description);
    }
    out.push_str("{\n");
    match &node.domain {
        DomainDecl::Discrete(states) => {
            let _ = writeln!(out, "    defineState(Discrete, {});", states.join(", "));
        }
        DomainDecl::Continuous => out.push_str("    defineState(Continuous);\n"),
    }
    if node.parents.is_empty() {
        let _ = writeln!(out, "    p({}) =", node.name);
    } else {
        let _ = writeln!(out, "    p({} | {}) =", node.name, node.parents.join(", "));
    }
    let states = node.domain.states().unwrap_or(&[]);
    match &node.distribution {
        DistExpr::Table(t) => {
            let _ = writeln!(out, "        {}", table(states, t));
        }
        DistExpr::Gaussian(g) => {
            let _ = writeln!(out, "        {}", normal(g));
        }
        DistExpr::Conditional(branches) => {
            for (i, b) in branches.iter().enumerate() {
                let keyword = match (i, b.guard.is_empty()) {
                    (0, _) => "if ",
                    (_, false) => "else if ",
                    (_, true) => "else",
                };
                let guard = if b.guard.is_empty() {
                    String::new()
                } else {
                    let tests: Vec<String> =
                        b.guard.iter().map(|t| format!("{} == {}", t.variable, t.state)).collect();
                    format!("({})", tests.join(" && "))
                };
                let _ = writeln!(out, "        {keyword}{guard}");
                let body = match &b.body {
                    LeafDist::Table(t) => table(states, t),
                    LeafDist::Gaussian(g) => format!("{{ {} }}", normal(g)),
                };
                let _ = writeln!(out, "            {body}");
            }
        }
    }
    out.push_str("}\n");
}

fn table(states: &[String], t: &TableLiteral) -> String {
    let mut s = String::from("{");
    for (i, (state, p)) in states.iter().zip(&t.probabilities).enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{state}: {p:?};");
    }
    s.push('}');
    s
}

fn normal(g: &GaussianLiteral) -> String {
    let mut s = format!("NormalDist({}", plain(g.mean));
    for t in &g.terms {
        let sign = if t.coefficient.is_sign_negative() { '-' } else { '+' };
        let _ = write!(s, " {sign} {}*{}", plain(t.coefficient.abs()), t.parent);
    }
    let _ = write!(s, ", {:?})", g.variance);
    s
}

/// Integral values print without a fractional part; everything else uses the
/// shortest representation that round-trips.
pub(crate) fn plain(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{x}")
    } else {
        format!("{x:?}")
    }
}
