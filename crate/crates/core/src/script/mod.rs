//! The `.bns` model script language and the `.bne` evidence format.

mod ast;
mod error;
mod evidence;
mod parser;
mod writer;

pub use ast::*;
pub use error::{Pos, ScriptError};
pub use evidence::{parse_evidence, Evidence, Observation};
pub use parser::parse_model;
pub use writer::serialize_model;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{SCRIPT1, SCRIPT2};

    #[test]
    fn script1_structure() {
        let ast = parse_model(SCRIPT1).unwrap();
        assert_eq!(ast.nodes.len(), 2);
        let evd = &ast.nodes[0];
        assert_eq!(evd.name, "EbolaVirusDisease");
        assert_eq!(evd.description, "Description");
        assert_eq!(evd.domain, DomainDecl::Discrete(vec!["has".into(), "not".into()]));
        assert_eq!(evd.distribution, DistExpr::Table(TableLiteral { probabilities: vec![0.1, 0.9] }));

        let haem = &ast.nodes[1];
        assert_eq!(haem.parents, vec!["EbolaVirusDisease".to_string()]);
        let DistExpr::Conditional(branches) = &haem.distribution else { panic!("expected branches") };
        assert_eq!(branches.len(), 2);
        assert_eq!(branches[0].guard, vec![GuardTest { variable: "EbolaVirusDisease".into(), state: "has".into() }]);
        assert_eq!(branches[0].body, LeafDist::Table(TableLiteral { probabilities: vec![0.9, 0.1] }));
        assert_eq!(branches[1].body, LeafDist::Table(TableLiteral { probabilities: vec![0.01, 0.99] }));
    }

    #[test]
    fn script2_has_continuous_fever() {
        let ast = parse_model(SCRIPT2).unwrap();
        let fever = ast.node("Fever").unwrap();
        assert_eq!(fever.domain, DomainDecl::Continuous);
        let DistExpr::Conditional(branches) = &fever.distribution else { panic!() };
        let means: Vec<(f64, f64)> = branches
            .iter()
            .map(|b| match &b.body {
                LeafDist::Gaussian(g) => (g.mean, g.variance),
                _ => panic!(),
            })
            .collect();
        assert_eq!(means, vec![(103.0, 1.0), (98.6, 1.0)]);
    }

    #[test]
    fn empty_program() {
        assert_eq!(parse_model("").unwrap().nodes.len(), 0);
        assert_eq!(parse_model("  \n // nothing\n").unwrap().nodes.len(), 0);
        assert_eq!(serialize_model(&ModelAst::default()), "");
    }

    #[test]
    fn round_trips_fixtures() {
        for src in [SCRIPT1, SCRIPT2] {
            let ast = parse_model(src).unwrap();
            let text = serialize_model(&ast);
            assert_eq!(parse_model(&text).unwrap(), ast);
        }
        let text = serialize_model(&parse_model(SCRIPT2).unwrap());
        assert!(text.contains("NormalDist(103, 1.0)"), "{text}");
    }

    #[test]
    fn table_rows_normalized_to_declaration_order() {
        let src = "defineNode(A); { defineState(Discrete, a1, a2); p(A) = {a2: 0.8, a1: 0.2} }";
        let ast = parse_model(src).unwrap();
        assert_eq!(ast.nodes[0].distribution, DistExpr::Table(TableLiteral { probabilities: vec![0.2, 0.8] }));
        assert_eq!(ast.nodes[0].description, "");
    }

    #[test]
    fn linear_terms_and_else() {
        let src = "defineNode(X); { defineState(Continuous); p(X) = NormalDist(0, 2.0); }
            defineNode(D); { defineState(Discrete, d1, d2); p(D) = {d1: 0.5; d2: 0.5;} }
            defineNode(Y); { defineState(Continuous); p(Y | D, X) =
                if (D == d1) { NormalDist(-1.5 + 2*X - 0.25*X, 1e-2) } else NormalDist(3, 4) }";
        let ast = parse_model(src).unwrap();
        let y = ast.node("Y").unwrap();
        let DistExpr::Conditional(b) = &y.distribution else { panic!() };
        assert!(b[1].guard.is_empty());
        let LeafDist::Gaussian(g) = &b[0].body else { panic!() };
        assert_eq!(g.mean, -1.5);
        assert_eq!(g.terms[1].coefficient, -0.25);
        assert_eq!(g.variance, 0.01);
        assert_eq!(parse_model(&serialize_model(&ast)).unwrap(), ast);
    }

    #[test]
    fn positioned_errors() {
        let err = parse_model("defineNode(A) {").unwrap_err();
        assert!(matches!(err, ScriptError::Syntax { .. }));
        let err = parse_model("defineNode(A); {\n defineState(Discrete, a, b);\n p(A) = {a: 1.5; b: 0.5;} }")
            .unwrap_err();
        assert_eq!(err, ScriptError::ProbabilityOutOfRange { pos: Pos { line: 3, column: 13 }, value: 1.5 });

        let dup = format!("{SCRIPT1}\n{SCRIPT1}");
        assert!(matches!(parse_model(&dup).unwrap_err(), ScriptError::DuplicateNode { .. }));

        let bad_state = SCRIPT1.replace("EbolaVirusDisease == not", "EbolaVirusDisease == maybe");
        let err = parse_model(&bad_state).unwrap_err();
        assert!(matches!(err, ScriptError::UnknownStateReference { ref state, .. } if state == "maybe"));
        assert_eq!(err.pos().line, 14);

        let one_state = "defineNode(A); { defineState(Discrete, a); p(A) = {a: 1.0;} }";
        assert!(matches!(parse_model(one_state).unwrap_err(), ScriptError::TooFewStates { .. }));

        let missing = "defineNode(A); { defineState(Discrete, a, b); p(A) = {a: 1.0;} }";
        assert!(matches!(parse_model(missing).unwrap_err(), ScriptError::MissingState { .. }));

        let undeclared = "defineNode(A); { defineState(Discrete, a, b); p(A) = if (B == b1) {a: 1; b: 0;} }";
        assert!(matches!(parse_model(undeclared).unwrap_err(), ScriptError::UndeclaredReference { .. }));

        let zero_var = "defineNode(X); { defineState(Continuous); p(X) = NormalDist(1, 0.0) }";
        assert!(matches!(parse_model(zero_var).unwrap_err(), ScriptError::NonPositiveVariance { .. }));

        let wrong_kind = "defineNode(X); { defineState(Continuous); p(X) = {a: 1.0;} }";
        assert!(matches!(parse_model(wrong_kind).unwrap_err(), ScriptError::KindMismatch { .. }));
    }

    #[test]
    fn evidence_parsing() {
        let e = parse_evidence("A = a1").unwrap();
        assert_eq!(e.get("A"), Some(&Observation::State("a1".into())));
        assert!(parse_evidence("").unwrap().is_empty());

        let e = parse_evidence("# observed today\nFever = 100.0\nEbolaVirusDisease = has\n").unwrap();
        let expected = Evidence::new().with_real("Fever", 100.0).with_state("EbolaVirusDisease", "has");
        assert_eq!(e, expected);

        let e = parse_evidence("T = -2.5;\n\n").unwrap();
        assert_eq!(e.get("T"), Some(&Observation::Real(-2.5)));

        let err = parse_evidence("A = a1\nA = a2").unwrap_err();
        assert!(matches!(err, ScriptError::DuplicateAssignment { pos: Pos { line: 2, column: 1 }, .. }));
        assert!(matches!(parse_evidence("A a1").unwrap_err(), ScriptError::Syntax { .. }));
        assert!(matches!(parse_evidence("A =\nb").unwrap_err(), ScriptError::Syntax { .. }));
        assert!(matches!(parse_evidence("A = b c").unwrap_err(), ScriptError::Syntax { .. }));
    }

    #[test]
    fn evidence_display_reparses() {
        let e = Evidence::new().with_real("Fever", 100.25).with_state("A", "a1");
        assert_eq!(parse_evidence(&e.to_string()).unwrap(), e);
    }
}
