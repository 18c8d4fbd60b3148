//! The example corpus: parsing round trips and analysis verdicts.

use std::time::{Duration, Instant};

use termlab_core::confluence::{analyze_confluence, non_confluence_witness, ConfluenceConfig, Reason, Verdict};
use termlab_core::critical::{critical_pairs, joinable};
use termlab_core::termination::{
    check_certificate, check_loop, check_poly, poly_evidence, prove_termination, Answer, Method, PolyInterpretation,
    Template, TerminationConfig,
};
use termlab_core::{parse_problem, print_problem, ParseError, ProblemFile};

fn read(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../corpus/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn corpus(name: &str) -> ProblemFile {
    parse_problem(&read(name)).unwrap()
}

#[test]
fn every_file_round_trips() {
    let dir = format!("{}/../../corpus", env!("CARGO_MANIFEST_DIR"));
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("trs") {
            continue;
        }
        let text = std::fs::read_to_string(&path).unwrap();
        match parse_problem(&text) {
            Ok(p) => {
                let again = parse_problem(&print_problem(&p)).unwrap();
                assert_eq!(again.rules, p.rules, "{}", path.display());
                assert_eq!(again.equations, p.equations, "{}", path.display());
                seen += 1;
            }
            Err(ParseError::UnsupportedTheory { theory, .. }) => {
                assert!(path.ends_with("chameleon.trs"));
                assert_eq!(theory, "AC p");
            }
            Err(e) => panic!("{}: {e}", path.display()),
        }
    }
    assert!(seen >= 10);
}

#[test]
fn bean_game() {
    let r1 = corpus("beans1.trs").trs().unwrap();
    let start = Instant::now();
    let report = prove_termination(&r1, &TerminationConfig::default()).unwrap();
    assert!(start.elapsed() < Duration::from_secs(1));
    assert_eq!(report.answer, Answer::Yes);
    assert!(check_certificate(report.certificate.as_ref().unwrap(), &r1));
    assert_eq!(critical_pairs(&r1).len(), 8);
    let c = analyze_confluence(&r1, &ConfluenceConfig::default());
    assert_eq!((c.verdict, c.reason), (Verdict::Yes, Reason::NewmanCriticalPairs));
}

#[test]
fn modified_bean_game() {
    let r2 = corpus("beans2.trs").trs().unwrap();
    let given = PolyInterpretation::new([("b", vec![1, 4]), ("w", vec![1, 1])]);
    assert_eq!(check_poly(&given, &r2), Ok(true));
    let ev = poly_evidence(&given, &r2);
    assert_eq!((ev[0].lhs.as_str(), ev[0].rhs.as_str()), ("16x + 5", "x + 4"));
    let cfg = TerminationConfig {
        method: Method::Poly,
        template: Template::parse("b = 4*x1 + _").unwrap(),
        ..TerminationConfig::default()
    };
    let report = prove_termination(&r2, &cfg).unwrap();
    assert_eq!(report.answer, Answer::Yes);
    assert!(check_certificate(report.certificate.as_ref().unwrap(), &r2));
    assert_eq!(analyze_confluence(&r2, &ConfluenceConfig::default()).verdict, Verdict::Yes);
}

#[test]
fn primes() {
    let p = corpus("primes.trs");
    let trs = p.trs().unwrap();
    let c = analyze_confluence(&trs, &ConfluenceConfig::default());
    assert_eq!((c.verdict, c.reason), (Verdict::Yes, Reason::Orthogonal));
    let t = prove_termination(&trs, &TerminationConfig::default()).unwrap();
    assert_eq!(t.answer, Answer::No);
    let w = t.loop_witness.unwrap();
    assert_eq!(w.start.root().map(|f| f.to_string()), Some("from".to_string()));
    assert!(check_loop(&w, &trs));
}

#[test]
fn shuffle_needs_more_than_simple_orders() {
    let trs = corpus("shuffle.trs").trs().unwrap();
    for method in [Method::Poly, Method::Lpo, Method::Kbo] {
        let cfg = TerminationConfig {
            method,
            ..TerminationConfig::default()
        };
        assert_eq!(prove_termination(&trs, &cfg).unwrap().answer, Answer::Maybe, "{method}");
    }
}

#[test]
fn locally_confluent_but_not_confluent() {
    for (name, top, nfs) in [("fort_g.trs", "g(g(g(g(c))))", ["g(c)", "c"]), ("ars.trs", "a", ["c", "d"])] {
        let trs = corpus(name).trs().unwrap();
        for cp in critical_pairs(&trs) {
            assert!(joinable(&cp.left, &cp.right, &trs, 4, 10_000).unwrap().is_joined(), "{name}");
        }
        let w = non_confluence_witness(&trs, 8, 50_000).unwrap().unwrap();
        assert_eq!(w.top.to_string(), top);
        assert_eq!([w.left.to_string(), w.right.to_string()], nfs.map(String::from));
        assert!(w.check(&trs));
        assert_eq!(analyze_confluence(&trs, &ConfluenceConfig::default()).verdict, Verdict::No);
    }
}
