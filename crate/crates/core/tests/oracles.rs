//! Independent oracles: brute-force longest paths, exhaustive word
//! enumeration, canonical strategy annotations and bounded conversion search.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use termlab_core::annotation::{annotated_normalize, annotated_step, normalize_incremental, Annotation};
use termlab_core::completion::{auto_complete, decide_validity, symbols_in_order, CompletionOutcome, OrderParams, ReductionOrder};
use termlab_core::complexity::{basic_terms, dh, dc_empirical, finite_differences, ground_terms, rc_empirical, Dh, DhSolver};
use termlab_core::rewrite::{step, successors};
use termlab_core::term::match_pattern;
use termlab_core::{parse_problem, Equation, Position, ProblemFile, Strategy, Term, Trs};

fn corpus(name: &str) -> ProblemFile {
    let path = format!("{}/../../corpus/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_problem(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn word(letters: &str, tail: &str) -> Term {
    let ls: Vec<String> = letters.chars().map(|c| c.to_string()).collect();
    Term::word(&ls, Term::constant(tail))
}

/// Longest path by explicit graph construction and Kahn's algorithm.
fn longest_path_oracle(t: &Term, trs: &Trs) -> Option<usize> {
    let mut index: HashMap<Term, usize> = HashMap::new();
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::from([t.clone()]);
    index.insert(t.clone(), 0);
    edges.push(Vec::new());
    let mut terms = vec![t.clone()];
    while let Some(u) = queue.pop_front() {
        let i = index[&u];
        for (_, v) in successors(&u, trs) {
            let j = *index.entry(v.clone()).or_insert_with(|| {
                terms.push(v.clone());
                edges.push(Vec::new());
                queue.push_back(v.clone());
                terms.len() - 1
            });
            edges[i].push(j);
        }
        assert!(terms.len() < 500_000, "oracle graph too large");
    }
    let n = terms.len();
    let mut indeg = vec![0usize; n];
    for es in &edges {
        for &j in es {
            indeg[j] += 1;
        }
    }
    let mut order = Vec::new();
    let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    while let Some(i) = ready.pop() {
        order.push(i);
        for &j in &edges[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                ready.push(j);
            }
        }
    }
    if order.len() < n {
        return None; // cycle
    }
    let mut height = vec![0usize; n];
    for &i in order.iter().rev() {
        height[i] = edges[i].iter().map(|&j| height[j] + 1).max().unwrap_or(0);
    }
    Some(height[0])
}

fn bean_words(n: usize) -> Vec<String> {
    (0..1u32 << n)
        .map(|bits| (0..n).map(|k| if bits >> k & 1 == 1 { 'b' } else { 'w' }).collect())
        .collect()
}

#[test]
fn bean_game_heights_are_linear() {
    let r1 = corpus("beans1.trs").trs().unwrap();
    let mut solver = DhSolver::new(&r1, 100_000);
    for n in 1..=8 {
        for w in bean_words(n) {
            let t = word(&w, "e");
            assert_eq!(solver.height(&t).unwrap(), Some(n - 1), "{w}");
            assert_eq!(longest_path_oracle(&t, &r1), Some(n - 1), "{w}");
        }
    }
}

#[test]
fn memoized_heights_match_oracle_on_small_terms() {
    let r1 = corpus("beans1.trs").trs().unwrap();
    for n in 1..=6 {
        for t in ground_terms(&r1, n) {
            let value = dh(&t, &r1, 100_000).unwrap().value();
            assert_eq!(value, longest_path_oracle(&t, &r1), "{t}");
            // each step lowers the height by at least one
            for (_, u) in successors(&t, &r1) {
                assert!(value.unwrap() > dh(&u, &r1, 100_000).unwrap().value().unwrap());
            }
        }
    }
}

#[test]
fn modified_beans_grow_exponentially() {
    let r2 = corpus("beans2.trs").trs().unwrap();
    let mut last = 0usize;
    for n in 1..=4 {
        let t = Term::word(&vec!["b"; n], Term::app("w", vec![Term::constant("e")]));
        let Dh::Finite { value, derivation } = dh(&t, &r2, 500_000).unwrap() else { panic!() };
        assert_eq!(Some(value), longest_path_oracle(&t, &r2), "n = {n}");
        assert_eq!(derivation.len(), value);
        if n > 1 {
            assert!(value >= 3 * last, "dh grows by a factor of at least 3: {last} -> {value}");
        }
        last = value;
    }
}

fn list(elems: &[&str]) -> Term {
    elems
        .iter()
        .rev()
        .fold(Term::constant("nil"), |acc, e| Term::app(":", vec![Term::constant(e), acc]))
}

#[test]
fn shuffle_runtime_complexity() {
    let r = corpus("shuffle.trs").trs().unwrap();
    let digits = ["1", "2", "3", "4", "5", "6"];
    let heights: Vec<i64> = (1..=6)
        .map(|k| {
            let t = Term::app("shuffle", vec![list(&digits[..k])]);
            let h = dh(&t, &r, 500_000).unwrap().value().unwrap();
            assert_eq!(Some(h), longest_path_oracle(&t, &r));
            h as i64
        })
        .collect();
    let third = finite_differences(&heights, 3);
    assert!(third.windows(2).skip(third.len().saturating_sub(2)).all(|w| w[0] == w[1]), "{heights:?} {third:?}");
    // rc at the sizes of lists of length 1..5 (shuffle(list) has size 2k + 2)
    for k in 1..=5 {
        let n = 2 * k + 2;
        let p = rc_empirical(&r, n, 500_000).unwrap();
        let oracle = basic_terms(&r, n)
            .iter()
            .map(|t| longest_path_oracle(t, &r).unwrap())
            .max()
            .unwrap();
        assert_eq!(p.value, oracle, "n = {n}");
        assert_eq!(longest_path_oracle(&p.witness, &r), Some(p.value));
        if n <= 8 {
            assert!(p.value <= dc_empirical(&r, n, 500_000).unwrap().value);
        }
    }
}

fn small_terms(trs: &Trs, max: usize) -> Vec<Term> {
    (1..=max).flat_map(|n| ground_terms(trs, n)).collect()
}

#[test]
fn canonical_annotations_reproduce_strategies() {
    for name in ["beans1.trs", "beans2.trs", "primes.trs", "bool.trs", "shuffle.trs", "append.trs", "fort_g.trs", "ars.trs", "ff.trs"] {
        let trs = corpus(name).trs().unwrap();
        let inner = Annotation::innermost(&trs);
        let outer = Annotation::outermost(&trs);
        for t in small_terms(&trs, 6) {
            let li = step(&t, &trs, Strategy::LeftmostInnermost).map(|(u, rx)| (u, rx.position, rx.rule));
            let ai = annotated_step(&t, &trs, &inner).map(|(u, rx)| (u, rx.position, rx.rule));
            assert_eq!(li, ai, "{name}: innermost on {t}");
            let lo = step(&t, &trs, Strategy::LeftmostOutermost).map(|(u, rx)| (u, rx.position, rx.rule));
            let ao = annotated_step(&t, &trs, &outer).map(|(u, rx)| (u, rx.position, rx.rule));
            assert_eq!(lo, ao, "{name}: outermost on {t}");
        }
    }
}

#[test]
fn incremental_normalize_agrees() {
    let bool_file = corpus("bool.trs");
    let bool_trs = bool_file.trs().unwrap();
    let ann_text = std::fs::read_to_string(format!("{}/../../corpus/bool.ann", env!("CARGO_MANIFEST_DIR"))).unwrap();
    let given = termlab_core::annotation::parse_annotation(&ann_text).unwrap();
    let mut cases: Vec<(Trs, Annotation)> = vec![(bool_trs, given)];
    for name in ["beans1.trs", "primes.trs", "shuffle.trs", "append.trs"] {
        let trs = corpus(name).trs().unwrap();
        let a = Annotation::innermost(&trs);
        cases.push((trs, a));
    }
    for (trs, a) in &cases {
        for t in small_terms(trs, 6) {
            let x = annotated_normalize(&t, trs, a, 40).unwrap();
            let y = normalize_incremental(&t, trs, a, 40).unwrap();
            assert_eq!(x, y, "{t}");
            if x.outcome == termlab_core::Outcome::Stuck {
                panic!("a full annotation never gets stuck on a reducible term: {t}");
            }
        }
    }
}

/// All ways of rewriting `t` with one equation in either direction.
fn equational_neighbours(t: &Term, eqs: &[Equation]) -> Vec<Term> {
    let mut out = Vec::new();
    for p in t.fun_positions() {
        let sub = t.get(&p).unwrap();
        for e in eqs {
            for (l, r) in [(&e.lhs, &e.rhs), (&e.rhs, &e.lhs)] {
                if l.is_var() {
                    continue;
                }
                if let Some(s) = match_pattern(l, sub) {
                    if r.vars().iter().all(|x| s.get(x).is_some()) {
                        out.push(t.replace_at(&p, s.apply(r)).unwrap());
                    }
                }
            }
        }
    }
    out
}

/// Bounded search for an `eqs`-conversion between two ground terms.
fn convertible(u: &Term, v: &Term, eqs: &[Equation], max_size: usize) -> bool {
    let mut seen: HashSet<Term> = HashSet::from([u.clone()]);
    let mut queue = VecDeque::from([u.clone()]);
    while let Some(s) = queue.pop_front() {
        if s == *v {
            return true;
        }
        for n in equational_neighbours(&s, eqs) {
            if n.size() <= max_size && seen.insert(n.clone()) {
                queue.push_back(n);
            }
        }
    }
    false
}

fn gene_words(max_len: usize) -> Vec<Term> {
    let mut out = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..max_len {
        frontier = frontier
            .iter()
            .flat_map(|w| "TAGC".chars().map(move |c| format!("{w}{c}")))
            .collect();
        out.extend(frontier.iter().cloned());
    }
    out.iter().map(|w| word(w, "e")).collect()
}

#[test]
fn gene_completion_preserves_conversion() {
    let eqs = corpus("genes.trs").equations;
    let order = ReductionOrder::build("kbo", &OrderParams::default(), &symbols_in_order(&eqs)).unwrap();
    let run = auto_complete(eqs.clone(), order, 10_000).unwrap();
    let CompletionOutcome::Completed(r) = &run.outcome else { panic!("{:?}", run.outcome) };

    let milk = word("TAGCTAGCTAGCT", "e");
    let cola = word("CTGACTGACT", "e");
    let virus = word("CTGCTACTGACT", "e");
    let v = decide_validity(r, &milk, &cola, 10_000);
    assert!(v.valid && v.left_normal_form == word("T", "e"));
    let v = decide_validity(r, &milk, &virus, 10_000);
    assert!(!v.valid);
    assert_eq!((v.left_normal_form.to_string(), v.right_normal_form.to_string()), ("T(e)".into(), "T(G(T(e)))".into()));

    // every equation and rule ever present is valid in the initial theory,
    // checked on all ground instances of size at most 5
    let small = gene_words(4);
    let mut checked: HashSet<(Term, Term)> = HashSet::new();
    for st in &run.trace {
        let snapshot_eqs: Vec<Equation> = st
            .after
            .equations
            .iter()
            .map(|e| e.equation.clone())
            .chain(st.after.rules.iter().map(|r| Equation::new(r.lhs.clone(), r.rhs.clone())))
            .collect();
        for u in &small {
            for w in equational_neighbours(u, &snapshot_eqs) {
                if w.size() > 5 || !checked.insert((u.clone(), w.clone())) {
                    continue;
                }
                assert!(convertible(u, &w, &eqs, 12), "{u} = {w} is not a consequence");
            }
        }
    }
    assert!(!checked.is_empty());
    // and the final system proves the initial equations
    for u in &small {
        for w in equational_neighbours(u, &eqs) {
            assert!(decide_validity(r, u, &w, 10_000).valid, "{u} = {w}");
        }
    }
    // pairs the bounded search relates are identified by the system
    let mut classes: BTreeMap<String, Vec<Term>> = BTreeMap::new();
    for u in gene_words(3) {
        let nf = decide_validity(r, &u, &u, 10_000).left_normal_form.to_string();
        classes.entry(nf).or_default().push(u);
    }
    let reps: Vec<&Term> = classes.values().map(|c| &c[0]).collect();
    for (i, a) in reps.iter().enumerate() {
        for b in &reps[i + 1..] {
            assert!(!convertible(a, b, &eqs, 10), "{a} and {b} have different normal forms");
        }
    }
}

#[test]
fn primes_outermost_evaluation() {
    let p = corpus("primes.trs");
    let trs = p.trs().unwrap();
    let t = p.parse_term("take(s(s(0)),primes)").unwrap();
    let lo = termlab_core::normalize(&t, &trs, Strategy::LeftmostOutermost, 1000);
    assert!(lo.is_normal_form());
    assert_eq!(lo.term.to_string(), ":(s(s(0)),:(s(s(s(0))),nil))");
    assert_eq!(lo.steps.len(), 9);
    let li = termlab_core::normalize(&t, &trs, Strategy::LeftmostInnermost, 1000);
    assert_eq!(li.outcome, termlab_core::Outcome::FuelExhausted);
    // a replayable trace
    let mut cur = t.clone();
    for s in &lo.steps {
        let rule = &trs.rules()[trs.rule_index(&s.rule).unwrap()];
        let sub = cur.get(&s.position).unwrap();
        let sigma = match_pattern(&rule.lhs, sub).unwrap();
        cur = cur.replace_at(&s.position, sigma.apply(&rule.rhs)).unwrap();
        assert_eq!(cur, s.result);
    }
    let _ = Position::root();
}
