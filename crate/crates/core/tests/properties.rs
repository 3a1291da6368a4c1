use opprog_core::annotate::{
    canonicalize, dp_annotate, enumerate_programs, EnumerateConfig, RationaleTrace, SearchConfig,
};
use opprog_core::categorize::{classify, score_categories, CategoryLexicon};
use opprog_core::evalkit::{match_options, MatchConfig};
use opprog_core::opcore::{evaluate, parse_program, validate_refs, ArgRef, ConstTable, OpCall, OpRegistry, Program};
use opprog_core::textnum::{extract_numbers, extract_option_values, number_values};
use opprog_core::{Category, Tolerance};
use proptest::prelude::*;

fn arg() -> impl Strategy<Value = ArgRef> {
    prop_oneof![
        (0usize..12).prop_map(ArgRef::ProblemNumber),
        (0usize..12).prop_map(ArgRef::Intermediate),
        prop::sample::select(vec!["const_pi", "const_100", "const_0_2778", "const_3_6", "const_1"])
            .prop_map(|s| ArgRef::Constant(s.to_string())),
        (-1.0e6f64..1.0e6).prop_map(ArgRef::Literal),
    ]
}

fn program() -> impl Strategy<Value = Program> {
    let call =
        ("[a-z][a-z_]{0,20}[a-z]", prop::collection::vec(arg(), 1..4)).prop_map(|(op, args)| OpCall::new(op, args));
    prop::collection::vec(call, 1..8).prop_map(Program::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn serialize_parse_identity(p in program()) {
        let text = p.to_string();
        let back = parse_program(&text).unwrap();
        prop_assert_eq!(back.to_string(), text);
        prop_assert_eq!(back, p);
    }

    #[test]
    fn parser_never_panics(s in "\\PC{0,60}") {
        let _ = parse_program(&s);
    }

    #[test]
    fn evaluation_is_deterministic(a in -1e4f64..1e4, b in -1e4f64..1e4) {
        let reg = OpRegistry::shipped();
        let consts = ConstTable::shipped();
        let p = parse_program("add(n0,n1)|divide(#0,n1)|power(#1,const_2)|sqrt(#2)").unwrap();
        let x = evaluate(&p, &[a, b], &reg, &consts);
        let y = evaluate(&p, &[a, b], &reg, &consts);
        match (x, y) {
            (Ok(x), Ok(y)) => prop_assert!(x.step_values.iter().zip(&y.step_values).all(|(u, v)| u.to_bits() == v.to_bits())),
            (x, y) => prop_assert_eq!(x.is_err(), y.is_err()),
        }
    }

    #[test]
    fn arithmetic_identities(a in -1e6f64..1e6, b in -1e6f64..1e6) {
        let reg = OpRegistry::shipped();
        let consts = ConstTable::shipped();
        let run = |text: &str| evaluate(&parse_program(text).unwrap(), &[a, b], &reg, &consts).map(|t| t.final_value);
        prop_assert_eq!(run("add(n0,n1)").unwrap(), run("add(n1,n0)").unwrap());
        prop_assert_eq!(run("multiply(n0,n1)").unwrap(), run("multiply(n1,n0)").unwrap());
        prop_assert_eq!(run("subtract(n0,n0)").unwrap(), 0.0);
        if a.abs() > 1e-12 {
            prop_assert_eq!(run("divide(n0,n0)").unwrap(), 1.0);
        }
    }

    #[test]
    fn clean_references_only_fail_in_domain(p in program(), n in 0usize..6) {
        let reg = OpRegistry::shipped();
        let consts = ConstTable::shipped();
        let numbers: Vec<f64> = (0..n).map(|i| i as f64 + 1.5).collect();
        if validate_refs(&p, n, &reg, &consts).is_empty() {
            if let Err(e) = evaluate(&p, &numbers, &reg, &consts) {
                let is_domain = matches!(e, opprog_core::opcore::EvalError::Domain { .. });
                prop_assert!(is_domain, "{:?}", e);
            }
        }
    }

    #[test]
    fn decimal_constants(int in 0u32..100000, frac in 0u32..10000) {
        let text = format!("{int}.{frac}");
        let consts = ConstTable::new();
        prop_assert_eq!(consts.resolve(&format!("const_{text}")), Some(text.parse::<f64>().unwrap()));
        prop_assert_eq!(consts.resolve(&format!("const_{int}_{frac}")), Some(text.parse::<f64>().unwrap()));
    }

    #[test]
    fn fraction_value(a in 0u32..1000, b in 1u32..1000) {
        let v = number_values(&format!("take {a}/{b} of it"));
        prop_assert_eq!(v.len(), 1);
        prop_assert!((v[0] - a as f64 / b as f64).abs() <= 1e-12);
    }

    #[test]
    fn extraction_order_and_idempotence(words in prop::collection::vec(prop_oneof![
        "[a-z]{1,6}",
        (0u32..100000).prop_map(|n| n.to_string()),
        (0u32..1000, 0u32..1000).prop_map(|(a, b)| format!("{a}.{b}")),
        (1u32..100).prop_map(|n| format!("{n}%")),
    ], 0..20)) {
        let text = words.join(" ");
        let mentions = extract_numbers(&text);
        prop_assert!(mentions.windows(2).all(|w| w[0].span.0 < w[1].span.0));
        let rebuilt: Vec<String> = mentions.iter().map(|m| m.surface.clone()).collect();
        let again = number_values(&rebuilt.join(" , "));
        prop_assert_eq!(again, mentions.iter().map(|m| m.value).collect::<Vec<_>>());
    }

    #[test]
    fn tolerance_monotone(v in -1000f64..1000.0, opts in prop::collection::vec(-1000f64..1000.0, 5), a1 in 1e-4f64..1.0, r1 in 1e-4f64..0.1, da in 0f64..1.0, dr in 0f64..0.1) {
        let strs: Vec<String> = opts.iter().zip(["a", "b", "c", "d", "e"]).map(|(o, l)| format!("{l} ) {o}")).collect();
        let options = extract_option_values(&strs);
        let small = MatchConfig { abs_tol: a1, rel_tol: r1, ..MatchConfig::default() };
        let large = MatchConfig { abs_tol: a1 + da, rel_tol: r1 + dr, ..MatchConfig::default() };
        let s = match_options(v, &options, &small);
        let l = match_options(v, &options, &large);
        prop_assert!(s.iter().all(|x| l.contains(x)));
    }
}

const VOCAB: [&str; 12] = [
    "train", "speed", "area", "circle", "profit", "loss", "coin", "dice", "water", "tank", "sum", "price",
];

fn random_lexicon(assign: &[(usize, usize)]) -> CategoryLexicon {
    let mut lex = CategoryLexicon::new();
    for &(w, c) in assign {
        let _ = lex.insert(Category::ALL[c], VOCAB[w]);
    }
    lex
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn classify_takes_argmax(assign in prop::collection::vec((0usize..12, 0usize..6), 1..12), text in prop::collection::vec(0usize..12, 0..15)) {
        let lex = random_lexicon(&assign);
        let text: Vec<&str> = text.iter().map(|&i| VOCAB[i]).collect();
        let text = text.join(" ");
        let scores = score_categories(&text, &lex);
        let label = classify(&text, &lex);
        let top = scores.scores.values().copied().max().unwrap_or(0);
        if top == 0 {
            prop_assert_eq!(label, Category::General);
        } else {
            prop_assert_eq!(scores.get(label), top);
            let first = scores.scores.iter().find(|(_, &s)| s == top).map(|(c, _)| *c).unwrap();
            prop_assert_eq!(label, first);
        }
    }

    #[test]
    fn absent_ngram_is_irrelevant(assign in prop::collection::vec((0usize..12, 0usize..6), 1..12), text in prop::collection::vec(0usize..6, 0..15), extra in 6usize..12, cat in 0usize..6) {
        let mut lex = random_lexicon(&assign);
        let words: Vec<&str> = text.iter().map(|&i| VOCAB[i]).collect();
        let text = words.join(" ");
        let before = classify(&text, &lex);
        let _ = lex.insert(Category::ALL[cat], VOCAB[extra]);
        prop_assert_eq!(classify(&text, &lex), before);
    }
}

fn arith() -> OpRegistry {
    OpRegistry::shipped()
        .subset(&["add", "subtract", "multiply", "divide"])
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn search_matches_enumeration(numbers in prop::collection::vec(1u32..12, 1..4), target in 1u32..40, len in 1usize..3) {
        let numbers: Vec<f64> = numbers.into_iter().map(f64::from).collect();
        let reg = arith();
        let consts = ConstTable::shipped();
        let cfg = SearchConfig { max_len: len, max_candidates: usize::MAX, constants: Some(vec![]), ..SearchConfig::default() };
        let dp = dp_annotate(&numbers, &RationaleTrace::default(), target as f64, &reg, &consts, &cfg).unwrap();
        let en = enumerate_programs(&numbers, &reg, &consts, target as f64, &EnumerateConfig {
            max_len: len, tolerance: cfg.answer_tol, constants: Some(vec![]), ..EnumerateConfig::default()
        }).unwrap();
        let mut a: Vec<String> = dp.programs.iter().map(|p| canonicalize(p, &reg).to_string()).collect();
        let mut b: Vec<String> = en.iter().map(|p| canonicalize(p, &reg).to_string()).collect();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn found_programs_reach_answer(numbers in prop::collection::vec(1u32..20, 2..4), target in 1u32..60) {
        let numbers: Vec<f64> = numbers.into_iter().map(f64::from).collect();
        let reg = arith();
        let consts = ConstTable::shipped();
        let cfg = SearchConfig { max_len: 2, constants: Some(vec![]), ..SearchConfig::default() };
        let set = dp_annotate(&numbers, &RationaleTrace::default(), target as f64, &reg, &consts, &cfg).unwrap();
        for p in &set.programs {
            let v = evaluate(p, &numbers, &reg, &consts).unwrap().final_value;
            prop_assert!(cfg.answer_tol.is_close(v, target as f64));
        }
    }

    #[test]
    fn irrelevant_rationale_number_keeps_programs(a in 1u32..30, b in 1u32..30, c in 1u32..30, noise in 1000u32..2000) {
        let numbers = [a as f64, b as f64, c as f64];
        let sum = (a + b) as f64;
        let answer = sum * c as f64;
        let reg = arith();
        let consts = ConstTable::shipped();
        let cfg = SearchConfig { constants: Some(vec![]), ..SearchConfig::default() };
        let base = RationaleTrace { numbers: vec![sum, answer], expressions: vec![] };
        let mut noisy = base.clone();
        noisy.numbers.insert(1, noise as f64 + 0.5);
        let before = dp_annotate(&numbers, &base, answer, &reg, &consts, &cfg).unwrap();
        let after = dp_annotate(&numbers, &noisy, answer, &reg, &consts, &cfg).unwrap();
        for p in &before.programs {
            prop_assert!(after.programs.contains(p));
        }
    }
}

#[test]
fn tolerance_is_symmetric_in_bound_only() {
    let t = Tolerance::new(0.01, 0.01);
    assert!(t.is_close(21.0005, 21.0));
    assert!(!t.is_close(21.5, 21.0));
}
