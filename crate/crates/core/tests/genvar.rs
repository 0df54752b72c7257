mod common;

use common::variation::{golden_db, goldens, item, span};

use std::path::Path;

use proptest::prelude::*;
use tsdb_core::genvar::{
    apply_variation, expand_grammar, generated_database, make_test_set, parse_directives, render_directive,
    GenvarError, ProductionGrammar, VariationDirective,
};
use tsdb_core::model::{item_length, validate_item, validate_span, AnalysisSpan, Span, TestItem, ILL_FORMED, WELL_FORMED};
use tsdb_core::storage::check_consistency;

#[test]
fn the_four_operations_reproduce_the_starred_examples() {
    for g in goldens() {
        let mut db = golden_db(&g);
        assert!(check_consistency(&db).is_empty());

        let created = make_test_set(&mut db, 1, std::slice::from_ref(&g.directive)).unwrap();
        let derived = db.item(created.derived_ids[0]).unwrap();
        assert_eq!(derived.input, g.expected);
        assert_eq!(derived.wellformedness, ILL_FORMED);
        assert_eq!(derived.length, item_length(g.expected));
        let violations = check_consistency(&db);
        assert!(violations.is_empty(), "{}: {violations:?}", g.expected);
        for s in db.spans_of(derived.item_id) {
            assert!(validate_span(&s, &derived).is_empty());
        }
    }
}

#[test]
fn span_bookkeeping_for_deletion() {
    let base = item(1, "Der Manager hält den Vortrag .");
    let spans = vec![
        span(&base, (0, 2), "NP_nom", "subj", (2, 3)),
        span(&base, (2, 3), "V_trans", "func", (0, 5)),
        span(&base, (3, 5), "NP_acc", "obj", (2, 3)),
    ];
    let v = apply_variation(&base, &spans, &VariationDirective::delete(Span::new(3, 5))).unwrap();
    let kept: Vec<(Span, Span)> = v.spans.iter().map(|s| (s.position, s.domain)).collect();
    assert_eq!(kept, vec![(Span::new(0, 2), Span::new(2, 3)), (Span::new(2, 3), Span::new(0, 3))]);
}

#[test]
fn directive_file_matches_operations() {
    let text = "replacement@2:3@viens\naddition@3@den Vortrag\ndeletion@3:5\npermutation@1:2@2:4\n";
    let parsed = parse_directives(text).unwrap();
    let expected: Vec<_> = goldens().into_iter().map(|g| g.directive).collect();
    assert_eq!(parsed, expected);
    let rendered: Vec<String> = parsed.iter().map(render_directive).collect();
    assert_eq!(rendered.join("\n") + "\n", text);
}

#[test]
fn ill_formed_source_is_rejected() {
    let mut base = item(1, "He saw the boy .");
    base.wellformedness = ILL_FORMED;
    assert!(matches!(
        apply_variation(&base, &[], &VariationDirective::delete(Span::new(0, 1))),
        Err(GenvarError::SourceNotWellFormed(1))
    ));
}

#[test]
fn bad_directives_are_rejected() {
    let base = item(1, "He saw the boy .");
    let bad = [
        VariationDirective::delete(Span::new(3, 9)),
        VariationDirective::delete(Span::new(2, 2)),
        VariationDirective::add(6, "x"),
        VariationDirective::replace(Span::new(0, 1), "  "),
        VariationDirective::permute(Span::new(1, 3), Span::new(2, 4)),
    ];
    for d in &bad {
        assert!(apply_variation(&base, &[], d).is_err(), "{d:?}");
    }
    // deleting everything leaves nothing to test
    assert!(apply_variation(&base, &[], &VariationDirective::delete(Span::new(0, 5))).is_err());
}

fn grammar(name: &str) -> ProductionGrammar {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/grammars").join(name);
    ProductionGrammar::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn grammar_fixture_regenerates_the_sample_item() {
    let items = expand_grammar(&grammar("fig1.grammar"), 100).unwrap();
    assert_eq!(items.len(), 1);
    let sample = common::sample_db();
    let expected = sample.item(common::ITEM).unwrap();
    let got = &items[0];
    assert_eq!(got.item.input, expected.input);
    assert_eq!(got.item.wellformedness, WELL_FORMED);
    assert_eq!(got.item.length, expected.length);
    let project = |spans: &[AnalysisSpan]| -> Vec<_> {
        spans
            .iter()
            .map(|s| (s.position, s.instance.clone(), s.category.clone(), s.function.clone(), s.domain))
            .collect()
    };
    assert_eq!(project(&got.spans), project(&sample.spans_of(common::ITEM)));
}

#[test]
fn malrule_fixture_adds_the_ill_formed_variant() {
    let plain = expand_grammar(&grammar("fig1.grammar"), 100).unwrap();
    let mal = expand_grammar(&grammar("fig1-malrule.grammar"), 100).unwrap();
    let inputs: Vec<(&str, i64)> = mal.iter().map(|g| (g.item.input.as_str(), g.item.wellformedness)).collect();
    assert_eq!(inputs, vec![("L' ingénieur vient .", 1), ("L' ingénieur viens .", 0)]);
    let wf1 = |items: &[tsdb_core::genvar::GeneratedItem]| -> Vec<(String, Vec<AnalysisSpan>)> {
        items
            .iter()
            .filter(|g| g.item.wellformedness == WELL_FORMED)
            .map(|g| (g.item.input.clone(), g.spans.clone()))
            .collect()
    };
    assert_eq!(wf1(&plain), wf1(&mal));

    let db = generated_database(&mal, "fr").unwrap();
    assert!(check_consistency(&db).is_empty());
    for g in &mal {
        assert!(validate_item(&g.item).is_empty());
        for s in &g.spans {
            assert!(validate_span(s, &g.item).is_empty());
        }
    }
}

#[test]
fn limit_zero_is_empty() {
    assert!(expand_grammar(&grammar("fig1-malrule.grammar"), 0).unwrap().is_empty());
    assert_eq!(expand_grammar(&grammar("fig1-malrule.grammar"), 1).unwrap().len(), 1);
}

const AGREEMENT_GRAMMAR: &str = r#"start S
depth 6
rule S -> NP VP "."
  agree NP.num VP.num
  function NP subj VP
malrule S -> NP VP "."
  function NP subj VP
rule VP -> V
  head V
rule VP -> V NP
  head V
  function NP obj V
rule NP -> DET N
  agree DET.num N.num
  head N
lex DET "the" DET num=sg
lex DET "these" DET num=pl
lex N "dog" N_sg num=sg
lex N "dogs" N_pl num=pl
lex V "sleeps" V_sg num=sg
lex V "sleep" V_pl num=pl
"#;

#[test]
fn agreement_grammar_expansion() {
    let g = ProductionGrammar::parse(AGREEMENT_GRAMMAR).unwrap();
    let plain = ProductionGrammar {
        rules: g.rules.iter().filter(|r| !r.malrule).cloned().collect(),
        ..g.clone()
    };
    let all = expand_grammar(&g, 1000).unwrap();
    let ok = expand_grammar(&plain, 1000).unwrap();
    assert!(ok.iter().all(|i| i.item.wellformedness == WELL_FORMED));
    assert!(ok.iter().any(|i| i.item.input == "the dog sleeps ."));
    assert!(ok.iter().all(|i| i.item.input != "the dog sleep ."));
    assert!(all.iter().any(|i| i.item.input == "the dog sleep ." && i.item.wellformedness == ILL_FORMED));
    // determiner/noun agreement is never relaxed
    assert!(all.iter().all(|i| !i.item.input.starts_with("the dogs")));
    for limit in [0, 1, 3, 7, 1000] {
        assert!(expand_grammar(&g, limit).unwrap().len() <= limit);
    }
    let db = generated_database(&all, "en").unwrap();
    assert!(check_consistency(&db).is_empty());
}

const WORDS: &[&str] = &["Der", "Manager", "hält", "den", "Vortrag", "He", "saw", "the", "boy", "vient", "L'", "x"];

fn arb_item() -> impl Strategy<Value = (TestItem, Vec<AnalysisSpan>)> {
    prop::collection::vec(prop::sample::select(WORDS), 1..8).prop_flat_map(|words| {
        let mut input = words.join(" ");
        input.push_str(" .");
        let base = item(7, &input);
        let n = words.len() as i64 + 1;
        let arb_span = (0..n).prop_flat_map(move |s| (Just(s), s + 1..=n));
        prop::collection::vec((arb_span.clone(), arb_span), 0..4).prop_map(move |raw| {
            let mut seen = Vec::new();
            let spans = raw
                .into_iter()
                .filter(|(p, _)| {
                    let fresh = !seen.contains(p);
                    seen.push(*p);
                    fresh
                })
                .map(|(p, d)| span(&base, p, "X", "f", d))
                .collect();
            (base.clone(), spans)
        })
    })
}

fn arb_directive(n: i64) -> impl Strategy<Value = VariationDirective> {
    let region = (0..n).prop_flat_map(move |s| (Just(s), s + 1..=n)).prop_map(|(s, e)| Span::new(s, e));
    let payload = prop::collection::vec(prop::sample::select(WORDS), 1..3).prop_map(|w| w.join(" "));
    prop_oneof![
        (region.clone(), payload.clone()).prop_map(|(r, t)| VariationDirective::replace(r, &t)),
        (0..=n, payload).prop_map(|(i, t)| VariationDirective::add(i, &t)),
        region.prop_filter("keeps a token", move |r| r.len() < n).prop_map(VariationDirective::delete),
        (0..n - 1)
            .prop_flat_map(move |a| (Just(a), a + 1..n))
            .prop_flat_map(move |(a, b)| (Just(a), Just(b), b..n))
            .prop_flat_map(move |(a, b, c)| (Just(a), Just(b), Just(c), c + 1..=n))
            .prop_map(|(a, b, c, d)| VariationDirective::permute(Span::new(a, b), Span::new(c, d))),
    ]
}

fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn variants_are_valid_and_touch_only_their_span(
        (base, spans, d) in arb_item().prop_flat_map(|(b, s)| {
            let n = b.tokens().len() as i64;
            (Just(b), Just(s), arb_directive(n))
        })
    ) {
        let mut v = match apply_variation(&base, &spans, &d) {
            Err(GenvarError::EmptyResult) => return Err(TestCaseError::reject("only punctuation left")),
            r => r.unwrap(),
        };
        v.assign_id(8);
        prop_assert!(validate_item(&v.item).is_empty(), "{:?}", validate_item(&v.item));
        prop_assert_eq!(v.item.wellformedness, ILL_FORMED);
        for s in &v.spans {
            prop_assert!(validate_span(s, &v.item).is_empty(), "{:?} {:?}", s, validate_span(s, &v.item));
        }
        let src = toks(&base.input);
        let out = toks(&v.item.input);
        let (prefix, suffix) = match &d {
            VariationDirective::Replacement { target, .. } | VariationDirective::Deletion { target } => {
                (target.start as usize, src.len() - target.end as usize)
            }
            VariationDirective::Addition { index, .. } => (*index as usize, src.len() - *index as usize),
            VariationDirective::Permutation { first, second } => {
                let (a, b, c, e) = (first.start as usize, first.end as usize, second.start as usize, second.end as usize);
                prop_assert_eq!(&out[a + (e - c) + (c - b)..e], &src[a..b]);
                prop_assert_eq!(&out[a..a + (e - c)], &src[c..e]);
                prop_assert_eq!(&out[a + (e - c)..a + (e - c) + (c - b)], &src[b..c]);
                (a, src.len() - e)
            }
        };
        prop_assert_eq!(&out[..prefix], &src[..prefix]);
        prop_assert_eq!(&out[out.len() - suffix..], &src[src.len() - suffix..]);
    }

    #[test]
    fn deletion_then_readdition_restores_the_source(
        (base, spans, region) in arb_item().prop_flat_map(|(b, s)| {
            let n = b.tokens().len() as i64;
            let region = (0..n - 1).prop_flat_map(move |s| (Just(s), s + 1..n)).prop_map(|(s, e)| Span::new(s, e));
            (Just(b), Just(s), region)
        })
    ) {
        let removed = toks(&base.input)[region.start as usize..region.end as usize].join(" ");
        let deleted = match apply_variation(&base, &spans, &VariationDirective::delete(region)) {
            Err(GenvarError::EmptyResult) => return Err(TestCaseError::reject("only punctuation left")),
            r => r.unwrap(),
        };
        let mut intermediate = deleted.item.clone();
        intermediate.wellformedness = WELL_FORMED;
        let restored = apply_variation(&intermediate, &deleted.spans, &VariationDirective::add(region.start, &removed)).unwrap();
        prop_assert_eq!(restored.item.input, base.input);
    }
}
