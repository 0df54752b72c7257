use tsdb_core::genvar::VariationDirective;
use tsdb_core::model::{item_length, AnalysisSpan, Span, TestItem, WELL_FORMED};

pub fn item(id: i64, input: &str) -> TestItem {
    TestItem {
        item_id: id,
        author: "tester".into(),
        date: "oct-26".into(),
        register: "formal".into(),
        format: "none".into(),
        origin: "invented".into(),
        difficulty: 1,
        wellformedness: WELL_FORMED,
        category: "S".into(),
        input: input.into(),
        length: item_length(input),
        comment: String::new(),
    }
}

pub fn span(item: &TestItem, pos: (i64, i64), category: &str, function: &str, domain: (i64, i64)) -> AnalysisSpan {
    let toks = item.tokens();
    AnalysisSpan {
        item_id: item.item_id,
        position: Span::new(pos.0, pos.1),
        instance: toks[pos.0 as usize..pos.1 as usize].join(" "),
        category: category.into(),
        function: function.into(),
        domain: Span::new(domain.0, domain.1),
    }
}

/// Position, category, function and domain of one analysis row.
pub type SpanRow = ((i64, i64), &'static str, &'static str, (i64, i64));

/// A well-formed source, its analysis, one directive and the starred result.
pub struct Golden {
    pub language: &'static str,
    pub input: &'static str,
    pub spans: Vec<SpanRow>,
    pub directive: VariationDirective,
    pub expected: &'static str,
}

pub fn goldens() -> Vec<Golden> {
    vec![
        Golden {
            language: "fr",
            input: "L' ingénieur vient .",
            spans: vec![((0, 2), "NP_sg", "subj", (2, 3)), ((2, 3), "V_3-sg", "func", (0, 3))],
            directive: VariationDirective::replace(Span::new(2, 3), "viens"),
            expected: "L' ingénieur viens .",
        },
        Golden {
            language: "de",
            input: "Der Manager arbeitet .",
            spans: vec![((0, 2), "NP_nom", "subj", (2, 3)), ((2, 3), "V_intrans", "func", (0, 3))],
            directive: VariationDirective::add(3, "den Vortrag"),
            expected: "Der Manager arbeitet den Vortrag .",
        },
        Golden {
            language: "de",
            input: "Der Manager hält den Vortrag .",
            spans: vec![
                ((0, 2), "NP_nom", "subj", (2, 3)),
                ((2, 3), "V_trans", "func", (0, 5)),
                ((3, 5), "NP_acc", "obj", (2, 3)),
            ],
            directive: VariationDirective::delete(Span::new(3, 5)),
            expected: "Der Manager hält .",
        },
        Golden {
            language: "en",
            input: "He saw the boy .",
            spans: vec![
                ((0, 1), "PRON", "subj", (1, 2)),
                ((1, 2), "V_trans", "func", (0, 4)),
                ((2, 4), "NP", "obj", (1, 2)),
            ],
            directive: VariationDirective::permute(Span::new(1, 2), Span::new(2, 4)),
            expected: "He the boy saw .",
        },
    ]
}

/// A database holding the golden source as item 1 with its analysis.
pub fn golden_db(g: &Golden) -> tsdb_core::storage::Database {
    let base = item(1, g.input);
    let mut db = tsdb_core::storage::Database::empty(g.language).unwrap();
    db.insert_item(&base).unwrap();
    for &(p, c, f, d) in &g.spans {
        db.insert_span(&span(&base, p, c, f, d)).unwrap();
    }
    db
}
