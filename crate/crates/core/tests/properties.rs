mod common;

use proptest::prelude::*;
use tabledsl::ast::{AggFn, CmpOp, ColsOrRows, DslType, FileFormat};
use tabledsl::{
    complete, continuation, generate, parse_line, pretty_print, structural_eq, tokenize, ChainOp,
    CondExpr, DslLine, GenContext, Ident, Literal, Target,
};

fn ident() -> impl Strategy<Value = Ident> {
    prop_oneof![
        prop::sample::select(vec!["a", "b", "col1", "df", "sum", "csv", "_x", "on_df"])
            .prop_map(str::to_string),
        "[a-z_][a-z0-9_]{0,6}",
    ]
    .prop_filter_map("reserved word", |s: String| Ident::new(s))
    .boxed()
}

fn scalar() -> BoxedStrategy<Literal> {
    prop_oneof![
        ident().prop_map(|i| Literal::Ident(i.as_str().to_string())),
        "[ -~]{0,8}".prop_map(Literal::Str),
        (any::<i32>(), prop::option::of(0u16..1000)).prop_map(|(i, f)| Literal::Num(match f {
            Some(f) => format!("{i}.{f}"),
            None => i.to_string(),
        })),
    ]
    .boxed()
}

fn value() -> BoxedStrategy<Literal> {
    prop_oneof![
        3 => scalar(),
        1 => prop::collection::vec(scalar(), 1..4).prop_map(Literal::List),
    ]
    .boxed()
}

fn path() -> BoxedStrategy<Literal> {
    prop_oneof![
        ident().prop_map(|i| Literal::Ident(i.as_str().to_string())),
        "[ -~]{0,12}".prop_map(Literal::Str),
    ]
    .boxed()
}

fn leaf() -> BoxedStrategy<CondExpr> {
    prop_oneof![
        (ident(), prop::sample::select(CmpOp::ALL.to_vec()), scalar())
            .prop_map(|(col, op, rhs)| CondExpr::Cmp { col, op, rhs }),
        (
            ident(),
            any::<bool>(),
            prop::collection::vec(scalar(), 1..4)
        )
            .prop_map(|(col, negated, values)| CondExpr::Member {
                col,
                negated,
                values
            }),
    ]
    .boxed()
}

/// Only trees the grammar can express: `or` of `and`-chains of leaves.
fn condition() -> BoxedStrategy<CondExpr> {
    let conj = prop::collection::vec(leaf(), 1..4).prop_map(|leaves| {
        let mut it = leaves.into_iter();
        let first = it.next().unwrap();
        it.fold(first, CondExpr::and)
    });
    prop::collection::vec(conj, 1..4)
        .prop_map(|conjs| {
            let mut it = conjs.into_iter();
            let first = it.next().unwrap();
            it.fold(first, CondExpr::or)
        })
        .boxed()
}

fn cols() -> BoxedStrategy<Vec<Ident>> {
    prop::collection::vec(ident(), 1..4).boxed()
}

fn pipe_op() -> BoxedStrategy<ChainOp> {
    prop_oneof![
        (prop::sample::select(FileFormat::ALL.to_vec()), path())
            .prop_map(|(format, path)| ChainOp::Save { format, path }),
        cols().prop_map(|cols| ChainOp::SelectCols { cols }),
        condition().prop_map(|cond| ChainOp::SelectRows { cond }),
        cols().prop_map(|cols| ChainOp::DropCols { cols }),
        condition().prop_map(|cond| ChainOp::DropRows { cond }),
        (cols(), prop::sample::select(AggFn::ALL.to_vec()))
            .prop_map(|(cols, agg)| ChainOp::GroupBy { cols, agg }),
        value().prop_map(|value| ChainOp::OnMissingFill { value }),
        Just(ChainOp::OnMissingDropRows),
        (value(), value()).prop_map(|(old, new)| ChainOp::Replace { old, new }),
        (ident(), prop::sample::select(ColsOrRows::ALL.to_vec()))
            .prop_map(|(func, axis)| ChainOp::ApplyFun { func, axis }),
        ident().prop_map(|name| ChainOp::AppendCol { name }),
        (ident(), value()).prop_map(|(name, default)| ChainOp::AppendRow { name, default }),
        ident().prop_map(|col| ChainOp::SortBy { col }),
        Just(ChainOp::DropDuplicates),
        prop::collection::btree_map(ident(), ident(), 1..4).prop_map(|m| ChainOp::RenameCols {
            pairs: m.into_iter().collect()
        }),
        (1u64..1_000_000).prop_map(|n| ChainOp::ReturnTopN { n }),
    ]
    .boxed()
}

fn terminal() -> BoxedStrategy<ChainOp> {
    prop::sample::select(vec![ChainOp::Show, ChainOp::Describe, ChainOp::Count]).boxed()
}

fn dsl_line() -> BoxedStrategy<DslLine> {
    let chained = (
        prop::option::of(ident()),
        ident(),
        prop::collection::vec(pipe_op(), 0..4),
        prop::option::of(terminal()),
    )
        .prop_filter_map("empty chain", |(assignment, source, mut chain, last)| {
            chain.extend(last);
            (!chain.is_empty()).then_some(DslLine {
                assignment,
                source: Some(source),
                chain,
            })
        });
    let single = |op: BoxedStrategy<ChainOp>, assignable: bool| {
        let assign = if assignable {
            prop::option::of(ident()).boxed()
        } else {
            Just(None).boxed()
        };
        (assign, op).prop_map(|(assignment, op)| DslLine {
            assignment,
            source: None,
            chain: vec![op],
        })
    };
    let load = (
        prop::option::of(prop::sample::select(FileFormat::ALL.to_vec())),
        path(),
        prop::option::of(ident()),
    )
        .prop_map(|(format, path, schema)| ChainOp::Load {
            format,
            path,
            schema,
        })
        .boxed();
    let schema =
        prop::collection::vec((ident(), prop::sample::select(DslType::ALL.to_vec())), 1..4)
            .prop_map(|fields| ChainOp::SchemaDef { fields })
            .boxed();
    let session = prop_oneof![
        "[ -~]{0,10}".prop_map(|name| ChainOp::StartSession { name }),
        Just(ChainOp::StopSession),
        Just(ChainOp::TargetOption {
            target: Target::Spark
        }),
        Just(ChainOp::TargetOption {
            target: Target::Pandas
        }),
    ]
    .boxed();
    prop_oneof![
        4 => chained,
        1 => single(load, true),
        1 => single(schema, true),
        1 => single(session, false),
    ]
    .boxed()
}

/// Balanced `()[]{}` outside of string literals and closed quotes.
fn balanced(code: &str) -> bool {
    let mut stack = Vec::new();
    let mut chars = code.chars();
    while let Some(c) = chars.next() {
        match c {
            '\'' => loop {
                match chars.next() {
                    Some('\\') => {
                        chars.next();
                    }
                    Some('\'') => break,
                    Some(_) => {}
                    None => return false,
                }
            },
            '(' | '[' | '{' => stack.push(c),
            ')' | ']' | '}' => {
                let open = match c {
                    ')' => '(',
                    ']' => '[',
                    _ => '{',
                };
                if stack.pop() != Some(open) {
                    return false;
                }
            }
            _ => {}
        }
    }
    stack.is_empty()
}

/// Name of the backend method an op turns into, when it is a method call.
fn method_name(op: &ChainOp, target: Target) -> Option<&'static str> {
    let pandas = target == Target::Pandas;
    Some(match op {
        ChainOp::DropCols { .. } => ".drop(",
        ChainOp::GroupBy { .. } if pandas => ".groupby(",
        ChainOp::GroupBy { .. } => ".groupBy(",
        ChainOp::OnMissingFill { .. } if pandas => ".fillna(",
        ChainOp::OnMissingFill { .. } => ".na.fill(",
        ChainOp::OnMissingDropRows if pandas => ".dropna(",
        ChainOp::OnMissingDropRows => ".na.drop(",
        ChainOp::Replace { .. } => ".replace(",
        ChainOp::SortBy { .. } if pandas => ".sort_values(",
        ChainOp::SortBy { .. } => ".sort(",
        ChainOp::DropDuplicates if pandas => ".drop_duplicates(",
        ChainOp::DropDuplicates => ".dropDuplicates(",
        ChainOp::RenameCols { .. } if pandas => ".rename(",
        ChainOp::RenameCols { .. } => ".withColumnRenamed(",
        ChainOp::ReturnTopN { .. } => ".head(",
        ChainOp::AppendCol { .. } if pandas => ".assign(",
        ChainOp::AppendCol { .. } => ".withColumn(",
        ChainOp::SelectCols { .. } if !pandas => ".select(",
        ChainOp::SelectRows { .. } if !pandas => ".filter(",
        ChainOp::Describe => ".describe(",
        ChainOp::Count => ".count(",
        _ => return None,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn generated_lines_are_valid(line in dsl_line()) {
        prop_assert_eq!(line.validate(), Ok(()));
    }

    #[test]
    fn print_then_parse_round_trips(line in dsl_line()) {
        let text = pretty_print(&line);
        let reparsed = parse_line(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert!(structural_eq(&reparsed, &line), "{text}");
        prop_assert_eq!(pretty_print(&reparsed), text);
    }

    #[test]
    fn codegen_is_total_and_balanced(line in dsl_line()) {
        for target in [Target::Pandas, Target::Spark] {
            let ctx = GenContext::new(target);
            let result = generate(&line, &ctx);
            prop_assert_eq!(&result, &generate(&line, &ctx));
            if result.code.is_empty() {
                prop_assert!(!result.warnings.is_empty());
            } else {
                prop_assert!(balanced(&result.code), "{}", result.code);
                if let Some(name) = &line.assignment {
                    let prefix = format!("{} = ", name);
                    prop_assert!(result.code.starts_with(&prefix), "{}", result.code);
                }
            }
        }
    }

    #[test]
    fn method_order_follows_chain(line in dsl_line()) {
        for target in [Target::Pandas, Target::Spark] {
            let code = generate(&line, &GenContext::new(target)).code;
            if code.is_empty() || line.source.is_none() {
                continue;
            }
            // Conditions and values can repeat method-like text; only check
            // chains without them.
            if line.chain.iter().any(|op| matches!(op, ChainOp::SelectRows { .. } | ChainOp::DropRows { .. } | ChainOp::Replace { .. } | ChainOp::OnMissingFill { .. })) {
                continue;
            }
            let mut from = 0;
            for op in &line.chain {
                if let Some(name) = method_name(op, target) {
                    let found = code[from..].find(name);
                    prop_assert!(found.is_some(), "{} missing after {} in {}", name, from, code);
                    from += found.unwrap() + name.len();
                }
            }
        }
    }

    #[test]
    fn parser_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..4096)) {
        let text = String::from_utf8_lossy(&bytes);
        if let Err(err) = parse_line(&text) {
            prop_assert!(!err.expected.is_empty());
            prop_assert!(err.position <= text.len());
        }
        let _ = tokenize(&text);
    }

    #[test]
    fn near_miss_text_never_panics(
        words in prop::collection::vec(
            prop::sample::select(vec![
                "on", "df", ":", "select_rows", "a", "==", "1", "and", "or", "in", "[", "]", ",",
                "'s'", "not", "=", "x", "load", "as", "csv", "show", "group_by", "apply", "sum",
                "rename_cols", "to", "return_top_N", "-", "'", "(", "schema", "of", "int",
            ]),
            0..20,
        ),
        cursor in 0usize..200,
    ) {
        let text = words.join(" ");
        let _ = parse_line(&text);
        let line = format!("## {text}");
        let mut cursor = cursor.min(line.len());
        while !line.is_char_boundary(cursor) {
            cursor -= 1;
        }
        let items = complete(&line, cursor, &GenContext::default());
        for (i, item) in items.iter().enumerate() {
            prop_assert_eq!(item.rank as usize, i + 1);
        }
    }
}

#[test]
fn fixtures_round_trip_and_are_canonical() {
    for dsl in common::fixtures() {
        let line = parse_line(&dsl).unwrap_or_else(|e| panic!("{dsl}: {e}"));
        line.validate().unwrap();
        assert_eq!(pretty_print(&line), dsl);
        assert!(structural_eq(
            &parse_line(&pretty_print(&line)).unwrap(),
            &line
        ));
    }
}

#[test]
fn truncated_fixture_expects_the_next_token() {
    for dsl in common::fixtures() {
        let tokens = tokenize(&dsl).unwrap();
        for (i, token) in tokens.iter().enumerate() {
            let prefix = &dsl[..token.start()];
            let cont = continuation(prefix);
            assert!(
                cont.expected
                    .iter()
                    .any(|e| common::token_matches(token, e)),
                "{dsl:?} cut at {i}: {:?} not in {:?}",
                token.text,
                cont.expected
            );
            // error positions never fall inside the valid prefix
            if i > 0 {
                if let Err(err) = parse_line(prefix) {
                    assert!(err.position >= tokens[i - 1].end(), "{dsl:?} cut at {i}");
                }
            }
        }
    }
}

#[test]
fn parse_is_deterministic() {
    for dsl in common::fixtures() {
        assert_eq!(parse_line(&dsl), parse_line(&dsl));
    }
    assert_eq!(parse_line("on df : ??"), parse_line("on df : ??"));
}
