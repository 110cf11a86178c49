//! Generated-code examples reproduced byte for byte.

use tabledsl::{generate, parse_line, GenContext, Target};

fn gen(dsl: &str, target: Target) -> String {
    let line = parse_line(dsl).unwrap_or_else(|e| panic!("{dsl}: {e}"));
    let result = generate(&line, &GenContext::new(target));
    assert!(result.warnings.is_empty(), "{dsl}: {:?}", result.warnings);
    result.code
}

#[test]
fn load_csv_pandas() {
    assert_eq!(
        gen("x = load as csv some_path", Target::Pandas),
        "x = pd.read_csv(some_path)"
    );
}

#[test]
fn load_with_schema_spark() {
    assert_eq!(
        gen("x = load as csv some_path with_schema S", Target::Spark),
        "x = spark.read.csv(some_path, schema=S)"
    );
}

#[test]
fn select_cols_then_count() {
    let dsl = "x = on y : select_cols a, b, c : count";
    assert_eq!(gen(dsl, Target::Pandas), "x = y[['a', 'b', 'c']].count()");
    assert_eq!(
        gen(dsl, Target::Spark),
        "x = y.select('a', 'b', 'c').count()"
    );
}

#[test]
fn select_rows_with_membership() {
    let dsl = "x = on y : select_rows col1 == m and col3 in [v1, v2, v3]";
    assert_eq!(
        gen(dsl, Target::Pandas),
        "x = y[(y.col1 == m) & (y.col3.isin([v1, v2, v3]))]"
    );
    assert_eq!(
        gen(dsl, Target::Spark),
        "x = y.filter((y.col1 == m) & (y.col3.isin([v1, v2, v3])))"
    );
}

#[test]
fn rename_cols() {
    let dsl = "x = on y : rename_cols c1 to p, c2 to q";
    assert_eq!(
        gen(dsl, Target::Pandas),
        "x = y.rename(columns={'c1': 'p', 'c2': 'q'})"
    );
    assert_eq!(
        gen(dsl, Target::Spark),
        "x = y.withColumnRenamed('c1', 'p').withColumnRenamed('c2', 'q')"
    );
}

#[test]
fn limitation_rows() {
    assert_eq!(gen("on df : return_top_N 10", Target::Spark), "df.head(10)");
    assert_eq!(gen("on df : sort_by col", Target::Spark), "df.sort('col')");
}

#[test]
fn session_is_empty_under_pandas() {
    let line = parse_line("start_session named 'app'").unwrap();
    let result = generate(&line, &GenContext::new(Target::Pandas));
    assert_eq!(result.code, "");
    assert_eq!(result.warnings.len(), 1);
    assert_eq!(
        gen("start_session named 'app'", Target::Spark),
        "spark = SparkSession.builder.appName('app').getOrCreate()"
    );
}
