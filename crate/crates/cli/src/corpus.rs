//! Coverage corpora: processing steps paired with the code a developer wrote
//! by hand, and the classifier that checks how much of it the DSL produces.
//!
//! ```text
//! target: spark
//! ---
//! id: S01
//! category: FT
//! description: Start a session
//! dsl: start_session named 'app'
//! expected: spark = SparkSession.builder.appName('app').getOrCreate()
//! ---
//! ```
//!
//! `expected` runs until the next `---`. Lines starting with `#` outside
//! `expected` are comments.

use std::fmt;
use std::str::FromStr;

use tabledsl::{generate, parse_line, GenContext, Target};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    /// Fully translated.
    Ft,
    /// Code added by hand on top of the generated code.
    Ca,
    /// Generated code modified by hand.
    Cm,
    /// DSL not suitable.
    Ns,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::Ft, Category::Ca, Category::Cm, Category::Ns];

    pub fn code(self) -> &'static str {
        match self {
            Category::Ft => "FT",
            Category::Ca => "CA",
            Category::Cm => "CM",
            Category::Ns => "NS",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Category::Ft => "Fully translated (FT)",
            Category::Ca => "Code added (CA)",
            Category::Cm => "Code modified (CM)",
            Category::Ns => "DSL not suitable (NS)",
        }
    }
}

impl FromStr for Category {
    type Err = ();

    fn from_str(s: &str) -> Result<Category, ()> {
        Category::ALL.into_iter().find(|c| c.code() == s).ok_or(())
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub id: String,
    pub description: String,
    pub dsl: Option<String>,
    pub expected_code: String,
    /// The curator's judgment; derived from the code when absent.
    pub category: Option<Category>,
    /// 1-based line of the `id:` field.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub target: Target,
    pub entries: Vec<CorpusEntry>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct CorpusError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> CorpusError {
    CorpusError {
        line,
        message: message.into(),
    }
}

#[derive(Default)]
struct Draft {
    start: usize,
    id: Option<String>,
    description: Option<String>,
    dsl: Option<String>,
    expected: Option<Vec<String>>,
    category: Option<Category>,
}

impl Draft {
    fn is_empty(&self) -> bool {
        self.id.is_none()
            && self.description.is_none()
            && self.dsl.is_none()
            && self.expected.is_none()
            && self.category.is_none()
    }

    fn finish(self) -> Result<CorpusEntry, CorpusError> {
        let line = self.start;
        let id = self.id.ok_or_else(|| err(line, "entry without `id:`"))?;
        let expected = self
            .expected
            .ok_or_else(|| err(line, format!("entry {id} has no `expected:`")))?;
        let mut expected_code = expected.join("\n");
        expected_code.truncate(expected_code.trim_end().len());
        match (self.category, &self.dsl) {
            (Some(Category::Ns), Some(_)) => {
                return Err(err(line, format!("entry {id} is NS but has `dsl:`")))
            }
            (Some(Category::Ft | Category::Ca | Category::Cm), None) => {
                return Err(err(line, format!("entry {id} needs `dsl:`")))
            }
            _ => {}
        }
        Ok(CorpusEntry {
            id,
            description: self.description.unwrap_or_default(),
            dsl: self.dsl,
            expected_code,
            category: self.category,
            line,
        })
    }
}

impl Corpus {
    pub fn parse(text: &str) -> Result<Corpus, CorpusError> {
        let mut target = None;
        let mut in_header = true;
        let mut entries = Vec::new();
        let mut draft = Draft::default();
        let mut in_expected = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            if raw.trim_end() == "---" {
                if in_header {
                    in_header = false;
                } else if !draft.is_empty() {
                    entries.push(std::mem::take(&mut draft).finish()?);
                }
                in_expected = false;
                continue;
            }
            if in_expected {
                draft
                    .expected
                    .as_mut()
                    .expect("open expected")
                    .push(raw.to_string());
                continue;
            }
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let (key, value) = raw
                .split_once(':')
                .ok_or_else(|| err(line_no, format!("expected `field: value`, found {raw:?}")))?;
            let value = value.trim();
            if in_header {
                match key.trim() {
                    "target" => {
                        target = Some(
                            Target::from_keyword(value)
                                .ok_or_else(|| err(line_no, format!("unknown target {value:?}")))?,
                        )
                    }
                    other => return Err(err(line_no, format!("unknown header field `{other}`"))),
                }
                continue;
            }
            if draft.is_empty() {
                draft.start = line_no;
            }
            let duplicate = || err(line_no, format!("field `{}` given twice", key.trim()));
            match key.trim() {
                "id" => {
                    if draft.id.replace(value.to_string()).is_some() {
                        return Err(duplicate());
                    }
                }
                "description" => {
                    if draft.description.replace(value.to_string()).is_some() {
                        return Err(duplicate());
                    }
                }
                "dsl" => {
                    if draft.dsl.replace(value.to_string()).is_some() {
                        return Err(duplicate());
                    }
                }
                "category" => {
                    let category = value
                        .parse()
                        .map_err(|_| err(line_no, format!("unknown category {value:?}")))?;
                    if draft.category.replace(category).is_some() {
                        return Err(duplicate());
                    }
                }
                "expected" => {
                    let first = (!value.is_empty()).then(|| value.to_string());
                    if draft
                        .expected
                        .replace(first.into_iter().collect())
                        .is_some()
                    {
                        return Err(duplicate());
                    }
                    in_expected = true;
                }
                other => return Err(err(line_no, format!("unknown field `{other}`"))),
            }
        }
        if !draft.is_empty() {
            entries.push(draft.finish()?);
        }
        let target = target.ok_or_else(|| err(1, "missing `target:` header"))?;
        Ok(Corpus { target, entries })
    }
}

/// Python-ish tokens: names and numbers, quoted strings, single punctuation.
pub fn code_tokens(code: &str) -> Vec<&str> {
    let bytes = code.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphanumeric() || c == b'_' || c >= 0x80 {
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] >= 0x80)
            {
                i += 1;
            }
        } else if c == b'\'' || c == b'"' {
            i += 1;
            while i < bytes.len() && bytes[i] != c {
                i += if bytes[i] == b'\\' { 2 } else { 1 };
            }
            i = (i + 1).min(bytes.len());
        } else {
            i += 1;
            while !code.is_char_boundary(i) {
                i += 1;
            }
        }
        tokens.push(&code[start..i]);
    }
    tokens
}

/// Whether `generated` is a shorter, in-order selection of `expected`'s tokens.
pub fn is_proper_token_subsequence(generated: &str, expected: &str) -> bool {
    let generated = code_tokens(generated);
    let expected = code_tokens(expected);
    if generated.is_empty() || generated.len() >= expected.len() {
        return false;
    }
    let mut rest = expected.iter();
    generated.iter().all(|g| rest.any(|e| e == g))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// Category derived from the generated code.
    Derived(Category),
    /// The DSL text does not parse, or generates nothing for the target.
    Broken(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classified {
    pub id: String,
    pub line: usize,
    pub declared: Option<Category>,
    pub outcome: Outcome,
    pub generated: Option<String>,
}

impl Classified {
    /// The category the entry is counted under.
    pub fn category(&self) -> Category {
        match (&self.declared, &self.outcome) {
            (Some(declared), _) => *declared,
            (None, Outcome::Derived(derived)) => *derived,
            (None, Outcome::Broken(_)) => Category::Cm,
        }
    }

    /// Declared and derived categories differ.
    pub fn disagrees(&self) -> bool {
        matches!((&self.declared, &self.outcome), (Some(d), Outcome::Derived(h)) if d != h)
    }

    /// Problems that make the corpus inconsistent with the code generator:
    /// broken DSL, or a declared full translation that is not exact.
    pub fn failure(&self) -> Option<String> {
        match (&self.declared, &self.outcome) {
            (_, Outcome::Broken(why)) => Some(why.clone()),
            (Some(Category::Ft), Outcome::Derived(derived)) if *derived != Category::Ft => {
                Some(format!(
                    "declared FT but generated {:?}",
                    self.generated.as_deref().unwrap_or("")
                ))
            }
            _ => None,
        }
    }
}

pub fn classify(entry: &CorpusEntry, ctx: &GenContext) -> Classified {
    let mut generated = None;
    let outcome = match &entry.dsl {
        None => Outcome::Derived(Category::Ns),
        Some(dsl) => match parse_line(dsl) {
            Err(e) => Outcome::Broken(format!("DSL does not parse: {e}")),
            Ok(line) => {
                let result = generate(&line, ctx);
                if result.code.is_empty() {
                    Outcome::Broken(format!("no {} code generated", ctx.target))
                } else {
                    let derived = if result.code == entry.expected_code {
                        Category::Ft
                    } else if is_proper_token_subsequence(&result.code, &entry.expected_code) {
                        Category::Ca
                    } else {
                        Category::Cm
                    };
                    generated = Some(result.code);
                    Outcome::Derived(derived)
                }
            }
        },
    };
    Classified {
        id: entry.id.clone(),
        line: entry.line,
        declared: entry.category,
        outcome,
        generated,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageReport {
    pub target: Target,
    pub entries: Vec<Classified>,
}

impl CoverageReport {
    pub fn count(&self, category: Category) -> usize {
        self.entries
            .iter()
            .filter(|e| e.category() == category)
            .count()
    }

    pub fn total(&self) -> usize {
        self.entries.len()
    }

    pub fn has_failures(&self) -> bool {
        self.entries.iter().any(|e| e.failure().is_some())
    }

    /// `FT=10/16 CA=4/16 CM=0/16 NS=2/16`
    pub fn summary(&self) -> String {
        Category::ALL
            .iter()
            .map(|c| format!("{c}={}/{}", self.count(*c), self.total()))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn report(corpus: &Corpus) -> CoverageReport {
    let ctx = GenContext::new(corpus.target);
    CoverageReport {
        target: corpus.target,
        entries: corpus.entries.iter().map(|e| classify(e, &ctx)).collect(),
    }
}

/// Percentage with one decimal, truncated rather than rounded.
pub fn percent(count: usize, total: usize) -> String {
    if total == 0 {
        return "0.0%".to_string();
    }
    let tenths = count * 1000 / total;
    format!("{}.{}%", tenths / 10, tenths % 10)
}

impl fmt::Display for CoverageReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let column = match self.target {
            Target::Pandas => "Pandas",
            Target::Spark => "PySpark",
        };
        writeln!(f, "{:<24}{column}", "Category")?;
        for category in Category::ALL {
            let count = self.count(category);
            writeln!(
                f,
                "{:<24}{count}/{} ({})",
                category.title(),
                self.total(),
                percent(count, self.total())
            )?;
        }
        for entry in &self.entries {
            if let Some(why) = entry.failure() {
                writeln!(f, "error: {} (line {}): {why}", entry.id, entry.line)?;
            } else if entry.disagrees() {
                if let (Some(declared), Outcome::Derived(derived)) =
                    (entry.declared, &entry.outcome)
                {
                    writeln!(
                        f,
                        "note: {} (line {}) declared {declared}, generated code suggests {derived}",
                        entry.id, entry.line
                    )?;
                }
            }
        }
        write!(f, "{}", self.summary())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
target: pandas
---
id: P1
category: FT
description: count rows
dsl: on df : count
expected: df.count()
---
id: P2
category: CA
dsl: on df : sort_by age
expected:
df.sort_values('age',
               ascending=False)
---
id: P3
category: NS
expected: df = convertColumn(df, cols, float)
---
";

    #[test]
    fn parses_and_counts() {
        let corpus = Corpus::parse(SMALL).unwrap();
        assert_eq!(corpus.target, Target::Pandas);
        assert_eq!(corpus.entries.len(), 3);
        assert_eq!(
            corpus.entries[1].expected_code,
            "df.sort_values('age',\n               ascending=False)"
        );
        let report = report(&corpus);
        assert_eq!(report.summary(), "FT=1/3 CA=1/3 CM=0/3 NS=1/3");
        assert!(!report.has_failures());
        assert!(report.entries.iter().all(|e| !e.disagrees()));
    }

    #[test]
    fn empty_corpus_is_all_zeros() {
        let report = report(&Corpus::parse("target: spark\n").unwrap());
        assert_eq!(report.summary(), "FT=0/0 CA=0/0 CM=0/0 NS=0/0");
        assert!(report.to_string().contains("0/0 (0.0%)"));
    }

    #[test]
    fn percentages_truncate() {
        assert_eq!(percent(9, 14), "64.2%");
        assert_eq!(percent(4, 14), "28.5%");
        assert_eq!(percent(1, 14), "7.1%");
        assert_eq!(percent(10, 16), "62.5%");
        assert_eq!(percent(2, 16), "12.5%");
    }

    #[test]
    fn token_subsequence() {
        assert!(is_proper_token_subsequence(
            "df.sort('c')",
            "df.sort('c', ascending=False)"
        ));
        assert!(is_proper_token_subsequence(
            "df.head(10)",
            "print(df.head(10))"
        ));
        assert!(!is_proper_token_subsequence("df.head(10)", "df.show(10)"));
        assert!(!is_proper_token_subsequence("df.head(10)", "df.head(10)"));
        assert_eq!(
            code_tokens("a.b('x y', 1.5)"),
            ["a", ".", "b", "(", "'x y'", ",", "1", ".", "5", ")"]
        );
    }

    #[test]
    fn declared_ft_mismatch_fails() {
        let text =
            "target: pandas\n---\nid: X\ncategory: FT\ndsl: on df : count\nexpected: len(df)\n";
        let report = report(&Corpus::parse(text).unwrap());
        assert!(report.has_failures());
        assert_eq!(report.summary(), "FT=1/1 CA=0/1 CM=0/1 NS=0/1");
    }

    #[test]
    fn malformed_corpus_names_the_line() {
        let cases = [
            ("id: X\n", 1),
            ("target: spark\n---\nid: X\nbogus line\n", 4),
            ("target: spark\n---\nid: X\ncategory: ZZ\n", 4),
            (
                "target: spark\n---\nid: X\ncategory: NS\ndsl: on df : count\nexpected: x\n",
                3,
            ),
            ("target: spark\n---\nid: X\ndsl: on df : count\n---\n", 3),
            ("target: spark\n---\nid: X\nid: Y\n", 4),
            ("target: cobol\n", 1),
        ];
        for (text, line) in cases {
            let e = Corpus::parse(text).unwrap_err();
            assert_eq!(e.line, line, "{text:?}: {e}");
        }
    }
}
