//! Rewrites a source file so each DSL comment is followed by its generated
//! code.
//!
//! Generated lines end with the marker comment, so a second run replaces them
//! instead of stacking copies.

use tabledsl::{
    detect_dsl_line, generate, parse_line, ChainOp, GenContext, ParseError, Target,
    GENERATED_MARKER,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Generated(String),
    /// Parsed, but the target has no rendering; carries the reason.
    EmptyEmission(String),
    ParseError(ParseError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    /// 1-based.
    pub line_no: usize,
    pub dsl_text: String,
    /// Byte column of the DSL payload within the line.
    pub payload_offset: usize,
    pub status: Status,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TranspileReport {
    pub records: Vec<Record>,
}

impl TranspileReport {
    pub fn has_errors(&self) -> bool {
        self.records
            .iter()
            .any(|r| matches!(r.status, Status::ParseError(_)))
    }
}

/// One line and its terminator (`""` for an unterminated last line).
struct Line<'a> {
    text: &'a str,
    ending: &'a str,
}

fn split(source: &str) -> Vec<Line<'_>> {
    source
        .split_inclusive('\n')
        .map(|chunk| {
            let body = chunk.strip_suffix('\n').unwrap_or(chunk);
            let text = body.strip_suffix('\r').unwrap_or(body);
            Line {
                text,
                ending: &chunk[text.len()..],
            }
        })
        .collect()
}

pub fn is_generated(line: &str) -> bool {
    line.trim_end().ends_with(GENERATED_MARKER)
}

/// Transpiles `source`. `target` applies until a `target_code` statement in
/// the file changes it. The output is only meaningful when the report has no
/// errors.
pub fn transpile(source: &str, target: Target, prefix: &str) -> (String, TranspileReport) {
    let lines = split(source);
    let default_ending = lines
        .iter()
        .map(|l| l.ending)
        .find(|e| !e.is_empty())
        .unwrap_or("\n");
    let mut ctx = GenContext::new(target);
    let mut out = String::with_capacity(source.len() + source.len() / 4);
    let mut report = TranspileReport::default();
    let mut i = 0;
    while i < lines.len() {
        let line = &lines[i];
        i += 1;
        let line_no = i;
        let detection = detect_dsl_line(line.text, prefix);
        if !detection.is_dsl {
            out.push_str(line.text);
            out.push_str(line.ending);
            continue;
        }
        let payload = &line.text[detection.payload_offset..];
        let previous = lines.get(i).filter(|next| is_generated(next.text));
        if previous.is_some() {
            i += 1;
        }
        let status = match parse_line(payload) {
            Err(err) => Status::ParseError(err),
            Ok(parsed) => {
                if let [ChainOp::TargetOption { target }] = parsed.chain.as_slice() {
                    ctx.target = *target;
                }
                let result = generate(&parsed, &ctx);
                if result.code.is_empty() {
                    let reason = result
                        .warnings
                        .iter()
                        .map(|w| w.message.as_str())
                        .collect::<Vec<_>>()
                        .join("; ");
                    Status::EmptyEmission(reason)
                } else {
                    Status::Generated(result.code)
                }
            }
        };
        out.push_str(line.text);
        match &status {
            Status::Generated(code) => {
                let ending = if line.ending.is_empty() {
                    default_ending
                } else {
                    line.ending
                };
                out.push_str(ending);
                let indent = &line.text[..line.text.len() - line.text.trim_start().len()];
                out.push_str(indent);
                out.push_str(code);
                out.push_str("  ");
                out.push_str(GENERATED_MARKER);
                out.push_str(previous.map_or(line.ending, |p| p.ending));
            }
            // Keep a stale generated line only when we cannot tell what the
            // statement now means.
            Status::ParseError(_) => {
                out.push_str(line.ending);
                if let Some(p) = previous {
                    out.push_str(p.text);
                    out.push_str(p.ending);
                }
            }
            Status::EmptyEmission(_) => {
                out.push_str(previous.map_or(line.ending, |p| p.ending));
            }
        }
        report.records.push(Record {
            line_no,
            dsl_text: payload.to_string(),
            payload_offset: detection.payload_offset,
            status,
        });
    }
    (out, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inserts_after_the_comment() {
        let (out, report) = transpile("## x = load as csv 'p.csv'\n", Target::Pandas, "##");
        assert_eq!(
            out,
            "## x = load as csv 'p.csv'\nx = pd.read_csv('p.csv')  # <tabledsl>\n"
        );
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.records[0].line_no, 1);
    }

    #[test]
    fn no_dsl_is_a_no_op() {
        let src = "import os\r\nprint(1)";
        let (out, report) = transpile(src, Target::Spark, "##");
        assert_eq!(out, src);
        assert!(report.records.is_empty());
    }

    #[test]
    fn replaces_earlier_output_and_keeps_indent() {
        let src = "def f(y):\n    ## x = on y : show\n    x = y.old()  # <tabledsl>\n    return x";
        let (out, _) = transpile(src, Target::Spark, "##");
        assert_eq!(
            out,
            "def f(y):\n    ## x = on y : show\n    x = y.show()  # <tabledsl>\n    return x"
        );
    }

    #[test]
    fn unterminated_last_line() {
        let (once, _) = transpile("a = 1\r\n## on df : count", Target::Pandas, "##");
        assert_eq!(
            once,
            "a = 1\r\n## on df : count\r\ndf.count()  # <tabledsl>"
        );
        assert_eq!(transpile(&once, Target::Pandas, "##").0, once);
    }

    #[test]
    fn empty_emission_removes_stale_output() {
        let src = "## stop_session\nspark.stop()  # <tabledsl>\nrest\n";
        let (out, report) = transpile(src, Target::Pandas, "##");
        assert_eq!(out, "## stop_session\nrest\n");
        assert!(matches!(report.records[0].status, Status::EmptyEmission(_)));
    }

    #[test]
    fn in_file_target_wins() {
        let src = "## target_code = spark\n## on df : describe\n";
        let (out, _) = transpile(src, Target::Pandas, "##");
        assert!(
            out.ends_with("df.describe().show()  # <tabledsl>\n"),
            "{out}"
        );
    }

    #[test]
    fn errors_are_reported_per_line() {
        let (_, report) = transpile("ok = 1\n## x = on y : bogus\n", Target::Pandas, "##");
        assert!(report.has_errors());
        assert_eq!(report.records[0].line_no, 2);
    }
}
