use tabledsl::{detect_dsl_line, parse_line};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// 1-based.
    pub line: usize,
    /// 1-based byte column.
    pub col: usize,
    pub message: String,
}

/// Parse errors of every DSL line in `source`.
pub fn check(source: &str, prefix: &str) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let detection = detect_dsl_line(line, prefix);
        if !detection.is_dsl {
            continue;
        }
        if let Err(e) = parse_line(&line[detection.payload_offset..]) {
            out.push(Diagnostic {
                line: i + 1,
                col: detection.payload_offset + e.position + 1,
                message: e.to_string(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_position_in_the_file() {
        let diags = check("import os\n  ## x = on y : bogus\n## on y : show\n", "##");
        assert_eq!(diags.len(), 1);
        assert_eq!((diags[0].line, diags[0].col), (2, 17));
        assert!(
            diags[0].message.starts_with("expected {"),
            "{}",
            diags[0].message
        );
    }
}
