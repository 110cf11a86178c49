//! Syntax tree for one DSL statement and its canonical printer.
//!
//! A statement is an optional assignment, an optional source dataframe
//! (`on df`) and a non-empty chain of operations joined by `:`. The printer
//! emits the canonical spelling of a tree; parsing that text yields the same
//! tree again.

use std::collections::HashSet;
use std::fmt;

use crate::lexer::is_reserved;

/// An identifier: `[A-Za-z_][A-Za-z0-9_]*`, not a reserved keyword.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ident(String);

impl Ident {
    pub fn new(text: impl Into<String>) -> Option<Ident> {
        let text = text.into();
        if is_identifier_text(&text) && !is_reserved(&text) {
            Some(Ident(text))
        } else {
            None
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_identifier_text(text: &str) -> bool {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn is_number_text(text: &str) -> bool {
    let body = text.strip_prefix(['-', '+']).unwrap_or(text);
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    !int.is_empty()
        && int.bytes().all(|b| b.is_ascii_digit())
        && frac.is_none_or(|f| !f.is_empty() && f.bytes().all(|b| b.is_ascii_digit()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Pandas,
    Spark,
}

impl Target {
    pub fn keyword(self) -> &'static str {
        match self {
            Target::Pandas => "pandas",
            Target::Spark => "spark",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Target> {
        match word {
            "pandas" => Some(Target::Pandas),
            "spark" => Some(Target::Spark),
            _ => None,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

macro_rules! choice_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $word:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];
            pub const WORDS: &'static [&'static str] = &[$($word),+];

            pub fn keyword(self) -> &'static str {
                match self {
                    $($name::$variant => $word),+
                }
            }

            pub fn from_keyword(word: &str) -> Option<$name> {
                match word {
                    $($word => Some($name::$variant),)+
                    _ => None,
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.keyword())
            }
        }
    };
}

choice_enum!(
    /// Aggregation applied after `group_by`.
    AggFn {
        Sum => "sum",
        Min => "min",
        Max => "max",
        Mean => "mean",
        Count => "count",
        Unique => "unique",
    }
);

choice_enum!(FileFormat { Csv => "csv", Json => "json" });

choice_enum!(
    /// Column types accepted in a `schema` statement.
    DslType {
        Int => "int",
        Str => "str",
        Float => "float",
        Bool => "bool",
    }
);

choice_enum!(ColsOrRows { Cols => "cols", Rows => "rows" });

/// A value written in the DSL. Bare words are kept as identifiers so they can
/// refer to host-language variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Literal {
    Ident(String),
    /// Unescaped content, without the surrounding quotes.
    Str(String),
    /// Decimal text exactly as written.
    Num(String),
    List(Vec<Literal>),
}

impl Literal {
    pub fn is_scalar(&self) -> bool {
        !matches!(self, Literal::List(_))
    }

    fn is_valid(&self) -> bool {
        match self {
            Literal::Ident(text) => Ident::new(text.as_str()).is_some(),
            Literal::Str(_) => true,
            Literal::Num(text) => is_number_text(text),
            Literal::List(items) => !items.is_empty() && items.iter().all(Literal::is_valid),
        }
    }
}

/// Quotes `content` as a single-quoted literal, escaping `\` and `'`.
pub fn quote_single(content: &str) -> String {
    let mut out = String::with_capacity(content.len() + 2);
    out.push('\'');
    for c in content.chars() {
        if c == '\'' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('\'');
    out
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Ident(text) | Literal::Num(text) => f.write_str(text),
            Literal::Str(text) => f.write_str(&quote_single(text)),
            Literal::List(items) => {
                f.write_str("[")?;
                write_joined(f, items, ", ")?;
                f.write_str("]")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub const ALL: &'static [CmpOp] = &[
        CmpOp::Eq,
        CmpOp::Ne,
        CmpOp::Lt,
        CmpOp::Le,
        CmpOp::Gt,
        CmpOp::Ge,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn from_symbol(symbol: &str) -> Option<CmpOp> {
        CmpOp::ALL.iter().copied().find(|op| op.symbol() == symbol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoolKind {
    And,
    Or,
}

impl BoolKind {
    pub fn keyword(self) -> &'static str {
        match self {
            BoolKind::And => "and",
            BoolKind::Or => "or",
        }
    }
}

/// Row condition used by `select_rows` and `drop_rows`.
///
/// The grammar has no parentheses, so only left-associative trees where `and`
/// binds tighter than `or` can be written down; see [`CondExpr::is_canonical`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CondExpr {
    Cmp {
        col: Ident,
        op: CmpOp,
        rhs: Literal,
    },
    Member {
        col: Ident,
        negated: bool,
        values: Vec<Literal>,
    },
    Bool {
        kind: BoolKind,
        lhs: Box<CondExpr>,
        rhs: Box<CondExpr>,
    },
}

impl CondExpr {
    pub fn and(lhs: CondExpr, rhs: CondExpr) -> CondExpr {
        CondExpr::Bool {
            kind: BoolKind::And,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn or(lhs: CondExpr, rhs: CondExpr) -> CondExpr {
        CondExpr::Bool {
            kind: BoolKind::Or,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn cmp(col: Ident, op: CmpOp, rhs: Literal) -> CondExpr {
        CondExpr::Cmp { col, op, rhs }
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(self, CondExpr::Bool { .. })
    }

    /// True when the tree has the shape the parser produces: `or` nodes hold
    /// an `or`/`and`/leaf on the left and an `and`/leaf on the right, `and`
    /// nodes hold an `and`/leaf on the left and a leaf on the right.
    pub fn is_canonical(&self) -> bool {
        match self {
            CondExpr::Cmp { rhs, .. } => rhs.is_scalar() && rhs.is_valid(),
            CondExpr::Member { values, .. } => {
                !values.is_empty() && values.iter().all(|v| v.is_scalar() && v.is_valid())
            }
            CondExpr::Bool { kind, lhs, rhs } => {
                let rhs_ok = match kind {
                    BoolKind::Or => {
                        rhs.is_leaf()
                            || matches!(
                                **rhs,
                                CondExpr::Bool {
                                    kind: BoolKind::And,
                                    ..
                                }
                            )
                    }
                    BoolKind::And => rhs.is_leaf(),
                };
                let lhs_ok = match kind {
                    BoolKind::Or => true,
                    BoolKind::And => {
                        lhs.is_leaf()
                            || matches!(
                                **lhs,
                                CondExpr::Bool {
                                    kind: BoolKind::And,
                                    ..
                                }
                            )
                    }
                };
                rhs_ok && lhs_ok && lhs.is_canonical() && rhs.is_canonical()
            }
        }
    }
}

impl fmt::Display for CondExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CondExpr::Cmp { col, op, rhs } => write!(f, "{col} {} {rhs}", op.symbol()),
            CondExpr::Member {
                col,
                negated,
                values,
            } => {
                let op = if *negated { "not in" } else { "in" };
                write!(f, "{col} {op} [")?;
                write_joined(f, values, ", ")?;
                f.write_str("]")
            }
            CondExpr::Bool { kind, lhs, rhs } => write!(f, "{lhs} {} {rhs}", kind.keyword()),
        }
    }
}

/// One step of a statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainOp {
    Load {
        format: Option<FileFormat>,
        path: Literal,
        schema: Option<Ident>,
    },
    Save {
        format: FileFormat,
        path: Literal,
    },
    SelectCols {
        cols: Vec<Ident>,
    },
    SelectRows {
        cond: CondExpr,
    },
    DropCols {
        cols: Vec<Ident>,
    },
    DropRows {
        cond: CondExpr,
    },
    GroupBy {
        cols: Vec<Ident>,
        agg: AggFn,
    },
    OnMissingFill {
        value: Literal,
    },
    OnMissingDropRows,
    Replace {
        old: Literal,
        new: Literal,
    },
    ApplyFun {
        func: Ident,
        axis: ColsOrRows,
    },
    AppendCol {
        name: Ident,
    },
    AppendRow {
        name: Ident,
        default: Literal,
    },
    SortBy {
        col: Ident,
    },
    DropDuplicates,
    RenameCols {
        pairs: Vec<(Ident, Ident)>,
    },
    Show,
    Describe,
    ReturnTopN {
        n: u64,
    },
    Count,
    StartSession {
        name: String,
    },
    StopSession,
    SchemaDef {
        fields: Vec<(Ident, DslType)>,
    },
    TargetOption {
        target: Target,
    },
}

impl ChainOp {
    /// The leading keyword of the op, used in warnings and diagnostics.
    pub fn keyword(&self) -> &'static str {
        match self {
            ChainOp::Load { .. } => "load",
            ChainOp::Save { .. } => "save",
            ChainOp::SelectCols { .. } => "select_cols",
            ChainOp::SelectRows { .. } => "select_rows",
            ChainOp::DropCols { .. } => "drop_cols",
            ChainOp::DropRows { .. } => "drop_rows",
            ChainOp::GroupBy { .. } => "group_by",
            ChainOp::OnMissingFill { .. } | ChainOp::OnMissingDropRows => "on_missing",
            ChainOp::Replace { .. } => "replace",
            ChainOp::ApplyFun { .. } => "apply_fun",
            ChainOp::AppendCol { .. } => "append_col",
            ChainOp::AppendRow { .. } => "append_row",
            ChainOp::SortBy { .. } => "sort_by",
            ChainOp::DropDuplicates => "drop_duplicates",
            ChainOp::RenameCols { .. } => "rename_cols",
            ChainOp::Show => "show",
            ChainOp::Describe => "describe",
            ChainOp::ReturnTopN { .. } => "return_top_N",
            ChainOp::Count => "count",
            ChainOp::StartSession { .. } => "start_session",
            ChainOp::StopSession => "stop_session",
            ChainOp::SchemaDef { .. } => "schema",
            ChainOp::TargetOption { .. } => "target_code",
        }
    }

    /// Inspection ops that end a chain.
    pub fn is_terminal(&self) -> bool {
        matches!(self, ChainOp::Show | ChainOp::Describe | ChainOp::Count)
    }

    /// Ops that form a statement on their own.
    pub fn is_standalone(&self) -> bool {
        matches!(
            self,
            ChainOp::Load { .. }
                | ChainOp::TargetOption { .. }
                | ChainOp::StartSession { .. }
                | ChainOp::StopSession
                | ChainOp::SchemaDef { .. }
        )
    }
}

impl fmt::Display for ChainOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kw = self.keyword();
        match self {
            ChainOp::Load {
                format,
                path,
                schema,
            } => {
                f.write_str("load")?;
                if let Some(format) = format {
                    write!(f, " as {format}")?;
                }
                write!(f, " {path}")?;
                if let Some(schema) = schema {
                    write!(f, " with_schema {schema}")?;
                }
                Ok(())
            }
            ChainOp::Save { format, path } => write!(f, "save as {format} to {path}"),
            ChainOp::SelectCols { cols } | ChainOp::DropCols { cols } => {
                write!(f, "{kw} ")?;
                write_joined(f, cols, ", ")
            }
            ChainOp::SelectRows { cond } | ChainOp::DropRows { cond } => write!(f, "{kw} {cond}"),
            ChainOp::GroupBy { cols, agg } => {
                f.write_str("group_by ")?;
                write_joined(f, cols, ", ")?;
                write!(f, " apply {agg}")
            }
            ChainOp::OnMissingFill { value } => write!(f, "on_missing fill_with {value}"),
            ChainOp::OnMissingDropRows => f.write_str("on_missing drop_rows"),
            ChainOp::Replace { old, new } => write!(f, "replace {old} by {new}"),
            ChainOp::ApplyFun { func, axis } => write!(f, "apply_fun {func} on {axis}"),
            ChainOp::AppendCol { name } => write!(f, "append_col {name}"),
            ChainOp::AppendRow { name, default } => {
                write!(f, "append_row {name} default {default}")
            }
            ChainOp::SortBy { col } => write!(f, "sort_by {col}"),
            ChainOp::RenameCols { pairs } => {
                f.write_str("rename_cols ")?;
                for (i, (from, to)) in pairs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{from} to {to}")?;
                }
                Ok(())
            }
            ChainOp::ReturnTopN { n } => write!(f, "return_top_N {n}"),
            ChainOp::StartSession { name } => {
                write!(f, "start_session named {}", quote_single(name))
            }
            ChainOp::SchemaDef { fields } => {
                f.write_str("schema ")?;
                for (i, (name, ty)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{name} of {ty}")?;
                }
                Ok(())
            }
            ChainOp::TargetOption { target } => write!(f, "target_code = {target}"),
            ChainOp::DropDuplicates
            | ChainOp::Show
            | ChainOp::Describe
            | ChainOp::Count
            | ChainOp::StopSession => f.write_str(kw),
        }
    }
}

/// A parsed DSL statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DslLine {
    pub assignment: Option<Ident>,
    pub source: Option<Ident>,
    pub chain: Vec<ChainOp>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AstError {
    #[error("operation chain is empty")]
    EmptyChain,
    #[error("`{0}` must be the last operation of the chain")]
    TerminalNotLast(&'static str),
    #[error("`{0}` must be the only operation of its statement")]
    NotStandalone(&'static str),
    #[error("`on <dataframe>` is required before `{0}`")]
    MissingSource(&'static str),
    #[error("`{0}` cannot take a dataframe source")]
    UnexpectedSource(&'static str),
    #[error("`{0}` cannot be assigned to a variable")]
    UnexpectedAssignment(&'static str),
    #[error("`{0}` needs a non-empty list")]
    EmptyList(&'static str),
    #[error("rename_cols renames `{0}` more than once")]
    DuplicateRenameSource(String),
    #[error("return_top_N needs a count of at least 1")]
    ZeroTopN,
    #[error("condition cannot be written without parentheses")]
    NonCanonicalCondition,
    #[error("invalid literal `{0}`")]
    InvalidLiteral(String),
}

impl DslLine {
    /// Checks every structural invariant of the tree.
    pub fn validate(&self) -> Result<(), AstError> {
        let first = self.chain.first().ok_or(AstError::EmptyChain)?;
        if first.is_standalone() {
            if self.chain.len() != 1 {
                return Err(AstError::NotStandalone(first.keyword()));
            }
            if self.source.is_some() {
                return Err(AstError::UnexpectedSource(first.keyword()));
            }
            let assignable = matches!(first, ChainOp::Load { .. } | ChainOp::SchemaDef { .. });
            if self.assignment.is_some() && !assignable {
                return Err(AstError::UnexpectedAssignment(first.keyword()));
            }
        } else if self.source.is_none() {
            return Err(AstError::MissingSource(first.keyword()));
        }

        let last = self.chain.len() - 1;
        for (i, op) in self.chain.iter().enumerate() {
            if op.is_standalone() && self.chain.len() != 1 {
                return Err(AstError::NotStandalone(op.keyword()));
            }
            if op.is_terminal() && i != last {
                return Err(AstError::TerminalNotLast(op.keyword()));
            }
            validate_op(op)?;
        }
        Ok(())
    }
}

fn validate_op(op: &ChainOp) -> Result<(), AstError> {
    let check_value = |lit: &Literal| {
        if lit.is_valid() {
            Ok(())
        } else {
            Err(AstError::InvalidLiteral(lit.to_string()))
        }
    };
    let check_scalar = |lit: &Literal| {
        if lit.is_scalar() && matches!(lit, Literal::Ident(_) | Literal::Str(_)) {
            check_value(lit)
        } else {
            Err(AstError::InvalidLiteral(lit.to_string()))
        }
    };
    match op {
        ChainOp::Load { path, .. } | ChainOp::Save { path, .. } => check_scalar(path),
        ChainOp::SelectCols { cols }
        | ChainOp::DropCols { cols }
        | ChainOp::GroupBy { cols, .. }
            if cols.is_empty() =>
        {
            Err(AstError::EmptyList(op.keyword()))
        }
        ChainOp::SelectRows { cond } | ChainOp::DropRows { cond } => {
            if cond.is_canonical() {
                Ok(())
            } else {
                Err(AstError::NonCanonicalCondition)
            }
        }
        ChainOp::OnMissingFill { value } => check_value(value),
        ChainOp::Replace { old, new } => check_value(old).and_then(|_| check_value(new)),
        ChainOp::AppendRow { default, .. } => check_value(default),
        ChainOp::RenameCols { pairs } => {
            if pairs.is_empty() {
                return Err(AstError::EmptyList(op.keyword()));
            }
            let mut seen = HashSet::new();
            for (from, _) in pairs {
                if !seen.insert(from) {
                    return Err(AstError::DuplicateRenameSource(from.to_string()));
                }
            }
            Ok(())
        }
        ChainOp::ReturnTopN { n: 0 } => Err(AstError::ZeroTopN),
        ChainOp::SchemaDef { fields } if fields.is_empty() => Err(AstError::EmptyList("schema")),
        _ => Ok(()),
    }
}

impl fmt::Display for DslLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(name) = &self.assignment {
            write!(f, "{name} = ")?;
        }
        if let Some(source) = &self.source {
            write!(f, "on {source} : ")?;
        }
        write_joined(f, &self.chain, " : ")
    }
}

/// Canonical DSL text for `line`: single spaces, ` : ` between ops.
pub fn pretty_print(line: &DslLine) -> String {
    line.to_string()
}

/// Variant-by-variant, field-by-field equality.
pub fn structural_eq(a: &DslLine, b: &DslLine) -> bool {
    a == b
}

fn write_joined<T: fmt::Display>(
    f: &mut fmt::Formatter<'_>,
    items: &[T],
    sep: &str,
) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}
