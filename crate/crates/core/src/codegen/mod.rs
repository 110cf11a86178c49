//! Target code generation.
//!
//! [`generate`] walks a statement and threads the dataframe expression
//! through the chain. Everything that both targets spell the same way
//! (assignment, literals, conditions) lives here; the per-target spelling of
//! each operation comes from a [`Backend`].

mod pandas;
mod spark;

use std::fmt::Write as _;

pub use pandas::Pandas;
pub use spark::Spark;

use crate::ast::{
    quote_single, AggFn, BoolKind, ChainOp, ColsOrRows, CondExpr, DslLine, DslType, FileFormat,
    Ident, Literal, Target,
};

/// Trailing comment that marks a line as generated, so tools can replace it
/// instead of inserting a second copy.
pub const GENERATED_MARKER: &str = "# <tabledsl>";

/// Settings that shape the generated code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenContext {
    pub target: Target,
    /// Variable holding the Spark session.
    pub session_var: String,
    /// Module alias under which pandas is imported.
    pub pandas_alias: String,
}

impl GenContext {
    pub fn new(target: Target) -> GenContext {
        GenContext {
            target,
            session_var: "spark".to_string(),
            pandas_alias: "pd".to_string(),
        }
    }
}

impl Default for GenContext {
    fn default() -> GenContext {
        GenContext::new(Target::Pandas)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenWarning {
    /// Keyword of the op that was skipped.
    pub op: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GenResult {
    /// One host-language statement, or empty when the target has no
    /// rendering for some op of the line.
    pub code: String,
    pub warnings: Vec<GenWarning>,
}

/// `Err` carries the reason an op has no rendering for the target.
pub type Emission = Result<String, String>;

/// Per-target spelling of every operation. `df` is the expression the op
/// applies to; the returned string replaces it.
pub trait Backend {
    fn target(&self) -> Target;

    fn load(
        &self,
        ctx: &GenContext,
        format: FileFormat,
        path: &str,
        schema: Option<&Ident>,
    ) -> Emission;
    fn save(&self, df: &str, format: FileFormat, path: &str) -> Emission;
    fn select_cols(&self, df: &str, cols: &[Ident]) -> Emission;
    /// `cond` is the rendered condition without outer parentheses.
    fn select_rows(&self, df: &str, cond: &str) -> Emission;
    fn drop_cols(&self, df: &str, cols: &[Ident]) -> Emission;
    fn drop_rows(&self, df: &str, cond: &str) -> Emission;
    fn group_by(&self, df: &str, cols: &[Ident], agg: AggFn) -> Emission;
    fn fill_missing(&self, df: &str, value: &str) -> Emission;
    fn drop_missing(&self, df: &str) -> Emission;
    fn replace(&self, df: &str, old: &str, new: &str) -> Emission {
        Ok(format!("{df}.replace({old}, {new})"))
    }
    fn apply_fun(&self, df: &str, func: &Ident, axis: ColsOrRows) -> Emission;
    fn append_col(&self, df: &str, name: &Ident) -> Emission;
    fn append_row(&self, df: &str, name: &Ident, default: &str) -> Emission;
    fn sort_by(&self, df: &str, col: &Ident) -> Emission;
    fn drop_duplicates(&self, df: &str) -> Emission;
    fn rename_cols(&self, df: &str, pairs: &[(Ident, Ident)]) -> Emission;
    fn show(&self, df: &str) -> Emission;
    fn describe(&self, df: &str) -> Emission;
    fn head(&self, df: &str, n: u64) -> Emission {
        Ok(format!("{df}.head({n})"))
    }
    fn count(&self, df: &str) -> Emission {
        Ok(format!("{df}.count()"))
    }
    fn start_session(&self, ctx: &GenContext, name: &str) -> Emission;
    fn stop_session(&self, ctx: &GenContext) -> Emission;
    fn schema(&self, ctx: &GenContext, fields: &[(Ident, DslType)]) -> Emission;
}

/// Returns the backend for `target`.
pub fn backend(target: Target) -> &'static dyn Backend {
    match target {
        Target::Pandas => &Pandas,
        Target::Spark => &Spark,
    }
}

/// Generates code for `line` under `ctx.target`.
pub fn generate(line: &DslLine, ctx: &GenContext) -> GenResult {
    generate_with(backend(ctx.target), line, ctx)
}

pub fn generate_with(backend: &dyn Backend, line: &DslLine, ctx: &GenContext) -> GenResult {
    match render_chain(backend, line, ctx) {
        Ok(expr) => {
            let mut code = String::new();
            if let Some(name) = &line.assignment {
                let _ = write!(code, "{name} = ");
            }
            code.push_str(&expr);
            GenResult {
                code,
                warnings: Vec::new(),
            }
        }
        Err(warning) => GenResult {
            code: String::new(),
            warnings: vec![warning],
        },
    }
}

fn render_chain(
    backend: &dyn Backend,
    line: &DslLine,
    ctx: &GenContext,
) -> Result<String, GenWarning> {
    let source = line.source.as_ref().map(Ident::as_str).unwrap_or("");
    let mut expr = source.to_string();
    for op in &line.chain {
        expr = render_op(backend, op, &expr, source, ctx).map_err(|message| GenWarning {
            op: op.keyword(),
            message,
        })?;
    }
    Ok(expr)
}

fn render_op(b: &dyn Backend, op: &ChainOp, df: &str, source: &str, ctx: &GenContext) -> Emission {
    match op {
        ChainOp::Load {
            format,
            path,
            schema,
        } => b.load(
            ctx,
            format.unwrap_or(FileFormat::Csv),
            &path.to_string(),
            schema.as_ref(),
        ),
        ChainOp::Save { format, path } => b.save(df, *format, &path.to_string()),
        ChainOp::SelectCols { cols } => b.select_cols(df, cols),
        ChainOp::SelectRows { cond } => b.select_rows(df, &render_selector(cond, source)),
        ChainOp::DropCols { cols } => b.drop_cols(df, cols),
        ChainOp::DropRows { cond } => b.drop_rows(df, &render_selector(cond, source)),
        ChainOp::GroupBy { cols, agg } => b.group_by(df, cols, *agg),
        ChainOp::OnMissingFill { value } => b.fill_missing(df, &value.to_string()),
        ChainOp::OnMissingDropRows => b.drop_missing(df),
        ChainOp::Replace { old, new } => b.replace(df, &old.to_string(), &new.to_string()),
        ChainOp::ApplyFun { func, axis } => b.apply_fun(df, func, *axis),
        ChainOp::AppendCol { name } => b.append_col(df, name),
        ChainOp::AppendRow { name, default } => b.append_row(df, name, &default.to_string()),
        ChainOp::SortBy { col } => b.sort_by(df, col),
        ChainOp::DropDuplicates => b.drop_duplicates(df),
        ChainOp::RenameCols { pairs } => b.rename_cols(df, pairs),
        ChainOp::Show => b.show(df),
        ChainOp::Describe => b.describe(df),
        ChainOp::ReturnTopN { n } => b.head(df, *n),
        ChainOp::Count => b.count(df),
        ChainOp::StartSession { name } => b.start_session(ctx, name),
        ChainOp::StopSession => b.stop_session(ctx),
        ChainOp::SchemaDef { fields } => b.schema(ctx, fields),
        ChainOp::TargetOption { .. } => {
            Err("target_code is an editor directive and generates no code".to_string())
        }
    }
}

/// Renders a row condition against dataframe `df`. Every comparison,
/// membership test and boolean node is parenthesised.
pub fn render_condition(cond: &CondExpr, df: &str, _ctx: &GenContext) -> String {
    render_cond(cond, df)
}

fn render_cond(cond: &CondExpr, df: &str) -> String {
    match cond {
        CondExpr::Bool { .. } => format!("({})", render_selector(cond, df)),
        CondExpr::Cmp { col, op, rhs } => format!("({df}.{col} {} {rhs})", op.symbol()),
        CondExpr::Member {
            col,
            negated,
            values,
        } => {
            let not = if *negated { "~" } else { "" };
            format!("({not}{df}.{col}.isin({}))", Literal::List(values.clone()))
        }
    }
}

/// Condition text as it appears inside `df[...]` or `filter(...)`: the outer
/// boolean node is not wrapped, since the brackets already delimit it.
fn render_selector(cond: &CondExpr, df: &str) -> String {
    match cond {
        CondExpr::Bool { kind, lhs, rhs } => {
            let op = match kind {
                BoolKind::And => "&",
                BoolKind::Or => "|",
            };
            format!("{} {op} {}", render_cond(lhs, df), render_cond(rhs, df))
        }
        leaf => render_cond(leaf, df),
    }
}

/// Spark `StructType` construction for a schema statement.
pub fn render_schema(fields: &[(Ident, DslType)], _ctx: &GenContext) -> String {
    let fields: Vec<String> = fields
        .iter()
        .map(|(name, ty)| {
            format!(
                "StructField({}, {}(), True)",
                quote_single(name.as_str()),
                spark_type_name(*ty)
            )
        })
        .collect();
    format!("StructType([{}])", fields.join(", "))
}

fn spark_type_name(ty: DslType) -> &'static str {
    match ty {
        DslType::Int => "IntegerType",
        DslType::Str => "StringType",
        DslType::Float => "FloatType",
        DslType::Bool => "BooleanType",
    }
}

pub(crate) fn quoted_list(cols: &[Ident]) -> String {
    cols.iter()
        .map(|c| quote_single(c.as_str()))
        .collect::<Vec<_>>()
        .join(", ")
}
