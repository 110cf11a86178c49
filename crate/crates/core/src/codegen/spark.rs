use super::{quoted_list, render_schema, Backend, Emission, GenContext};
use crate::ast::{quote_single, AggFn, ColsOrRows, DslType, FileFormat, Ident, Target};

/// PySpark dataframes.
#[derive(Debug, Clone, Copy, Default)]
pub struct Spark;

impl Backend for Spark {
    fn target(&self) -> Target {
        Target::Spark
    }

    fn load(
        &self,
        ctx: &GenContext,
        format: FileFormat,
        path: &str,
        schema: Option<&Ident>,
    ) -> Emission {
        let reader = format!("{}.read.{format}", ctx.session_var);
        Ok(match schema {
            Some(schema) => format!("{reader}({path}, schema={schema})"),
            None => format!("{reader}({path})"),
        })
    }

    fn save(&self, df: &str, format: FileFormat, path: &str) -> Emission {
        Ok(format!("{df}.write.{format}({path})"))
    }

    fn select_cols(&self, df: &str, cols: &[Ident]) -> Emission {
        Ok(format!("{df}.select({})", quoted_list(cols)))
    }

    fn select_rows(&self, df: &str, cond: &str) -> Emission {
        Ok(format!("{df}.filter({cond})"))
    }

    fn drop_cols(&self, df: &str, cols: &[Ident]) -> Emission {
        Ok(format!("{df}.drop({})", quoted_list(cols)))
    }

    fn drop_rows(&self, df: &str, cond: &str) -> Emission {
        Ok(format!("{df}.filter(~({cond}))"))
    }

    fn group_by(&self, df: &str, cols: &[Ident], agg: AggFn) -> Emission {
        let grouped = format!("{df}.groupBy({})", quoted_list(cols));
        Ok(match agg {
            // weakest mapping: collect_set over all columns
            AggFn::Unique => format!("{grouped}.agg(collect_set('*'))"),
            other => format!("{grouped}.{other}()"),
        })
    }

    fn fill_missing(&self, df: &str, value: &str) -> Emission {
        Ok(format!("{df}.na.fill({value})"))
    }

    fn drop_missing(&self, df: &str) -> Emission {
        Ok(format!("{df}.na.drop()"))
    }

    fn apply_fun(&self, _df: &str, _func: &Ident, _axis: ColsOrRows) -> Emission {
        Err("apply_fun requires a UDF; write it directly".to_string())
    }

    fn append_col(&self, df: &str, name: &Ident) -> Emission {
        Ok(format!(
            "{df}.withColumn({}, lit(None))",
            quote_single(name.as_str())
        ))
    }

    fn append_row(&self, _df: &str, _name: &Ident, _default: &str) -> Emission {
        Err("append_row is pandas-only; Spark dataframes have no row append".to_string())
    }

    fn sort_by(&self, df: &str, col: &Ident) -> Emission {
        Ok(format!("{df}.sort({})", quote_single(col.as_str())))
    }

    fn drop_duplicates(&self, df: &str) -> Emission {
        Ok(format!("{df}.dropDuplicates()"))
    }

    fn rename_cols(&self, df: &str, pairs: &[(Ident, Ident)]) -> Emission {
        let mut out = df.to_string();
        for (from, to) in pairs {
            out.push_str(&format!(
                ".withColumnRenamed({}, {})",
                quote_single(from.as_str()),
                quote_single(to.as_str())
            ));
        }
        Ok(out)
    }

    fn show(&self, df: &str) -> Emission {
        Ok(format!("{df}.show()"))
    }

    fn describe(&self, df: &str) -> Emission {
        Ok(format!("{df}.describe().show()"))
    }

    fn start_session(&self, ctx: &GenContext, name: &str) -> Emission {
        Ok(format!(
            "{} = SparkSession.builder.appName({}).getOrCreate()",
            ctx.session_var,
            quote_single(name)
        ))
    }

    fn stop_session(&self, ctx: &GenContext) -> Emission {
        Ok(format!("{}.stop()", ctx.session_var))
    }

    fn schema(&self, ctx: &GenContext, fields: &[(Ident, DslType)]) -> Emission {
        Ok(render_schema(fields, ctx))
    }
}
