use super::{quoted_list, Backend, Emission, GenContext};
use crate::ast::{quote_single, AggFn, ColsOrRows, DslType, FileFormat, Ident, Target};

const SPARK_ONLY: &str = "Spark-only operation with no pandas equivalent";

/// In-memory pandas dataframes.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pandas;

impl Backend for Pandas {
    fn target(&self) -> Target {
        Target::Pandas
    }

    fn load(
        &self,
        ctx: &GenContext,
        format: FileFormat,
        path: &str,
        schema: Option<&Ident>,
    ) -> Emission {
        if schema.is_some() {
            return Err(format!("with_schema is a {SPARK_ONLY}"));
        }
        Ok(format!("{}.read_{format}({path})", ctx.pandas_alias))
    }

    fn save(&self, df: &str, format: FileFormat, path: &str) -> Emission {
        Ok(format!("{df}.to_{format}({path})"))
    }

    fn select_cols(&self, df: &str, cols: &[Ident]) -> Emission {
        Ok(format!("{df}[[{}]]", quoted_list(cols)))
    }

    fn select_rows(&self, df: &str, cond: &str) -> Emission {
        Ok(format!("{df}[{cond}]"))
    }

    fn drop_cols(&self, df: &str, cols: &[Ident]) -> Emission {
        Ok(format!("{df}.drop(columns=[{}])", quoted_list(cols)))
    }

    fn drop_rows(&self, df: &str, cond: &str) -> Emission {
        Ok(format!("{df}[~({cond})]"))
    }

    fn group_by(&self, df: &str, cols: &[Ident], agg: AggFn) -> Emission {
        let grouped = format!("{df}.groupby([{}])", quoted_list(cols));
        Ok(match agg {
            AggFn::Unique => format!("{grouped}.agg(['unique'])"),
            other => format!("{grouped}.{other}()"),
        })
    }

    fn fill_missing(&self, df: &str, value: &str) -> Emission {
        Ok(format!("{df}.fillna({value})"))
    }

    fn drop_missing(&self, df: &str) -> Emission {
        Ok(format!("{df}.dropna()"))
    }

    fn apply_fun(&self, df: &str, func: &Ident, axis: ColsOrRows) -> Emission {
        let axis = match axis {
            ColsOrRows::Cols => 0,
            ColsOrRows::Rows => 1,
        };
        Ok(format!("{df}.apply({func}, axis={axis})"))
    }

    fn append_col(&self, df: &str, name: &Ident) -> Emission {
        Ok(format!("{df}.assign({name}=None)"))
    }

    fn append_row(&self, df: &str, name: &Ident, default: &str) -> Emission {
        Ok(format!(
            "{df}.append({{{}: {default}}}, ignore_index=True)",
            quote_single(name.as_str())
        ))
    }

    fn sort_by(&self, df: &str, col: &Ident) -> Emission {
        Ok(format!("{df}.sort_values({})", quote_single(col.as_str())))
    }

    fn drop_duplicates(&self, df: &str) -> Emission {
        Ok(format!("{df}.drop_duplicates()"))
    }

    fn rename_cols(&self, df: &str, pairs: &[(Ident, Ident)]) -> Emission {
        let mapping: Vec<String> = pairs
            .iter()
            .map(|(from, to)| {
                format!(
                    "{}: {}",
                    quote_single(from.as_str()),
                    quote_single(to.as_str())
                )
            })
            .collect();
        Ok(format!("{df}.rename(columns={{{}}})", mapping.join(", ")))
    }

    fn show(&self, df: &str) -> Emission {
        Ok(format!("print({df})"))
    }

    fn describe(&self, df: &str) -> Emission {
        Ok(format!("{df}.describe()"))
    }

    fn start_session(&self, _ctx: &GenContext, _name: &str) -> Emission {
        Err(SPARK_ONLY.to_string())
    }

    fn stop_session(&self, _ctx: &GenContext) -> Emission {
        Err(SPARK_ONLY.to_string())
    }

    fn schema(&self, _ctx: &GenContext, _fields: &[(Ident, DslType)]) -> Emission {
        Err(SPARK_ONLY.to_string())
    }
}
