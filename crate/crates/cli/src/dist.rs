use crate::error::{CliError, Result};
use crate::output::{csv_table, emit, num};
use crate::{DistArgs, Format};
use serde_json::{Map, Value};
use srcusum_core::NullLaw;

const MAX_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Arg {
    T,
    X,
    N,
}

impl Arg {
    fn name(self) -> &'static str {
        match self {
            Arg::T => "t",
            Arg::X => "x",
            Arg::N => "n",
        }
    }
}

type Eval = fn(&NullLaw, &[f64]) -> Result<f64>;

struct Function {
    name: &'static str,
    args: &'static [Arg],
    eval: Eval,
}

const FUNCTIONS: &[Function] = &[
    Function {
        name: "m_tail",
        args: &[Arg::X],
        eval: |l, a| Ok(l.m_tail(a[0])),
    },
    Function {
        name: "joint_density",
        args: &[Arg::T, Arg::X],
        eval: |l, a| Ok(l.joint_density(a[0], a[1])),
    },
    Function {
        name: "conditional_sigma_cdf",
        args: &[Arg::T, Arg::X],
        eval: |l, a| Ok(l.conditional_sigma_cdf(a[0], a[1])),
    },
    Function {
        name: "conditional_sigma_density",
        args: &[Arg::T, Arg::X],
        eval: |l, a| Ok(l.conditional_sigma_density(a[0], a[1])),
    },
    Function {
        name: "sigma_marginal_density",
        args: &[Arg::T],
        eval: |l, a| Ok(l.sigma_marginal_density(a[0])),
    },
    Function {
        name: "sigma_survival",
        args: &[Arg::T],
        eval: |l, a| Ok(l.sigma_survival(a[0])),
    },
    Function {
        name: "sigma_cdf",
        args: &[Arg::T],
        eval: |l, a| Ok(l.sigma_cdf(a[0])),
    },
    Function {
        name: "joint_tail",
        args: &[Arg::T, Arg::X],
        eval: |l, a| Ok(l.joint_tail(a[0], a[1])?),
    },
    Function {
        name: "corrected_exponential_cdf",
        args: &[Arg::X],
        eval: |l, a| Ok(l.corrected_exponential_cdf(a[0])),
    },
    Function {
        name: "ig_overshoot_cdf",
        args: &[Arg::N, Arg::X],
        eval: |l, a| Ok(l.ig_overshoot_cdf(a[0], a[1])),
    },
];

const MOMENTS: &str = "sigma_m_moments";

pub fn function_names() -> Vec<&'static str> {
    FUNCTIONS.iter().map(|f| f.name).chain([MOMENTS]).collect()
}

/// Parses `v`, `v1,v2,...` or `start:stop:step` (inclusive of `stop` up to
/// rounding).
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |why: String| CliError::Usage(format!("invalid grid {text:?}: {why}"));
    let value = |s: &str| -> Result<f64> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| bad(format!("{s:?} is not a number")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad(format!("{s:?} is not finite")))
        }
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [list] => list.split(',').map(value).collect(),
        [start, stop, step] => {
            let (a, b, h) = (value(start)?, value(stop)?, value(step)?);
            if h <= 0.0 {
                return Err(bad("step must be positive".into()));
            }
            if b < a {
                return Err(bad("stop is below start".into()));
            }
            let count = ((b - a) / h + 1e-9).floor() + 1.0;
            if count > MAX_POINTS as f64 {
                return Err(bad(format!("more than {MAX_POINTS} points")));
            }
            Ok((0..count as usize).map(|i| a + i as f64 * h).collect())
        }
        _ => Err(bad("use a value, a comma list or start:stop:step".into())),
    }
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

pub fn evaluate(args: &DistArgs) -> Result<Table> {
    let law = NullLaw::new(args.delta)?;
    let given = [(Arg::T, &args.t), (Arg::X, &args.x), (Arg::N, &args.n)];

    if args.function == MOMENTS {
        if let Some((a, _)) = given.iter().find(|(_, g)| g.is_some()) {
            return Err(CliError::Usage(format!(
                "{MOMENTS} takes no --{} grid",
                a.name()
            )));
        }
        let m = law.sigma_m_moments();
        return Ok(Table {
            header: vec!["delta", "mean", "variance", "covariance", "correlation"],
            rows: vec![vec![
                args.delta,
                m.mean,
                m.variance,
                m.covariance,
                m.correlation,
            ]],
        });
    }

    let f = FUNCTIONS
        .iter()
        .find(|f| f.name == args.function)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "unknown function {:?}; available: {}",
                args.function,
                function_names().join(", ")
            ))
        })?;
    for (a, g) in &given {
        if g.is_some() && !f.args.contains(a) {
            return Err(CliError::Usage(format!(
                "{} takes no --{} grid",
                f.name,
                a.name()
            )));
        }
    }
    let grids = f
        .args
        .iter()
        .map(|a| {
            let text = given
                .iter()
                .find(|(b, _)| b == a)
                .and_then(|(_, g)| g.as_deref());
            text.ok_or_else(|| CliError::Usage(format!("{} needs --{}", f.name, a.name())))
                .and_then(parse_grid)
        })
        .collect::<Result<Vec<_>>>()?;
    let total: usize = grids.iter().map(Vec::len).product();
    if total > MAX_POINTS {
        return Err(CliError::Usage(format!(
            "grid has {total} points, more than {MAX_POINTS}"
        )));
    }

    let mut rows = Vec::with_capacity(total);
    let mut point = vec![0.0; grids.len()];
    for i in 0..total {
        let mut rest = i;
        for (k, g) in grids.iter().enumerate().rev() {
            point[k] = g[rest % g.len()];
            rest /= g.len();
        }
        let v = (f.eval)(&law, &point)?;
        let mut row = vec![args.delta];
        row.extend_from_slice(&point);
        row.push(v);
        rows.push(row);
    }
    let mut header = vec!["delta"];
    header.extend(f.args.iter().map(|a| a.name()));
    header.push("value");
    Ok(Table { header, rows })
}

pub fn run(args: &DistArgs) -> Result<()> {
    let table = evaluate(args)?;
    let text = match args.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = table
                .rows
                .iter()
                .map(|r| r.iter().map(|&v| num(v)).collect())
                .collect();
            csv_table(&table.header, &rows)?
        }
        Format::Json => {
            let records: Vec<Value> = table
                .rows
                .iter()
                .map(|r| {
                    let obj: Map<String, Value> = table
                        .header
                        .iter()
                        .zip(r)
                        .map(|(h, v)| (h.to_string(), Value::from(*v)))
                        .collect();
                    Value::Object(obj)
                })
                .collect();
            crate::output::json(&records)
        }
    };
    emit(args.out.as_deref(), &text)
}
