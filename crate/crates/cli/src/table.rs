use std::io::Write;

use tnc_core::{Error, Solution};

pub const COLUMNS: [&str; 17] = [
    "scenario",
    "param_value",
    "lambda",
    "n_drivers",
    "n_idle",
    "p_f",
    "p_d",
    "p_c",
    "wage_hr",
    "pickup_min",
    "total_cost",
    "occupancy",
    "commission_rate",
    "profit_hr",
    "regime",
    "converged",
    "max_residual",
];

const SIG_DIGITS: usize = 10;

/// `%.10g`: shortest of fixed and scientific notation, trailing zeros dropped.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIG_DIGITS as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (SIG_DIGITS as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone)]
pub struct Row {
    pub scenario: &'static str,
    pub param_value: f64,
    pub result: Result<Solution, Error>,
}

impl Row {
    pub fn record(&self) -> Vec<String> {
        let mut out = vec![self.scenario.to_string(), fmt_g(self.param_value)];
        match &self.result {
            Ok(s) => {
                let o = &s.outcome;
                out.extend(
                    [
                        o.lambda,
                        o.n,
                        o.n_idle,
                        s.prices.p_f,
                        s.prices.p_d,
                        s.prices.p_c,
                        o.wage_per_hr,
                        o.t_w,
                        o.cost,
                        o.occupancy,
                        o.commission_rate,
                        o.profit_per_hr,
                    ]
                    .map(fmt_g),
                );
                out.push(s.regime.as_str().into());
                out.push(s.diagnostics.converged.to_string());
                out.push(fmt_g(s.diagnostics.max_residual));
            }
            Err(e) => {
                out.extend(std::iter::repeat_n("nan".to_string(), 12));
                out.push(e.kind().into());
                out.push("false".into());
                out.push("nan".into());
            }
        }
        out
    }
}

pub fn write_csv<W: Write>(w: W, rows: &[Row]) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(COLUMNS)?;
    for r in rows {
        wr.write_record(r.record())?;
    }
    wr.flush()?;
    Ok(())
}
