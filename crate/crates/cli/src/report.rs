//! Report rows and their CSV / JSON renderings.

use serde::{Deserialize, Serialize};

pub const CSV_HEADER: &str = "protocol,D,rule,engine,step,f_in,f_out,p_success,residual";

/// Significant digits carried by every number in a report.
pub const SIG_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub protocol: String,
    #[serde(rename = "D")]
    pub dim: usize,
    /// `-` for protocols without an acceptance rule.
    pub rule: String,
    pub engine: String,
    pub step: u32,
    pub f_in: f64,
    pub f_out: f64,
    pub p_success: f64,
    /// Only present when simulation and closed form were both run.
    pub residual: Option<f64>,
}

/// `%.12g`: 12 significant digits, trailing zeros dropped, exponent form
/// outside `[1e-5, 1e12)`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= SIG_DIGITS as i32 {
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

/// Rounds to the printed precision, so JSON and CSV carry the same value.
pub fn rounded(x: f64) -> f64 {
    format_number(x).parse().unwrap_or(x)
}

pub fn to_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let residual = r.residual.map(format_number).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.protocol,
            r.dim,
            r.rule,
            r.engine,
            r.step,
            format_number(r.f_in),
            format_number(r.f_out),
            format_number(r.p_success),
            residual,
        ));
    }
    out
}

pub fn to_json(rows: &[ReportRow]) -> String {
    let rounded_rows: Vec<ReportRow> = rows
        .iter()
        .map(|r| ReportRow {
            f_in: rounded(r.f_in),
            f_out: rounded(r.f_out),
            p_success: rounded(r.p_success),
            residual: r.residual.map(rounded),
            ..r.clone()
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&rounded_rows).expect("rows serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ReportRow {
        ReportRow {
            protocol: "bbpssw".into(),
            dim: 3,
            rule: "-".into(),
            engine: "analytic".into(),
            step: 1,
            f_in: 0.5,
            f_out: 2.0 / 3.0,
            p_success: 0.375,
            residual: None,
        }
    }

    #[test]
    fn number_format() {
        assert_eq!(format_number(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_number(0.375), "0.375");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(1e-13), "1e-13");
        assert_eq!(format_number(1.0 / 7f64.powi(6)), "8.49985975231e-06");
        assert_eq!(format_number(0.0001), "0.0001");
        assert_eq!(format_number(123.5), "123.5");
        assert_eq!(format_number(0.9999999999999), "1");
    }

    #[test]
    fn csv_row() {
        assert_eq!(
            to_csv(&[row()]),
            format!("{CSV_HEADER}\nbbpssw,3,-,analytic,1,0.5,0.666666666667,0.375,\n")
        );
    }

    #[test]
    fn json_round_trip() {
        let mut r = row();
        r.residual = Some(3.2e-13);
        let text = to_json(&[r.clone(), row()]);
        let back: Vec<ReportRow> = serde_json::from_str(&text).unwrap();
        assert_eq!(back[0].f_out, rounded(r.f_out));
        assert_eq!(format_number(back[0].f_out), format_number(r.f_out));
        assert_eq!(back[0].residual, Some(3.2e-13));
        assert_eq!(back[1].residual, None);
        assert!(text.contains("\"D\": 3"));
        assert!(text.contains("\"residual\": null"));
    }
}
