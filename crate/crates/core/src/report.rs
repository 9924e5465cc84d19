//! Fixed-layout CSV output. Numbers are printed with six significant digits
//! in the style of C's `%g`.

use std::fmt::Write as _;

use crate::girkmann::{BenchmarkResult, ComplianceSet, TableRow, QUANTITY_NAMES, REFERENCE_SHELL};

pub const TABLE_HEADER: &str = "formulation,N,quantity,raw,normalized";
pub const PROFILE_HEADER: &str = "colatitude_deg,m11_Nm_per_m";
pub const REPORT_HEADER: &str = "quantity,value";

const SIGNIFICANT: i32 = 6;

/// `%g` with six significant digits: fixed notation for exponents in
/// `[-4, 6)`, scientific otherwise, trailing zeros removed.
pub fn format_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    // the exponent after rounding decides the notation
    let sci = format!("{:.*e}", (SIGNIFICANT - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -4 || exp >= SIGNIFICANT {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIGNIFICANT - 1 - exp).max(0) as usize;
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

pub fn compliance_table_csv(rows: &[TableRow]) -> String {
    let mut out = format!("{TABLE_HEADER}\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.formulation, r.n, r.quantity, format_g(r.raw), format_g(r.normalized));
    }
    out
}

pub fn profile_csv(profile: &[(f64, f64)]) -> String {
    let mut out = format!("{PROFILE_HEADER}\n");
    for &(deg, m) in profile {
        let _ = writeln!(out, "{},{}", format_g(deg), format_g(m));
    }
    out
}

fn push_set(out: &mut String, prefix: &str, set: &ComplianceSet, reference: Option<&ComplianceSet>) {
    let values = set.values();
    let normalized = reference.map(|r| set.normalized(r));
    for (k, name) in QUANTITY_NAMES.iter().enumerate() {
        let _ = writeln!(out, "{prefix}_{name},{}", format_g(values[k]));
        if let Some(n) = normalized {
            let _ = writeln!(out, "{prefix}_{name}_normalized,{}", format_g(n[k]));
        }
    }
}

/// Compliances, reactions and the relative residuals of the four cases.
pub fn benchmark_report_csv(result: &BenchmarkResult) -> String {
    let mut out = format!("{REPORT_HEADER}\n");
    push_set(&mut out, "shell", &result.shell, Some(&REFERENCE_SHELL));
    push_set(&mut out, "ring", &result.ring, None);
    let r = &result.reactions;
    for (name, v) in [("R", r.r), ("M", r.m), ("Q", r.q)] {
        let _ = writeln!(out, "{name},{}", format_g(v));
    }
    for (k, sol) in result.solutions.iter().take(3).enumerate() {
        let _ = writeln!(out, "case{}_residual,{}", k + 1, format_g(sol.stats.residual));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format_matches_c() {
        let cases = [
            (1467.0, "1467"),
            (-37.3612345, "-37.3612"),
            (0.5, "0.5"),
            (1.0e-5, "1e-05"),
            (1.234567e-5, "1.23457e-05"),
            (123456.0, "123456"),
            (1234567.0, "1.23457e+06"),
            (999999.5, "1e+06"),
            (-2.3e6, "-2.3e+06"),
            (0.0001, "0.0001"),
            (100.0, "100"),
            (0.0, "0"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g(x), want, "{x}");
        }
    }
}
