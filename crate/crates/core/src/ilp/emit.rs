//! LP-format text emission: `Maximize`, `Subject To`, `Binary`, `End`.
//! Output is byte-identical across runs for identical inputs; the verbose
//! flag adds one provenance comment per constraint naming its family.

use super::{Cmp, IlpModel};

/// Decimal rendering with 12 significant digits; integers print bare.
pub(crate) fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.fract() == 0.0 && v.abs() < 1e12 {
        return format!("{}", v as i64);
    }
    let mag = v.abs().log10().floor() as i32;
    let decimals = (11 - mag).max(0) as usize;
    let s = format!("{:.*}", decimals, v);
    let s = s.trim_end_matches('0');
    s.trim_end_matches('.').to_string()
}

fn push_terms(out: &mut String, terms: &[(f64, usize)], m: &IlpModel, indent: &str) {
    let mut on_line = 0usize;
    for (pos, &(coef, var)) in terms.iter().enumerate() {
        if pos > 0 && on_line == 8 {
            out.push('\n');
            out.push_str(indent);
            on_line = 0;
        }
        let mag = coef.abs();
        if pos == 0 {
            if coef < 0.0 {
                out.push_str("- ");
            }
        } else if coef < 0.0 {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        if mag != 1.0 {
            out.push_str(&fmt_num(mag));
            out.push(' ');
        }
        out.push_str(m.var_name(var));
        on_line += 1;
    }
}

/// Render the program. An empty objective or constraint body prints as `0`.
pub fn emit_lp(m: &IlpModel, verbose: bool) -> String {
    let mut out = String::new();
    out.push_str("Maximize\n obj: ");
    if m.objective.is_empty() {
        out.push('0');
    } else {
        push_terms(&mut out, &m.objective, m, "      ");
    }
    out.push_str("\nSubject To\n");
    for (i, c) in m.constraints.iter().enumerate() {
        if verbose {
            out.push_str(&format!("\\ family ({})\n", c.family));
        }
        out.push_str(&format!(" c{}: ", i + 1));
        if c.terms.is_empty() {
            out.push('0');
        } else {
            push_terms(&mut out, &c.terms, m, "      ");
        }
        let op = match c.cmp {
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Eq => "=",
        };
        out.push_str(&format!(" {} {}\n", op, fmt_num(c.rhs)));
    }
    out.push_str("Binary\n");
    for v in &m.vars {
        out.push(' ');
        out.push_str(&v.name);
        out.push('\n');
    }
    out.push_str("End\n");
    out
}
