//! CPLEX LP-format text dump, for handing a model to an external solver.
//!
//! Coefficients are written in fixed-point notation with 12 fractional
//! digits. Variable and row names are sanitized to `[A-Za-z0-9_.]`.

use std::fmt::{self, Write};

use crate::model::{LinearProgram, MixedIntegerProgram, Relation, Sense};

fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.starts_with(|c: char| c.is_ascii_digit() || c == '.') || s.is_empty() {
        format!("v{s}")
    } else {
        s
    }
}

fn write_terms(out: &mut String, terms: &[(usize, f64)], names: &[String]) -> fmt::Result {
    let mut first = true;
    for &(j, a) in terms {
        if a == 0.0 {
            continue;
        }
        let sign = if a < 0.0 { '-' } else { '+' };
        if first {
            if a < 0.0 {
                out.push_str("- ");
            }
        } else {
            write!(out, " {sign} ")?;
        }
        write!(out, "{:.12} {}", a.abs(), names[j])?;
        first = false;
    }
    if first {
        out.push('0');
    }
    Ok(())
}

fn render(lp: &LinearProgram, binaries: &[usize]) -> Result<String, fmt::Error> {
    let names: Vec<String> = lp.names.iter().map(|n| sanitize(n)).collect();
    let mut out = String::new();
    writeln!(
        out,
        "{}",
        match lp.sense {
            Sense::Minimize => "Minimize",
            Sense::Maximize => "Maximize",
        }
    )?;
    out.push_str(" obj: ");
    let obj: Vec<(usize, f64)> = lp.objective.iter().copied().enumerate().collect();
    write_terms(&mut out, &obj, &names)?;
    out.push_str("\nSubject To\n");
    for (i, row) in lp.rows.iter().enumerate() {
        write!(out, " {}_{}: ", sanitize(&row.name), i)?;
        write_terms(&mut out, &row.coeffs, &names)?;
        let rel = match row.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        writeln!(out, " {rel} {:.12}", row.rhs)?;
    }
    out.push_str("Bounds\n");
    for (j, name) in names.iter().enumerate() {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) if lo == hi => writeln!(out, " {name} = {lo:.12}")?,
            (true, true) => writeln!(out, " {lo:.12} <= {name} <= {hi:.12}")?,
            (true, false) if lo == 0.0 => {}
            (true, false) => writeln!(out, " {name} >= {lo:.12}")?,
            (false, true) => writeln!(out, " -inf <= {name} <= {hi:.12}")?,
            (false, false) => writeln!(out, " {name} free")?,
        }
    }
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for &j in binaries {
            writeln!(out, " {}", names[j])?;
        }
    }
    out.push_str("End\n");
    Ok(out)
}

impl LinearProgram {
    /// Renders the program in CPLEX LP format.
    pub fn to_lp_format(&self) -> String {
        render(self, &[]).expect("writing to a String cannot fail")
    }
}

impl MixedIntegerProgram {
    pub fn to_lp_format(&self) -> String {
        render(&self.lp, &self.binaries).expect("writing to a String cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_layout() {
        let mut mip = MixedIntegerProgram::new(LinearProgram::new(Sense::Minimize));
        let x = mip.lp.add_var("lambda[s1,a]", 2.0);
        let d = mip.add_binary("delta[s1,a]", 0.0);
        mip.lp.add_row("link", vec![(x, 1.0), (d, -3.0)], Relation::Le, 0.0);
        let text = mip.to_lp_format();
        assert!(text.starts_with("Minimize\n obj: 2.000000000000 lambda_s1_a_"));
        assert!(text.contains(" link_0: 1.000000000000 lambda_s1_a_ - 3.000000000000 delta_s1_a_ <= 0.000000000000"));
        assert!(text.contains("Binaries\n delta_s1_a_\n"));
        assert!(text.ends_with("End\n"));
    }
}
