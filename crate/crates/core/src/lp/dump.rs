//! Human-readable text rendering of a model, one constraint per line.

use std::fmt::Write as _;
use std::io::{self, Write};

use super::{LinearProgram, Sense};

fn fmt_num(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

fn linear(lp: &LinearProgram, terms: impl Iterator<Item = (usize, f64)>) -> String {
    let mut out = String::new();
    for (j, a) in terms {
        if a == 0.0 {
            continue;
        }
        let sign = if a < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", fmt_num(a.abs()), lp.variables[j].name);
    }
    if out.is_empty() {
        " 0".into()
    } else {
        out
    }
}

/// Writes `lp` in a line-oriented text form suitable for diffing or for
/// re-entry into another solver by hand.
pub fn write_lp(lp: &LinearProgram, mut w: impl Write) -> io::Result<()> {
    let sense = match lp.sense {
        Sense::Minimize => "minimize",
        Sense::Maximize => "maximize",
    };
    writeln!(
        w,
        "{sense}:{} + {}",
        linear(lp, lp.objective.iter().copied().enumerate()),
        fmt_num(lp.objective_offset)
    )?;
    writeln!(w, "subject to:")?;
    for c in &lp.constraints {
        let lazy = if c.lazy { " [lazy]" } else { "" };
        writeln!(
            w,
            "  {}:{} {} {}{lazy}",
            c.name,
            linear(lp, c.terms.iter().map(|&(v, a)| (v.0, a))),
            c.relation,
            fmt_num(c.rhs)
        )?;
    }
    writeln!(w, "bounds:")?;
    for v in &lp.variables {
        let kind = if v.is_binary { " binary" } else { "" };
        writeln!(
            w,
            "  {} <= {} <= {}{kind}",
            fmt_num(v.lower),
            v.name,
            fmt_num(v.upper)
        )?;
    }
    writeln!(w, "end")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Relation;

    #[test]
    fn one_line_per_constraint() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, f64::INFINITY);
        let b = lp.add_binary("b");
        lp.set_cost(x, 2.0);
        lp.add_constraint("cap", vec![(x, 1.0), (b, -3.5)], Relation::Le, 1.0);
        let mut buf = Vec::new();
        write_lp(&lp, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "maximize: + 2 x + 0\nsubject to:\n  cap: + 1 x - 3.5 b <= 1\nbounds:\n  0 <= x <= +inf\n  0 <= b <= 1 binary\nend\n"
        );
    }
}
