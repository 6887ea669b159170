//! Sweep CSV: fixed columns, 17 significant digits, `\n` line endings.

use spectral_gap::SweepRecord;

/// `{:.16e}` is locale independent and round-trips every `f64`.
pub fn number(x: f64) -> String {
    format!("{x:.16e}")
}

fn optional(x: Option<f64>) -> String {
    x.map(number).unwrap_or_default()
}

fn flag(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

pub fn header() -> String {
    SweepRecord::COLUMNS.join(",")
}

pub fn row(r: &SweepRecord) -> String {
    [
        number(r.length),
        number(r.lambda0),
        number(r.lambda1),
        number(r.gap),
        number(r.k0),
        number(r.kirsch_rhs),
        number(r.lemma_rhs),
        optional(r.theorem_rhs),
        optional(r.separation),
        number(r.err_estimate),
        flag(r.hypotheses_ok).into(),
        flag(r.lemma_gate).into(),
        flag(r.theorem_gate).into(),
        flag(r.dominated_kirsch).into(),
        flag(r.dominated_lemma).into(),
        r.dominated_theorem.map(flag).unwrap_or_default().into(),
        flag(r.intermediate_ok).into(),
        flag(r.converged).into(),
    ]
    .join(",")
}

pub fn render<'a>(records: impl IntoIterator<Item = &'a SweepRecord>) -> String {
    let mut out = header();
    out.push('\n');
    for r in records {
        out.push_str(&row(r));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(number(0.1), "1.0000000000000001e-1");
        assert_eq!(number(-0.25), "-2.5000000000000000e-1");
        let x = std::f64::consts::PI / 7.0;
        assert_eq!(number(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn header_matches_columns() {
        assert_eq!(
            header(),
            "L,lambda0,lambda1,gap,k0,kirsch_rhs,lemma_rhs,theorem_rhs,separation,err_estimate,\
             hypotheses_ok,lemma_gate,theorem_gate,dominated_kirsch,dominated_lemma,\
             dominated_theorem,intermediate_ok,converged"
        );
    }
}
