//! Dampening table: `α_max(q_l)`, `r(q_l, 1)` and `r(q_u, α_max(q_l))`.

use accel_core::eacgm::{dampening_table, DampeningTable, REFERENCE_QL, REFERENCE_RATIOS};

use crate::error::{CliError, Result};

/// Computes the table, defaulting to the reference columns and ratios.
pub fn table2(q_l: Option<&[f64]>, ratios: Option<&[f64]>) -> Result<DampeningTable> {
    let q_l = q_l.unwrap_or(&REFERENCE_QL);
    let ratios = ratios.unwrap_or(&REFERENCE_RATIOS);
    for &q in q_l {
        if !(0.0..=1.0).contains(&q) {
            return Err(CliError::Config(format!("q_l values must lie in [0, 1], got {q}")));
        }
    }
    for &r in ratios {
        if !(r > 0.0 && r <= 1.0) {
            return Err(CliError::Config(format!("q_u / q_l ratios must lie in (0, 1], got {r}")));
        }
    }
    Ok(dampening_table(q_l, ratios)?)
}

/// Fixed-width text with four decimals, one column per `q_l`.
pub fn render_text(t: &DampeningTable) -> String {
    let mut out = String::new();
    let cell = |v: f64| format!("{v:>9.4}");
    out.push_str(&format!("{:<26}", "q_l"));
    for &q in &t.q_l {
        out.push_str(&format!("{:>9}", short(q)));
    }
    out.push('\n');
    let mut line = |label: String, values: &[f64]| {
        out.push_str(&format!("{label:<26}"));
        for &v in values {
            out.push_str(&cell(v));
        }
        out.push('\n');
    };
    line("alpha_max(q_l)".into(), &t.alpha_max);
    line("r(q_l, 1)".into(), &t.ideal_ratio);
    for (ratio, row) in t.ratios.iter().zip(&t.grid) {
        line(format!("r(q_u, a), q_u/q_l={}", short(*ratio)), row);
    }
    out
}

/// Same layout as [`render_text`] with full precision, comma separated.
pub fn render_csv(t: &DampeningTable) -> String {
    let mut out = String::from("row");
    for &q in &t.q_l {
        out.push_str(&format!(",{q:e}"));
    }
    out.push('\n');
    let mut line = |label: String, values: &[f64]| {
        out.push_str(&label);
        for &v in values {
            out.push_str(&format!(",{v:.17e}"));
        }
        out.push('\n');
    };
    line("alpha_max".into(), &t.alpha_max);
    line("r_ideal".into(), &t.ideal_ratio);
    for (ratio, row) in t.ratios.iter().zip(&t.grid) {
        line(format!("ratio={ratio:e}"), row);
    }
    out
}

fn short(v: f64) -> String {
    if v == 0.0 || v == 1.0 {
        format!("{v}")
    } else if v >= 0.2 {
        format!("{v:.4}")
    } else {
        format!("{v:.0e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits_and_validation() {
        let t = table2(Some(&[0.0]), Some(&[1.0])).unwrap();
        assert_eq!(t.alpha_max[0], 1.0);
        assert!((t.ideal_ratio[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!(table2(Some(&[1.5]), None).is_err());
        assert!(table2(None, Some(&[0.0])).is_err());
    }

    #[test]
    fn renders_every_row() {
        let t = table2(None, None).unwrap();
        let text = render_text(&t);
        assert_eq!(text.lines().count(), 3 + t.ratios.len());
        assert!(text.contains("0.9337"));
        assert!(text.contains("1.3617"));
        let csv = render_csv(&t);
        assert_eq!(csv.lines().count(), 3 + t.ratios.len());
        assert!(csv.lines().all(|l| l.split(',').count() == 1 + t.q_l.len()));
    }
}
