//! Reference values of the ⟨z⟩ / z_peak tables, as printed (g = 980.7 cm/s²,
//! u = 10³ cm/s, σ0 = 0.1 cm, t = 2 s; m = 10 amu for the α rows and
//! α = 0.5 for the mass rows), and the comparison used by `--verify`.
//!
//! Some rows are printed with trailing zeros, i.e. cut to four decimals.
//! The tolerance of a value is therefore the larger of the column tolerance
//! and one unit in its last significant printed digit.

use super::csv::CsvTable;

/// Absolute tolerance for `mean_z_cm`, cm.
pub const MEAN_Z_TOL: f64 = 1e-9;
/// Absolute tolerance for `z_peak_cm`, cm.
pub const Z_PEAK_TOL: f64 = 1e-3;

/// `(alpha, z_peak, mean_z)` at m = 10 amu.
pub const ALPHA_ROWS: [(f64, &str, &str); 11] = [
    (0.0, "38.59999999999815", "38.599999999999910"),
    (0.1, "38.61540633397262", "38.611498366598200"),
    (0.2, "38.62925626009014", "38.622755653868810"),
    (0.3, "38.64090000000000", "38.633500000000000"),
    (0.4, "38.65026513575232", "38.643679695976970"),
    (0.5, "38.65786585282045", "38.652999876917650"),
    (0.6, "38.66400000000000", "38.661400000000000"),
    (0.7, "38.66910000000000", "38.668800000000000"),
    (0.8, "38.67337906376510", "38.675246198243485"),
    (0.9, "38.67696171641449", "38.680689435211890"),
    (1.0, "38.68002216630916", "38.685197660661515"),
];

/// `(mass_amu, z_peak, mean_z)` at α = 0.5.
pub const MASS_ROWS: [(f64, &str, &str); 5] = [
    (30.0, "38.657865898827980", "38.65299987691765"),
    (60.0, "38.657865903136155", "38.65299987691765"),
    (90.0, "38.657865903934166", "38.65299987691765"),
    (120.0, "38.657865904213070", "38.65299987691765"),
    (150.0, "38.657865904342295", "38.65299987691765"),
];

/// One unit in the last nonzero decimal of a printed number.
pub fn last_digit_unit(printed: &str) -> f64 {
    let decimals = printed.split_once('.').map_or(0, |(_, frac)| frac.trim_end_matches('0').len());
    10f64.powi(-(decimals as i32))
}

/// Tolerance applied to a printed reference value.
pub fn tolerance(printed: &str, column_tol: f64) -> f64 {
    column_tol.max(last_digit_unit(printed))
}

/// One compared cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub table: String,
    pub key: f64,
    pub column: &'static str,
    pub computed: f64,
    pub printed: &'static str,
    pub tolerance: f64,
}

impl Check {
    pub fn reference(&self) -> f64 {
        self.printed.parse().expect("golden values are valid numbers")
    }

    pub fn difference(&self) -> f64 {
        self.computed - self.reference()
    }

    pub fn passed(&self) -> bool {
        self.difference().abs() <= self.tolerance
    }

    pub fn describe(&self) -> String {
        format!(
            "{} {}={} {}: computed {:.15} printed {} diff {:.3e} tol {:.0e} {}",
            self.table,
            if self.table == "table_alpha" { "alpha" } else { "mass_amu" },
            self.key,
            self.column,
            self.computed,
            self.printed,
            self.difference(),
            self.tolerance,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

/// Outcome of comparing computed tables with the references.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Verification {
    pub checks: Vec<Check>,
    /// Problems that prevent a comparison, such as a missing row.
    pub problems: Vec<String>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.problems.is_empty() && self.checks.iter().all(Check::passed)
    }

    pub fn report(&self) -> Vec<String> {
        let mut lines: Vec<String> = self.problems.iter().map(|p| format!("problem: {p}")).collect();
        lines.extend(self.checks.iter().map(Check::describe));
        lines
    }
}

fn compare(
    out: &mut Verification,
    table: &CsvTable,
    key_column: &str,
    rows: &[(f64, &'static str, &'static str)],
) {
    let (Some(keys), Some(peaks), Some(means)) =
        (table.column(key_column), table.column("z_peak_cm"), table.column("mean_z_cm"))
    else {
        out.problems.push(format!("{} lacks the expected columns", table.name));
        return;
    };
    for &(key, peak, mean) in rows {
        let Some(i) = keys.iter().position(|k| (k - key).abs() <= 1e-9 * key.abs().max(1.0)) else {
            out.problems.push(format!("{} has no row for {key_column} = {key}", table.name));
            continue;
        };
        for (column, computed, printed, tol) in
            [("z_peak_cm", peaks[i], peak, Z_PEAK_TOL), ("mean_z_cm", means[i], mean, MEAN_Z_TOL)]
        {
            out.checks.push(Check {
                table: table.name.clone(),
                key,
                column,
                computed,
                printed,
                tolerance: tolerance(printed, tol),
            });
        }
    }
}

/// Compares the α table and the mass table with the printed references.
pub fn verify_tables(alpha_table: &CsvTable, mass_table: &CsvTable) -> Verification {
    let mut out = Verification::default();
    compare(&mut out, alpha_table, "alpha", &ALPHA_ROWS);
    compare(&mut out, mass_table, "mass_amu", &MASS_ROWS);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_precision() {
        assert_eq!(last_digit_unit("38.64090000000000"), 1e-4);
        assert_eq!(last_digit_unit("38.633500000000000"), 1e-4);
        assert_eq!(last_digit_unit("38.652999876917650"), 1e-14);
        assert_eq!(tolerance("38.652999876917650", MEAN_Z_TOL), MEAN_Z_TOL);
        assert_eq!(tolerance("38.6614", MEAN_Z_TOL), 1e-4);
    }

    #[test]
    fn mass_rows_share_mean() {
        assert!(MASS_ROWS.iter().all(|r| r.2 == MASS_ROWS[0].2));
        assert!(MASS_ROWS.windows(2).all(|w| w[1].1.parse::<f64>().unwrap() > w[0].1.parse::<f64>().unwrap()));
    }

    #[test]
    fn missing_rows_fail() {
        let empty = CsvTable::new("table_alpha", &["alpha", "z_peak_cm", "mean_z_cm"]);
        let v = verify_tables(&empty, &empty);
        assert!(!v.passed());
        // every α row is missing; the mass table lacks its key column
        assert_eq!(v.problems.len(), 12);
    }
}
