//! Gnuplot script stubs for trace CSV files.

/// Plots `‖v_k − x*‖²` against `k` on a log scale from the trace CSV `csv_name`.
pub fn gnuplot_script(csv_name: &str, title: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set logscale y\n\
         set xlabel 'k'\n\
         set ylabel '||v_k - x*||^2'\n\
         set title '{title}'\n\
         plot '{csv_name}' using (column(\"k\")):(column(\"dist_sq\")) with lines title '{title}'\n"
    )
}
