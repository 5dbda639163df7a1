use crate::scenarios::LabelGroup;

pub(crate) fn side1_label(group: &LabelGroup, outcome: &str) -> String {
    format!("{}1{}", group.label, outcome)
}

pub(crate) fn side2_label(group: &LabelGroup, outcome: &str) -> String {
    format!("{}2{}", group.label, outcome)
}

fn flat_labels(groups: &[LabelGroup], side: fn(&LabelGroup, &str) -> String) -> Vec<String> {
    groups
        .iter()
        .flat_map(|g| g.outcomes.iter().map(move |o| side(g, o)))
        .collect()
}

/// Render a bipartite table as a fixed-width text grid. Rows are side-1
/// outcomes, columns side-2 outcomes; measurements are separated into
/// blocks. The `cell` closure receives flattened row and column indices.
pub(crate) fn render_block_grid(
    rows: &[LabelGroup],
    cols: &[LabelGroup],
    cell: impl Fn(usize, usize) -> String,
) -> String {
    let row_labels = flat_labels(rows, side1_label);
    let col_labels = flat_labels(cols, side2_label);
    let n_rows = row_labels.len();
    let n_cols = col_labels.len();

    let cells: Vec<Vec<String>> = (0..n_rows)
        .map(|r| (0..n_cols).map(|c| cell(r, c)).collect())
        .collect();

    let label_width = row_labels.iter().map(String::len).max().unwrap_or(0);
    let cell_width = col_labels
        .iter()
        .chain(cells.iter().flatten())
        .map(String::len)
        .max()
        .unwrap_or(1);

    let col_group_sizes: Vec<usize> = cols.iter().map(|g| g.outcomes.len()).collect();

    let line_of = |label: &str, values: &[String]| -> String {
        let mut line = format!("{label:<label_width$} |");
        let mut next = 0;
        for &size in &col_group_sizes {
            for value in &values[next..next + size] {
                line.push(' ');
                line.push_str(&format!("{value:>cell_width$}"));
            }
            line.push_str(" |");
            next += size;
        }
        line
    };

    let separator = {
        let mut line = format!("{:-<label_width$}-+", "");
        for &size in &col_group_sizes {
            line.push_str(&format!("{:-<width$}+", "", width = (cell_width + 1) * size + 1));
        }
        line
    };

    let mut out = String::new();
    out.push_str(&line_of("", &col_labels));
    out.push('\n');
    out.push_str(&separator);
    out.push('\n');
    let mut row = 0;
    for (gi, group) in rows.iter().enumerate() {
        if gi > 0 {
            out.push_str(&separator);
            out.push('\n');
        }
        for outcome in &group.outcomes {
            out.push_str(&line_of(&side1_label(group, outcome), &cells[row]));
            out.push('\n');
            row += 1;
        }
    }
    out
}

/// Render the same table as CSV: a header row of side-2 labels, then one
/// line per side-1 outcome.
pub(crate) fn render_block_csv(
    rows: &[LabelGroup],
    cols: &[LabelGroup],
    cell: impl Fn(usize, usize) -> String,
) -> String {
    let row_labels = flat_labels(rows, side1_label);
    let col_labels = flat_labels(cols, side2_label);
    let mut out = String::new();
    out.push(',');
    out.push_str(&col_labels.join(","));
    out.push('\n');
    for (r, label) in row_labels.iter().enumerate() {
        out.push_str(label);
        for c in 0..col_labels.len() {
            out.push(',');
            out.push_str(&cell(r, c));
        }
        out.push('\n');
    }
    out
}
