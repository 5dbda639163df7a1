use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::grid::{render_block_csv, render_block_grid};
use crate::mqt::{Effect, Measurement, State, is_possible, joint_effect};

/// One measurement's worth of labels on a table axis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelGroup {
    pub label: String,
    pub outcomes: Vec<String>,
}

impl LabelGroup {
    pub fn of(m: &Measurement) -> Self {
        LabelGroup {
            label: m.label().to_string(),
            outcomes: m.outcome_labels().to_vec(),
        }
    }
}

/// The three mobit measurements X, Y, Z over GF(p), built from the effects
/// a = (1,0), b = (0,1), c = (1,1):
/// X is {+: a, -: b}, Y is {+: c, -: a}, Z is {+: b, -: c}.
pub fn mobit_bases(p: u64) -> Result<[Measurement; 3]> {
    let field = PrimeField::new(p)?;
    let a = Effect::from_coords(field, &[1, 0])?;
    let b = Effect::from_coords(field, &[0, 1])?;
    let c = Effect::from_coords(field, &[1, 1])?;
    let outcomes = || vec!["+".to_string(), "-".to_string()];
    Ok([
        Measurement::new("X", outcomes(), vec![a.clone(), b.clone()])?,
        Measurement::new("Y", outcomes(), vec![c.clone(), a])?,
        Measurement::new("Z", outcomes(), vec![b, c])?,
    ])
}

/// The two-mobit singlet state (0, 1, -1, 0) over GF(p). Over GF(2) this is
/// (0, 1, 1, 0) since -1 = 1.
pub fn singlet(p: u64) -> Result<State> {
    let field = PrimeField::new(p)?;
    State::from_coords(field, &[0, 1, -1, 0])
}

/// The standard two-mobit setup: X, Y, Z on each side and the singlet.
#[derive(Debug, Clone)]
pub struct MobitScenario {
    field: PrimeField,
    bases: [Measurement; 3],
    singlet: State,
}

impl MobitScenario {
    pub fn new(p: u64) -> Result<Self> {
        Ok(MobitScenario {
            field: PrimeField::new(p)?,
            bases: mobit_bases(p)?,
            singlet: singlet(p)?,
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn bases(&self) -> &[Measurement; 3] {
        &self.bases
    }

    pub fn singlet(&self) -> &State {
        &self.singlet
    }

    /// The full X/Y/Z-by-X/Y/Z possibility table of the singlet.
    pub fn table(&self) -> Result<PossibilityTable> {
        possibility_table(&self.singlet, &self.bases, &self.bases)
    }
}

/// Which joint outcomes of a bipartite state are possible. Rows are side-1
/// outcomes grouped by measurement, columns side-2 outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PossibilityTable {
    rows: Vec<LabelGroup>,
    cols: Vec<LabelGroup>,
    cells: Vec<Vec<bool>>,
}

pub(crate) fn check_axis(groups: &[LabelGroup], axis: &str) -> Result<usize> {
    if groups.is_empty() {
        return Err(Error::MalformedTable(format!("no {axis} measurements")));
    }
    let mut total = 0;
    for (i, g) in groups.iter().enumerate() {
        if g.outcomes.is_empty() {
            return Err(Error::MalformedTable(format!(
                "measurement {:?} has no outcomes",
                g.label
            )));
        }
        if groups[..i].iter().any(|h| h.label == g.label) {
            return Err(Error::MalformedTable(format!(
                "duplicate {axis} measurement label {:?}",
                g.label
            )));
        }
        for (j, o) in g.outcomes.iter().enumerate() {
            if g.outcomes[..j].contains(o) {
                return Err(Error::MalformedTable(format!(
                    "duplicate outcome {:?} in measurement {:?}",
                    o, g.label
                )));
            }
        }
        total += g.outcomes.len();
    }
    Ok(total)
}

impl PossibilityTable {
    pub fn from_parts(
        rows: Vec<LabelGroup>,
        cols: Vec<LabelGroup>,
        cells: Vec<Vec<bool>>,
    ) -> Result<Self> {
        let n_rows = check_axis(&rows, "row")?;
        let n_cols = check_axis(&cols, "column")?;
        if cells.len() != n_rows || cells.iter().any(|r| r.len() != n_cols) {
            return Err(Error::MalformedTable(format!(
                "cell grid is not {n_rows}x{n_cols}"
            )));
        }
        Ok(PossibilityTable { rows, cols, cells })
    }

    pub fn rows(&self) -> &[LabelGroup] {
        &self.rows
    }

    pub fn cols(&self) -> &[LabelGroup] {
        &self.cols
    }

    pub fn n_rows(&self) -> usize {
        self.cells.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cells.first().map_or(0, Vec::len)
    }

    pub fn cell(&self, row: usize, col: usize) -> bool {
        self.cells[row][col]
    }

    /// Flattened index of an outcome on one axis.
    pub fn axis_index(groups: &[LabelGroup], measurement: &str, outcome: &str) -> Result<usize> {
        let mut offset = 0;
        for g in groups {
            if g.label == measurement {
                return g
                    .outcomes
                    .iter()
                    .position(|o| o == outcome)
                    .map(|i| offset + i)
                    .ok_or_else(|| Error::UnknownLabel(format!("{measurement}:{outcome}")));
            }
            offset += g.outcomes.len();
        }
        Err(Error::UnknownLabel(measurement.to_string()))
    }

    pub fn cell_by_labels(
        &self,
        row_measurement: &str,
        row_outcome: &str,
        col_measurement: &str,
        col_outcome: &str,
    ) -> Result<bool> {
        let r = Self::axis_index(&self.rows, row_measurement, row_outcome)?;
        let c = Self::axis_index(&self.cols, col_measurement, col_outcome)?;
        Ok(self.cells[r][c])
    }

    pub fn possible_count(&self) -> usize {
        self.cells.iter().flatten().filter(|&&b| b).count()
    }

    /// The same table with the two sides swapped.
    pub fn transposed(&self) -> Self {
        let cells = (0..self.n_cols())
            .map(|c| (0..self.n_rows()).map(|r| self.cells[r][c]).collect())
            .collect();
        PossibilityTable {
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            cells,
        }
    }

    /// Possible cells print as `#`, impossible ones as `0`.
    pub fn render_text(&self) -> String {
        render_block_grid(&self.rows, &self.cols, |r, c| {
            if self.cells[r][c] { "#".into() } else { "0".into() }
        })
    }

    /// CSV with `1` for possible and `0` for impossible.
    pub fn render_csv(&self) -> String {
        render_block_csv(&self.rows, &self.cols, |r, c| {
            if self.cells[r][c] { "1".into() } else { "0".into() }
        })
    }
}

/// Build the possibility table of a bipartite state: cell
/// `((M1, o1), (M2, o2))` is possible iff the joint effect pairs to a
/// nonzero value on the state.
pub fn possibility_table(
    state: &State,
    row_bases: &[Measurement],
    col_bases: &[Measurement],
) -> Result<PossibilityTable> {
    if row_bases.is_empty() || col_bases.is_empty() {
        return Err(Error::MalformedTable("no measurements given".into()));
    }
    let d1 = row_bases[0].dim();
    let d2 = col_bases[0].dim();
    for m in row_bases {
        if m.dim() != d1 {
            return Err(Error::DimensionMismatch(format!(
                "row measurements mix dimensions {} and {}",
                d1,
                m.dim()
            )));
        }
    }
    for m in col_bases {
        if m.dim() != d2 {
            return Err(Error::DimensionMismatch(format!(
                "column measurements mix dimensions {} and {}",
                d2,
                m.dim()
            )));
        }
    }
    if d1 * d2 != state.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} is not {d1}x{d2}",
            state.dim()
        )));
    }

    let mut cells = Vec::new();
    for rm in row_bases {
        for (_, re) in rm.outcomes() {
            let mut row = Vec::new();
            for cm in col_bases {
                for (_, ce) in cm.outcomes() {
                    row.push(is_possible(&joint_effect(re, ce)?, state)?);
                }
            }
            cells.push(row);
        }
    }
    PossibilityTable::from_parts(
        row_bases.iter().map(LabelGroup::of).collect(),
        col_bases.iter().map(LabelGroup::of).collect(),
        cells,
    )
}
