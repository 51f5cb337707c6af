use std::collections::VecDeque;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boolean node mask on a square lattice. Node `(i, j)` sits at
/// `(i·spacing, j·spacing)`; `true` nodes are interior unknowns and every
/// other node carries the Dirichlet value zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterMask {
    nx: usize,
    ny: usize,
    cells: Vec<bool>,
    spacing: f64,
}

impl RasterMask {
    /// `cells` is row-major with `j` (the y index) outermost.
    pub fn new(nx: usize, ny: usize, cells: Vec<bool>, spacing: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::domain(format!("raster spacing must be positive, got {spacing}")));
        }
        if cells.len() != nx * ny {
            return Err(Error::domain(format!(
                "raster has {} cells, expected {nx}×{ny}",
                cells.len()
            )));
        }
        let mask = Self { nx, ny, cells, spacing };
        match mask.components() {
            0 => Err(Error::domain("raster mask has no interior cells")),
            1 => Ok(mask),
            components => Err(Error::DisconnectedMask { components }),
        }
    }

    /// Parses the text format: one `spacing <value>` line, then rows of `0`
    /// and `1`. Blank lines and text after `#` are ignored. The first row
    /// listed is the top of the cross-section (largest y).
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut spacing = None;
        let mut rows: Vec<Vec<bool>> = Vec::new();
        let mut width = None;
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let text = line.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: line_no, message };
            if let Some(rest) = text.strip_prefix("spacing") {
                if spacing.is_some() {
                    return Err(parse_err("duplicate spacing line".into()));
                }
                if !rows.is_empty() {
                    return Err(parse_err("spacing must precede the mask rows".into()));
                }
                let value: f64 = rest
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(format!("invalid spacing `{}`", rest.trim())))?;
                if !(value.is_finite() && value > 0.0) {
                    return Err(parse_err(format!("spacing must be positive, got {value}")));
                }
                spacing = Some(value);
                continue;
            }
            if spacing.is_none() {
                return Err(parse_err("expected `spacing <value>` before the mask rows".into()));
            }
            let row = text
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(parse_err(format!("unexpected character `{other}` in mask row"))),
                })
                .collect::<Result<Vec<_>>>()?;
            match width {
                None => width = Some(row.len()),
                Some(w) if w != row.len() => {
                    return Err(parse_err(format!("row has {} cells, expected {w}", row.len())));
                }
                _ => {}
            }
            rows.push(row);
        }
        let spacing = spacing.ok_or_else(|| Error::Parse {
            line: 0,
            message: "missing `spacing <value>` line".into(),
        })?;
        let nx = width.unwrap_or(0);
        let ny = rows.len();
        let cells = rows.into_iter().rev().flatten().collect();
        Self::new(nx, ny, cells, spacing)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::parse(std::io::BufReader::new(file))
    }

    /// Writes the text format read by [`RasterMask::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("spacing {:e}\n", self.spacing);
        for j in (0..self.ny).rev() {
            for i in 0..self.nx {
                out.push(if self.get(i as isize, j as isize) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Out-of-range indices read as exterior.
    pub fn get(&self, i: isize, j: isize) -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < self.nx
            && (j as usize) < self.ny
            && self.cells[j as usize * self.nx + i as usize]
    }

    pub fn interior_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Number of distinct columns and rows holding at least one interior node.
    pub fn extent(&self) -> (usize, usize) {
        let cols = (0..self.nx)
            .filter(|&i| (0..self.ny).any(|j| self.get(i as isize, j as isize)))
            .count();
        let rows = (0..self.ny)
            .filter(|&j| (0..self.nx).any(|i| self.get(i as isize, j as isize)))
            .count();
        (cols, rows)
    }

    /// 4-connected components of the interior, matching the 5-point stencil.
    fn components(&self) -> usize {
        let mut seen = vec![false; self.cells.len()];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.cells.len() {
            if !self.cells[start] || seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(c) = queue.pop_front() {
                let (i, j) = ((c % self.nx) as isize, (c / self.nx) as isize);
                for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                    let (a, b) = (i + di, j + dj);
                    if self.get(a, b) {
                        let n = b as usize * self.nx + a as usize;
                        if !seen[n] {
                            seen[n] = true;
                            queue.push_back(n);
                        }
                    }
                }
            }
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        let text = "# L-shape\nspacing 0.5\n0000\n0110 # top\n\n0100\n0000\n";
        let m = RasterMask::parse(text.as_bytes()).unwrap();
        assert_eq!((m.nx(), m.ny()), (4, 4));
        assert_eq!(m.spacing(), 0.5);
        assert!(m.get(1, 1) && m.get(1, 2) && m.get(2, 2));
        assert!(!m.get(2, 1) && !m.get(-1, 0) && !m.get(4, 2));
        assert_eq!(m.interior_count(), 3);
        let again = RasterMask::parse(m.to_text().as_bytes()).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = |t: &str| match RasterMask::parse(t.as_bytes()) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(bad("spacing 1\n010\n0x0\n"), 3);
        assert_eq!(bad("spacing 1\n010\n01\n"), 3);
        assert_eq!(bad("010\n"), 1);
        assert_eq!(bad("spacing -2\n010\n"), 1);
        assert_eq!(bad("# nothing\n"), 0);
    }

    #[test]
    fn disconnected_mask_rejected() {
        let r = RasterMask::parse("spacing 1\n10001\n".as_bytes());
        assert!(matches!(r, Err(Error::DisconnectedMask { components: 2 })));
        // diagonal contact does not connect under the 5-point stencil
        let r = RasterMask::parse("spacing 1\n10\n01\n".as_bytes());
        assert!(matches!(r, Err(Error::DisconnectedMask { components: 2 })));
        assert!(RasterMask::parse("spacing 1\n000\n".as_bytes()).is_err());
    }
}
