//! Block-diagonal SDP data in sparse triplet form.
//!
//! Primal: optimize `<C, X> + offset` subject to `<A_j, X> = b_j`, `X ⪰ 0`,
//! where `X` is block diagonal with real symmetric blocks. Each [`Entry`] with
//! `row != col` stands for both symmetric positions.

use std::fmt::Write as _;
use std::io::BufRead;

use nalgebra::DMatrix;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Constraint {
    pub entries: Vec<Entry>,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub blocks: Vec<usize>,
    pub objective: Vec<Entry>,
    pub constraints: Vec<Constraint>,
    pub sense: Sense,
    pub offset: f64,
    /// Upper bound on `Tr X` over the primal feasible set, used when turning
    /// an approximately feasible dual into a rigorous bound.
    pub trace_bound: Option<f64>,
}

impl SdpProblem {
    pub fn new(blocks: Vec<usize>, sense: Sense) -> Self {
        Self {
            blocks,
            objective: Vec::new(),
            constraints: Vec::new(),
            sense,
            offset: 0.0,
            trace_bound: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() || self.blocks.contains(&0) {
            return Err(Error::Malformed("every block needs a positive size".into()));
        }
        let check = |e: &Entry| -> Result<()> {
            let n = *self
                .blocks
                .get(e.block)
                .ok_or_else(|| Error::Malformed(format!("block {} out of range", e.block)))?;
            if e.row >= n || e.col >= n {
                return Err(Error::Malformed(format!(
                    "entry ({}, {}) outside block {} of size {}",
                    e.row, e.col, e.block, n
                )));
            }
            if !e.value.is_finite() {
                return Err(Error::Malformed("non-finite coefficient".into()));
            }
            Ok(())
        };
        self.objective.iter().try_for_each(check)?;
        for c in &self.constraints {
            c.entries.iter().try_for_each(check)?;
            if !c.rhs.is_finite() {
                return Err(Error::Malformed("non-finite right-hand side".into()));
            }
        }
        Ok(())
    }

    /// Dense symmetric matrix of a coefficient list restricted to one block.
    pub fn block_matrix(&self, entries: &[Entry], block: usize) -> DMatrix<f64> {
        let n = self.blocks[block];
        let mut m = DMatrix::zeros(n, n);
        for e in entries.iter().filter(|e| e.block == block) {
            m[(e.row, e.col)] += e.value;
            if e.row != e.col {
                m[(e.col, e.row)] += e.value;
            }
        }
        m
    }

    /// `<A, X>` for a coefficient list against block matrices.
    pub fn inner(entries: &[Entry], x: &[DMatrix<f64>]) -> f64 {
        entries
            .iter()
            .map(|e| {
                let v = e.value * x[e.block][(e.row, e.col)];
                if e.row == e.col {
                    v
                } else {
                    v + e.value * x[e.block][(e.col, e.row)]
                }
            })
            .sum()
    }

    pub fn nnz(&self) -> usize {
        self.objective.len() + self.constraints.iter().map(|c| c.entries.len()).sum::<usize>()
    }

    /// Sparse text dump: header comments, then one line per nonzero,
    /// `block constraint row col value` with constraint 0 the objective.
    /// Indices are zero-based.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let sense = match self.sense {
            Sense::Minimize => "min",
            Sense::Maximize => "max",
        };
        let _ = writeln!(s, "# sense {sense}");
        let _ = writeln!(
            s,
            "# blocks {}",
            self.blocks.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" ")
        );
        let _ = writeln!(s, "# offset {:e}", self.offset);
        if let Some(t) = self.trace_bound {
            let _ = writeln!(s, "# trace_bound {t:e}");
        }
        let _ = writeln!(
            s,
            "# rhs {}",
            self.constraints.iter().map(|c| format!("{:e}", c.rhs)).collect::<Vec<_>>().join(" ")
        );
        let mut line = |j: usize, e: &Entry| {
            let _ = writeln!(s, "{} {} {} {} {:e}", e.block, j, e.row, e.col, e.value);
        };
        for e in &self.objective {
            line(0, e);
        }
        for (j, c) in self.constraints.iter().enumerate() {
            for e in &c.entries {
                line(j + 1, e);
            }
        }
        s
    }

    pub fn parse_dump<R: BufRead>(reader: R) -> Result<Self> {
        let mut p = SdpProblem::new(Vec::new(), Sense::Minimize);
        for line in reader.lines() {
            let line = line.map_err(|e| Error::Malformed(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::Malformed(format!("bad dump line: {line}"));
            if let Some(rest) = line.strip_prefix('#') {
                let mut it = rest.split_whitespace();
                match it.next() {
                    Some("sense") => {
                        p.sense = match it.next() {
                            Some("max") => Sense::Maximize,
                            Some("min") => Sense::Minimize,
                            _ => return Err(bad()),
                        }
                    }
                    Some("blocks") => {
                        p.blocks = it.map(|t| t.parse().map_err(|_| bad())).collect::<Result<_>>()?
                    }
                    Some("offset") => p.offset = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?,
                    Some("trace_bound") => {
                        p.trace_bound = Some(it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?)
                    }
                    Some("rhs") => {
                        p.constraints = it
                            .map(|t| t.parse().map(|rhs| Constraint { entries: Vec::new(), rhs }).map_err(|_| bad()))
                            .collect::<Result<_>>()?
                    }
                    _ => {}
                }
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 5 {
                return Err(bad());
            }
            let block: usize = f[0].parse().map_err(|_| bad())?;
            let j: usize = f[1].parse().map_err(|_| bad())?;
            let row: usize = f[2].parse().map_err(|_| bad())?;
            let col: usize = f[3].parse().map_err(|_| bad())?;
            let value: f64 = f[4].parse().map_err(|_| bad())?;
            let e = Entry { block, row, col, value };
            if j == 0 {
                p.objective.push(e);
            } else {
                p.constraints.get_mut(j - 1).ok_or_else(bad)?.entries.push(e);
            }
        }
        p.validate()?;
        Ok(p)
    }
}

/// Upper-triangle entries of a dense symmetric matrix, skipping exact zeros.
pub fn entries_from_dense(block: usize, m: &DMatrix<f64>, scale: f64) -> Vec<Entry> {
    let n = m.nrows();
    let mut out = Vec::new();
    for c in 0..n {
        for r in 0..=c {
            let v = if r == c { m[(r, c)] } else { 0.5 * (m[(r, c)] + m[(c, r)]) };
            if v != 0.0 {
                out.push(Entry { block, row: r, col: c, value: scale * v });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trip() {
        let mut p = SdpProblem::new(vec![2, 1], Sense::Maximize);
        p.objective.push(Entry { block: 0, row: 0, col: 1, value: 0.5 });
        p.constraints.push(Constraint {
            entries: vec![
                Entry { block: 0, row: 0, col: 0, value: 1.0 },
                Entry { block: 1, row: 0, col: 0, value: -2.0 },
            ],
            rhs: 3.0,
        });
        p.trace_bound = Some(4.0);
        let text = p.dump();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), p.nnz());
        let q = SdpProblem::parse_dump(text.as_bytes()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn off_diagonal_entries_are_symmetric() {
        let p = SdpProblem::new(vec![2], Sense::Minimize);
        let m = p.block_matrix(&[Entry { block: 0, row: 0, col: 1, value: 1.5 }], 0);
        assert_eq!(m[(1, 0)], 1.5);
        assert_eq!(m[(0, 1)], 1.5);
        let x = vec![DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])];
        assert_eq!(SdpProblem::inner(&[Entry { block: 0, row: 0, col: 1, value: 1.5 }], &x), 6.0);
    }

    #[test]
    fn rejects_out_of_range_entries() {
        let mut p = SdpProblem::new(vec![2], Sense::Minimize);
        p.objective.push(Entry { block: 0, row: 2, col: 0, value: 1.0 });
        assert!(p.validate().is_err());
    }
}
