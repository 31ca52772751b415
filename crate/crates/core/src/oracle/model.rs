use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::numerical_rank;
use crate::{Error, Result};

const STRUCTURE_REL_TOL: f64 = 1e-10;
const MAX_RETRIES: usize = 100;
const MAX_EIGVEC_COND: f64 = 50.0;

/// Continuous-time state-space model `x' = A x + B u`, `y = C x + D u`,
/// checked to be controllable and observable.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
    lag: usize,
}

impl StateSpaceModel {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n {
            return Err(Error::Dimension(format!(
                "A must be square and non-empty, got {:?}",
                a.shape()
            )));
        }
        let m = b.ncols();
        let p = c.nrows();
        if m == 0 || p == 0 {
            return Err(Error::Dimension(
                "the model needs at least one input and one output".into(),
            ));
        }
        if b.nrows() != n || c.ncols() != n || d.shape() != (p, m) {
            return Err(Error::Dimension(format!(
                "inconsistent shapes A {:?}, B {:?}, C {:?}, D {:?}",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        let mut model = Self { a, b, c, d, lag: 0 };
        if numerical_rank(&model.controllability_matrix(), STRUCTURE_REL_TOL)? < n {
            return Err(Error::Model("(A, B) is not controllable".into()));
        }
        model.lag = (1..=n)
            .find(|&k| {
                numerical_rank(&model.observability_matrix(k), STRUCTURE_REL_TOL)
                    .is_ok_and(|r| r == n)
            })
            .ok_or_else(|| Error::Model("(A, C) is not observable".into()))?;
        Ok(model)
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// Observability index: smallest `k` with `rank [C; CA; ..; CA^(k-1)] = n`.
    pub fn lag(&self) -> usize {
        self.lag
    }

    /// `[C; CA; ..; CA^(blocks-1)]`.
    pub fn observability_matrix(&self, blocks: usize) -> DMatrix<f64> {
        let (n, p) = (self.states(), self.outputs());
        let mut out = DMatrix::zeros(p * blocks, n);
        let mut ca = self.c.clone();
        for k in 0..blocks {
            out.view_mut((k * p, 0), (p, n)).copy_from(&ca);
            ca = &ca * &self.a;
        }
        out
    }

    /// `[B, AB, .., A^(n-1) B]`.
    pub fn controllability_matrix(&self) -> DMatrix<f64> {
        let (n, m) = (self.states(), self.inputs());
        let mut out = DMatrix::zeros(n, m * n);
        let mut ab = self.b.clone();
        for k in 0..n {
            out.view_mut((0, k * m), (n, m)).copy_from(&ab);
            ab = &self.a * &ab;
        }
        out
    }

    /// Writes labeled `A`, `B`, `C`, `D` sections, row-major.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# state-space model: x' = A x + B u, y = C x + D u")?;
        for (name, mat) in [
            ("A", &self.a),
            ("B", &self.b),
            ("C", &self.c),
            ("D", &self.d),
        ] {
            writeln!(out, "{name} {} {}", mat.nrows(), mat.ncols())?;
            for r in 0..mat.nrows() {
                let row: Vec<String> = (0..mat.ncols())
                    .map(|c| format!("{:e}", mat[(r, c)]))
                    .collect();
                writeln!(out, "{}", row.join(" "))?;
            }
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut sections: Vec<(String, DMatrix<f64>)> = Vec::new();
        let mut pending: Option<(String, usize, usize, Vec<f64>)> = None;
        for (idx, line) in input.lines().enumerate() {
            let line_no = idx as u64 + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { line: line_no, msg };
            if let Some((_, rows, cols, data)) = pending.as_mut() {
                if data.len() < *rows * *cols {
                    let mut row = line
                        .split_whitespace()
                        .map(|tok| {
                            tok.parse::<f64>()
                                .map_err(|e| parse_err(format!("`{tok}`: {e}")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    if row.len() != *cols {
                        return Err(parse_err(format!(
                            "expected {cols} values, found {}",
                            row.len()
                        )));
                    }
                    data.append(&mut row);
                    if data.len() == *rows * *cols {
                        let (name, rows, cols, data) = pending.take().expect("pending section");
                        sections.push((name, DMatrix::from_row_slice(rows, cols, &data)));
                    }
                    continue;
                }
            }
            let mut toks = line.split_whitespace();
            let name = toks.next().unwrap_or_default().to_string();
            let dims: Vec<usize> = toks
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|e| parse_err(format!("bad dimension `{t}`: {e}")))
                })
                .collect::<Result<_>>()?;
            if !matches!(name.as_str(), "A" | "B" | "C" | "D") || dims.len() != 2 {
                return Err(parse_err(format!(
                    "expected a section header like `A 2 2`, found `{line}`"
                )));
            }
            if dims[0] * dims[1] == 0 {
                sections.push((name, DMatrix::zeros(dims[0], dims[1])));
            } else {
                pending = Some((name, dims[0], dims[1], Vec::new()));
            }
        }
        if let Some((name, ..)) = pending {
            return Err(Error::Parse {
                line: 0,
                msg: format!("section {name} ended early"),
            });
        }
        let mut take = |name: &str| {
            sections
                .iter()
                .position(|(n, _)| n == name)
                .map(|i| sections.swap_remove(i).1)
                .ok_or_else(|| Error::Parse {
                    line: 0,
                    msg: format!("missing section {name}"),
                })
        };
        let (a, b, c, d) = (take("A")?, take("B")?, take("C")?, take("D")?);
        Self::new(a, b, c, d)
    }
}

/// Deterministic random stable model with eigenvalue real parts in
/// `[-3, -0.2]`, redrawn until controllable and observable.
pub fn make_random_system(n: usize, m: usize, p: usize, seed: u64) -> Result<StateSpaceModel> {
    if n == 0 || m == 0 || p == 0 {
        return Err(Error::InvalidArgument(format!(
            "system dimensions must be positive, got n={n}, m={m}, p={p}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RETRIES {
        let mut lambda = DMatrix::zeros(n, n);
        let mut i = 0;
        while i < n {
            let re = rng.random_range(-3.0..-0.2);
            if n - i >= 2 && rng.random_bool(0.5) {
                let im = rng.random_range(0.3..3.0);
                lambda[(i, i)] = re;
                lambda[(i + 1, i + 1)] = re;
                lambda[(i, i + 1)] = im;
                lambda[(i + 1, i)] = -im;
                i += 2;
            } else {
                lambda[(i, i)] = re;
                i += 1;
            }
        }
        let v = normal_matrix(&mut rng, n, n);
        let b = normal_matrix(&mut rng, n, m);
        let c = normal_matrix(&mut rng, p, n);
        let d = normal_matrix(&mut rng, p, m);
        let sv = v.singular_values();
        if sv.min() <= 0.0 || sv.max() / sv.min() > MAX_EIGVEC_COND {
            continue;
        }
        let Some(v_inv) = v.clone().try_inverse() else {
            continue;
        };
        let a = &v * lambda * v_inv;
        if let Ok(model) = StateSpaceModel::new(a, b, c, d) {
            return Ok(model);
        }
    }
    Err(Error::RetriesExhausted(MAX_RETRIES))
}

fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}
