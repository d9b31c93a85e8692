//! Oracles shared between integration test targets, transcribed by hand
//! from published tables and closed forms.

#![allow(dead_code)]

use polylap::liealg::AlgebraName;

/// Closed-form adjoint tables as sparse `(k, coefficient)` lists per entry,
/// transcribed independently of the library.
pub fn closed_form(name: AlgebraName, i: usize, j: usize, e: f64) -> Vec<(usize, f64)> {
    let (c, s, ex, em) = (e.cos(), e.sin(), e.exp(), (-e).exp());
    let row: Vec<Vec<(usize, f64)>> = match (name, i) {
        (AlgebraName::G, 1) => vec![
            vec![(1, 1.0)], vec![(2, 1.0)], vec![(3, 1.0), (2, e)], vec![(4, 1.0), (1, e)],
            vec![(5, 1.0)], vec![(6, 1.0), (8, e)], vec![(7, 1.0)], vec![(8, 1.0)],
        ],
        (AlgebraName::G, 2) => vec![
            vec![(1, 1.0)], vec![(2, 1.0)], vec![(3, 1.0), (1, -e)], vec![(4, 1.0), (2, e)],
            vec![(5, 1.0)], vec![(6, 1.0)], vec![(7, 1.0), (8, e)], vec![(8, 1.0)],
        ],
        (AlgebraName::G, 3) => vec![
            vec![(1, c), (2, -s)], vec![(1, s), (2, c)], vec![(3, 1.0)], vec![(4, 1.0)],
            vec![(5, 1.0)], vec![(6, c), (7, -s)], vec![(6, s), (7, c)], vec![(8, 1.0)],
        ],
        (AlgebraName::G, 4) => vec![
            vec![(1, em)], vec![(2, em)], vec![(3, 1.0)], vec![(4, 1.0)],
            vec![(5, 1.0)], vec![(6, ex)], vec![(7, ex)], vec![(8, 1.0)],
        ],
        (AlgebraName::G, 5) => vec![
            vec![(1, 1.0)], vec![(2, 1.0)], vec![(3, 1.0)], vec![(4, 1.0)],
            vec![(5, 1.0)], vec![(6, em)], vec![(7, em)], vec![(8, em)],
        ],
        (AlgebraName::G, 6) => vec![
            vec![(1, 1.0), (8, -e)], vec![(2, 1.0)], vec![(3, 1.0), (7, e)], vec![(4, 1.0), (6, -e)],
            vec![(5, 1.0), (6, e)], vec![(6, 1.0)], vec![(7, 1.0)], vec![(8, 1.0)],
        ],
        (AlgebraName::G, 7) => vec![
            vec![(1, 1.0)], vec![(2, 1.0), (8, -e)], vec![(3, 1.0), (6, -e)], vec![(4, 1.0), (7, -e)],
            vec![(5, 1.0), (7, e)], vec![(6, 1.0)], vec![(7, 1.0)], vec![(8, 1.0)],
        ],
        (AlgebraName::G, 8) => vec![
            vec![(1, 1.0)], vec![(2, 1.0)], vec![(3, 1.0)], vec![(4, 1.0)],
            vec![(5, 1.0), (8, e)], vec![(6, 1.0)], vec![(7, 1.0)], vec![(8, 1.0)],
        ],
        (AlgebraName::H, 1) => vec![
            vec![(1, 1.0)], vec![(2, 1.0)], vec![(3, 1.0), (2, e)], vec![(4, 1.0), (1, e)],
            vec![(5, 1.0), (7, e)], vec![(6, 1.0)], vec![(7, 1.0)],
        ],
        (AlgebraName::H, 2) => vec![
            vec![(1, 1.0)], vec![(2, 1.0)], vec![(3, 1.0), (1, -e)], vec![(4, 1.0), (2, e)],
            vec![(5, 1.0)], vec![(6, 1.0), (7, e)], vec![(7, 1.0)],
        ],
        (AlgebraName::H, 3) => vec![
            vec![(1, c), (2, -s)], vec![(1, s), (2, c)], vec![(3, 1.0)], vec![(4, 1.0)],
            vec![(5, c), (6, -s)], vec![(5, s), (6, c)], vec![(7, 1.0)],
        ],
        (AlgebraName::H, 4) => vec![
            vec![(1, em)], vec![(2, em)], vec![(3, 1.0)], vec![(4, 1.0)],
            vec![(5, em)], vec![(6, em)], vec![(7, (-2.0 * e).exp())],
        ],
        (AlgebraName::H, 5) => vec![
            vec![(1, 1.0), (7, -e)], vec![(2, 1.0)], vec![(3, 1.0), (6, e)], vec![(4, 1.0), (5, e)],
            vec![(5, 1.0)], vec![(6, 1.0)], vec![(7, 1.0)],
        ],
        (AlgebraName::H, 6) => vec![
            vec![(1, 1.0)], vec![(2, 1.0), (7, -e)], vec![(3, 1.0), (5, -e)], vec![(4, 1.0), (6, e)],
            vec![(5, 1.0)], vec![(6, 1.0)], vec![(7, 1.0)],
        ],
        (AlgebraName::H, 7) => vec![
            vec![(1, 1.0)], vec![(2, 1.0)], vec![(3, 1.0)], vec![(4, 1.0), (7, 2.0 * e)],
            vec![(5, 1.0)], vec![(6, 1.0)], vec![(7, 1.0)],
        ],
        _ => unreachable!(),
    };
    row[j - 1].clone()
}

pub fn dense(n: usize, sparse: &[(usize, f64)]) -> Vec<f64> {
    let mut v = vec![0.0; n];
    for &(k, c) in sparse {
        v[k - 1] += c;
    }
    v
}


/// Published commutator tables, row `i` column `j` holding `[e_i, e_j]`.
pub const COMMUTATORS_G: [[&str; 8]; 8] = [
    ["0", "0", "X2", "X1", "0", "X8", "0", "0"],
    ["0", "0", "-X1", "X2", "0", "0", "X8", "0"],
    ["-X2", "X1", "0", "0", "0", "-X7", "X6", "0"],
    ["-X1", "-X2", "0", "0", "0", "X6", "X7", "0"],
    ["0", "0", "0", "0", "0", "-X6", "-X7", "-X8"],
    ["-X8", "0", "X7", "-X6", "X6", "0", "0", "0"],
    ["0", "-X8", "-X6", "-X7", "X7", "0", "0", "0"],
    ["0", "0", "0", "0", "X8", "0", "0", "0"],
];

pub const COMMUTATORS_H: [[&str; 7]; 7] = [
    ["0", "0", "Y2", "Y1", "Y7", "0", "0"],
    ["0", "0", "-Y1", "Y2", "0", "Y7", "0"],
    ["-Y2", "Y1", "0", "0", "-Y6", "Y5", "0"],
    ["-Y1", "-Y2", "0", "0", "-Y5", "-Y6", "-2Y7"],
    ["-Y7", "0", "Y6", "Y5", "0", "0", "0"],
    ["0", "-Y7", "-Y5", "Y6", "0", "0", "0"],
    ["0", "0", "0", "2Y7", "0", "0", "0"],
];

/// Dense integer coordinates of a cell such as `-2Y7`.
pub fn cell(text: &str, n: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    if text == "0" {
        return v;
    }
    let (sign, rest) = match text.strip_prefix('-') {
        Some(r) => (-1, r),
        None => (1, text),
    };
    let pos = rest.find(['X', 'Y']).unwrap();
    let coef: i64 = if pos == 0 { 1 } else { rest[..pos].parse().unwrap() };
    let k: usize = rest[pos + 1..].parse().unwrap();
    v[k - 1] = sign * coef;
    v
}

pub fn commutator_oracle(name: AlgebraName) -> Vec<Vec<Vec<i64>>> {
    match name {
        AlgebraName::G => COMMUTATORS_G.iter().map(|r| r.iter().map(|c| cell(c, 8)).collect()).collect(),
        AlgebraName::H => COMMUTATORS_H.iter().map(|r| r.iter().map(|c| cell(c, 7)).collect()).collect(),
    }
}

/// Rank by Gaussian elimination; entries here are small integers.
pub fn rank(rows: &[Vec<f64>]) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| m[i][c].abs() > 1e-9) else { continue };
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r {
                let f = m[i][c] / m[r][c];
                for k in 0..cols {
                    m[i][k] -= f * m[r][k];
                }
            }
        }
        r += 1;
    }
    r
}

/// Derived series dimensions from a table given as integer cells.
pub fn derived_dims(table: &[Vec<Vec<i64>>]) -> Vec<usize> {
    let n = table.len();
    let bracket = |a: &[f64], b: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let w = a[i] * b[j];
                if w != 0.0 {
                    for k in 0..n {
                        out[k] += w * table[i][j][k] as f64;
                    }
                }
            }
        }
        out
    };
    let mut span: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut dims = vec![n];
    while !span.is_empty() {
        let mut next = Vec::new();
        for a in &span {
            for b in &span {
                let v = bracket(a, b);
                if v.iter().any(|c| c.abs() > 1e-9) {
                    let mut trial = next.clone();
                    trial.push(v.clone());
                    if rank(&trial) > next.len() {
                        next.push(v);
                    }
                }
            }
        }
        dims.push(next.len());
        span = next;
    }
    dims
}

/// Normalized residual of an operator at a jet, written out from its
/// derivative entries. `target` is "infpolylap", "reduced" or "inflap".
pub fn residual_by_hand(target: &str, u: &polylap::Jet3) -> f64 {
    let n = u.dim();
    let h = |i: usize, j: usize| u.hess(i, j);
    let t = |i: usize, j: usize, k: usize| u.third(i, j, k);
    let mut res = 0.0;
    let mut scale = 0.0;
    match target {
        "infpolylap" => {
            let f_k = |k: usize, abs: bool| -> f64 {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        let v = h(i, j) * t(i, j, k);
                        s += if abs { v.abs() } else { v };
                    }
                }
                2.0 * s
            };
            for i in 0..n {
                for j in 0..n {
                    let term = f_k(i, false) * f_k(j, false) * h(i, j);
                    res += term;
                    scale += term.abs().max(f_k(i, true) * f_k(j, true) * h(i, j).abs());
                }
            }
        }
        "reduced" => {
            for i in 0..n {
                for j in 0..n {
                    res += h(i, j) * h(i, j);
                    scale += h(i, j) * h(i, j);
                }
            }
            res -= 1.0;
            scale += 1.0;
        }
        "inflap" => {
            for i in 0..n {
                for j in 0..n {
                    let term = u.grad(i) * u.grad(j) * h(i, j);
                    res += term;
                    scale += term.abs();
                }
            }
        }
        _ => panic!("unknown target {target}"),
    }
    if scale == 0.0 {
        res.abs()
    } else {
        res.abs() / scale
    }
}
