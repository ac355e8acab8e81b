//! Dense reference solvers used as independent oracles in tests.
//!
//! Everything here works on plain `f64` row-major matrices (`Vec<Vec<f64>>`)
//! and is deliberately written without any dependency on the sparse code it
//! is used to check.

/// Row-major dense matrix-vector product.
pub fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(aij, xj)| aij * xj).sum())
        .collect()
}

/// `aᵀ a`-style product `aᵀ diag(w) a`.
pub fn normal_matrix(a: &[Vec<f64>], w: &[f64]) -> Vec<Vec<f64>> {
    let n = a[0].len();
    let mut out = vec![vec![0.0; n]; n];
    for (row, wk) in a.iter().zip(w) {
        for i in 0..n {
            if row[i] == 0.0 {
                continue;
            }
            let s = wk * row[i];
            for j in 0..n {
                out[i][j] += s * row[j];
            }
        }
    }
    out
}

/// Solves `a x = b` by LU with partial pivoting. Returns `None` when a pivot
/// degenerates (singular to working precision).
pub fn lu_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    let mut scale_max = 0.0f64;
    for row in &m {
        for &v in row {
            scale_max = scale_max.max(v.abs());
        }
    }
    for col in 0..n {
        let (piv, piv_abs) = (col..n)
            .map(|r| (r, m[r][col].abs()))
            .fold((col, -1.0), |acc, it| if it.1 > acc.1 { it } else { acc });
        if piv_abs <= 1e-14 * scale_max.max(1e-300) {
            return None;
        }
        m.swap(col, piv);
        x.swap(col, piv);
        let d = m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                let sub = f * m[col][c];
                m[r][c] -= sub;
            }
            x[r] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        x[col] /= m[col][col];
        for r in 0..col {
            x[r] -= m[r][col] * x[col];
        }
    }
    Some(x)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Returns eigenvalues in ascending order and eigenvectors as columns
/// (`vectors[i][j]` = component `i` of eigenvector `j`).
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale: f64 = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
        .max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                off = off.max(m[i][j].abs());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() <= 1e-18 * scale {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i][i].partial_cmp(&m[j][j]).unwrap());
    let values = order.iter().map(|&i| m[i][i]).collect();
    let mut vectors = vec![vec![0.0; n]; n];
    for (jnew, &jold) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i][jnew] = v[i][jold];
        }
    }
    (values, vectors)
}

/// Generalized symmetric eigendecomposition `a x = λ diag(m) x` with positive
/// diagonal mass, via the substitution `y = m^{1/2} x`. Eigenvalues ascending,
/// eigenvectors (columns) are M-orthonormal.
pub fn generalized_eigen(a: &[Vec<f64>], mass: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = mass.len();
    let isqrt: Vec<f64> = mass.iter().map(|&m| 1.0 / m.sqrt()).collect();
    let mut b = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            b[i][j] = isqrt[i] * a[i][j] * isqrt[j];
        }
    }
    let (values, mut vectors) = jacobi_eigen(&b);
    for (i, row) in vectors.iter_mut().enumerate() {
        for entry in row.iter_mut() {
            *entry *= isqrt[i];
        }
    }
    (values, vectors)
}

/// Numerical rank via row echelon reduction with a relative threshold.
pub fn rank(a: &[Vec<f64>], rel_tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let rows = m.len();
    let cols = m[0].len();
    let scale: f64 = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
        .max(1e-300);
    let tol = rel_tol * scale;
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        let (piv, piv_abs) = (row..rows)
            .map(|r| (r, m[r][col].abs()))
            .fold((row, -1.0), |acc, it| if it.1 > acc.1 { it } else { acc });
        if piv_abs <= tol {
            continue;
        }
        m.swap(row, piv);
        for r in row + 1..rows {
            let f = m[r][col] / m[row][col];
            for c in col..cols {
                let sub = f * m[row][c];
                m[r][c] -= sub;
            }
        }
        rank += 1;
        row += 1;
        if row == rows {
            break;
        }
    }
    rank
}

/// Weighted least-squares fit of `c0 + cx·x + cy·y` to point samples.
pub fn affine_fit_2d(points: &[[f64; 2]], values: &[f64], weights: &[f64]) -> [f64; 3] {
    let mut ata = vec![vec![0.0; 3]; 3];
    let mut atb = vec![0.0; 3];
    for ((p, &v), &w) in points.iter().zip(values).zip(weights) {
        let basis = [1.0, p[0], p[1]];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += w * basis[i] * basis[j];
            }
            atb[i] += w * basis[i] * v;
        }
    }
    let c = lu_solve(&ata, &atb).expect("affine fit system is singular");
    [c[0], c[1], c[2]]
}

pub fn weighted_mean(values: &[f64], weights: &[f64]) -> f64 {
    let num: f64 = values.iter().zip(weights).map(|(v, w)| v * w).sum();
    let den: f64 = weights.iter().sum();
    num / den
}

/// Brute-force nearest site index with ties broken toward the lower index.
pub fn nearest_site(sites: &[[f64; 3]], query: [f64; 3]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, s) in sites.iter().enumerate() {
        let d = (0..3).map(|c| (s[c] - query[c]) * (s[c] - query[c])).sum::<f64>();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Reference minimizer of
///   `λ · Σ_k r_k |(H u)_k| + ½ (u-f)ᵀ diag(m) (u-f)`
/// by projected gradient ascent on the box-constrained dual
///   `max_{|s_k| ≤ λ r_k}  sᵀ H f − ½ sᵀ H diag(m)⁻¹ Hᵀ s`,
/// followed by primal recovery `u = f − diag(m)⁻¹ Hᵀ s`. Runs until the
/// duality gap certifies the optimum; returns `(u, primal objective)`.
pub fn l1_quadratic_reference(
    h: &[Vec<f64>],
    row_mass: &[f64],
    node_mass: &[f64],
    f: &[f64],
    lambda: f64,
    gap_tol: f64,
) -> (Vec<f64>, f64) {
    let rows = h.len();
    let n = f.len();
    let bound: Vec<f64> = row_mass.iter().map(|r| lambda * r).collect();
    // k = H diag(m)^-1 Hᵀ
    let mut k = vec![vec![0.0; rows]; rows];
    for a in 0..rows {
        for b in 0..rows {
            k[a][b] = (0..n).map(|j| h[a][j] * h[b][j] / node_mass[j]).sum();
        }
    }
    let hf = matvec(h, f);
    // Lipschitz constant via a few power iterations.
    let mut z = vec![1.0; rows];
    let mut lip = 1.0;
    for _ in 0..200 {
        let kz = matvec(&k, &z);
        lip = kz.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if lip == 0.0 {
            break;
        }
        z = kz.iter().map(|v| v / lip).collect();
    }
    let step = if lip > 0.0 { 1.0 / lip } else { 1.0 };

    let primal = |u: &[f64]| -> f64 {
        let hu = matvec(h, u);
        let l1: f64 = hu.iter().zip(row_mass).map(|(v, r)| r * v.abs()).sum();
        let data: f64 = u
            .iter()
            .zip(f)
            .zip(node_mass)
            .map(|((ui, fi), mi)| 0.5 * mi * (ui - fi) * (ui - fi))
            .sum();
        lambda * l1 + data
    };

    let mut s = vec![0.0; rows];
    let mut best_u = f.to_vec();
    let mut best_obj = primal(&best_u);
    for _iter in 0..2_000_000 {
        let ks = matvec(&k, &s);
        for a in 0..rows {
            let g = hf[a] - ks[a];
            s[a] = (s[a] + step * g).clamp(-bound[a], bound[a]);
        }
        let ks = matvec(&k, &s);
        let dual: f64 = s.iter().zip(&hf).map(|(si, hfi)| si * hfi).sum::<f64>()
            - 0.5 * s.iter().zip(&ks).map(|(si, ki)| si * ki).sum::<f64>();
        let u: Vec<f64> = (0..n)
            .map(|j| f[j] - (0..rows).map(|a| h[a][j] * s[a]).sum::<f64>() / node_mass[j])
            .collect();
        let obj = primal(&u);
        if obj < best_obj {
            best_obj = obj;
            best_u = u;
        }
        let scale = best_obj.abs().max(1.0);
        if best_obj - dual <= gap_tol * scale {
            break;
        }
    }
    (best_u, best_obj)
}
