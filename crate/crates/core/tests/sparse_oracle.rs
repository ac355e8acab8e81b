//! Sparse kernels checked against independent dense reference solvers.

use dense_oracle as oracle;
use hessmooth_core::domain::grid::GridDomain;
use hessmooth_core::fd::{build_fd_hessian, build_fd_laplacian_energy, fd_hessian_energy, LaplacianBc};
use hessmooth_core::rng::SplitMix64;
use hessmooth_core::sparse::{
    smallest_eigenpairs, solve_spd, CooMatrix, EigenOptions, SolveOptions, SparseMatrix,
};

fn random_sparse(rng: &mut SplitMix64, nrows: usize, ncols: usize, fill: f64) -> SparseMatrix<f64> {
    let mut coo = CooMatrix::new(nrows, ncols);
    for i in 0..nrows {
        for j in 0..ncols {
            if rng.next_unit() < fill {
                coo.push(i, j, rng.next_symmetric());
            }
        }
    }
    coo.to_csr()
}

#[test]
fn spmv_matches_dense_multiply() {
    let mut rng = SplitMix64::new(31);
    for _case in 0..20 {
        let a = random_sparse(&mut rng, 10, 10, 0.4);
        let x: Vec<f64> = (0..10).map(|_| rng.next_symmetric()).collect();
        let sparse = a.mul_vec(&x);
        let dense = oracle::matvec(&a.to_dense(), &x);
        let anorm: f64 = a.infinity_norm();
        let xnorm = x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        for (s, d) in sparse.iter().zip(&dense) {
            assert!((s - d).abs() <= 1e-14 * anorm * xnorm);
        }
    }
}

#[test]
fn solve_spd_matches_dense_lu() {
    let mut rng = SplitMix64::new(77);
    for _case in 0..5 {
        let n = 20;
        // SPD via BᵀB + n·I
        let b = random_sparse(&mut rng, n, n, 0.5);
        let mut a = b.normal_product(&vec![1.0; n]);
        let diag = SparseMatrix::from_diagonal(&vec![n as f64; n]);
        a = a.add_scaled(1.0, &diag, 1.0);
        let rhs: Vec<f64> = (0..n).map(|_| rng.next_symmetric()).collect();
        let x = solve_spd(&a, &rhs, 0.0, &SolveOptions::default()).unwrap();
        let reference = oracle::lu_solve(&a.to_dense(), &rhs).unwrap();
        let scale = reference.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        for (xi, ri) in x.iter().zip(&reference) {
            assert!((xi - ri).abs() <= 1e-10 * scale, "{xi} vs {ri}");
        }
    }
}

#[test]
fn thirty_node_hessian_eigenvalues_match_dense_oracle() {
    // 6x5 grid: 30 nodes, a handful of interior stencils
    let grid = GridDomain::<f64>::full(6, 5, 0.5).unwrap();
    let fd = build_fd_hessian(&grid).unwrap();
    let energy = fd_hessian_energy(&fd);
    let k = 6;
    let pairs = smallest_eigenpairs(&energy.q, &energy.mass, k, &EigenOptions::default()).unwrap();

    let dense_q = energy.q.to_dense();
    let mass = energy.mass.diagonal();
    let (reference, _) = oracle::generalized_eigen(&dense_q, &mass);
    let scale = reference[k - 1].max(1e-12);
    for (mine, truth) in pairs.eigenvalues.iter().zip(&reference) {
        assert!(
            (mine - truth).abs() <= 1e-8 * scale.max(truth.abs()),
            "{mine} vs {truth}"
        );
    }

    // EigenPairs invariants
    let qnorm = energy.q.infinity_norm();
    for (j, vec) in pairs.eigenvectors.iter().enumerate() {
        assert!(pairs.residuals[j] <= 1e-8 * qnorm);
        for (i, other) in pairs.eigenvectors.iter().enumerate() {
            let dot: f64 = vec
                .iter()
                .zip(other.iter())
                .zip(&mass)
                .map(|((a, b), m)| a * m * b)
                .sum();
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((dot - expected).abs() <= 1e-8, "M-orthonormality ({i},{j}): {dot}");
        }
    }
}

#[test]
fn natural_laplacian_null_dimension_by_dense_rank() {
    // With rows at the 9 interior nodes of the full 5x5 grid, the dense rank
    // oracle reports full row rank, so the zero-energy space of LᵀM⁻¹L is
    // the 16-dimensional boundary-value freedom of discrete harmonics.
    let grid = GridDomain::<f64>::full(5, 5, 1.0).unwrap();
    let energy = build_fd_laplacian_energy(&grid, LaplacianBc::Natural).unwrap();
    let rows = energy.operator.as_ref().unwrap().rows.to_dense();
    let rank = oracle::rank(&rows, 1e-10);
    assert_eq!(rank, 9);
    assert_eq!(grid.num_dofs() - rank, 16);
}

#[test]
fn zero_neumann_laplacian_annihilates_exactly_constants() {
    let grid = GridDomain::<f64>::full(5, 5, 1.0).unwrap();
    let energy = build_fd_laplacian_energy(&grid, LaplacianBc::ZeroNeumann).unwrap();
    let rows = energy.operator.as_ref().unwrap().rows.to_dense();
    let rank = oracle::rank(&rows, 1e-10);
    assert_eq!(grid.num_dofs() - rank, 1);
}

#[test]
fn energy_gradient_consistency() {
    // directional derivative of ½uᵀQu along d matches (Qu)ᵀd by central
    // differences
    let grid = GridDomain::<f64>::from_predicate(8, 8, 0.4, |x, y| x + 2.0 * y < 4.5).unwrap();
    let fd = build_fd_hessian(&grid).unwrap();
    let energy = fd_hessian_energy(&fd);
    let n = energy.n();
    let mut rng = SplitMix64::new(404);
    for _case in 0..5 {
        let u: Vec<f64> = (0..n).map(|_| rng.next_symmetric()).collect();
        let d: Vec<f64> = (0..n).map(|_| rng.next_symmetric()).collect();
        let qu = energy.q.mul_vec(&u);
        let analytic: f64 = qu.iter().zip(&d).map(|(a, b)| a * b).sum();
        let eps = 1e-5;
        let up: Vec<f64> = u.iter().zip(&d).map(|(ui, di)| ui + eps * di).collect();
        let um: Vec<f64> = u.iter().zip(&d).map(|(ui, di)| ui - eps * di).collect();
        let numeric =
            (0.5 * energy.q.quadratic_form(&up) - 0.5 * energy.q.quadratic_form(&um)) / (2.0 * eps);
        assert!(
            (analytic - numeric).abs() <= 1e-6 * analytic.abs().max(1.0),
            "{analytic} vs {numeric}"
        );
    }
}

#[test]
fn quadratic_forms_stay_psd_on_random_fields() {
    let grid = GridDomain::<f64>::from_predicate(9, 9, 0.3, |x, y| {
        (x - 1.2).powi(2) + (y - 1.2).powi(2) > 0.1
    })
    .unwrap();
    let fd = build_fd_hessian(&grid).unwrap();
    let energies = [
        fd_hessian_energy(&fd),
        build_fd_laplacian_energy(&grid, LaplacianBc::ZeroNeumann).unwrap(),
        build_fd_laplacian_energy(&grid, LaplacianBc::Natural).unwrap(),
    ];
    let mut rng = SplitMix64::new(2024);
    for energy in &energies {
        assert_eq!(energy.q.max_asymmetry(), 0.0);
        let qnorm = energy.q.infinity_norm();
        for _case in 0..100 {
            let x: Vec<f64> = (0..energy.n()).map(|_| rng.next_symmetric()).collect();
            let xsq: f64 = x.iter().map(|v| v * v).sum();
            let value = energy.q.quadratic_form(&x);
            assert!(value >= -1e-10 * qnorm * xsq, "negative quadratic form {value}");
        }
    }
}

#[test]
fn grid_energy_matches_dense_recomputation() {
    // uᵀQu must equal ‖√M̃·Hu‖² recomputed densely
    let grid = GridDomain::<f64>::from_predicate(9, 8, 0.3, |x, y| x + y < 4.0).unwrap();
    let fd = build_fd_hessian(&grid).unwrap();
    let energy = fd_hessian_energy(&fd);
    let op = energy.operator.as_ref().unwrap();
    let dense_rows = op.rows.to_dense();
    let mut rng = SplitMix64::new(99);
    for _case in 0..5 {
        let u: Vec<f64> = (0..energy.n()).map(|_| rng.next_symmetric()).collect();
        let direct = energy.q.quadratic_form(&u);
        let hu = oracle::matvec(&dense_rows, &u);
        let recomputed: f64 = hu.iter().zip(&op.row_mass).map(|(v, w)| w * v * v).sum();
        assert!(
            (direct - recomputed).abs() <= 1e-12 * recomputed.abs().max(1e-300),
            "{direct} vs {recomputed}"
        );
    }
}

#[test]
fn mesh_energy_matches_dense_recomputation() {
    use hessmooth_core::domain::mesh::disk_mesh;
    use hessmooth_core::fem::{build_fem_operators, fem_hessian_energy};
    let mesh = disk_mesh::<f64>(1.0, 3, 12).unwrap();
    let ops = build_fem_operators(&mesh);
    let energy = fem_hessian_energy(&ops).unwrap();
    let op = energy.operator.as_ref().unwrap();
    let dense_rows = op.rows.to_dense();
    let mut rng = SplitMix64::new(123);
    for _case in 0..5 {
        let u: Vec<f64> = (0..energy.n()).map(|_| rng.next_symmetric()).collect();
        let direct = energy.q.quadratic_form(&u);
        let hu = oracle::matvec(&dense_rows, &u);
        let recomputed: f64 = hu.iter().zip(&op.row_mass).map(|(v, w)| w * v * v).sum();
        assert!(
            (direct - recomputed).abs() <= 1e-12 * recomputed.abs().max(1e-300),
            "{direct} vs {recomputed}"
        );
    }
}
