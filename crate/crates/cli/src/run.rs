//! Subcommand implementations.

use hessmooth_core::domain::{snap_points, ConstraintSet};
use hessmooth_core::fd;
use hessmooth_core::fem;
use hessmooth_core::solve::{self, FlowOperator, L1Problem};
use hessmooth_core::sparse::EigenOptions;
use hessmooth_core::{DiscreteEnergy, GridDomain, SolveOptions};

use crate::io::{self, Domain, OutDir};
use crate::{CliError, DomainArgs, EnergyArg, EnergyArgs, OutputArgs};

fn solver<E: std::fmt::Display>(err: E) -> CliError {
    CliError::Solver(format!("solver: {err}"))
}

fn build_energy(domain: &Domain, args: &EnergyArgs) -> Result<DiscreteEnergy<f64>, CliError> {
    match domain {
        Domain::Grid(grid) => match args.energy {
            EnergyArg::Hessian => {
                let h = fd::build_fd_hessian(grid).map_err(solver)?;
                Ok(fd::fd_hessian_energy(&h))
            }
            EnergyArg::LaplacianNeumann => {
                fd::build_fd_laplacian_energy(grid, fd::LaplacianBc::ZeroNeumann).map_err(solver)
            }
            EnergyArg::LaplacianNatural => {
                fd::build_fd_laplacian_energy(grid, fd::LaplacianBc::Natural).map_err(solver)
            }
            EnergyArg::Blend => {
                let h = fd::build_fd_hessian(grid).map_err(solver)?;
                let hess = fd::fd_hessian_energy(&h);
                let lap =
                    fd::build_fd_laplacian_energy(grid, fd::LaplacianBc::Natural).map_err(solver)?;
                fd::blend_energy(&hess, &lap, args.alpha).map_err(solver)
            }
            EnergyArg::Cr => {
                Err(CliError::Config("energy: cr requires a triangle mesh (--mesh)".into()))
            }
        },
        Domain::Mesh(mesh) => {
            let ops = fem::build_fem_operators(mesh);
            match args.energy {
                EnergyArg::Hessian => fem::fem_hessian_energy(&ops).map_err(solver),
                EnergyArg::LaplacianNeumann => {
                    fem::fem_laplacian_energy(&ops, fem::LaplacianBc::ZeroNeumann).map_err(solver)
                }
                EnergyArg::LaplacianNatural => {
                    fem::fem_laplacian_energy(&ops, fem::LaplacianBc::Natural).map_err(solver)
                }
                EnergyArg::Cr => Ok(fem::cr_energy(mesh)),
                EnergyArg::Blend => {
                    let hess = fem::fem_hessian_energy(&ops).map_err(solver)?;
                    let lap = fem::fem_laplacian_energy(&ops, fem::LaplacianBc::Natural)
                        .map_err(solver)?;
                    fd::blend_energy(&hess, &lap, args.alpha).map_err(solver)
                }
            }
        }
    }
}

fn snap_constraints(
    domain: &Domain,
    points: &[[f64; 3]],
    values: &[f64],
) -> Result<ConstraintSet<f64>, CliError> {
    let result = match domain {
        Domain::Grid(grid) => snap_points(grid, points, values),
        Domain::Mesh(mesh) => snap_points(mesh, points, values),
    };
    result.map_err(|err| CliError::Config(format!("constraints: {err}")))
}

pub fn interpolate(
    domain_args: &DomainArgs,
    energy_args: &EnergyArgs,
    constraints_path: &str,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let domain = io::load_domain(domain_args)?;
    let (points, values) = io::load_scattered("constraints", constraints_path)?;
    let energy = build_energy(&domain, energy_args)?;
    let constraints = snap_constraints(&domain, &points, &values)?;
    let u = solve::interpolate(&energy, &constraints, &SolveOptions::default()).map_err(solver)?;
    let dir = OutDir::create(&output.out)?;
    io::write_field(&dir, &domain, "field", &u, &output.range)
}

pub fn smooth(
    domain_args: &DomainArgs,
    energy_args: &EnergyArgs,
    data_path: &str,
    weight: f64,
    output: &OutputArgs,
) -> Result<(), CliError> {
    if !(weight > 0.0) {
        return Err(CliError::Config("weight: must be positive".into()));
    }
    let domain = io::load_domain(domain_args)?;
    let energy = build_energy(&domain, energy_args)?;
    let data = io::load_field("data", data_path, domain.num_dofs())?;
    let u = solve::smooth(&energy, &data, weight, &SolveOptions::default()).map_err(solver)?;
    let dir = OutDir::create(&output.out)?;
    io::write_field(&dir, &domain, "field", &u, &output.range)
}

pub fn modes(
    domain_args: &DomainArgs,
    energy_args: &EnergyArgs,
    k: usize,
    seed: u64,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let domain = io::load_domain(domain_args)?;
    let energy = build_energy(&domain, energy_args)?;
    let opts = EigenOptions { seed, ..EigenOptions::default() };
    let pairs = solve::modes(&energy, k, &opts).map_err(solver)?;
    let dir = OutDir::create(&output.out)?;
    let mut spectrum = String::from("index,eigenvalue\n");
    for (i, lambda) in pairs.eigenvalues.iter().enumerate() {
        spectrum.push_str(&format!("{i},{lambda}\n"));
    }
    dir.write("spectrum.csv", &spectrum)?;
    for (i, vector) in pairs.eigenvectors.iter().enumerate() {
        io::write_field(&dir, &domain, &format!("mode_{i:03}"), vector, &output.range)?;
    }
    Ok(())
}

pub fn weights(
    domain_args: &DomainArgs,
    energy_args: &EnergyArgs,
    handles_path: &str,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let domain = io::load_domain(domain_args)?;
    let energy = build_energy(&domain, energy_args)?;
    let (points, _) = io::load_scattered("handles", handles_path)?;
    let zeros = vec![0.0; points.len()];
    let snapped = snap_constraints(&domain, &points, &zeros)
        .map_err(|err| match err {
            CliError::Config(msg) => CliError::Config(msg.replace("constraints:", "handles:")),
            other => other,
        })?;
    let handles = snapped.indices();
    let positions: Vec<[f64; 3]> = handles
        .iter()
        .map(|&i| match &domain {
            Domain::Grid(grid) => {
                let [x, y] = grid.position(i);
                [x, y, 0.0]
            }
            Domain::Mesh(mesh) => mesh.position(i),
        })
        .collect();
    let weights = solve::subspace_weights(&energy, &handles, &positions, &SolveOptions::default())
        .map_err(solver)?;
    let dir = OutDir::create(&output.out)?;
    for (i, column) in weights.columns.iter().enumerate() {
        io::write_field(&dir, &domain, &format!("weight_{i:03}"), column, &output.range)?;
    }
    let residual = weights.max_row_sum_deviation();
    dir.write("rowsum_residual.txt", &format!("{residual}\n"))
}

pub fn l1(
    domain_args: &DomainArgs,
    energy_args: &EnergyArgs,
    data_path: &str,
    lambda: f64,
    output: &OutputArgs,
) -> Result<(), CliError> {
    if !(lambda > 0.0) {
        return Err(CliError::Config("lambda: must be positive".into()));
    }
    let domain = io::load_domain(domain_args)?;
    let energy = build_energy(&domain, energy_args)?;
    let data = io::load_field("data", data_path, domain.num_dofs())?;
    let problem = L1Problem::from_energy(&energy, data, lambda).map_err(solver)?;
    let solution = solve::l1_smooth(&problem).map_err(solver)?;
    let dir = OutDir::create(&output.out)?;
    io::write_field(&dir, &domain, "field", &solution.u, &output.range)?;
    let summary = format!(
        "iterations,{}\nprimal_residual,{}\ndual_residual,{}\nobjective,{}\n\
         dual_max_abs,{}\ndual_min_alignment,{}\nactive_rows,{}\n",
        solution.iterations,
        solution.primal_residual,
        solution.dual_residual,
        solution.objective,
        solution.certificate.max_abs_dual,
        solution.certificate.min_alignment,
        solution.certificate.active_rows,
    );
    dir.write("admm_summary.txt", &summary)
}

pub fn flow(
    domain_args: &DomainArgs,
    energy_args: &EnergyArgs,
    lambda: f64,
    steps: usize,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let domain = io::load_domain(domain_args)?;
    let mesh = match domain {
        Domain::Mesh(mesh) => mesh,
        Domain::Grid(_) => return Err(CliError::Config("flow: requires a mesh (--mesh)".into())),
    };
    let operator = match energy_args.energy {
        EnergyArg::Hessian => FlowOperator::Hessian,
        EnergyArg::LaplacianNeumann | EnergyArg::LaplacianNatural => FlowOperator::Laplacian,
        other => {
            return Err(CliError::Config(format!(
                "flow: --energy {other:?} is not a flow operator (use hessian or laplacian-neumann)"
            )));
        }
    };
    let sequence = solve::l1_flow(&mesh, lambda, steps, operator).map_err(solver)?;
    let dir = OutDir::create(&output.out)?;
    for (step, snapshot) in sequence.iter().enumerate() {
        dir.write(
            &format!("flow_{step:03}.off"),
            &hessmooth_core::write_off(snapshot),
        )?;
        let density = flow_energy_density(snapshot, operator).map_err(solver)?;
        dir.write(&format!("energy_density_{step:03}.csv"), &io::field_csv(&density))?;
    }
    Ok(())
}

/// Pointwise L1 energy density of the current geometry: per vertex, the
/// mass-weighted absolute second derivatives of the coordinate functions
/// divided by the vertex mass.
fn flow_energy_density(
    mesh: &hessmooth_core::TriMesh<f64>,
    operator: FlowOperator,
) -> Result<Vec<f64>, String> {
    let ops = fem::build_fem_operators(mesh);
    let energy = match operator {
        FlowOperator::Hessian => fem::fem_hessian_energy(&ops).map_err(|e| e.to_string())?,
        FlowOperator::Laplacian => {
            fem::fem_laplacian_energy(&ops, fem::LaplacianBc::ZeroNeumann).map_err(|e| e.to_string())?
        }
    };
    let op = energy.operator.as_ref().expect("mesh energies carry operators");
    let n = mesh.num_vertices();
    let rows = op.rows.nrows();
    let sites: Vec<usize> = match operator {
        FlowOperator::Hessian => {
            let ni = ops.interior.len();
            (0..rows).map(|r| ops.interior[r % ni]).collect()
        }
        FlowOperator::Laplacian => (0..rows).collect(),
    };
    let mut density = vec![0.0; n];
    for c in 0..3 {
        let coord: Vec<f64> = (0..n).map(|v| mesh.position(v)[c]).collect();
        let hu = op.rows.mul_vec(&coord);
        for (r, value) in hu.iter().enumerate() {
            density[sites[r]] += op.row_mass[r] * value.abs();
        }
    }
    for (v, d) in density.iter_mut().enumerate() {
        *d /= ops.mass[v];
    }
    Ok(density)
}

pub fn annulus(levels: usize, r0: f64, r1: f64, output: &OutputArgs) -> Result<(), CliError> {
    if levels == 0 {
        return Err(CliError::Config("levels: must be at least 1".into()));
    }
    if !(r0 > 0.0 && r1 > r0) {
        return Err(CliError::Config("annulus radii must satisfy 0 < r0 < r1".into()));
    }
    let reference = solve::annulus_reference(r0, r1).map_err(solver)?;
    let dir = OutDir::create(&output.out)?;
    let mut csv = String::from("h,Linf_error,rate\n");
    let mut previous: Option<f64> = None;
    for level in 0..levels {
        let nodes = 32 * (1usize << level) + 1;
        let (h, error) = annulus_level(&reference, r0, r1, nodes).map_err(solver)?;
        let rate = match previous {
            Some(prev) => format!("{}", (prev / error).log2()),
            None => String::new(),
        };
        csv.push_str(&format!("{h},{error},{rate}\n"));
        previous = Some(error);
    }
    dir.write("convergence.csv", &csv)
}

/// One refinement level of the masked-grid study: Dirichlet values sampled
/// from the analytic solution on the nodes nearest each circle, error
/// measured in the interior maximum norm.
fn annulus_level(
    reference: &solve::RadialBiharmonic<f64>,
    r0: f64,
    r1: f64,
    nodes: usize,
) -> Result<(f64, f64), String> {
    let pad = 0.25 * (r1 - r0);
    let side = 2.0 * (r1 + pad);
    let h = side / (nodes as f64 - 1.0);
    let center = side / 2.0 + 0.0137 * (r1 - r0);
    let radius_at = |grid: &GridDomain<f64>, dof: usize| {
        let [x, y] = grid.position(dof);
        ((x - center).powi(2) + (y - center).powi(2)).sqrt()
    };
    let grid = GridDomain::from_predicate(nodes, nodes, h, |x, y| {
        let r = ((x - center).powi(2) + (y - center).powi(2)).sqrt();
        (r0..=r1).contains(&r)
    })
    .map_err(|e| e.to_string())?;
    let fd_op = fd::build_fd_hessian(&grid).map_err(|e| e.to_string())?;
    let energy = fd::fd_hessian_energy(&fd_op);
    let mut entries = Vec::new();
    for dof in 0..grid.num_dofs() {
        let r = radius_at(&grid, dof);
        if (r - r0).abs() <= 0.5 * h || (r - r1).abs() <= 0.5 * h {
            entries.push((dof, reference.eval(r)));
        }
    }
    let constraints = ConstraintSet::new(entries).map_err(|e| e.to_string())?;
    let u = solve::interpolate(&energy, &constraints, &SolveOptions::default())
        .map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for &dof in grid.interior() {
        let r = radius_at(&grid, dof);
        worst = worst.max((u[dof] - reference.eval(r)).abs());
    }
    Ok((h, worst))
}
