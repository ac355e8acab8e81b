//! Domain representations: masked grids, triangle meshes, constraints and
//! the file formats they are read from.

pub mod constraints;
pub mod grid;
pub mod io;
pub mod mesh;

pub use constraints::{snap_points, ConstraintError, ConstraintSet, SnapSites};
pub use grid::{GridDomain, GridError};
pub use io::{
    grid_from_mask, mesh_format_for_path, parse_mesh, parse_pgm, read_scattered_csv, write_off,
    IoError, MeshFormat, PgmImage,
};
pub use mesh::{annulus_mesh, disk_mesh, sphere_mesh, square_mesh, Edge, MeshError, TriMesh};
