//! Bessel potential kernels, the smooth cutoff profile and the two
//! Littlewood–Paley partitions built from it.

mod bessel;
mod partition;
mod profile;

pub use bessel::{bessel_kernel, bessel_lattice_sum, bessel_leading, bessel_value, BesselTable, LatticeSumOptions, Leading};
pub use partition::{dyadic_annulus_partition, inhomogeneous_partition, PartitionKind, PartitionSpec};
pub use profile::{bump, cutoff, smoothstep};
