//! Shared inputs for the benchmarks.

use symref_core::instances::{gen_energy, gen_kissing, gen_maxcut, gen_packing, Graph};
use symref_core::Minlp;

/// Detection workloads, small to large.
pub fn detection_instances() -> Vec<(&'static str, Minlp)> {
    vec![
        ("packing_4x2", gen_packing(4, 2)),
        ("packing_8x3", gen_packing(8, 3)),
        ("kissing_6x3", gen_kissing(6, 3)),
        ("energy_5x3", gen_energy(5, 3)),
        ("maxcut_petersen", gen_maxcut(&Graph::petersen())),
    ]
}
