//! Fixtures shared by the kernel benchmarks: the headline setup and a few
//! lattices with nontrivial local structure.

use quadhecke::selftest::{headline_setup, PANEL_SIZE};
use quadhecke::session::{default_panel, Setup};
use quadhecke::Lattice;

pub const SEED: u64 = 20_261_016;

pub fn headline() -> Setup {
    headline_setup().expect("headline configuration builds")
}

/// The seeded panel of the acceptance run.
pub fn panel(setup: &Setup) -> Vec<Lattice> {
    default_panel(&setup.ev.ctx, PANEL_SIZE, SEED).expect("panel builds")
}

/// Lattices of growing index at the inert prime 13 and the split prime 3.
pub fn deep_lattices() -> Vec<(u64, Lattice)> {
    vec![
        (13, Lattice::from_hnf(1, 0, 13 * 13)),
        (13, Lattice::from_hnf(13, 0, 13u64.pow(4))),
        (3, Lattice::from_hnf(1, 4, 27)),
        (3, Lattice::from_hnf(1, 13, 3u64.pow(6))),
    ]
}
