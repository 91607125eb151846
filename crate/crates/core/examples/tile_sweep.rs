//! Mean SkyLink cost over a small grid of tile widths and partition counts.

use skylink::harness::{desk, sweep_tiles};

fn main() -> skylink::Result<()> {
    let mut cfg = desk();
    cfg.slots = 800;
    cfg.seeds = vec![1];
    let widths_m = [50e3, 500e3, 2_000e3];
    let partitions = [1, 2, 4];
    let grid = sweep_tiles(&cfg, &widths_m, &partitions)?;
    print!("{}", grid.to_csv()?);
    Ok(())
}
