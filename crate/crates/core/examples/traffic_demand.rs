//! Population assignment and diurnal uplink demand over one day of the desk
//! scenario.

use skylink::harness::{desk, Scenario};

fn main() -> skylink::Result<()> {
    let cfg = desk();
    let scenario = Scenario::new(cfg.clone())?;
    let pop = scenario.population();
    println!("{} people in {} occupied cells", pop.total(), pop.occupied_cells());

    let slots_per_hour = (3_600.0 / cfg.slot_duration_s) as usize;
    println!("\n{:>5} {:>12} {:>8} {:>12}", "hour", "total_Mbps", "active", "peak_Mbps");
    for hour in 0..24 {
        let slot = hour * slots_per_hour;
        let positions = scenario.positions(slot);
        let gen = scenario.generated_bps(slot, &positions);
        let total: f64 = gen.iter().sum();
        let active = gen.iter().filter(|g| **g > 0.0).count();
        let peak = gen.iter().cloned().fold(0.0, f64::max);
        println!("{:>5} {:>12.2} {:>8} {:>12.2}", hour, total / 1e6, active, peak / 1e6);
    }
    Ok(())
}
