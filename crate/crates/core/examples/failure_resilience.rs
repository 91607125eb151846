//! GSL outages on a fifth of the constellation, comparing how SkyLink and
//! bent-pipe cope inside the outage window.

use skylink::harness::{desk, run_lockstep, FailureSchedule, RouterSetup, Scenario};
use skylink::routers::RouterKind;

fn main() -> skylink::Result<()> {
    let mut cfg = desk();
    cfg.slots = 1_200;
    cfg.failure = Some(FailureSchedule { fraction: 0.2, start_slot: 600, end_slot: 900, selection_seed: 0 });
    let scenario = Scenario::new(cfg.clone())?;
    println!("satellites without GSLs during [600, 900): {:?}", scenario.failed_satellites());
    let setups: Vec<RouterSetup> =
        [RouterKind::SkyLink, RouterKind::BentPipe].iter().map(|&k| RouterSetup::from_config(&cfg, k)).collect();
    let runs = run_lockstep(&scenario, 1, &setups)?;
    println!("{:<10} {:>14} {:>14} {:>10} {:>10}", "router", "cost_before_ms", "cost_during_ms", "hops_bef", "hops_dur");
    for r in &runs {
        println!(
            "{:<10} {:>14.2} {:>14.2} {:>10.3} {:>10.3}",
            r.label,
            r.mean_over(300..600, |x| x.cost_s) * 1e3,
            r.mean_over(600..900, |x| x.cost_s) * 1e3,
            r.mean_over(300..600, |x| x.avg_hops),
            r.mean_over(600..900, |x| x.avg_hops)
        );
    }
    Ok(())
}
