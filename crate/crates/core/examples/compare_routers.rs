//! All six routers on a shortened desk scenario with identical traffic.

use skylink::harness::{compare_kinds, desk};
use skylink::routers::RouterKind;

fn main() -> skylink::Result<()> {
    let mut cfg = desk();
    cfg.slots = 600;
    cfg.seeds = vec![1, 2];
    let cmp = compare_kinds(&cfg, &RouterKind::ALL)?;
    let report = cmp.report(cfg.slots / 2..cfg.slots);
    println!("{:<12} {:>9} {:>7} {:>11} {:>6}", "router", "cost_ms", "drop", "thrpt_Mbps", "hops");
    for a in &report.routers {
        println!(
            "{:<12} {:>9.2} {:>7.3} {:>11.2} {:>6.2}",
            a.label,
            a.mean_cost_s * 1e3,
            a.mean_drop_rate,
            a.mean_throughput_bps / 1e6,
            a.mean_avg_hops
        );
    }
    println!();
    for r in report.ratios.iter().filter(|r| r.router == "skylink") {
        let pct = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:+.1}%"));
        println!(
            "skylink vs {:<11} cost {:>8}  drops {:>8}",
            r.baseline,
            pct(r.cost_reduction_pct),
            pct(r.drop_reduction_pct)
        );
    }
    Ok(())
}
