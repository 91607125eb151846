//! A single satellite learning which of two links is cheaper. One link
//! costs 50 ms and the other 150 ms, with small per-pull noise.

use rand::Rng;
use skylink::rng::substream;
use skylink::routers::{LinkView, LocalObservation, Router};
use skylink::skylink::{SkyLinkParams, SkyLinkRouter};
use skylink::topology::{EdgeKind, NodeId};

fn main() -> skylink::Result<()> {
    let links = vec![
        LinkView { edge: 0, neighbor: NodeId::Satellite(1), kind: EdgeKind::Isl, distance_m: 2_000e3, capacity_bps: 5e9 },
        LinkView { edge: 1, neighbor: NodeId::Ground(0), kind: EdgeKind::Gsl, distance_m: 1_500e3, capacity_bps: 30e6 },
    ];
    let obs = LocalObservation { node: NodeId::Satellite(0), slot: 0, links, incoming_rate_bps: 1e6 };
    let costs = [0.15, 0.05];
    let mut router = SkyLinkRouter::new(1, SkyLinkParams::default(), 0.2);
    let mut rng = substream(7, "bandit");
    let mut good = 0usize;
    for step in 1..=10_000 {
        let prefs = router.decide(&obs, &mut rng);
        let top = prefs[0];
        if top == 1 {
            good += 1;
        }
        let cost = costs[top] + rng.random_range(-0.005..0.005);
        router.feedback(&obs, &prefs, &prefs[..1], cost)?;
        if step % 1_000 == 0 {
            println!("step {step:>6}: cheap link on top {:.1}% so far", 100.0 * good as f64 / step as f64);
        }
    }
    let state = router.state(0);
    for l in &obs.links {
        println!(
            "{}: score {:.3}, visits {}",
            l.neighbor,
            state.ucb_score(l.neighbor, l.distance_m, state.t, router.params()),
            state.visits(l.neighbor, 0)
        );
    }
    Ok(())
}
