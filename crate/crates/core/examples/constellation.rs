//! Walker star positions and the +grid topology for one slot of the desk
//! scenario.

use skylink::channel::FiberDelayModel;
use skylink::ephemeris::{geodetic_to_ecef, WalkerConstellation, DEFAULT_EARTH_RADIUS_M};
use skylink::harness::desk;
use skylink::rng::substream;
use skylink::topology::{build_slot_graph, EdgeKind, NodeId, SlotInputs};

fn main() -> skylink::Result<()> {
    let cfg = desk();
    let walker = WalkerConstellation::new(cfg.constellation.clone())?;
    let layout = cfg.constellation.layout();
    let n = cfg.constellation.num_satellites();
    println!(
        "{} planes x {} satellites at {:.0} km, period {:.1} min",
        cfg.constellation.num_planes,
        cfg.constellation.sats_per_plane,
        cfg.constellation.altitude_m / 1e3,
        2.0 * std::f64::consts::PI / cfg.constellation.mean_motion() / 60.0
    );

    let stations = &cfg.ground_stations;
    let station_ecef: Vec<_> = stations.iter().map(|s| geodetic_to_ecef(&s.location, DEFAULT_EARTH_RADIUS_M)).collect();
    let mut rng = substream(1, "fiber");
    let fiber = FiberDelayModel::new(stations.len(), &cfg.channel, &mut rng);

    for slot in [0usize, 40, 80] {
        let positions = walker.positions_at_slot(slot, cfg.slot_duration_s);
        let delays = fiber.sample_slot(&mut rng);
        let inputs = SlotInputs {
            slot,
            positions: &positions,
            active: &vec![true; n],
            layout: &layout,
            stations,
            station_ecef: &station_ecef,
            fiber_delays_s: &delays,
            gsl_failed: &vec![false; n],
        };
        let graph = build_slot_graph(&inputs, &cfg.topology, &cfg.channel)?;
        println!(
            "\nslot {slot}: {} directed ISLs, {} GSLs, {} fiber links",
            graph.count_kind(EdgeKind::Isl),
            graph.count_kind(EdgeKind::Gsl),
            graph.count_kind(EdgeKind::Fiber)
        );
        for (g, st) in stations.iter().enumerate() {
            let visible: Vec<String> = graph
                .edges()
                .iter()
                .filter(|e| e.kind == EdgeKind::Gsl && e.dst == NodeId::Ground(g))
                .map(|e| format!("{}@{:.0}km", e.src, e.distance_m / 1e3))
                .collect();
            println!("  {:<10} sees {}", st.name, if visible.is_empty() { "nothing".into() } else { visible.join(" ") });
        }
    }
    let p0 = walker.positions_at(0.0);
    println!("\nsatellite 0 sub-point: {:.2} N {:.2} E", p0[0].latitude_deg(), p0[0].longitude_deg());
    Ok(())
}
