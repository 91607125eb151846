use rand::seq::SliceRandom;

use super::{LocalObservation, PreferenceList, Router, RouterKind};
use crate::rng::SimRng;
use crate::topology::EdgeKind;

/// Established GSLs in random order; ISLs are never used.
pub fn bent_pipe_decide(obs: &LocalObservation, rng: &mut SimRng) -> PreferenceList {
    let mut list: PreferenceList = obs.links.iter().filter(|l| l.kind == EdgeKind::Gsl).map(|l| l.edge).collect();
    list.shuffle(rng);
    list
}

/// Every outgoing link in random order.
pub fn random_decide(obs: &LocalObservation, rng: &mut SimRng) -> PreferenceList {
    let mut list: PreferenceList = obs.links.iter().map(|l| l.edge).collect();
    list.shuffle(rng);
    list
}

#[derive(Debug, Default, Clone)]
pub struct BentPipeRouter;

impl Router for BentPipeRouter {
    fn kind(&self) -> RouterKind {
        RouterKind::BentPipe
    }

    fn decide(&mut self, obs: &LocalObservation, rng: &mut SimRng) -> PreferenceList {
        bent_pipe_decide(obs, rng)
    }
}

#[derive(Debug, Default, Clone)]
pub struct RandomRouter;

impl Router for RandomRouter {
    fn kind(&self) -> RouterKind {
        RouterKind::Random
    }

    fn decide(&mut self, obs: &LocalObservation, rng: &mut SimRng) -> PreferenceList {
        random_decide(obs, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::routers::LinkView;
    use crate::topology::NodeId;
    use proptest::prelude::*;

    fn obs(kinds: &[EdgeKind]) -> LocalObservation {
        let links = kinds
            .iter()
            .enumerate()
            .map(|(i, &kind)| LinkView {
                edge: 10 + i,
                neighbor: if kind == EdgeKind::Gsl { NodeId::Ground(i) } else { NodeId::Satellite(i) },
                kind,
                distance_m: 1e6,
                capacity_bps: 1e8,
            })
            .collect();
        LocalObservation { node: NodeId::Satellite(99), slot: 0, links, incoming_rate_bps: 0.0 }
    }

    #[test]
    fn empty_and_singleton() {
        let mut rng = substream(1, "t");
        assert!(random_decide(&obs(&[]), &mut rng).is_empty());
        assert!(bent_pipe_decide(&obs(&[EdgeKind::Isl, EdgeKind::Isl]), &mut rng).is_empty());
        assert_eq!(bent_pipe_decide(&obs(&[EdgeKind::Isl, EdgeKind::Gsl]), &mut rng), vec![11]);
        assert_eq!(random_decide(&obs(&[EdgeKind::Isl]), &mut rng), vec![10]);
    }

    #[test]
    fn bent_pipe_keeps_exactly_the_gsls() {
        use EdgeKind::*;
        let o = obs(&[Isl, Gsl, Isl, Isl, Gsl, Isl]);
        let mut list = bent_pipe_decide(&o, &mut substream(3, "t"));
        list.sort();
        assert_eq!(list, vec![11, 14]);
    }

    #[test]
    fn bent_pipe_matches_reference_shuffle() {
        let o = obs(&[EdgeKind::Gsl; 3]);
        for seed in 0..20 {
            // Reference: the library shuffle applied to the bare GSL ids.
            let mut reference = vec![10, 11, 12];
            reference.shuffle(&mut substream(seed, "ref"));
            assert_eq!(bent_pipe_decide(&o, &mut substream(seed, "ref")), reference);
        }
    }

    #[test]
    fn random_is_reproducible() {
        let o = obs(&[EdgeKind::Isl, EdgeKind::Gsl, EdgeKind::Isl]);
        assert_eq!(random_decide(&o, &mut substream(9, "r")), random_decide(&o, &mut substream(9, "r")));
    }

    #[test]
    fn random_first_place_is_uniform() {
        let o = obs(&[EdgeKind::Isl, EdgeKind::Gsl, EdgeKind::Isl, EdgeKind::Isl]);
        let mut rng = substream(42, "freq");
        let mut first = [0usize; 4];
        let trials = 10_000;
        for _ in 0..trials {
            first[random_decide(&o, &mut rng)[0] - 10] += 1;
        }
        for c in first {
            let share = c as f64 / trials as f64;
            assert!((share - 0.25).abs() <= 0.02, "{first:?}");
        }
    }

    proptest! {
        #[test]
        fn lists_are_duplicate_free_subsets(kinds in prop::collection::vec(prop::bool::ANY, 0..8), seed in 0u64..1000) {
            let kinds: Vec<EdgeKind> = kinds.into_iter().map(|g| if g { EdgeKind::Gsl } else { EdgeKind::Isl }).collect();
            let o = obs(&kinds);
            let mut rng = substream(seed, "p");
            for list in [random_decide(&o, &mut rng), bent_pipe_decide(&o, &mut rng)] {
                let mut sorted = list.clone();
                sorted.sort();
                sorted.dedup();
                prop_assert_eq!(sorted.len(), list.len());
                prop_assert!(list.iter().all(|e| o.link(*e).is_some()));
            }
        }
    }
}
