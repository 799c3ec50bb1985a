use proptest::prelude::*;
use radiosync::model::mu_b;
use radiosync::oracle::{mc_falsify, verify_selective_family, Mode};
use radiosync::protocols::{run_broadcast, run_wakeup, WakeSchedule};
use radiosync::radionet::{deliver, gen_network, NetworkModel};
use radiosync::synchronizer::gen_upper_block_candidate;
use radiosync::*;

fn distinct(nodes: Vec<usize>) -> Vec<usize> {
    let mut out = Vec::new();
    for v in nodes {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn wakeup_core_hit_lifts_to_set(
        n in 2usize..=8,
        c in prop::sample::select(vec![0.5, 1.0, 2.0]),
        seed in any::<u64>(),
        picks in prop::collection::vec(0usize..8, 1..8),
        times in prop::collection::vec(0u64..200, 8),
        base in 0u64..50,
    ) {
        let family = gen_urs_candidate(n, c, seed).unwrap();
        let set = distinct(picks.into_iter().map(|v| v % n).collect());
        let g = |q| g_urs(q, n, c).unwrap();
        let omega = ActivationSchedule::new(times[..n].iter().map(|t| base + t % (2 * g(set.len()))).collect());
        let core = extract_wakeup_core(&set, &omega, g).unwrap();
        prop_assert!(core.len() <= set.len());
        let w = omega.min_over(&set).unwrap();
        if let Some(t) = first_hit(&family, &core.members, 0, g(core.len())) {
            let raw: Vec<(usize, u64)> = set.iter().map(|&v| (v, omega.time(v).unwrap())).collect();
            prop_assert!(column_hit(&family, &raw, t + w));
            prop_assert!(t + w < w + g(set.len()));
        }
    }

    #[test]
    fn block_core_hit_lifts_to_set(
        pick in 0usize..3,
        seed in any::<u64>(),
        picks in prop::collection::vec(0usize..16, 1..16),
        times in prop::collection::vec(0u64..400, 16),
    ) {
        let (n, ecc, delta) = [(8, 4, 4), (12, 3, 6), (16, 4, 8)][pick];
        let family = gen_upper_block_candidate(n, ecc, delta, 2.0, seed).unwrap();
        let (b, r) = (family.params.block_len, family.params.r);
        let set = distinct(picks.into_iter().map(|v| v % n).take(delta).collect());
        let omega = ActivationSchedule::new(times[..n].to_vec());
        let core = extract_block_core(&set, &omega, b, r).unwrap();
        let starts: Vec<(usize, u64)> = set.iter().map(|&v| (v, mu_b(omega.time(v).unwrap(), b).unwrap())).collect();
        let s_x = starts.iter().map(|&(_, s)| s).min().unwrap();
        let window = |q: usize| b * (q as u64).div_ceil(r as u64);
        if let Some(t) = first_hit(&family, &core.column_offsets(b), 0, window(core.len())) {
            prop_assert!(column_hit(&family, &starts, t + s_x));
            prop_assert!(t < window(set.len()));
        }
    }

    #[test]
    fn deliver_contract(seed in any::<u64>(), mask in any::<u32>(), extra in 0usize..20) {
        let net = gen_network(NetworkModel::RandomDag { n: 20, p: 0.2, seed }).unwrap();
        let tx: Vec<usize> = (0..20).filter(|v| mask >> v & 1 == 1).collect();
        let out = deliver(&net, &tx).unwrap();
        prop_assert_eq!(&out, &deliver(&net, &tx).unwrap());
        for (&u, &w) in &out.receptions {
            prop_assert!(!tx.contains(&u));
            prop_assert!(tx.contains(&w) && net.in_neighbors(u).contains(&w));
            prop_assert_eq!(net.in_neighbors(u).iter().filter(|x| tx.contains(x)).count(), 1);
        }
        let mut more = tx.clone();
        if !more.contains(&extra) {
            more.push(extra);
        }
        let bigger = deliver(&net, &more).unwrap();
        for (&u, &w) in &bigger.receptions {
            prop_assert!(w == extra || out.receptions.get(&u) == Some(&w));
        }
        for &u in out.receptions.keys() {
            if !bigger.receptions.contains_key(&u) {
                prop_assert!(u == extra || net.out_neighbors(extra).contains(&u));
            }
        }
    }

    #[test]
    fn wakeup_shift_invariance(seed in any::<u64>(), shift in 1u64..1000, wakes in prop::collection::vec(prop::option::of(0u64..40), 10)) {
        prop_assume!(wakes.iter().any(Option::is_some));
        let net = gen_network(NetworkModel::BoundedIndeg { n: 10, cap: 3, seed }).unwrap();
        let mut wakes = wakes;
        wakes[0] = Some(wakes[0].unwrap_or(0));
        let family = gen_urs_candidate(10, 4.0, seed).unwrap();
        let wake = WakeSchedule::new(wakes).unwrap();
        let a = run_wakeup(&net, &family, &wake, 5000).unwrap();
        let b = run_wakeup(&net, &family, &wake.shifted(shift), 5000).unwrap();
        prop_assert_eq!(a.completion.map(|t| t + shift), b.completion);
        prop_assert_eq!(a.steps.len(), b.steps.len());
        for (x, y) in a.steps.iter().zip(&b.steps) {
            prop_assert_eq!(x.step + shift, y.step);
            prop_assert_eq!(&x.transmitters, &y.transmitters);
            prop_assert_eq!(&x.receptions, &y.receptions);
            prop_assert_eq!(&x.newly_active, &y.newly_active);
        }
        let shifted: Vec<_> = a.activation.iter().map(|t| t.map(|t| t + shift)).collect();
        prop_assert_eq!(shifted, b.activation);
    }

    #[test]
    fn broadcast_trace_replays(seed in any::<u64>()) {
        let net = gen_network(NetworkModel::LayeredRandom { layers: 3, width: 3, seed }).unwrap();
        let ecc = net.ecc().unwrap();
        let delta = radiosync::protocols::block_regime_delta(net.n(), ecc, net.max_indegree()).unwrap();
        let upper = gen_upper_block_candidate(net.n(), ecc, delta, 2.0, seed).unwrap();
        let sel = gen_selective_family(net.n(), upper.params.r, 3.0, seed).unwrap();
        let family = compose_block_synchronizer(&upper, &sel).unwrap();
        let trace = run_broadcast(&net, &family, 2000).unwrap();
        for row in &trace.steps {
            let out = deliver(&net, &row.transmitters).unwrap();
            prop_assert_eq!(&out.receptions, &row.receptions);
            for &u in &row.newly_active {
                prop_assert_eq!(trace.activation[u], Some(row.step + 1));
                let w = row.receptions[&u];
                prop_assert!(trace.activation[w].unwrap() < row.step + 1);
            }
            for &v in &row.transmitters {
                let a = trace.activation[v].unwrap();
                prop_assert!(row.step >= mu_b(a, family.sync_block_len()).unwrap());
            }
        }
    }
}

#[test]
fn selective_verdicts_are_monotone_in_k() {
    for seed in 0..10 {
        let f = gen_selective_family(10, 4, 3.0, seed).unwrap();
        if verify_selective_family(&f, Mode::Exhaustive).unwrap().holds() {
            for k in 1..4 {
                let g = f.with_threshold(k).unwrap();
                assert!(verify_selective_family(&g, Mode::Exhaustive).unwrap().holds());
            }
        }
    }
}

#[test]
fn sampling_never_falsifies_a_verified_family() {
    let g = radiosync::oracle::generate_verified_urs(5, 8.0, Mode::Exhaustive, 20, 3).unwrap();
    assert!(mc_falsify(&g.family, 5, 100_000, 11).unwrap().holds());
    let b = radiosync::oracle::generate_verified_block(8, 4, 4, 2.0, 3.0, Mode::Exhaustive, 50, 2).unwrap();
    assert!(mc_falsify(&b.family, 4, 100_000, 12).unwrap().holds());
}
