use bellkit::local::enumerate_strategies;
use bellkit::scenario::catalog::{cglmp_bipartite, mermin_cglmp};
use bellkit::scenario::{Behavior, Scenario};

fn mermin_form(b: &Behavior) -> f64 {
    let e = |x, y, z| b.correlator(&[x, y, z]).unwrap();
    e(1, 1, 1) - e(1, 0, 0) - e(0, 1, 0) - e(0, 0, 1)
}

#[test]
fn two_outputs_is_affine_in_mermin_form() {
    // [X]_2 = (1 - (-1)^X)/2 per bracket gives S = 2 + M/2
    let s = mermin_cglmp(2).unwrap();
    let sc = s.scenario().clone();
    let strategies: Vec<_> = enumerate_strategies(&sc).unwrap().collect();
    assert_eq!(strategies.len(), 64);
    for d in strategies {
        let b = d.behavior(&sc).unwrap();
        let value = s.evaluate(&b).unwrap();
        assert!((value - (2.0 + mermin_form(&b) / 2.0)).abs() < 1e-12, "strategy {}", d.index);
    }
}

#[test]
fn fixing_third_party_gives_bipartite_family() {
    for k in 2..=3 {
        let reduced = mermin_cglmp(k)
            .unwrap()
            .fix_party(2, &[0, 0])
            .unwrap()
            .relabel_output(1, 1, -1, 0)
            .unwrap()
            .remove_party(2)
            .unwrap();
        let target = cglmp_bipartite(k).unwrap();
        assert_eq!(reduced.term_map(), target.term_map(), "K={k}");
        assert_eq!(reduced.bound(), target.bound());

        // the same identity strategy by strategy, with C answering 0 and B2 negated
        let full = mermin_cglmp(k).unwrap();
        let bi = Scenario::new(vec![2, 2], k).unwrap();
        for d in enumerate_strategies(&bi).unwrap() {
            let a = &d.outputs[0];
            let b = &d.outputs[1];
            let lifted = full.evaluate_assignment(|p, x| match p {
                0 => a[x],
                1 if x == 1 => (k - b[x]) % k,
                1 => b[x],
                _ => 0,
            });
            assert_eq!(lifted, target.evaluate_assignment(|p, x| d.outputs[p][x]), "K={k} {}", d.index);
        }
    }
}
