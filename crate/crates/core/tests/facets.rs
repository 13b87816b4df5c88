use std::time::Instant;

use bellkit::local::{facet_check, facet_check_with, local_bound, ExactPass, FacetOptions, RankCertificate};
use bellkit::scenario::{catalog, catalog_any_k, Rational};

#[test]
fn cyclic_family_is_tight_up_to_four() {
    for k in 2..=4 {
        let t = Instant::now();
        let opts = FacetOptions {
            exact_pass: ExactPass::Always,
            ..Default::default()
        };
        let r = facet_check_with(&catalog::mermin_cglmp(k).unwrap(), &opts).unwrap();
        eprintln!("K={k} {:?} in {:?}", (r.saturating_vertex_count, r.saturating_affine_rank), t.elapsed());
        assert!(r.is_valid && r.is_tight);
        assert_eq!(r.polytope_dimension, (2 * k - 1).pow(3) - 1);
        assert_eq!(r.exact_affine_rank, Some(r.modp_affine_rank));
    }
}

#[test]
fn symmetric_residue_classes_are_tight() {
    for i in 1..=9 {
        let e = catalog::catalog(&format!("symm-A{i}"), 3).unwrap();
        let r = facet_check(&e).unwrap();
        assert!(r.is_valid, "A{i} invalid: local bound {}", r.local_bound);
        assert!(r.is_tight, "A{i}: rank {} of {}", r.saturating_affine_rank, r.polytope_dimension);
    }
}

#[test]
fn symmetric_mermin_variant_loses_tightness_at_four() {
    let (e, stated) = catalog_any_k("mermin-sym", 4).unwrap();
    assert!(!stated);
    let lb = local_bound(&e).unwrap();
    let r = facet_check(&e.with_bound(lb.value)).unwrap();
    eprintln!("mermin-sym K=4 bound {} rank {} of {}", lb.value, r.saturating_affine_rank, r.polytope_dimension);
    assert!(r.is_valid && !r.is_tight);
    assert_eq!(r.certificate, RankCertificate::ExactElimination);
    for k in 2..=3 {
        let r = facet_check(&catalog::catalog("mermin-sym", k).unwrap()).unwrap();
        assert!(r.is_valid);
        assert_eq!(r.local_bound, Rational::from_integer(2));
    }
}

#[test]
fn embedded_bipartite_inequality_is_not_tight() {
    for k in 2..=3 {
        let e = catalog::cglmp_bipartite(k).unwrap().embed_party(2).unwrap();
        let r = facet_check(&e).unwrap();
        assert!(r.is_valid && !r.is_tight, "K={k}: {r:?}");
        let bi = facet_check(&catalog::cglmp_bipartite(k).unwrap()).unwrap();
        assert!(bi.is_tight);
    }
}
