use isalsr_core::benchmarks::{benchmark, VALIDATION_SET};
use isalsr_core::canonical::{canonical_string, SearchMode};
use isalsr_core::dag::{NodeType, OperationSet};
use isalsr_core::isa::s2d;
use isalsr_core::metric::distance;
use isalsr_core::{d2s, isomorphic};

fn full() -> OperationSet {
    OperationSet::full()
}

#[test]
fn cos_plus_x() {
    let d = s2d("V+VcPnc", 1, &full()).unwrap();
    assert_eq!(d.kind(1), NodeType::Add);
    assert_eq!(d.kind(2), NodeType::Cos);
    let v = d.evaluate(&[0.3]).unwrap();
    assert!((v[1] - (0.3f64.cos() + 0.3)).abs() < 1e-15);
}

#[test]
fn cos_plus_one() {
    let d = s2d("VcVkpv+Ppc", 1, &full()).unwrap();
    assert_eq!(d.kind(2), NodeType::Const);
    let v = d.evaluate(&[0.3]).unwrap();
    assert!((v[3] - (0.3f64.cos() + 1.0)).abs() < 1e-15);
    let a = canonical_string(&s2d("V+VcPnc", 1, &full()).unwrap(), SearchMode::Pruned).unwrap();
    let b = canonical_string(&d, SearchMode::Pruned).unwrap();
    assert_eq!(distance(&a, &b), 6);
}

#[test]
fn benchmark_canonical_lengths() {
    let want = [19, 26, 32, 7, 19, 16, 56, 7];
    for (name, len) in VALIDATION_SET.iter().zip(want) {
        let dag = benchmark(name).unwrap().dag;
        let w = canonical_string(&dag, SearchMode::Pruned).unwrap();
        assert_eq!(w.len(), len, "{name}: {w}");
        let back = s2d(&w, dag.num_vars(), &full()).unwrap();
        assert!(isomorphic(&dag, &back).is_some(), "{name}");
    }
    let n1 = benchmark("Nguyen-1").unwrap().dag;
    assert_eq!(d2s(&n1).unwrap().len(), 23);
    assert_eq!(canonical_string(&n1, SearchMode::Exhaustive).unwrap().len(), 19);
}

#[test]
fn small_canonical_strings() {
    let n8 = benchmark("Nguyen-8").unwrap().dag;
    assert_eq!(canonical_string(&n8, SearchMode::Pruned).unwrap(), "V^VkPnc");
    let f = benchmark("I.14.3").unwrap().dag;
    assert_eq!(canonical_string(&f, SearchMode::Pruned).unwrap(), "V*PnCPC");
}
