use hawkes_bench::{bivariate_set, univariate_set, univariate_stream};

#[test]
fn fixtures_are_seeded() {
    assert_eq!(univariate_stream(500), univariate_stream(500));
    assert_eq!(univariate_stream(500).len(), 500);
    let s = univariate_set(4, 50);
    assert_eq!(s.len(), 4);
    assert_eq!(s.total_events(), 200);
    assert_eq!(bivariate_set(2, 50.0), bivariate_set(2, 50.0));
    assert_eq!(bivariate_set(2, 50.0).dims(), 2);
}
