use pertexp::system_file::SystemFile;
use pertexp_core::expansion::SystemSpec;
use pertexp_core::systems::{build, Builtin, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn assert_same(a: &SystemSpec, b: &SystemSpec, rng: &mut ChaCha8Rng) {
    assert_eq!(a.dim(), b.dim());
    assert_eq!(a.epsilon(), b.epsilon());
    assert_eq!(a.period(), b.period());
    assert_eq!(a.is_skew_hermitian(), b.is_skew_hermitian());
    for _ in 0..10 {
        let t = rng.gen_range(-20.0..20.0);
        assert_eq!(a.eval(t), b.eval(t), "t = {t}");
    }
}

#[test]
fn builtins_round_trip_through_json() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for which in Builtin::ALL {
        let sys = build(which, &SystemParams::default()).unwrap();
        let text = SystemFile::from_system(&sys).to_json();
        let back = SystemFile::from_json(&text).unwrap().to_system(false).unwrap();
        assert_same(&sys, &back, &mut rng);
    }
}

#[test]
fn loads_from_disk_with_hamiltonian_flag() {
    let json = r#"{
        "dim": 2,
        "frequencies": [1.0],
        "A0": {"re": [[0.5, 0], [0, -0.5]], "im": [[0, 0], [0, 0]]},
        "terms": [{"order": 1, "modes": [
            {"k": [1], "rho": 0.0, "power": 0, "re": [[0, 0.5], [0.5, 0]], "im": [[0, 0], [0, 0]]},
            {"k": [-1], "rho": 0.0, "power": 0, "re": [[0, 0.5], [0.5, 0]], "im": [[0, 0], [0, 0]]}
        ]}],
        "skew_hermitian": true,
        "period": 6.283185307179586,
        "epsilon": 0.2
    }"#;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bs.json");
    std::fs::write(&path, json).unwrap();
    let loaded = SystemFile::load(&path).unwrap().to_system(true).unwrap();
    let builtin = build(Builtin::BlochSiegert, &SystemParams::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..10 {
        let t: f64 = rng.gen_range(0.0..30.0);
        assert!((&loaded.eval(t) - &builtin.eval(t)).max_abs() < 1e-15);
    }
}
