use radpart::diagram::bbox_diag;
use radpart::kernel::Point2;
use radpart::optimizer::{run, Termination};
use radpart::scene::{gen_masked_lattice, load_scene, save_scene, MaskedLatticeParams, Scene};

fn lattice(jitter: f64, masks: Vec<Vec<Point2>>) -> Scene {
    gen_masked_lattice(&MaskedLatticeParams {
        width: 1.0,
        height: 1.0,
        spacing: 1.0 / 6.0,
        masks,
        jitter,
        seed: 11,
    })
    .unwrap()
}

#[test]
fn jittered_lattice_converges() {
    let scene = lattice(0.2, Vec::new());
    let state = run(&scene.balls, &scene.params).unwrap();
    let diag = bbox_diag(&scene.balls);
    assert_eq!(state.termination, Termination::TauTol);
    assert!(state.iteration <= 500, "took {} iterations", state.iteration);
    assert!(state.max_abs_tau <= 1e-8 * diag * diag);
}

#[test]
fn unperturbed_lattice_is_already_converged() {
    let scene = lattice(0.0, Vec::new());
    let state = run(&scene.balls, &scene.params).unwrap();
    assert_eq!(state.termination, Termination::TauTol);
    assert_eq!(state.iteration, 0);
    assert_eq!(state.balls, scene.balls);
}

#[test]
fn fully_masked_lattice_does_not_move() {
    let cover = vec![
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(1.0, 1.0),
        Point2::new(0.0, 1.0),
    ];
    let scene = lattice(0.2, vec![cover]);
    assert!(scene.balls.iter().all(|b| b.fix_center && b.fix_radius));
    let mut config = scene.params.clone();
    config.max_iters = 20;
    let state = run(&scene.balls, &config).unwrap();
    assert_eq!(state.balls, scene.balls);
}

#[test]
fn scene_file_round_trip_is_exact() {
    let scene = lattice(0.2, Vec::new());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scene.json");
    save_scene(&scene, &path).unwrap();
    let loaded = load_scene(&path).unwrap();
    assert!(loaded.warnings.is_empty(), "{:?}", loaded.warnings);
    assert_eq!(loaded.scene, scene);
}
