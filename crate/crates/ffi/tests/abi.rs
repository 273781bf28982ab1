use std::ffi::{CStr, CString};
use std::ptr;

use animat_ffi::*;

fn sim(config: &str, seed: u64) -> *mut AnimatSim {
    let text = CString::new(config).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { animat_sim_new(text.as_ptr(), seed, &mut out) };
    assert_eq!(status, AnimatStatus::Ok);
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    let p = animat_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

const SMALL: &str =
    "n_cells = 80\ninitial_population = 20\ngrass_probability = 1/20\nmax_iterations = 60\n";

#[test]
fn run_to_the_iteration_limit() {
    let s = sim(SMALL, 3);
    unsafe {
        assert_eq!(animat_sim_population(s), 20);
        let mut rec = std::mem::zeroed::<AnimatStepRecord>();
        assert_eq!(animat_sim_step(s, &mut rec), AnimatStatus::Ok);
        assert_eq!(rec.t, 0);
        assert_eq!(rec.population, 20);
        assert_eq!(rec.actions.iter().sum::<u64>(), 20);
        assert!(rec.ledger_imbalance.abs() < 1e-6);

        let mut n = 0;
        assert_eq!(animat_sim_run(s, 1000, &mut n), AnimatStatus::Ok);
        assert_eq!(n, 59);
        assert_eq!(animat_sim_iteration(s), 60);
        animat_sim_free(s);
    }
}

#[test]
fn handles_with_the_same_seed_agree() {
    let (a, b) = (sim(SMALL, 11), sim(SMALL, 11));
    unsafe {
        animat_sim_run(a, 60, ptr::null_mut());
        animat_sim_run(b, 60, ptr::null_mut());
        assert_eq!(animat_sim_population(a), animat_sim_population(b));
        for i in 0..animat_sim_population(a) {
            let mut x = std::mem::zeroed::<AnimatAgent>();
            let mut y = std::mem::zeroed::<AnimatAgent>();
            assert_eq!(animat_sim_agent(a, i, &mut x), AnimatStatus::Ok);
            assert_eq!(animat_sim_agent(b, i, &mut y), AnimatStatus::Ok);
            assert_eq!((x.position, x.energy), (y.position, y.energy));
            assert_eq!(x.weights, y.weights);
        }
        animat_sim_free(a);
        animat_sim_free(b);
    }
}

#[test]
fn snapshot_round_trip_continues_identically() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("s.txt").to_str().unwrap()).unwrap();
    let full = sim(SMALL, 5);
    let half = sim(SMALL, 5);
    unsafe {
        animat_sim_run(full, 60, ptr::null_mut());
        animat_sim_run(half, 30, ptr::null_mut());
        assert_eq!(
            animat_sim_save_snapshot(half, path.as_ptr()),
            AnimatStatus::Ok
        );
        animat_sim_free(half);

        let mut resumed = ptr::null_mut();
        assert_eq!(
            animat_sim_load_snapshot(path.as_ptr(), &mut resumed),
            AnimatStatus::Ok
        );
        assert_eq!(animat_sim_iteration(resumed), 30);
        animat_sim_run(resumed, 30, ptr::null_mut());
        assert_eq!(animat_sim_population(resumed), animat_sim_population(full));
        let mut x = std::mem::zeroed::<AnimatAgent>();
        let mut y = std::mem::zeroed::<AnimatAgent>();
        let last = animat_sim_population(full) - 1;
        animat_sim_agent(full, last, &mut x);
        animat_sim_agent(resumed, last, &mut y);
        assert_eq!(
            (x.position, x.energy, x.weights),
            (y.position, y.energy, y.weights)
        );
        animat_sim_free(full);
        animat_sim_free(resumed);
    }
}

#[test]
fn errors_carry_a_status_and_a_message() {
    let mut out = ptr::null_mut();
    unsafe {
        let bad = CString::new("n_cells = 0\nmutation_intensity = -1\n").unwrap();
        assert_eq!(
            animat_sim_new(bad.as_ptr(), 0, &mut out),
            AnimatStatus::InvalidConfig
        );
        assert!(out.is_null());
        let msg = last_error();
        assert!(
            msg.contains("n_cells") && msg.contains("mutation_intensity"),
            "{msg}"
        );

        assert_eq!(
            animat_sim_new(ptr::null(), 0, ptr::null_mut()),
            AnimatStatus::NullPointer
        );
        assert_eq!(
            animat_sim_step(ptr::null_mut(), ptr::null_mut()),
            AnimatStatus::NullPointer
        );

        let missing = CString::new("/nonexistent/dir/snap.txt").unwrap();
        assert_eq!(
            animat_sim_load_snapshot(missing.as_ptr(), &mut out),
            AnimatStatus::Io
        );

        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.txt");
        std::fs::write(&p, "animat-snapshot 99\n").unwrap();
        let p = CString::new(p.to_str().unwrap()).unwrap();
        assert_eq!(
            animat_sim_load_snapshot(p.as_ptr(), &mut out),
            AnimatStatus::InvalidSnapshot
        );

        let s = sim(SMALL, 1);
        let mut a = std::mem::zeroed::<AnimatAgent>();
        assert_eq!(
            animat_sim_agent(s, 10_000, &mut a),
            AnimatStatus::InvalidArgument
        );
        assert!(last_error().contains("out of range"));
        animat_sim_free(s);
        animat_sim_free(ptr::null_mut());
    }
}

#[test]
fn controller_and_analysis_entry_points() {
    let mut g = [0.0f64; 63];
    let mut x = [0.0f64; 9];
    let mut action = AnimatAction::Rest;
    unsafe {
        assert_eq!(animat_instinct_genome(g.as_mut_ptr()), AnimatStatus::Ok);
        x[1] = 1.0; // food here
        assert_eq!(
            animat_decide(g.as_ptr(), x.as_ptr(), &mut action),
            AnimatStatus::Ok
        );
        assert_eq!(action, AnimatAction::Eat);
        x[1] = 0.0;
        x[3] = 1.0; // neighbor on the left
        animat_decide(g.as_ptr(), x.as_ptr(), &mut action);
        assert_eq!(action, AnimatAction::MateLeft);

        let mut table = [AnimatAction::Rest; 128];
        assert_eq!(
            animat_probe_genome(g.as_ptr(), table.as_mut_ptr()),
            AnimatStatus::Ok
        );
        // pattern 0b11000 (both neighbors), every corner
        assert!(table[24 * 4..25 * 4]
            .iter()
            .all(|&a| a == AnimatAction::Jump));

        let mut c = std::mem::zeroed::<AnimatClassification>();
        assert_eq!(animat_classify_genome(g.as_ptr(), &mut c), AnimatStatus::Ok);
        assert_eq!(c.label, AnimatLabel::ReflexOnly);
        assert!(!c.mating_suppressed_when_hungry);

        g[0] = f64::NAN;
        assert_eq!(
            animat_decide(g.as_ptr(), x.as_ptr(), &mut action),
            AnimatStatus::InvalidArgument
        );

        let (mut m_e, mut m_r) = (0.0, 0.0);
        assert_eq!(
            animat_compute_motivations(2500.0, 10000.0, 5000.0, &mut m_e, &mut m_r),
            AnimatStatus::Ok
        );
        assert_eq!((m_e, m_r), (0.75, 0.5));
        assert_eq!(
            animat_compute_motivations(1.0, 0.0, 5000.0, &mut m_e, &mut m_r),
            AnimatStatus::InvalidArgument
        );
    }
    let v = unsafe { CStr::from_ptr(animat_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
