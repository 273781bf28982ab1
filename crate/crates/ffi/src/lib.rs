//! C ABI over `animat-core`.
//!
//! Simulations are opaque `AnimatSim` handles created by `animat_sim_new`
//! or `animat_sim_load_snapshot` and released with `animat_sim_free`. Every
//! fallible call returns an `AnimatStatus`; on failure the message is
//! available from `animat_last_error` on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use animat_core::analysis::{classify_genome, probe_agent, SchemeLabel, N_PROBES};
use animat_core::config::parse_config_str;
use animat_core::controller::decide;
use animat_core::evolution::instinct_genome;
use animat_core::model::{compute_motivations, Genome, PhysiologyParams, GENOME_LEN, N_INPUTS};
use animat_core::snapshot::{load_snapshot, save_snapshot, Snapshot, SnapshotError};
use animat_core::Simulation;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnimatStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    Io = 3,
    InvalidSnapshot = 4,
    InvalidArgument = 5,
    Panic = 6,
}

/// Same order as the controller's action neurons.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnimatAction {
    Rest = 0,
    MoveLeft = 1,
    MoveRight = 2,
    Jump = 3,
    Eat = 4,
    MateLeft = 5,
    MateRight = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnimatLabel {
    ReflexOnly = 0,
    MotivationGated = 1,
    Other = 2,
}

/// Opaque simulation handle.
pub struct AnimatSim {
    inner: Simulation,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AnimatStepRecord {
    pub t: u64,
    pub population: u64,
    pub births: u64,
    pub deaths: u64,
    pub grass_cells: u64,
    pub actions: [u64; 7],
    pub total_energy: f64,
    pub population_after: u64,
    pub energy_after: f64,
    pub ledger_imbalance: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AnimatAgent {
    pub position: u64,
    pub energy: f64,
    pub weights: [f64; 63],
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AnimatClassification {
    pub label: AnimatLabel,
    pub mating_suppressed_when_hungry: bool,
    pub rule_food_seeking: bool,
    pub rule_mating_on_neighbor: bool,
    pub rule_rest_on_empty: bool,
}

const _: () = assert!(GENOME_LEN == 63);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn guard<F: FnOnce() -> Result<(), (AnimatStatus, String)>>(f: F) -> AnimatStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AnimatStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside animat");
            AnimatStatus::Panic
        }
    }
}

fn null(what: &str) -> (AnimatStatus, String) {
    (AnimatStatus::NullPointer, format!("{what} is null"))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (AnimatStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        (
            AnimatStatus::InvalidArgument,
            format!("{what} is not UTF-8"),
        )
    })
}

unsafe fn genome_from(p: *const f64) -> Result<Genome, (AnimatStatus, String)> {
    if p.is_null() {
        return Err(null("weights"));
    }
    let g = Genome::from_slice(std::slice::from_raw_parts(p, GENOME_LEN)).unwrap();
    if !g.is_finite() {
        return Err((AnimatStatus::InvalidArgument, "non-finite weight".into()));
    }
    Ok(g)
}

fn snapshot_status(e: SnapshotError) -> (AnimatStatus, String) {
    let status = match e {
        SnapshotError::Io { .. } => AnimatStatus::Io,
        _ => AnimatStatus::InvalidSnapshot,
    };
    (status, e.to_string())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn animat_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn animat_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a fresh simulation from flat `key = value` config text (null for
/// defaults). `seed` overrides any seed in the text.
///
/// # Safety
/// `config_text` must be null or a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn animat_sim_new(
    config_text: *const c_char,
    seed: u64,
    out: *mut *mut AnimatSim,
) -> AnimatStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = if config_text.is_null() {
            ""
        } else {
            c_str(config_text, "config_text")?
        };
        let config = parse_config_str(text, &[("seed", seed.to_string())])
            .map_err(|e| (AnimatStatus::InvalidConfig, e.to_string()))?;
        let sim = Box::new(AnimatSim {
            inner: Simulation::new(config),
        });
        *out = Box::into_raw(sim);
        Ok(())
    })
}

/// # Safety
/// `path` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn animat_sim_load_snapshot(
    path: *const c_char,
    out: *mut *mut AnimatSim,
) -> AnimatStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = PathBuf::from(c_str(path, "path")?);
        let snap = load_snapshot(&path).map_err(snapshot_status)?;
        *out = Box::into_raw(Box::new(AnimatSim {
            inner: snap.into_simulation(),
        }));
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle; `path` a valid C string.
#[no_mangle]
pub unsafe extern "C" fn animat_sim_save_snapshot(
    sim: *const AnimatSim,
    path: *const c_char,
) -> AnimatStatus {
    guard(|| {
        let sim = sim.as_ref().ok_or_else(|| null("sim"))?;
        let path = PathBuf::from(c_str(path, "path")?);
        save_snapshot(&Snapshot::capture(&sim.inner), &path).map_err(snapshot_status)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `sim` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn animat_sim_free(sim: *mut AnimatSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances one iteration regardless of `max_iterations`. `record` may be null.
///
/// # Safety
/// `sim` must be a live handle; `record` null or writable.
#[no_mangle]
pub unsafe extern "C" fn animat_sim_step(
    sim: *mut AnimatSim,
    record: *mut AnimatStepRecord,
) -> AnimatStatus {
    guard(|| {
        let sim = sim.as_mut().ok_or_else(|| null("sim"))?;
        let rec = sim.inner.step();
        if let Some(out) = record.as_mut() {
            *out = AnimatStepRecord {
                t: rec.t,
                population: rec.population as u64,
                births: rec.births as u64,
                deaths: rec.deaths as u64,
                grass_cells: rec.grass_cells as u64,
                actions: rec.actions,
                total_energy: rec.total_energy,
                population_after: rec.population_after as u64,
                energy_after: rec.energy_after,
                ledger_imbalance: rec.ledger_imbalance(),
            };
        }
        Ok(())
    })
}

/// Steps until extinction, `max_iterations`, or `max_steps` calls, whichever
/// comes first; writes the number of iterations executed to `steps_run`.
///
/// # Safety
/// `sim` must be a live handle; `steps_run` null or writable.
#[no_mangle]
pub unsafe extern "C" fn animat_sim_run(
    sim: *mut AnimatSim,
    max_steps: u64,
    steps_run: *mut u64,
) -> AnimatStatus {
    guard(|| {
        let sim = sim.as_mut().ok_or_else(|| null("sim"))?;
        let mut n = 0;
        while n < max_steps && !sim.inner.is_finished() {
            sim.inner.step();
            n += 1;
        }
        if let Some(out) = steps_run.as_mut() {
            *out = n;
        }
        Ok(())
    })
}

/// Number of live agents; 0 for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn animat_sim_population(sim: *const AnimatSim) -> usize {
    sim.as_ref().map_or(0, |s| s.inner.world.agents.len())
}

/// Index of the next iteration to run; 0 for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn animat_sim_iteration(sim: *const AnimatSim) -> u64 {
    sim.as_ref().map_or(0, |s| s.inner.t)
}

/// # Safety
/// `sim` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn animat_sim_agent(
    sim: *const AnimatSim,
    index: usize,
    out: *mut AnimatAgent,
) -> AnimatStatus {
    guard(|| {
        let sim = sim.as_ref().ok_or_else(|| null("sim"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let agents = &sim.inner.world.agents;
        let a = agents.get(index).ok_or_else(|| {
            (
                AnimatStatus::InvalidArgument,
                format!("agent index {index} out of range ({} agents)", agents.len()),
            )
        })?;
        *out = AnimatAgent {
            position: a.position as u64,
            energy: a.energy,
            weights: a.genome.0,
        };
        Ok(())
    })
}

/// Motivations for resource `energy` given `r0` and `r1`.
///
/// # Safety
/// `m_e` and `m_r` must be writable.
#[no_mangle]
pub unsafe extern "C" fn animat_compute_motivations(
    energy: f64,
    r0: f64,
    r1: f64,
    m_e: *mut f64,
    m_r: *mut f64,
) -> AnimatStatus {
    guard(|| {
        if m_e.is_null() || m_r.is_null() {
            return Err(null("output"));
        }
        if !(r0 > 0.0 && r1 > 0.0) || energy.is_nan() {
            return Err((
                AnimatStatus::InvalidArgument,
                "r0 and r1 must be positive".into(),
            ));
        }
        let phys = PhysiologyParams {
            r0,
            r1,
            ..Default::default()
        };
        let m = compute_motivations(energy, &phys);
        *m_e = m.m_e;
        *m_r = m.m_r;
        Ok(())
    })
}

/// Writes the 63 founder weights to `out`.
///
/// # Safety
/// `out` must point to 63 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn animat_instinct_genome(out: *mut f64) -> AnimatStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        std::slice::from_raw_parts_mut(out, GENOME_LEN).copy_from_slice(&instinct_genome().0);
        Ok(())
    })
}

/// Action chosen by `weights` (63 doubles) for `inputs` (9 doubles).
///
/// # Safety
/// Both pointers must reference arrays of the stated length; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn animat_decide(
    weights: *const f64,
    inputs: *const f64,
    out: *mut AnimatAction,
) -> AnimatStatus {
    guard(|| {
        let g = genome_from(weights)?;
        if inputs.is_null() {
            return Err(null("inputs"));
        }
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let x: [f64; N_INPUTS] = std::slice::from_raw_parts(inputs, N_INPUTS)
            .try_into()
            .unwrap();
        *out = to_c_action(decide(&g, &x));
        Ok(())
    })
}

fn to_c_action(a: animat_core::Action) -> AnimatAction {
    use animat_core::Action as A;
    match a {
        A::Rest => AnimatAction::Rest,
        A::MoveLeft => AnimatAction::MoveLeft,
        A::MoveRight => AnimatAction::MoveRight,
        A::Jump => AnimatAction::Jump,
        A::Eat => AnimatAction::Eat,
        A::MateLeft => AnimatAction::MateLeft,
        A::MateRight => AnimatAction::MateRight,
    }
}

/// Fills `out` (128 entries) with the behavior table of `weights`. Row
/// `pattern * 4 + (m_e << 1 | m_r)`; pattern bits 0..5 are food_left,
/// food_here, food_right, agent_left, agent_right.
///
/// # Safety
/// `weights` must reference 63 doubles; `out` 128 writable entries.
#[no_mangle]
pub unsafe extern "C" fn animat_probe_genome(
    weights: *const f64,
    out: *mut AnimatAction,
) -> AnimatStatus {
    guard(|| {
        let g = genome_from(weights)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let table = probe_agent(&g);
        let out = std::slice::from_raw_parts_mut(out, N_PROBES);
        for (slot, a) in out.iter_mut().zip(table.actions) {
            *slot = to_c_action(a);
        }
        Ok(())
    })
}

/// # Safety
/// `weights` must reference 63 doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn animat_classify_genome(
    weights: *const f64,
    out: *mut AnimatClassification,
) -> AnimatStatus {
    guard(|| {
        let g = genome_from(weights)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let c = classify_genome(&g);
        *out = AnimatClassification {
            label: match c.label {
                SchemeLabel::ReflexOnly => AnimatLabel::ReflexOnly,
                SchemeLabel::MotivationGated => AnimatLabel::MotivationGated,
                SchemeLabel::Other => AnimatLabel::Other,
            },
            mating_suppressed_when_hungry: c.mating_suppressed_when_hungry,
            rule_food_seeking: c.rules.food_seeking,
            rule_mating_on_neighbor: c.rules.mating_on_neighbor,
            rule_rest_on_empty: c.rules.rest_on_empty,
        };
        Ok(())
    })
}
