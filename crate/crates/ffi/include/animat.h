#ifndef ANIMAT_H
#define ANIMAT_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Same order as the controller's action neurons.
 */
typedef enum AnimatAction {
  ANIMAT_ACTION_REST = 0,
  ANIMAT_ACTION_MOVE_LEFT = 1,
  ANIMAT_ACTION_MOVE_RIGHT = 2,
  ANIMAT_ACTION_JUMP = 3,
  ANIMAT_ACTION_EAT = 4,
  ANIMAT_ACTION_MATE_LEFT = 5,
  ANIMAT_ACTION_MATE_RIGHT = 6,
} AnimatAction;

typedef enum AnimatLabel {
  ANIMAT_LABEL_REFLEX_ONLY = 0,
  ANIMAT_LABEL_MOTIVATION_GATED = 1,
  ANIMAT_LABEL_OTHER = 2,
} AnimatLabel;

typedef enum AnimatStatus {
  ANIMAT_STATUS_OK = 0,
  ANIMAT_STATUS_NULL_POINTER = 1,
  ANIMAT_STATUS_INVALID_CONFIG = 2,
  ANIMAT_STATUS_IO = 3,
  ANIMAT_STATUS_INVALID_SNAPSHOT = 4,
  ANIMAT_STATUS_INVALID_ARGUMENT = 5,
  ANIMAT_STATUS_PANIC = 6,
} AnimatStatus;

/**
 * Opaque simulation handle.
 */
typedef struct AnimatSim AnimatSim;

typedef struct AnimatStepRecord {
  uint64_t t;
  uint64_t population;
  uint64_t births;
  uint64_t deaths;
  uint64_t grass_cells;
  uint64_t actions[7];
  double total_energy;
  uint64_t population_after;
  double energy_after;
  double ledger_imbalance;
} AnimatStepRecord;

typedef struct AnimatAgent {
  uint64_t position;
  double energy;
  double weights[63];
} AnimatAgent;

typedef struct AnimatClassification {
  enum AnimatLabel label;
  bool mating_suppressed_when_hungry;
  bool rule_food_seeking;
  bool rule_mating_on_neighbor;
  bool rule_rest_on_empty;
} AnimatClassification;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *animat_last_error(void);

const char *animat_version(void);

/**
 * Creates a fresh simulation from flat `key = value` config text (null for
 * defaults). `seed` overrides any seed in the text.
 *
 * # Safety
 * `config_text` must be null or a valid C string; `out` must be writable.
 */
enum AnimatStatus animat_sim_new(const char *config_text, uint64_t seed, struct AnimatSim **out);

/**
 * # Safety
 * `path` must be a valid C string; `out` must be writable.
 */
enum AnimatStatus animat_sim_load_snapshot(const char *path, struct AnimatSim **out);

/**
 * # Safety
 * `sim` must be a live handle; `path` a valid C string.
 */
enum AnimatStatus animat_sim_save_snapshot(const struct AnimatSim *sim, const char *path);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `sim` must be null or a handle not yet freed.
 */
void animat_sim_free(struct AnimatSim *sim);

/**
 * Advances one iteration regardless of `max_iterations`. `record` may be null.
 *
 * # Safety
 * `sim` must be a live handle; `record` null or writable.
 */
enum AnimatStatus animat_sim_step(struct AnimatSim *sim, struct AnimatStepRecord *record);

/**
 * Steps until extinction, `max_iterations`, or `max_steps` calls, whichever
 * comes first; writes the number of iterations executed to `steps_run`.
 *
 * # Safety
 * `sim` must be a live handle; `steps_run` null or writable.
 */
enum AnimatStatus animat_sim_run(struct AnimatSim *sim, uint64_t max_steps, uint64_t *steps_run);

/**
 * Number of live agents; 0 for a null handle.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
size_t animat_sim_population(const struct AnimatSim *sim);

/**
 * Index of the next iteration to run; 0 for a null handle.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
uint64_t animat_sim_iteration(const struct AnimatSim *sim);

/**
 * # Safety
 * `sim` must be a live handle; `out` writable.
 */
enum AnimatStatus animat_sim_agent(const struct AnimatSim *sim,
                                   size_t index,
                                   struct AnimatAgent *out);

/**
 * Motivations for resource `energy` given `r0` and `r1`.
 *
 * # Safety
 * `m_e` and `m_r` must be writable.
 */
enum AnimatStatus animat_compute_motivations(double energy,
                                             double r0,
                                             double r1,
                                             double *m_e,
                                             double *m_r);

/**
 * Writes the 63 founder weights to `out`.
 *
 * # Safety
 * `out` must point to 63 writable doubles.
 */
enum AnimatStatus animat_instinct_genome(double *out);

/**
 * Action chosen by `weights` (63 doubles) for `inputs` (9 doubles).
 *
 * # Safety
 * Both pointers must reference arrays of the stated length; `out` writable.
 */
enum AnimatStatus animat_decide(const double *weights,
                                const double *inputs,
                                enum AnimatAction *out);

/**
 * Fills `out` (128 entries) with the behavior table of `weights`. Row
 * `pattern * 4 + (m_e << 1 | m_r)`; pattern bits 0..5 are food_left,
 * food_here, food_right, agent_left, agent_right.
 *
 * # Safety
 * `weights` must reference 63 doubles; `out` 128 writable entries.
 */
enum AnimatStatus animat_probe_genome(const double *weights, enum AnimatAction *out);

/**
 * # Safety
 * `weights` must reference 63 doubles; `out` writable.
 */
enum AnimatStatus animat_classify_genome(const double *weights, struct AnimatClassification *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANIMAT_H */
