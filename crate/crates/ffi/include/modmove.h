#ifndef MODMOVE_H
#define MODMOVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define MODMOVE_CRITERION_SIMILARITY 1

#define MODMOVE_CRITERION_COHESION 2

#define MODMOVE_CRITERION_COUPLING 4

#define MODMOVE_COMBINE_UNION 0

#define MODMOVE_COMBINE_INTERSECTION 1

/*
 Result of every fallible call.
 */
typedef enum ModmoveStatus {
  MODMOVE_STATUS_OK = 0,
  /*
   A required pointer argument was NULL.
   */
  MODMOVE_STATUS_NULL = 1,
  MODMOVE_STATUS_PARSE = 2,
  MODMOVE_STATUS_VALIDATION = 3,
  MODMOVE_STATUS_IO = 4,
  MODMOVE_STATUS_INVALID_ARGUMENT = 64,
  /*
   The library panicked; the call had no effect.
   */
  MODMOVE_STATUS_PANIC = 70,
} ModmoveStatus;

/*
 Metrics computed for one system.
 */
typedef struct ModmoveReport ModmoveReport;

/*
 A validated system: classes, members and dependencies.
 */
typedef struct ModmoveSystem ModmoveSystem;

typedef struct ModmoveGeneratorConfig {
  uintptr_t n_classes;
  uintptr_t n_methods;
  uintptr_t n_attributes;
  uintptr_t max_calls_per_method;
  uintptr_t max_accesses_per_method;
  double intra_class_bias;
  uint64_t seed;
} ModmoveGeneratorConfig;

typedef struct ModmoveWorkload {
  uint64_t m;
  uint64_t c;
  uint64_t k_m;
  uint64_t k_a;
  uint64_t n_fan;
  uint64_t n_sim;
  uint64_t n_lcom;
  uint64_t n_cbo;
  uint64_t n_total;
} ModmoveWorkload;

typedef struct ModmoveMoveEffect {
  double lcom_origin_before;
  double lcom_origin_after;
  double lcom_dest_before;
  double lcom_dest_after;
  uint32_t cbo_origin_before;
  uint32_t cbo_origin_after;
  uint32_t cbo_dest_before;
  uint32_t cbo_dest_after;
  bool origin_emptied;
} ModmoveMoveEffect;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the most recent failed call on this thread, or NULL after a
 successful call. The pointer stays valid until the next call on the same
 thread.
 */
const char *modmove_last_error(void);

/*
 Releases a string returned by this library. NULL is ignored.

 # Safety
 `s` is NULL or a string returned through an out-parameter of this library
 that has not been freed.
 */
void modmove_string_free(char *s);

/*
 Reads and validates a facts file.

 # Safety
 `path` is a NUL-terminated string; `out` is writable.
 */
enum ModmoveStatus modmove_system_load(const char *path, struct ModmoveSystem **out);

/*
 Parses and validates facts JSON held in memory.

 # Safety
 `json` is a NUL-terminated string; `out` is writable.
 */
enum ModmoveStatus modmove_system_parse(const char *json, struct ModmoveSystem **out);

struct ModmoveGeneratorConfig modmove_generator_config_default(void);

/*
 Generates a synthetic system; the same configuration always yields the
 same system.

 # Safety
 `config` points to a readable configuration; `out` is writable.
 */
enum ModmoveStatus modmove_system_generate(const struct ModmoveGeneratorConfig *config,
                                           struct ModmoveSystem **out);

/*
 Destroys a system. NULL is ignored.

 # Safety
 `system` is NULL or a handle from this library that has not been freed.
 */
void modmove_system_free(struct ModmoveSystem *system);

/*
 Class, method and attribute counts. Any output pointer may be NULL.

 # Safety
 `system` is a live handle; non-NULL outputs are writable.
 */
enum ModmoveStatus modmove_system_counts(const struct ModmoveSystem *system,
                                         uintptr_t *classes,
                                         uintptr_t *methods,
                                         uintptr_t *attributes);

/*
 The system as canonical facts JSON.

 # Safety
 `system` is a live handle; `out` is writable.
 */
enum ModmoveStatus modmove_system_to_json(const struct ModmoveSystem *system, char **out);

/*
 Worst-case count of metric values for the system.

 # Safety
 `system` is a live handle; `out` is writable.
 */
enum ModmoveStatus modmove_system_workload(const struct ModmoveSystem *system,
                                           struct ModmoveWorkload *out);

/*
 Computes every metric. `workers` 0 selects the sequential engine; any
 other value runs the parallel engine with that many workers. Both give
 identical reports.

 # Safety
 `system` is a live handle; `out` is writable.
 */
enum ModmoveStatus modmove_analyze(const struct ModmoveSystem *system,
                                   uintptr_t workers,
                                   struct ModmoveReport **out);

/*
 Destroys a report. NULL is ignored.

 # Safety
 `report` is NULL or a handle from this library that has not been freed.
 */
void modmove_report_free(struct ModmoveReport *report);

/*
 The report as canonical JSON, byte-identical to `modmove analyze`.

 # Safety
 `report` is a live handle; `out` is writable.
 */
enum ModmoveStatus modmove_report_to_json(const struct ModmoveReport *report, char **out);

/*
 Normalized LCOM of one class.

 # Safety
 `report` is a live handle; `out` is writable.
 */
enum ModmoveStatus modmove_report_lcom(const struct ModmoveReport *report,
                                       uint32_t class_id,
                                       double *out);

/*
 CBO of one class.

 # Safety
 `report` is a live handle; `out` is writable.
 */
enum ModmoveStatus modmove_report_cbo(const struct ModmoveReport *report,
                                      uint32_t class_id,
                                      uint32_t *out);

/*
 Number of stored (nonzero) method-pair similarities.

 # Safety
 `report` is a live handle; `out` is writable.
 */
enum ModmoveStatus modmove_report_similarity_count(const struct ModmoveReport *report,
                                                   uintptr_t *out);

/*
 LCOM and CBO of origin and destination if `method` moved from `origin`
 to `destination`. The system is not modified.

 # Safety
 `system` is a live handle; `out` is writable.
 */
enum ModmoveStatus modmove_what_if_move(const struct ModmoveSystem *system,
                                        uint32_t method,
                                        uint32_t origin,
                                        uint32_t destination,
                                        struct ModmoveMoveEffect *out);

/*
 Move suggestions as canonical JSON, using mean thresholds.

 `criteria` is a bit set of `MODMOVE_CRITERION_*`; `combine` is one of
 `MODMOVE_COMBINE_*`; `workers` must be at least 1. `report` must have been
 computed from `system`.

 # Safety
 `system` and `report` are live handles; `out` is writable.
 */
enum ModmoveStatus modmove_suggest_json(const struct ModmoveSystem *system,
                                        const struct ModmoveReport *report,
                                        uint32_t criteria,
                                        uint32_t combine,
                                        uintptr_t workers,
                                        char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MODMOVE_H */
