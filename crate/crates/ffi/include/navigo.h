#ifndef NAVIGO_H
#define NAVIGO_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum NavigoStatus {
  NAVIGO_STATUS_OK = 0,
  NAVIGO_STATUS_NULL_ARGUMENT = 1,
  NAVIGO_STATUS_INVALID_UTF8 = 2,
  // Unparseable or invalid scenario, or an invalid parameter value.
  NAVIGO_STATUS_CONFIG = 3,
  // The simulation itself failed.
  NAVIGO_STATUS_RUN = 4,
  // A Rust panic was caught at the boundary.
  NAVIGO_STATUS_PANIC = 5,
} NavigoStatus;

// Metrics of one finished run.
typedef struct NavigoReport NavigoReport;

// A loaded, validated scenario.
typedef struct NavigoScenario NavigoScenario;

// Headline numbers of a report. Ratios that are undefined for the run
// (nothing expressed, nothing satisfied) are NaN.
typedef struct NavigoSummary {
  uint64_t interests_expressed;
  uint64_t interests_satisfied;
  double success_rate;
  double user_satisfaction;
  double channel_accesses_per_satisfied;
  double infra_load;
  double infra_offload;
  double rtt_p95_ms;
  uint32_t max_faces_per_prefix;
  double mean_queue_depth;
} NavigoSummary;

// Message of the last failed call on this thread, or null. Valid until the
// next call into this library from the same thread.
const char *navigo_last_error(void);

// Library version as a static NUL-terminated string.
const char *navigo_version(void);

// Loads a scenario file; relative road and trace paths resolve against its
// directory.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum NavigoStatus navigo_scenario_load(const char *path, struct NavigoScenario **out);

// Builds the generated Manhattan grid scenario in memory: `rows` x `cols`
// junctions, `block_m` blocks, `n_cars` random-walking vehicles and one RSU
// at the centre. The same `seed` drives the mobility and the run.
//
// # Safety
// `out` must be a valid pointer.
enum NavigoStatus navigo_scenario_grid(uint32_t rows,
                                       uint32_t cols,
                                       double block_m,
                                       uint32_t n_cars,
                                       double duration_s,
                                       uint64_t seed,
                                       struct NavigoScenario **out);

// Frees a scenario. Null is ignored.
//
// # Safety
// `scenario` must come from this library and not be used afterwards.
void navigo_scenario_free(struct NavigoScenario *scenario);

// Sets the run seed.
//
// # Safety
// `scenario` must be a live handle.
enum NavigoStatus navigo_scenario_set_seed(struct NavigoScenario *scenario, uint64_t seed);

// Selects the forwarding strategy: `"navigo"` or `"flood"`.
//
// # Safety
// `scenario` must be a live handle and `name` a NUL-terminated string.
enum NavigoStatus navigo_scenario_set_strategy(struct NavigoScenario *scenario, const char *name);

// Sets the fraction of vehicles that act as consumers, in [0, 1].
//
// # Safety
// `scenario` must be a live handle.
enum NavigoStatus navigo_scenario_set_consumer_fraction(struct NavigoScenario *scenario,
                                                        double fraction);

// Runs the scenario to completion. The scenario is left untouched and can
// be run again.
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
enum NavigoStatus navigo_run(const struct NavigoScenario *scenario, struct NavigoReport **out);

// The full report as JSON, owned by the report.
//
// # Safety
// `report` must be a live handle or null.
const char *navigo_report_json(const struct NavigoReport *report);

// Fills `out` with the headline numbers of `report`.
//
// # Safety
// `report` must be a live handle and `out` a valid pointer.
enum NavigoStatus navigo_report_summary(const struct NavigoReport *report,
                                        struct NavigoSummary *out);

// Frees a report. Null is ignored.
//
// # Safety
// `report` must come from this library and not be used afterwards.
void navigo_report_free(struct NavigoReport *report);

#endif  /* NAVIGO_H */
