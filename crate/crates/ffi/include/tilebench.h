#ifndef TILEBENCH_H
#define TILEBENCH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TbMetric {
  TB_METRIC_P1_SCORE = 0,
  TB_METRIC_DIFF = 1,
} TbMetric;

typedef enum TbStatus {
  TB_STATUS_OK = 0,
  TB_STATUS_NULL_ARGUMENT = 1,
  TB_STATUS_INVALID_UTF8 = 2,
  TB_STATUS_IO = 3,
  TB_STATUS_INVALID_INPUT = 4,
  TB_STATUS_UNDEFINED_ESTIMATE = 5,
  TB_STATUS_INTERRUPTED = 6,
  TB_STATUS_OUT_OF_RANGE = 7,
  TB_STATUS_PANIC = 8,
} TbStatus;

typedef struct TbLexicon TbLexicon;

typedef struct TbOutcomeTable TbOutcomeTable;

typedef struct TbRuleset TbRuleset;

// Experiment settings; start from `tb_experiment_config_default()`.
typedef struct TbExperimentConfig {
  uint64_t n_orders;
  uint64_t replicates_per_order;
  uint64_t master_seed;
  uint32_t workers;
  bool audit;
  // Applied to both players.
  double perturbation_half_width;
  double exchange_threshold;
  double openness_weight;
} TbExperimentConfig;

typedef struct TbGameSummary {
  uint64_t order_id;
  uint64_t replicate_id;
  uint64_t seed;
  int32_t p1_score;
  int32_t p2_score;
  int32_t diff;
  uint32_t turns;
  uint32_t bingos[2];
  // 1-based positions of the blanks in the tile order, 0 when absent.
  uint16_t blank_positions[2];
  uint32_t audit_violations;
} TbGameSummary;

// Fractions are NaN when undefined.
typedef struct TbDecomposition {
  size_t n_orders;
  size_t replicates;
  double ss_total;
  double ss_between;
  double ss_within;
  double between_fraction_naive;
  double between_fraction_anova;
} TbDecomposition;

typedef struct TbAdvantage {
  size_t games;
  size_t clusters;
  double mean_diff;
  double std_error;
  double ci_low;
  double ci_high;
} TbAdvantage;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty if none. Valid
// until the next failing call on the same thread.
const char *tb_last_error(void);

// Library version as a static NUL-terminated string.
const char *tb_version(void);

// The bundled word list.
//
// # Safety
// `out` must be valid for writes.
enum TbStatus tb_lexicon_bundled(struct TbLexicon **out);

// Opens a compiled lexicon or a plain word list.
//
// # Safety
// `path` must be a NUL-terminated string and `out` valid for writes.
enum TbStatus tb_lexicon_open(const char *path, struct TbLexicon **out);

// # Safety
// `lexicon` must come from this library; `word` must be NUL-terminated and
// `out` valid for writes.
enum TbStatus tb_lexicon_contains(const struct TbLexicon *lexicon, const char *word, bool *out);

// # Safety
// `lexicon` must come from this library or be null.
uint64_t tb_lexicon_word_count(const struct TbLexicon *lexicon);

// # Safety
// `lexicon` must come from this library or be null; it is invalid afterwards.
void tb_lexicon_free(struct TbLexicon *lexicon);

// A bundled ruleset name ("scrabble", "wwf") or a ruleset file path.
//
// # Safety
// `name_or_path` must be NUL-terminated and `out` valid for writes.
enum TbStatus tb_ruleset_open(const char *name_or_path, struct TbRuleset **out);

// # Safety
// `ruleset` must come from this library or be null.
size_t tb_ruleset_tile_total(const struct TbRuleset *ruleset);

// # Safety
// `ruleset` must come from this library or be null.
int32_t tb_ruleset_bingo_bonus(const struct TbRuleset *ruleset);

// # Safety
// `ruleset` must come from this library or be null; it is invalid afterwards.
void tb_ruleset_free(struct TbRuleset *ruleset);

struct TbExperimentConfig tb_experiment_config_default(void);

// Runs an experiment. With a non-null `output` path the table, its
// metadata and the tile orders are written there, and an interrupted run
// with the same settings resumes.
//
// # Safety
// Handles must come from this library, `config` must be readable, `output`
// null or NUL-terminated, and `out` valid for writes.
enum TbStatus tb_experiment_run(const struct TbRuleset *ruleset,
                                const struct TbLexicon *lexicon,
                                const struct TbExperimentConfig *config,
                                const char *output,
                                struct TbOutcomeTable **out);

// # Safety
// `path` must be NUL-terminated and `out` valid for writes.
enum TbStatus tb_outcome_table_read(const char *path, struct TbOutcomeTable **out);

// # Safety
// `table` must come from this library and `path` be NUL-terminated.
enum TbStatus tb_outcome_table_write(const struct TbOutcomeTable *table, const char *path);

// # Safety
// `table` must come from this library or be null.
size_t tb_outcome_table_len(const struct TbOutcomeTable *table);

// Game `index` in (order, replicate) order.
//
// # Safety
// `table` must come from this library and `out` be valid for writes.
enum TbStatus tb_outcome_table_get(const struct TbOutcomeTable *table,
                                   size_t index,
                                   struct TbGameSummary *out);

// # Safety
// `table` must come from this library or be null; it is invalid afterwards.
void tb_outcome_table_free(struct TbOutcomeTable *table);

// Between/within variance decomposition of `metric` across tile orders.
//
// # Safety
// `table` must come from this library and `out` be valid for writes.
enum TbStatus tb_decompose(const struct TbOutcomeTable *table,
                           enum TbMetric metric,
                           struct TbDecomposition *out);

// Mean first-player score difference with a 95% interval clustered by order.
//
// # Safety
// `table` must come from this library and `out` be valid for writes.
enum TbStatus tb_first_player_advantage(const struct TbOutcomeTable *table,
                                        struct TbAdvantage *out);

// Points of `metric` per extra copy of `letter` drawn by player 1; `'?'`
// is the blank.
//
// # Safety
// `table` must come from this library; `slope` and `std_error` must be
// valid for writes.
enum TbStatus tb_tile_effect(const struct TbOutcomeTable *table,
                             char letter,
                             enum TbMetric metric,
                             double *slope,
                             double *std_error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TILEBENCH_H */
