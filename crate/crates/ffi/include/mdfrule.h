#ifndef MDFRULE_H
#define MDFRULE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MdfStatus {
  MDF_STATUS_OK = 0,
  MDF_STATUS_NULL_POINTER = 1,
  MDF_STATUS_INVALID_UTF8 = 2,
  /**
   * An argument broke a documented constraint.
   */
  MDF_STATUS_INVALID_INPUT = 3,
  /**
   * No infoset with that name, or action index out of range.
   */
  MDF_STATUS_NOT_FOUND = 4,
  MDF_STATUS_INTERNAL = 5,
} MdfStatus;

/**
 * A validated game and its betting tree.
 */
typedef struct MdfGame MdfGame;

/**
 * Result of solving an [`MdfGame`].
 */
typedef struct MdfReport MdfReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next `mdf_` call on the same thread.
 */
const char *mdf_last_error(void);

/**
 * Parse a game spec (`{"n", "p", "q", "pot", "stack", "p1_bets", "p2_bets"}`)
 * and build its tree.
 */
enum MdfStatus mdf_game_from_json(const char *json, struct MdfGame **out);

void mdf_game_free(struct MdfGame *game);

enum MdfStatus mdf_game_num_infosets(const struct MdfGame *game, size_t *out);

/**
 * Solve `game`. `max_iterations == 0` and `target <= 0` select the defaults
 * (10000 iterations, 0.001 * pot).
 */
enum MdfStatus mdf_solve(const struct MdfGame *game,
                         uint32_t max_iterations,
                         double target,
                         struct MdfReport **out);

void mdf_report_free(struct MdfReport *report);

enum MdfStatus mdf_report_exploitability(const struct MdfReport *report, double *out);

/**
 * Player 1's expected payoff under the average profile.
 */
enum MdfStatus mdf_report_game_value(const struct MdfReport *report, double *out);

enum MdfStatus mdf_report_iterations(const struct MdfReport *report, uint32_t *out);

/**
 * Probability of action `action` at the infoset named like `P2/facing_bet0/card5`.
 */
enum MdfStatus mdf_report_prob(const struct MdfReport *report,
                               const char *infoset,
                               size_t action,
                               double *out);

/**
 * Full report as JSON. Release the string with [`mdf_string_free`].
 */
enum MdfStatus mdf_report_to_json(const struct MdfReport *report, char **out);

void mdf_string_free(char *s);

/**
 * Minimum defense frequency `pot / (bet + pot)`.
 */
enum MdfStatus mdf_mdf(double pot, double bet, double *out);

/**
 * Player 1's showdown equity with card distribution `p` against player 2's
 * `q`. Both have length `n`, lowest rank first.
 */
enum MdfStatus mdf_range_advantage(const double *p, const double *q, size_t n, double *out);

/**
 * The 100-50-25 MIN calling rule, `min(mdf, mdf - ra / 2 + 1 / 4)`.
 */
enum MdfStatus mdf_rule_100_50_25(double mdf, double ra, double *out);

/**
 * `min(mdf, mdf - s / 4)` with signed range advantage `s` in [-1, 1].
 */
enum MdfStatus mdf_rule_signed(double mdf, double ra_signed, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MDFRULE_H */
