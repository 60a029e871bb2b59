/* Quantifier elimination over the reals: C interface.
 *
 * An engine holds a configuration; each run parses one problem in the
 * s-expression grammar and produces an immutable result object. Engines and
 * results are not thread-safe individually, but independent engines may run
 * concurrently.
 */
#ifndef QELIM_H
#define QELIM_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qe_status {
  QE_OK = 0,
  QE_ERROR = 1,       /* internal failure, see qe_last_error */
  QE_PARSE_ERROR = 2, /* input not in the formula grammar */
  QE_TIMEOUT = 3,     /* configured time budget exhausted */
  QE_UNVERIFIED = 4,  /* run finished but the result carries no guarantee
                         (multiple-EC mode); a result object IS produced */
  QE_BAD_OPTION = 5,  /* unknown option key or malformed value */
  QE_UNSUPPORTED = 6  /* input or requested output outside the engine's scope */
} qe_status;

typedef struct qe_engine qe_engine;
typedef struct qe_result qe_result;

qe_engine *qe_engine_new(void);
void qe_engine_free(qe_engine *e);

/* Configure one option. Keys mirror the command-line flags:
 *   "mode"            poly | whole | vts | cad
 *   "ordering"        brown | sotd | ndrr | greedy | ec | user:<v1,v2,...>
 *   "traversal"       depth | breadth
 *   "ec"              off | single | multiple-unsafe
 *   "share-threshold" decimal in [0,1]
 *   "groebner"        on | off
 *   "witness"         on | off
 *   "timeout"         seconds, decimal, 0 disables
 *   "output"          tarski | extended
 * Returns QE_OK or QE_BAD_OPTION.
 */
qe_status qe_engine_set(qe_engine *e, const char *key, const char *value);

/* Eliminate quantifiers from the problem given as formula text. On QE_OK and
 * QE_UNVERIFIED *out receives a result object the caller must free; on any
 * other status *out is NULL and qe_last_error describes the failure.
 */
qe_status qe_run(qe_engine *e, const char *problem, qe_result **out);
qe_status qe_run_file(qe_engine *e, const char *path, qe_result **out);

/* Message for the most recent failing call on this engine. Owned by the
 * engine, valid until the next call or qe_engine_free.
 */
const char *qe_last_error(const qe_engine *e);

/* Quantifier-free result in the requested output grammar. */
const char *qe_result_formula(const qe_result *r);

/* Statistics of the run as a JSON object. */
const char *qe_result_stats_json(const qe_result *r);

/* Verified sample point as one (var value) pair per line, algebraic values
 * rendered as (alg poly lo hi). NULL when the run produced no witness.
 */
const char *qe_result_witness(const qe_result *r);

/* Nonzero when the result was computed without the usual guarantee. */
int qe_result_unverified(const qe_result *r);

void qe_result_free(qe_result *r);

#ifdef __cplusplus
}
#endif

#endif
