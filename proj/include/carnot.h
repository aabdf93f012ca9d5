#ifndef CARNOT_H
#define CARNOT_H

/* C interface to the carnot library: group arithmetic plus the experiment
 * runner behind the CLI. Every function returns a carnot_code; on failure
 * carnot_last_error() describes what went wrong for the calling thread. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum carnot_code {
  CARNOT_OK = 0,
  CARNOT_ERR_CONFIG = 2,       /* bad id, bad config key, bad dimensions */
  CARNOT_ERR_PRECONDITION = 3, /* map fails the filtration gate */
  CARNOT_ERR_GATE = 4,         /* experiment ran, verdict failed */
  CARNOT_ERR_FORMAT = 5,       /* unparsable group or grid file */
  CARNOT_ERR_DOMAIN = 6,       /* invalid algebra, escape, bad margins */
  CARNOT_ERR_INTERNAL = 7
} carnot_code;

/* Message from the most recent failing call on this thread; empty string
 * after a success. The pointer stays valid until the next call. */
const char* carnot_last_error(void);

/* Frees any buffer an out_text parameter returned. */
void carnot_free(char* p);

/* ---- groups ------------------------------------------------------------ */

typedef struct carnot_group carnot_group;

/* spec is a builtin id ("heisenberg", "heisenberg(2)", "engel",
 * "free_nilpotent(2,3)", "abelian(3)", "abelian(1,1,2)") or a path to a
 * bracket table file (contains '/' or ends in ".group"). */
carnot_code carnot_group_open(const char* spec, carnot_group** out);
void carnot_group_close(carnot_group* g);

int carnot_group_dim(const carnot_group* g);
int carnot_group_step(const carnot_group* g);
int carnot_group_hom_dim(const carnot_group* g);
/* weight of coordinate i, 0-based; 0 if i is out of range */
int carnot_group_weight(const carnot_group* g, int i);

/* x, y, out are buffers of carnot_group_dim(g) doubles; out must not alias
 * the inputs. */
carnot_code carnot_group_multiply(const carnot_group* g, const double* x, const double* y,
                                  double* out);
carnot_code carnot_group_inverse(const carnot_group* g, const double* x, double* out);
carnot_code carnot_group_dilate(const carnot_group* g, double r, const double* x, double* out);
carnot_code carnot_group_quasi_norm(const carnot_group* g, const double* x, double* out);

/* The synthesized law, one coordinate per line. *out_text is malloc'd; free
 * it with carnot_free. */
carnot_code carnot_group_law_text(const carnot_group* g, char** out_text);

/* ---- runner ------------------------------------------------------------ */

/* Runs one subcommand (group-info, law, pansu-check, pansu-probe, quantize,
 * invariance) against a config given as "key = value" lines ('#' comments,
 * later keys win; NULL or "" means all defaults). On CARNOT_OK and
 * CARNOT_ERR_GATE *out_text receives the text product (report or CSV),
 * malloc'd, free with carnot_free; on other codes it is set to NULL. */
carnot_code carnot_run(const char* subcommand, const char* config, char** out_text);

#ifdef __cplusplus
}
#endif

#endif /* CARNOT_H */
