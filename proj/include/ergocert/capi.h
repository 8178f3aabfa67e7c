/*
 * Copyright 2026 The ergocert Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C API of the ergocert shared library.
 *
 * All functionality is reached through ec_run(command, config_json), which
 * executes one pipeline command against a JSON run configuration and
 * returns an opaque result handle carrying a status, a JSON report and an
 * error message.  Reports and CSV tables are also written under the
 * configured output directory.  The library never writes to stdout/stderr.
 *
 * Status values double as process exit codes:
 *   0  success
 *   2  configuration / input error (I/O, parse, invalid argument)
 *   3  certification assumption infeasible on the supplied model
 *   4  a certified bound was violated numerically (implementation bug
 *      or broken certificate; treated as build-failing)
 *   5  numerical non-convergence or a singular linear system
 */

#ifndef ERGOCERT_CAPI_H
#define ERGOCERT_CAPI_H

#ifdef __cplusplus
extern "C"
{
#endif

#define EC_OK 0
#define EC_ERR_CONFIG 2
#define EC_ERR_INFEASIBLE 3
#define EC_ERR_BOUND 4
#define EC_ERR_NONCONVERGENCE 5

/* Semantic version of the library, e.g. "0.1.0". */
const char* ec_version(void);

/* Message of the most recent error on this thread ("" if none). */
const char* ec_last_error(void);

/* Opaque result of one pipeline run. */
typedef struct ec_result ec_result;

/*
 * Runs one command: "validate", "certify", "solve" or "sweep".  Later
 * stages run (or load from the on-disk cache) everything they depend on.
 * config_json is the full run configuration as a JSON document; see the
 * annotated example shipped with the library.  Never returns NULL.
 */
ec_result* ec_run(const char* command, const char* config_json);

/* Status of the run (one of the EC_ constants above). */
int ec_result_status(const ec_result* result);

/* The JSON report ("" when the run failed before producing one). */
const char* ec_result_report(const ec_result* result);

/* Human-readable error description ("" on success). */
const char* ec_result_message(const ec_result* result);

/* Releases the result and all strings obtained from it. */
void ec_result_free(ec_result* result);

/*
 * Convenience wrapper: loads and structurally validates a model file.
 * Returns EC_OK or an error category; details via ec_last_error().
 */
int ec_validate_model_file(const char* path);

#ifdef __cplusplus
}
#endif

#endif /* ERGOCERT_CAPI_H */
