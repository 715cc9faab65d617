#ifndef WEBSTRESS_WEBSTRESS_H
#define WEBSTRESS_WEBSTRESS_H

/* C interface to the webstress simulator.
 *
 * Handles are opaque. Every function returning ws_status leaves a message
 * for the calling thread in ws_last_error() when it fails. Strings returned
 * through char** out-parameters are heap-allocated and must be released
 * with ws_string_free(). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define WS_API __declspec(dllexport)
#else
#define WS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ws_status {
  WS_OK = 0,
  WS_ERR_ARGUMENT = 1, /* null handle, bad flag value, bad JSON config */
  WS_ERR_NOT_FOUND = 2, /* unknown task, missing file */
  WS_ERR_PARSE = 3,     /* malformed HTML, selector or record file */
  WS_ERR_CATALOG = 4,   /* site or task failed validation */
  WS_ERR_STATE = 5,     /* act on a finished session */
  WS_ERR_IO = 6,
  WS_ERR_INTERNAL = 7
} ws_status;

typedef struct ws_catalog ws_catalog;
typedef struct ws_session ws_session;
typedef struct ws_server ws_server;

WS_API const char* ws_version(void);
WS_API const char* ws_status_name(ws_status status);
/* Message of the last failure on this thread; empty when none. */
WS_API const char* ws_last_error(void);
WS_API void ws_string_free(char* s);

/* Loads every *.json site under sites_dir and task under tasks_dir. */
WS_API ws_status ws_catalog_load(const char* sites_dir, const char* tasks_dir, ws_catalog** out);
WS_API void ws_catalog_free(ws_catalog* catalog);
/* JSON array of task ids, sorted. */
WS_API ws_status ws_catalog_tasks(const ws_catalog* catalog, char** out_json);

/* config_json: {"task", "mode", "seed", "agent_id", "max_steps",
 * "failure_p", "popup_f", "chaos_magnitude", "noise_density"}; only "task"
 * is required. */
WS_API ws_status ws_session_create(const ws_catalog* catalog, const char* config_json, ws_session** out);
WS_API void ws_session_free(ws_session* session);
/* Current observation as JSON. */
WS_API ws_status ws_session_observe(const ws_session* session, char** out_json);
/* message_json is an agent message {"action_type", "parameters",
 * "reasoning"}. Result: {"outcome", "terminal", "step"}. */
WS_API ws_status ws_session_act(ws_session* session, const char* message_json, char** out_json);
/* Run record as JSON; available at any point of the episode. */
WS_API ws_status ws_session_result(const ws_session* session, char** out_json);

/* suite_json: {"tasks": [...], "modes": [...], "agents": [...], "reps",
 * "seed", "max_steps", "parallel", "failure_p", "popup_f",
 * "chaos_magnitude", "noise_density", "agent_command"}. All keys are
 * optional. Records are written as JSON lines to out_path when it is
 * non-null, and returned through out_jsonl when that is non-null. */
WS_API ws_status ws_run_suite(const ws_catalog* catalog, const char* suite_json, const char* out_path,
                              char** out_jsonl);

/* analysis: summary|retention|calibration|repetition|all.
 * format: table|csv. */
WS_API ws_status ws_report(const char* records_path, const char* analysis, const char* format, char** out_text);

/* Starts the HTTP session service on a background thread. port 0 picks a
 * free port; the bound port is stored in *out_port. */
WS_API ws_status ws_server_start(const ws_catalog* catalog, const char* host, int port, int max_steps,
                                 ws_server** out, int* out_port);
/* Blocks until the server stops. */
WS_API void ws_server_wait(ws_server* server);
WS_API void ws_server_stop(ws_server* server);
WS_API void ws_server_free(ws_server* server);

/* Parses HTML and returns its canonical serialization. */
WS_API ws_status ws_html_canonicalize(const char* html, char** out_html);
/* JSON array of the serialized elements matching selector, in document
 * order. */
WS_API ws_status ws_query(const char* html, const char* selector, char** out_json);
/* Perturbed DOM of a task's initial page under config_json (same keys as
 * ws_session_create). */
WS_API ws_status ws_render(const ws_catalog* catalog, const char* config_json, char** out_html);

#ifdef __cplusplus
}
#endif

#endif
