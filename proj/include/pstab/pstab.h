#ifndef PSTAB_PSTAB_H
#define PSTAB_PSTAB_H

/* C interface of the stability workbench. Every function returns a status code; on
 * failure pstab_last_error() describes the problem for the calling thread. Strings
 * returned through char** out-parameters are owned by the caller and released with
 * pstab_string_free(). Options and reports are JSON documents. */

#if defined(_WIN32)
#define PSTAB_API __declspec(dllexport)
#else
#define PSTAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct pstab_system pstab_system;

typedef enum pstab_status {
    PSTAB_OK = 0,
    PSTAB_ERR_INVALID_ARGUMENT = 1,
    PSTAB_ERR_PARSE = 2,
    PSTAB_ERR_UNKNOWN_IDENTIFIER = 3,
    PSTAB_ERR_DOMAIN = 4,
    PSTAB_ERR_SCHEMA = 5,
    PSTAB_ERR_PRECONDITION = 6,
    PSTAB_ERR_CONVERGENCE = 7,
    PSTAB_ERR_NOT_FOUND = 8,
    PSTAB_ERR_INTERNAL = 9
} pstab_status;

PSTAB_API const char* pstab_version(void);
PSTAB_API const char* pstab_status_name(pstab_status s);
/* Message of the last failed call on this thread; empty after a success. */
PSTAB_API const char* pstab_last_error(void);
PSTAB_API void pstab_string_free(char* s);

/* Caps worker threads; 0 restores the hardware default. */
PSTAB_API pstab_status pstab_set_threads(int k);

PSTAB_API pstab_status pstab_system_load_json(const char* json, pstab_system** out);
PSTAB_API pstab_status pstab_system_load_file(const char* path, pstab_system** out);
PSTAB_API void pstab_system_free(pstab_system* sys);
PSTAB_API int pstab_system_dim(const pstab_system* sys);
PSTAB_API pstab_status pstab_system_to_json(const pstab_system* sys, char** json_out);

/* Gallery. params: "k=v,k=v" or NULL. */
PSTAB_API pstab_status pstab_gallery_list(char** json_out);
PSTAB_API pstab_status pstab_gallery_load(const char* id, const char* params, pstab_system** out);
/* Pinned expectations of an entry, optionally recomputed ("check": true in options). */
PSTAB_API pstab_status pstab_gallery_expected(const char* id, const char* params, const char* options_json,
                                              char** json_out);

/* Analyses. z has pstab_system_dim() entries; options_json may be NULL.
 * Every report carries "status": "ok", "unstable" or "inconsistent". */
PSTAB_API pstab_status pstab_analyze(const pstab_system* sys, const double* z, int n, const char* options_json,
                                     char** report_out);
PSTAB_API pstab_status pstab_certify(const pstab_system* sys, const double* z, int n, const char* options_json,
                                     char** report_out);
PSTAB_API pstab_status pstab_reduce(const pstab_system* sys, const char* chart, pstab_system** reduced_out,
                                    char** report_out);
PSTAB_API pstab_status pstab_icertify(const pstab_system* sys, const char* chart, const double* z, int n,
                                      const char* options_json, char** report_out);
PSTAB_API pstab_status pstab_simulate(const pstab_system* sys, const double* z, int n, const char* options_json,
                                      char** csv_out, char** report_out);
PSTAB_API pstab_status pstab_probe(const pstab_system* sys, const double* z, int n, const char* options_json,
                                   char** report_out);
/* options: box [[lo,hi],...], res (int or list), point, t2, isolate, functions, separation, cells. */
PSTAB_API pstab_status pstab_foliation(const pstab_system* sys, const char* options_json, char** report_out,
                                       char** cells_csv_out);

#ifdef __cplusplus
}
#endif

#endif
