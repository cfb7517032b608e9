#include <stdio.h>
#include <string.h>
#include <math.h>
#include "katobound.h"

int main(void) {
    printf("version: %s\n", ktb_version());

    KtbModel *model = NULL;
    const char *spec = "{\"kind\":\"sbm\",\"B\":[[0.6,0.3],[0.3,0.6]],\"block_sizes\":[500,500]}";
    if (ktb_model_parse_json(spec, &model) != KTB_STATUS_OK) {
        char *msg = ktb_last_error_message();
        fprintf(stderr, "parse failed: %s\n", msg ? msg : "?");
        ktb_string_free(msg);
        return 1;
    }
    size_t dim = 0;
    ktb_model_dimension(model, &dim);
    size_t count = 0;
    ktb_model_signal_values(model, NULL, 0, &count);
    double values[8];
    ktb_model_signal_values(model, values, 8, &count);
    printf("n=%zu signal=[%.1f, %.1f]\n", dim, values[0], values[1]);

    double threshold = 0.0;
    ktb_analytic_norm_threshold(model, &threshold);
    char *json = NULL;
    KtbStatus status = ktb_model_bounds_json(model, 42.4, INFINITY, 2.55,
                                             KTB_NORM_KIND_ANALYTIC, threshold, &json);
    if (status != KTB_STATUS_OK) { fprintf(stderr, "bounds failed\n"); return 1; }
    printf("bounds json length: %zu\n", strlen(json));
    ktb_string_free(json);

    /* domain error path: inadmissible scale */
    status = ktb_model_bounds_json(model, 42.4, INFINITY, 1e6,
                                   KTB_NORM_KIND_ANALYTIC, threshold, &json);
    if (status != KTB_STATUS_MATH_DOMAIN) { fprintf(stderr, "expected domain error\n"); return 1; }
    char *msg = ktb_last_error_message();
    printf("domain error surfaced: %s\n", msg);
    ktb_string_free(msg);

    double t = 0.0, eps = 0.0, index = 0.0;
    ktb_solve_t(0.99, 3, 6000, &t);
    ktb_epsilon_n(6000, 0.81, 0.2025, KTB_INTERVAL_METHOD_KATO_TEMPLE, &eps);
    ktb_detectability_index(400, 40, 0.2, 0.2, &index);
    printf("t=%.4f eps_n=%.4f detectability=%.3f\n", t, eps, index);

    ktb_model_free(model);
    printf("ok\n");
    return 0;
}
