#include <math.h>
#include <stdio.h>
#include "tensor_monopole.h"

#define CHECK(cond)                                              \
    do {                                                         \
        if (!(cond)) {                                           \
            fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
            return 1;                                            \
        }                                                        \
    } while (0)

int main(void) {
    const double ej[3] = {1.0, 1.0, 1.0};
    TmModel *m = NULL;
    CHECK(tm_model_new_circuit(ej, ej, 50.0, 0.5, 0.5, &m) == TM_STATUS_OK);

    TmDegeneratePoint pts[4];
    size_t count = 0;
    CHECK(tm_locate_monopoles(m, pts, 4, &count) == TM_STATUS_OK);
    CHECK(count == 4);

    TmChargeResult r;
    CHECK(tm_dd_charge_cube(m, pts[0].point, 0.3, 8, TM_CUBE_METHOD_QUADRATURE, 0, &r) == TM_STATUS_OK);
    CHECK(r.q_rounded == pts[0].expected_charge);
    CHECK(fabs(r.q_value - (double)r.q_rounded) < 0.02);

    double h = 0.0;
    const double p[4] = {0.4, -1.3, 2.7, 0.9};
    CHECK(tm_tensor_curvature(m, p, TM_AXIS_X, TM_AXIS_Y, TM_AXIS_Z, 1e-3, 1e-3, &h) == TM_STATUS_OK);
    CHECK(isfinite(h));

    CHECK(tm_model_new_circuit(NULL, ej, 50.0, 0.5, 0.5, &m) == TM_STATUS_NULL_POINTER);
    char buf[128];
    CHECK(tm_last_error_message(buf, sizeof buf) > 0);

    tm_model_free(m);
    printf("ok %s\n", tm_version());
    return 0;
}
