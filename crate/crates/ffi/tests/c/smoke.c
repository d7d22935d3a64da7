#include <math.h>
#include <stdio.h>
#include <string.h>

#include "qcloning.h"

#define CHECK(cond)                                                  \
    do {                                                             \
        if (!(cond)) {                                               \
            fprintf(stderr, "check failed line %d: %s\n", __LINE__, #cond); \
            return 1;                                                \
        }                                                            \
    } while (0)

int main(void) {
    double f = 0.0;
    CHECK(qcl_cloner_fidelity(2, 1, 2, &f) == QCL_STATUS_OK);
    CHECK(fabs(f - 5.0 / 6.0) < 1e-12);

    CHECK(qcl_cloner_fidelity(1, 1, 2, &f) == QCL_STATUS_INVALID_ARGUMENT);
    CHECK(qcl_last_error() != NULL && strlen(qcl_last_error()) > 0);

    QclPovm *povm = NULL;
    CHECK(qcl_povm_design(3, 2, &povm) == QCL_STATUS_OK);
    QclPovmReport report;
    CHECK(qcl_povm_validate(povm, &report) == QCL_STATUS_OK);
    CHECK(report.passed == 1);
    CHECK(fabs(report.weight_sum - 6.0) < 1e-9);

    CHECK(qcl_povm_average_fidelity(povm, &f) == QCL_STATUS_OK);
    CHECK(fabs(f - 0.6) < 1e-9);

    char *json = NULL;
    CHECK(qcl_povm_to_json(povm, &json) == QCL_STATUS_OK);
    QclPovm *copy = NULL;
    CHECK(qcl_povm_from_json(json, &copy) == QCL_STATUS_OK);
    qcl_string_free(json);

    double re[3] = {0.6, 0.0, 0.0}, im[3] = {0.0, 0.8, 0.0};
    CHECK(qcl_povm_fidelity(copy, re, im, &f) == QCL_STATUS_OK);
    CHECK(fabs(f - 0.6) < 1e-9);

    qcl_povm_free(copy);
    qcl_povm_free(povm);
    puts("ok");
    return 0;
}
