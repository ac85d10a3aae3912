#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "croqam.h"

#define CHECK(call)                                                              \
    do {                                                                         \
        CroqamStatus s_ = (call);                                                \
        if (s_ != CROQAM_STATUS_OK) {                                            \
            fprintf(stderr, "%s: %s (%s)\n", #call, croqam_status_str(s_),       \
                    croqam_last_error());                                        \
            return 1;                                                            \
        }                                                                        \
    } while (0)

int main(void) {
    CroqamFilter *f = NULL;
    CHECK(croqam_filter_design(CROQAM_FILTER_FAMILY_CRRC, 1.0, 16, 8, &f));
    double worst = 1.0;
    CHECK(croqam_filter_orthogonality(f, CROQAM_PHASE_MODE_CR, &worst));
    croqam_filter_free(f);
    if (worst > 1e-10) {
        fprintf(stderr, "orthogonality %g\n", worst);
        return 1;
    }

    CroqamModem *m = NULL;
    CHECK(croqam_modem_reference(CROQAM_REFERENCE_CR_OQAM_MF, &m));
    size_t n = croqam_modem_block_len(m);
    uint32_t *idx = malloc(n * sizeof *idx);
    uint32_t *back = malloc(n * sizeof *back);
    CroqamComplex *d = malloc(n * sizeof *d);
    CroqamComplex *x = malloc(n * sizeof *x);
    for (size_t i = 0; i < n; i++) idx[i] = (uint32_t)((i * 7 + 3) % 16);
    CHECK(croqam_qam_map(idx, d, n));
    CHECK(croqam_modem_modulate(m, d, x, n));
    CHECK(croqam_modem_detect(m, x, d, n));
    CHECK(croqam_qam_demap(d, back, n));
    int ok = memcmp(idx, back, n * sizeof *idx) == 0;

    /* A wrong buffer length is reported, not trusted. */
    CroqamStatus s = croqam_modem_detect(m, x, d, n - 1);
    ok = ok && s == CROQAM_STATUS_LENGTH_MISMATCH && strlen(croqam_last_error()) > 0;

    CroqamModem *bad = NULL;
    s = croqam_modem_new(64, 8, CROQAM_FILTER_FAMILY_RC, 0.5, CROQAM_DETECTOR_ZF,
                         CROQAM_MODULATION_QAM, 16, &bad);
    ok = ok && s == CROQAM_STATUS_SINGULAR_MATRIX && bad == NULL;

    croqam_modem_free(m);
    free(idx);
    free(back);
    free(d);
    free(x);
    printf("croqam %s: %s\n", croqam_version(), ok ? "ok" : "FAILED");
    return ok ? 0 : 1;
}
