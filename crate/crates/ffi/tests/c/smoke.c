#include <stdio.h>
#include <string.h>

#include "polysemy.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        PsxStatus s_ = (call);                                             \
        if (s_ != PSX_STATUS_OK) {                                         \
            const char *m_ = psx_last_error_message();                     \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, m_ ? m_ : ""); \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    const char *text = "one two three one two four one five two six";
    PsxIndex *index = NULL;
    CHECK(psx_index_from_text((const uint8_t *)text, strlen(text), NULL, &index));

    size_t total = 0, freq = 0;
    CHECK(psx_index_total_tokens(index, &total));
    CHECK(psx_index_freq(index, "one", &freq));
    if (total != 10 || freq != 3) {
        fprintf(stderr, "unexpected counts %zu %zu\n", total, freq);
        return 1;
    }

    PsxReport *report = NULL;
    if (psx_analyze(index, "missing", NULL, &report) != PSX_STATUS_NO_SUCH_TERM || report != NULL) {
        fprintf(stderr, "missing term not reported\n");
        return 1;
    }

    double profile[6] = {0, 1, 3, 1, 0, 0};
    double value = -1;
    size_t peak = 0;
    CHECK(psx_circular_index(profile, 6, &value, &peak));
    if (value != 0.0 || peak != 2) {
        fprintf(stderr, "unexpected fit %g %zu\n", value, peak);
        return 1;
    }

    psx_index_free(index);
    printf("ok %s\n", psx_version());
    return 0;
}
