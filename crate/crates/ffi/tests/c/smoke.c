#include <math.h>
#include <stdio.h>

#include "hsym.h"

int main(void) {
    double o[3] = {0.0, 0.0, 0.0};
    double c[3] = {0.0, 0.0, 3.141592653589793};
    double d = 0.0;
    if (hsym_cc_distance(1, o, c, &d) != HSYM_STATUS_OK || fabs(d - 6.283185307179586) > 1e-9) {
        fprintf(stderr, "cc distance: %g\n", d);
        return 1;
    }

    HsymLiftedMap *g = NULL;
    if (hsym_lift_new("kick", 0.2, 0.0, NULL, &g) != HSYM_STATUS_OK || hsym_lift_dim(g) != 4) {
        fprintf(stderr, "lift: %s\n", hsym_last_error_message());
        return 1;
    }
    double p[5] = {0.1, 0.2, 0.3, 0.4, 0.5}, img[5], back[5];
    hsym_lift_apply(g, p, img);
    hsym_lift_apply_inverse(g, img, back);
    for (int i = 0; i < 5; i++) {
        if (fabs(back[i] - p[i]) > 1e-12) {
            fprintf(stderr, "round trip %d\n", i);
            return 1;
        }
    }
    hsym_lift_free(g);

    if (hsym_group_mul(1, NULL, o, c) != HSYM_STATUS_NULL_POINTER || hsym_last_error_message() == NULL) {
        return 1;
    }
    printf("ok %s\n", hsym_version());
    return 0;
}
