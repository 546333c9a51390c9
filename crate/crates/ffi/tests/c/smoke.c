#include <stdio.h>
#include "sacbound.h"

int main(void) {
    const char *config = "n_modes = 8\ndt = 1e-3\nt_final = 0.01\nseed = 4\n";
    SacSimulation *sim = NULL;
    if (sac_simulation_new(config, NULL, &sim) != SAC_STATUS_OK) {
        char msg[256];
        sac_last_error_message(msg, sizeof msg);
        fprintf(stderr, "new failed: %s\n", msg);
        return 1;
    }
    SacRow row;
    if (sac_simulation_run_to_end(sim, &row) != SAC_STATUS_OK) {
        return 1;
    }
    printf("%zu %.17g %.17g\n", row.m, row.km, row.bound);
    sac_simulation_free(sim);

    SacSimulation *bad = NULL;
    if (sac_simulation_new("n_modes = 0", NULL, &bad) != SAC_STATUS_INVALID_CONFIG || bad != NULL) {
        return 1;
    }
    return 0;
}
