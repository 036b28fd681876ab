/* Compiled as C to keep the public header C-clean. */
#include <stdio.h>

#include "reflkit/reflkit.h"

int main(void) {
  reflkit_model* m = NULL;
  double out[2];
  int st = reflkit_model_from_json("{\"kind\": \"GaussianBump\", \"params\": {\"A\": 1.0}}", &m);
  if (st != REFLKIT_OK) {
    fprintf(stderr, "%s: %s\n", reflkit_status_name(st), reflkit_last_error());
    return 1;
  }
  st = reflkit_reflect_semiinf(m, 0.0, 1.0, 0.5, out);
  reflkit_model_free(m);
  if (st != REFLKIT_OK) return 1;
  printf("R = %.6f%+.6fi\n", out[0], out[1]);
  return 0;
}
