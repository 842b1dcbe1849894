/* Neumann eigenvalues and the M-matrix at pi^2/9 through the C ABI. */
#include <stdio.h>

#include "mweyl.h"

int main(void) {
  const double pi = 3.14159265358979323846;
  MweylProblem *p = NULL;
  if (mweyl_problem_new_angles("0", "0", "0", pi / 2, pi / 2, &p) != MWEYL_STATUS_OK) {
    fprintf(stderr, "%s\n", mweyl_last_error());
    return 1;
  }
  MweylComplex m[4];
  MweylComplex lambda = {pi * pi / 9, 0.0};
  if (mweyl_m_matrix(p, lambda, m) != MWEYL_STATUS_OK) {
    fprintf(stderr, "%s\n", mweyl_last_error());
    return 1;
  }
  printf("m11 %.12f m12 %.12f\n", m[0].re, m[1].re);

  MweylComplex vals[8];
  size_t mult[8];
  size_t n = 0;
  if (mweyl_find_eigenvalues(p, 0.5, 120.0, -1.0, 1.0, vals, mult, 8, &n) != MWEYL_STATUS_OK) {
    fprintf(stderr, "%s\n", mweyl_last_error());
    return 1;
  }
  for (size_t i = 0; i < n; i++) {
    printf("eigenvalue %.9f multiplicity %zu\n", vals[i].re, mult[i]);
  }

  lambda.re = pi * pi;
  int status = mweyl_m_matrix(p, lambda, m);
  printf("status at pi^2: %d\n", status);
  mweyl_problem_free(p);
  return status == MWEYL_STATUS_NEAR_POLE ? 0 : 1;
}
