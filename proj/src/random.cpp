#include "hyperforge/random.hpp"

namespace hf {

Eigen::VectorXd Rng::normal_vector(int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal();
  return v;
}

Eigen::MatrixXd Rng::normal_matrix(int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)      // row-major fill: sample order is part
    for (int j = 0; j < cols; ++j)    // of the deterministic contract
      m(i, j) = normal();
  return m;
}

Eigen::VectorXd Rng::unit_vector(int n) {
  Eigen::VectorXd v = normal_vector(n);
  double len = v.norm();
  while (len < 1e-8) {  // astronomically unlikely, but keep the map total
    v = normal_vector(n);
    len = v.norm();
  }
  return v / len;
}

Form random_real_form(int N, int k, Rng& rng) {
  Form f(N, k);
  for (int i = 0; i < f.size(); ++i) f[i] = cplx{rng.normal(), 0.0};
  return f;
}

Form random_complex_form(int N, int k, Rng& rng) {
  Form f(N, k);
  for (int i = 0; i < f.size(); ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    f[i] = cplx{re, im};
  }
  return f;
}

}  // namespace hf
