#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "hyperforge/exterior.hpp"

// Seeded sampling used by batch checks and the CLI.  Everything funnels
// through one mt19937_64 + std::normal_distribution stream so that a seed
// pins the whole run bit-for-bit on a given platform.

namespace hf {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double normal() { return normal_(gen_); }
  double uniform() { return uniform_(gen_); }
  std::uint64_t bits() { return gen_(); }

  Eigen::VectorXd normal_vector(int n);
  Eigen::MatrixXd normal_matrix(int rows, int cols);
  Eigen::VectorXd unit_vector(int n);  // normal sample normalized to length 1

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Degree-k form with iid standard normal real coefficients.
Form random_real_form(int N, int k, Rng& rng);

// Degree-k form with iid complex normal coefficients (re and im each normal).
Form random_complex_form(int N, int k, Rng& rng);

}  // namespace hf
