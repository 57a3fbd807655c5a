#pragma once

#include "fall/core.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace fall {

/// Random problem instance for checking the closed-form solution.
struct Instance {
  Vector x;  // raw input, d entries
  Vector y;  // m entries
  AnchorSet anchors;
  double lambda = 1.0;
};

struct InstanceShape {
  Index max_d = 10;
  Index max_m = 3;
  Index max_k = 5;
  /// Restrict k to d' * m so that the anchors are almost surely linearly
  /// independent (needed for strict negative definiteness of H).
  bool generic_anchors = false;
};

/// d, m, k uniform in their ranges, lambda from {0.01, 1, 100}, bias on or
/// off, all entries standard normal.
Instance random_instance(std::mt19937_64& rng, const InstanceShape& shape = {});

struct VerifyConfig {
  Index instances = 200;
  Index trials = 1000;       // interior simplex points per instance
  Index qp_points = 100;     // simplex points per instance for the QP check
  double tolerance = 1e-9;   // vertex optimality relative slack
  double qp_tolerance = 1e-8;
  std::uint64_t seed = 0;
  InstanceShape shape;
};

struct VerifySummary {
  Index instances = 0;
  double worst_vertex_violation = 0.0;     // <= tolerance passes
  double worst_qp_error = 0.0;             // relative, <= qp_tolerance passes
  double worst_symmetry_error = 0.0;       // relative asymmetry of H
  double max_eigenvalue_ratio = 0.0;       // max eig(H) / ||H||, < 0 passes
  Index vertex_failures = 0;
  Index qp_failures = 0;
  Index eigen_failures = 0;

  bool passed() const { return vertex_failures == 0 && qp_failures == 0 && eigen_failures == 0; }
  std::string describe() const;
};

/// Quadratic-form consistency, negative definiteness of H on generic anchors,
/// and vertex optimality, each over `instances` random instances.
VerifySummary run_verification(const VerifyConfig& config);

}  // namespace fall
