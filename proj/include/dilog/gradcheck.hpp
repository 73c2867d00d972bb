#pragma once

// Finite-difference check of the reverse-mode gradient on random instances.

#include <cstdint>
#include <memory>
#include <vector>

#include "dilog/infer.hpp"

namespace dilog {

struct GradcheckOptions {
  std::uint64_t seed = 0;
  int instances = 100;       // instances to check
  int max_constants = 5;
  int max_clauses = 8;       // candidate clauses per instance, over all slots
  double step = 1e-4;        // central-difference half width
  double floor = 1e-6;       // denominator floor for the relative error
};

/// A small random problem: frame, pools truncated to at most max_clauses,
/// one or two samples, random raw weights and hyperparameters.
struct GradcheckInstance {
  std::shared_ptr<const ModelSpec> spec;
  std::vector<Sample> samples;
  ClauseWeights weights;
  Hyperparams hyperparams;
};

GradcheckInstance random_instance(std::uint64_t seed, const GradcheckOptions& options);

struct GradcheckReport {
  int checked = 0;      // instances compared
  int nonsmooth = 0;    // instances skipped because one-sided differences disagree
  std::size_t coordinates = 0;
  double max_relative_error = 0.0;
  double max_reference_difference = 0.0;  // serial reference vs parallel gradient
};

/// Checks `options.instances` smooth instances. Instance i uses a seed derived
/// from (seed, i); a point is non-smooth when the forward and backward
/// one-sided differences of any coordinate disagree by more than 1%.
GradcheckReport run_gradcheck(const GradcheckOptions& options);

}  // namespace dilog
