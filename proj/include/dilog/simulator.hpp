#pragma once

// Agenda-based slot-filling dialogs at the act/state level.
//
// Flow per dialog: the user asks for the default goal (optionally informing
// some user slots), the system requests every unknown user slot until all are
// known, then queries the database; the database return turn is answered with
// sys_inform. Afterwards the user may request further system slots, correct a
// user slot (which invalidates the delivered default goal) or end the dialog.

#include <cstdint>
#include <vector>

#include "dilog/dialog.hpp"

namespace dilog {

struct GeneratorConfig {
  DomainSpec domain;
  std::uint64_t seed = 0;
  int max_goal_requests = 2;           // extra goals after default
  double correction_probability = 0.2;  // chance of one correction after default is delivered

  void validate() const;
};

Dialog generate_dialog(const GeneratorConfig& config);

/// Smallest dialog over seeds 0.. (no corrections) containing user inform and
/// request, system request, query and inform, and a system request turn in
/// which exactly a nonempty proper suffix of the user slot list is known.
/// Ties go to the lowest seed.
Dialog representative_dialog(const DomainSpec& domain);

/// Dialog i uses a seed derived from (seed, i).
std::vector<Dialog> generate_corpus(const DomainSpec& domain, int n, std::uint64_t seed,
                                    double correction_probability = 0.2, int max_goal_requests = 2);

/// Derived per-item seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace dilog
