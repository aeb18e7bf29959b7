#pragma once

#include <string>
#include <vector>

#include "bwshare/types.hpp"

namespace bwshare {

struct SharingViolation {
  std::string constraint;  // e.g. "nonnegativity entry (r=0, 1->0)"
  double amount;           // by how much the constraint is exceeded
};

struct MembershipReport {
  bool member = true;
  std::vector<SharingViolation> violations;
};

// Checks membership of S in the sharing polytope Omega:
//   entries >= 0,
//   sum_i S^{j->i}_r <= T for every (owner j, region r),
//   |sum_r S^{j->i}_r - sum_r S^{i->j}_r| <= zeta for every pair i != j.
// This is the one implementation of the Omega predicate; the projection
// below is certified against it.
MembershipReport validate_sharing(const SharingMatrix& s, const SystemConfig& cfg,
                                  double tol = 1e-9);

// Euclidean projection onto Omega via cyclic Dykstra iterations over the
// elementary sets (per-entry clamp, per-(owner, region) capped half-space,
// per-pair balance slab). Throws std::runtime_error("projection stalled")
// if the hard sweep cap is reached.
SharingMatrix project_onto_omega(const SharingMatrix& point, const SystemConfig& cfg);

}  // namespace bwshare
