#include "bwshare/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bwshare {

MembershipReport validate_sharing(const SharingMatrix& s, const SystemConfig& cfg,
                                  double tol) {
  MembershipReport report;
  const int R = s.num_regions();
  const int O = s.num_operators();
  const double T = static_cast<double>(cfg.slots_per_period);

  for (int r = 0; r < R; ++r)
    for (int j = 0; j < O; ++j)
      for (int i = 0; i < O; ++i) {
        const double v = s.at(r, j, i);
        if (v < -tol) {
          report.violations.push_back(
              {"nonnegativity entry (r=" + std::to_string(r) + ", " +
                   std::to_string(j) + "->" + std::to_string(i) + ")",
               -v});
        }
      }

  for (int r = 0; r < R; ++r)
    for (int j = 0; j < O; ++j) {
      const double total = s.owner_total(r, j);
      if (total > T + tol) {
        report.violations.push_back(
            {"owner cap (r=" + std::to_string(r) + ", owner=" + std::to_string(j) + ")",
             total - T});
      }
    }

  for (int i = 0; i < O; ++i)
    for (int j = i + 1; j < O; ++j) {
      const double net = s.pair_net(i, j);
      if (std::abs(net) > cfg.balance_bound + tol) {
        report.violations.push_back(
            {"balance pair (" + std::to_string(i) + "," + std::to_string(j) + ")",
             std::abs(net) - cfg.balance_bound});
      }
    }

  report.member = report.violations.empty();
  return report;
}

namespace {

// One elementary constraint set with its Dykstra correction vector.
struct DykstraSet {
  enum class Kind { Nonneg, OwnerCap, BalanceSlab } kind;
  int region = -1;  // OwnerCap only
  int a = -1;       // owner for OwnerCap; first operator for BalanceSlab
  int b = -1;       // second operator for BalanceSlab
  std::vector<double> correction;
};

}  // namespace

SharingMatrix project_onto_omega(const SharingMatrix& point, const SystemConfig& cfg) {
  const int R = point.num_regions();
  const int O = point.num_operators();
  const double T = static_cast<double>(cfg.slots_per_period);
  const double zeta = cfg.balance_bound;
  const size_t dim = point.size();

  for (double v : point.data())
    if (!std::isfinite(v)) throw std::invalid_argument("projection input must be finite");

  std::vector<DykstraSet> sets;
  for (int r = 0; r < R; ++r)
    for (int j = 0; j < O; ++j)
      sets.push_back({DykstraSet::Kind::OwnerCap, r, j, -1, std::vector<double>(dim, 0.0)});
  for (int i = 0; i < O; ++i)
    for (int j = i + 1; j < O; ++j)
      sets.push_back({DykstraSet::Kind::BalanceSlab, -1, i, j, std::vector<double>(dim, 0.0)});
  sets.push_back({DykstraSet::Kind::Nonneg, -1, -1, -1, std::vector<double>(dim, 0.0)});

  SharingMatrix x = point;
  SharingMatrix prev = x;
  constexpr int kMaxSweeps = 100000;
  constexpr double kTol = 1e-9;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    prev = x;
    for (DykstraSet& set : sets) {
      std::vector<double>& v = x.data();
      // y = P_set(x + correction); correction = (x + correction) - y; x = y
      for (size_t e = 0; e < dim; ++e) v[e] += set.correction[e];
      switch (set.kind) {
        case DykstraSet::Kind::Nonneg: {
          for (size_t e = 0; e < dim; ++e) {
            const double y = std::max(v[e], 0.0);
            set.correction[e] = v[e] - y;
            v[e] = y;
          }
          break;
        }
        case DykstraSet::Kind::OwnerCap: {
          const double total = x.owner_total(set.region, set.a);
          double shift = 0.0;
          if (total > T) shift = (total - T) / O;
          for (size_t e = 0; e < dim; ++e) set.correction[e] = 0.0;
          for (int i = 0; i < O; ++i) {
            const size_t e = (static_cast<size_t>(set.region) * O + set.a) * O + i;
            set.correction[e] = shift;
            v[e] -= shift;
          }
          break;
        }
        case DykstraSet::Kind::BalanceSlab: {
          // Direction vector has +1 on S^{b->a}_r and -1 on S^{a->b}_r.
          double dot = x.pair_net(set.a, set.b);
          double excess = 0.0;
          if (dot > zeta)
            excess = (dot - zeta) / (2.0 * R);
          else if (dot < -zeta)
            excess = (dot + zeta) / (2.0 * R);
          for (size_t e = 0; e < dim; ++e) set.correction[e] = 0.0;
          if (excess != 0.0) {
            for (int r = 0; r < R; ++r) {
              const size_t plus = (static_cast<size_t>(r) * O + set.b) * O + set.a;
              const size_t minus = (static_cast<size_t>(r) * O + set.a) * O + set.b;
              set.correction[plus] = excess;
              set.correction[minus] = -excess;
              v[plus] -= excess;
              v[minus] += excess;
            }
          }
          break;
        }
      }
    }
    double change = 0.0;
    for (size_t e = 0; e < dim; ++e)
      change = std::max(change, std::abs(x.data()[e] - prev.data()[e]));
    if (change < kTol) return x;
  }
  throw std::runtime_error("projection stalled");
}

}  // namespace bwshare
