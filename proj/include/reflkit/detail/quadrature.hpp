#pragma once

#include <cstddef>
#include <vector>

namespace reflkit::detail {

/// Piecewise Chebyshev-Lobatto collocation on a set of panels.
///
/// Each panel carries its own `order` nodes including both endpoints, so a
/// shared endpoint appears twice; this lets integrands with jumps take
/// one-sided values. Cumulative integration is spectrally accurate per panel.
class PanelGrid {
 public:
  PanelGrid() = default;
  PanelGrid(std::vector<double> breaks, int order);

  std::size_t panels() const { return breaks_.empty() ? 0 : breaks_.size() - 1; }
  int order() const { return order_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& breaks() const { return breaks_; }

  /// Index of the node sitting at breaks()[b] (last node for the final break).
  std::size_t break_node(std::size_t b) const;
  /// Index of the node at breaks()[b] viewed from the panel on its left.
  std::size_t break_node_left(std::size_t b) const;
  /// Index of a break equal to x, or npos.
  std::size_t find_break(double x) const;

  /// out[i] = initial + integral of g from breaks().front() to nodes()[i].
  void cumulative(const double* g, double* out, double initial = 0.0) const;
  double integral(const double* g) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<double> breaks_;
  std::vector<double> nodes_;
  int order_ = 0;
  std::vector<double> cum_;  // order x order integration matrix on [-1, 1]
};

/// Breaks covering [a, b] containing every `required` point inside, with
/// panel width h0 * (1 + growth * d) where d is the distance to [lo, hi].
std::vector<double> make_breaks(double a, double b, std::vector<double> required, double h0,
                                double growth, double lo, double hi);

/// Integral over (-inf, z0] of a tail that decays to the left, estimated from
/// samples (z0, g0) and (z1, g1) with z1 > z0 assuming exponential decay.
double exponential_tail(double z0, double g0, double z1, double g1);

}  // namespace reflkit::detail
