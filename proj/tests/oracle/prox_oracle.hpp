#pragma once

// Brute-force minimizer of the two-variable proximal cost, used as the
// reference for the closed-form operators. Knows nothing about their
// derivation: a coarse grid over a box that holds every minimizer, then
// repeated local zooms around the best few grid cells, plus 1-D zooms along
// the beta = 0 line and, without the barrier, the lam = 0 edge.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace oracle {

struct ProxProblem {
  double beta0 = 0.0;
  double lam0 = 0.0;
  double s_beta = 1.0;
  double s_lam = 1.0;
  double a = 0.0;
};

struct ProxMin {
  double beta = 0.0;
  double lam = 0.0;
  double cost = std::numeric_limits<double>::infinity();
};

inline double cost(const ProxProblem& p, double beta, double lam) {
  if (p.a > 0.0 ? !(lam > 0.0) : lam < 0.0) return std::numeric_limits<double>::infinity();
  double c = lam * std::abs(beta) + (beta - p.beta0) * (beta - p.beta0) / (2 * p.s_beta) +
             (lam - p.lam0) * (lam - p.lam0) / (2 * p.s_lam);
  if (p.a > 0.0) c -= p.a * std::log(lam);
  return c;
}

struct Box {
  double b_lo, b_hi, l_lo, l_hi;
};

inline Box bounding_box(const ProxProblem& p) {
  // |beta*| <= |beta0| and lam* <= max(lam0, 0) + sqrt(a s_lam) + a/..., padded.
  const double bb = std::abs(p.beta0) + 0.5;
  const double lam_lo = p.a > 0.0 ? 1e-12 : 0.0;
  const double lam_hi = std::max(p.lam0, 0.0) + 2.0 * std::sqrt(p.a * p.s_lam) + 1.0;
  return {-bb, bb, lam_lo, lam_hi};
}

inline ProxMin zoom(const ProxProblem& p, ProxMin start, const Box& box, double hb, double hl,
                    int levels, int half = 10) {
  ProxMin best = start;
  for (int level = 0; level < levels; ++level) {
    const double cb = best.beta, cl = best.lam;
    for (int i = -half; i <= half; ++i) {
      const double b = std::clamp(cb + i * hb, box.b_lo, box.b_hi);
      for (int k = -half; k <= half; ++k) {
        const double l = std::clamp(cl + k * hl, box.l_lo, box.l_hi);
        const double c = cost(p, b, l);
        if (c < best.cost) best = {b, l, c};
      }
    }
    hb *= 0.3;
    hl *= 0.3;
  }
  return best;
}

/// Minimum of the proximal cost over the feasible set.
inline ProxMin minimize(const ProxProblem& p, int coarse = 401, int keep = 6) {
  const Box box = bounding_box(p);
  const double hb = (box.b_hi - box.b_lo) / (coarse - 1);
  const double hl = (box.l_hi - box.l_lo) / (coarse - 1);

  std::vector<ProxMin> cells;
  cells.reserve(static_cast<std::size_t>(coarse) * coarse);
  for (int i = 0; i < coarse; ++i) {
    const double b = box.b_lo + i * hb;
    for (int k = 0; k < coarse; ++k) {
      const double l = box.l_lo + k * hl;
      cells.push_back({b, l, cost(p, b, l)});
    }
  }
  std::partial_sort(cells.begin(), cells.begin() + keep * 40, cells.end(),
                    [](const ProxMin& x, const ProxMin& y) { return x.cost < y.cost; });
  // Seeds: the best cells that are not next to an already chosen seed, so
  // separate basins each get a zoom.
  std::vector<ProxMin> seeds;
  for (int i = 0; i < keep * 40 && static_cast<int>(seeds.size()) < keep; ++i) {
    const ProxMin& c = cells[static_cast<std::size_t>(i)];
    bool near = false;
    for (const auto& s : seeds) {
      near = near || (std::abs(s.beta - c.beta) <= 3 * hb && std::abs(s.lam - c.lam) <= 3 * hl);
    }
    if (!near) seeds.push_back(c);
  }

  ProxMin best;
  for (const auto& s : seeds) {
    const ProxMin m = zoom(p, s, box, hb, hl, 30);
    if (m.cost < best.cost) best = m;
  }

  // beta = 0 line, and the lam = 0 edge without the barrier.
  {
    ProxMin line{0.0, std::max(p.lam0, box.l_lo + hl), 0.0};
    line.cost = cost(p, 0.0, line.lam);
    double h = hl * 20;
    for (int level = 0; level < 60; ++level) {
      const double cl = line.lam;
      for (int k = -20; k <= 20; ++k) {
        const double l = std::clamp(cl + k * h, box.l_lo, box.l_hi);
        const double c = cost(p, 0.0, l);
        if (c < line.cost) line = {0.0, l, c};
      }
      h *= 0.3;
    }
    if (line.cost < best.cost) best = line;
  }
  if (p.a == 0.0) {
    // At lam = 0 the cost is a parabola in beta with minimum at beta0.
    const ProxMin edge{p.beta0, 0.0, cost(p, p.beta0, 0.0)};
    if (edge.cost < best.cost) best = edge;
  }
  return best;
}

}  // namespace oracle
