#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fairgraph/autodiff.hpp"
#include "fairgraph/rng.hpp"

namespace fairgraph::ad {

struct FdOptions {
  double h = 1e-5;          // central-difference step, must lie in [1e-6, 1e-4]
  int max_coords = 200;     // sampled parameter coordinates
  std::uint64_t seed = 0;   // coordinate sampling seed
};

struct FdResult {
  double max_rel_error = 0.0;
  int coords_checked = 0;
  int kink_skips = 0;  // coordinates excluded because a relu input changed sign
};

// Central-difference check of the tape's analytic gradients.
//
// `build` must construct the scalar loss on the given tape from the current
// parameter values, registering each Param* in `params` via tape.leaf().
// Coordinates whose +-h probes land on different sides of a relu kink are
// excluded from sampling (the subgradient convention is arbitrary there).
// Relative error uses denominator max(|analytic|, |numeric|, 1e-8).
inline FdResult finite_difference_check(const std::function<Value(Tape&)>& build,
                                        const std::vector<Param*>& params,
                                        const FdOptions& opt = {}) {
  if (opt.h < 1e-6 || opt.h > 1e-4)
    throw ConfigError("finite_difference_check: h must be in [1e-6, 1e-4]");

  Tape base;
  Value loss = build(base);
  if (!loss.val().all_finite()) throw NumericError("finite_difference_check: non-finite loss");
  GradMap grads = base.backward(loss);

  // flat list of (param index, coordinate) pairs
  std::vector<std::pair<int, std::size_t>> coords;
  for (std::size_t p = 0; p < params.size(); ++p)
    for (std::size_t k = 0; k < params[p]->value.size(); ++k)
      coords.emplace_back(static_cast<int>(p), k);

  Rng rng(opt.seed ^ 0x5bd1e995u);
  if (static_cast<int>(coords.size()) > opt.max_coords) {
    rng.shuffle(coords);
    coords.resize(static_cast<std::size_t>(opt.max_coords));
  }

  auto probe = [&](Param& p, std::size_t k, double v) {
    const double saved = p.value.data[k];
    p.value.data[k] = v;
    Tape t;
    Value l = build(t);
    const double f = l.val().data[0];
    auto signs = t.relu_sign_pattern();
    p.value.data[k] = saved;
    if (!std::isfinite(f)) throw NumericError("finite_difference_check: non-finite probe");
    return std::pair<double, std::vector<std::uint8_t>>(f, std::move(signs));
  };

  FdResult res;
  for (auto [pi, k] : coords) {
    Param& p = *params[static_cast<std::size_t>(pi)];
    const double x0 = p.value.data[k];
    auto [fp, sp] = probe(p, k, x0 + opt.h);
    auto [fm, sm] = probe(p, k, x0 - opt.h);
    if (sp != sm) {
      ++res.kink_skips;
      continue;
    }
    const double numeric = (fp - fm) / (2.0 * opt.h);
    const auto it = grads.find(&p);
    const double analytic = it == grads.end() ? 0.0 : it->second.data[k];
    const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
    res.max_rel_error = std::max(res.max_rel_error, std::fabs(analytic - numeric) / denom);
    ++res.coords_checked;
  }
  return res;
}

}  // namespace fairgraph::ad
