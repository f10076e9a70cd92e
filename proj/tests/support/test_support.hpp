#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "dscnet/dsc_module.hpp"
#include "dscnet/graph.hpp"
#include "dscnet/image.hpp"
#include "dscnet/random.hpp"
#include "dscnet/tensor.hpp"

namespace dscnet::testing {

inline Tensor random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(shape);
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

inline Tensor random_param(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t = random_tensor(shape, rng, lo, hi);
  t.set_requires_grad();
  return t;
}

struct GradCheckResult {
  std::size_t checked = 0;
  std::size_t skipped = 0;  // entries sitting on a kink
  std::size_t failed = 0;
  double max_rel_error = 0.0;
  std::string worst;

  bool ok() const { return failed == 0 && checked > 0; }
};

struct GradCheckOptions {
  double step = 1e-5;
  double rel_tol = 1e-3;
  double abs_floor = 1e-8;  // below this difference the entry passes regardless
  double kink_tol = 1e-3;   // one-sided slopes disagreeing by more than this mark a kink
  std::size_t max_entries = 0;  // per tensor; 0 checks every entry
  std::uint64_t seed = 1;
};

/// Central-difference check of every listed tensor's gradient. Entries whose
/// one-sided slopes reveal a kink inside the stencil (ReLU, max and clamp kinks, threshold
/// jumps) are skipped and counted.
inline GradCheckResult grad_check(const std::vector<Tensor>& params,
                                  const std::function<Tensor(Graph&)>& loss_fn,
                                  const GradCheckOptions& opt = {}) {
  for (const Tensor& p : params) p.ensure_grad();
  for (Tensor p : params) p.zero_grad();
  {
    Graph g;
    Tensor loss = loss_fn(g);
    g.backward(loss);
  }
  std::vector<std::vector<double>> analytic;
  for (const Tensor& p : params) analytic.emplace_back(p.grad().begin(), p.grad().end());

  auto eval = [&]() {
    Graph g(false);
    return loss_fn(g).item();
  };
  const double f0 = eval();
  // Finite differences of a loss of size |f0| carry roundoff near eps |f0| / step.
  const double floor =
      std::max(opt.abs_floor, 64.0 * std::numeric_limits<double>::epsilon() * std::abs(f0) / opt.step);
  GradCheckResult r;
  Rng rng(opt.seed);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor p = params[k];
    auto data = p.data();
    std::vector<std::size_t> entries(data.size());
    for (std::size_t i = 0; i < entries.size(); ++i) entries[i] = i;
    if (opt.max_entries && entries.size() > opt.max_entries) {
      for (std::size_t i = entries.size(); i > 1; --i) std::swap(entries[i - 1], entries[rng.below(i)]);
      entries.resize(opt.max_entries);
    }
    for (std::size_t i : entries) {
      const double orig = data[i];
      data[i] = orig + opt.step;
      const double fp = eval();
      data[i] = orig - opt.step;
      const double fm = eval();
      data[i] = orig;
      const double half = 0.5 * opt.step;
      data[i] = orig + half;
      const double fph = eval();
      data[i] = orig - half;
      const double fmh = eval();
      data[i] = orig;
      const double right = (fp - f0) / opt.step, left = (f0 - fm) / opt.step;
      const double scale = std::max({1.0, std::abs(right), std::abs(left)});
      // Smooth: the slope gap shrinks linearly with the step. A kink inside
      // the stencil keeps it roughly constant instead.
      const double gap = right - left;
      const double gap_half = (fph - f0) / half - (f0 - fmh) / half;
      const double noise = 1e-8 * std::max(1.0, std::abs(f0));
      if (std::abs(gap) > opt.kink_tol * scale ||
          std::abs(gap - 2.0 * gap_half) > 0.05 * std::abs(gap) + noise) {
        ++r.skipped;
        continue;
      }
      const double numeric = (fp - fm) / (2.0 * opt.step);
      const double a = analytic[k][i];
      const double diff = std::abs(a - numeric);
      const double rel = diff / std::max({std::abs(a), std::abs(numeric), 1e-300});
      ++r.checked;
      const bool significant = diff > floor;
      if ((significant || std::max(std::abs(a), std::abs(numeric)) > 1e-6) && rel > r.max_rel_error) {
        r.max_rel_error = rel;
        r.worst = "tensor " + std::to_string(k) + " entry " + std::to_string(i) + ": analytic " +
                  std::to_string(a) + " numeric " + std::to_string(numeric);
      }
      if (significant && rel >= opt.rel_tol) ++r.failed;
    }
  }
  return r;
}

/// Direct nested-loop cross-correlation.
inline Tensor naive_conv2d(const Tensor& x, const Tensor& k, const Tensor& bias, std::size_t pad) {
  const long B = static_cast<long>(x.dim(0)), C = static_cast<long>(x.dim(1));
  const long H = static_cast<long>(x.dim(2)), W = static_cast<long>(x.dim(3));
  const long O = static_cast<long>(k.dim(0)), KH = static_cast<long>(k.dim(2)),
             KW = static_cast<long>(k.dim(3));
  const long P = static_cast<long>(pad);
  const long OH = H + 2 * P - KH + 1, OW = W + 2 * P - KW + 1;
  Tensor out({static_cast<std::size_t>(B), static_cast<std::size_t>(O), static_cast<std::size_t>(OH),
              static_cast<std::size_t>(OW)});
  for (long b = 0; b < B; ++b)
    for (long o = 0; o < O; ++o)
      for (long y = 0; y < OH; ++y)
        for (long xx = 0; xx < OW; ++xx) {
          double s = bias.defined() ? bias.data()[static_cast<std::size_t>(o)] : 0.0;
          for (long c = 0; c < C; ++c)
            for (long i = 0; i < KH; ++i)
              for (long j = 0; j < KW; ++j) {
                const long yy = y + i - P, xi = xx + j - P;
                if (yy < 0 || yy >= H || xi < 0 || xi >= W) continue;
                s += x.at(static_cast<std::size_t>(b), static_cast<std::size_t>(c), static_cast<std::size_t>(yy),
                          static_cast<std::size_t>(xi)) *
                     k.at(static_cast<std::size_t>(o), static_cast<std::size_t>(c), static_cast<std::size_t>(i),
                          static_cast<std::size_t>(j));
              }
          out.at(static_cast<std::size_t>(b), static_cast<std::size_t>(o), static_cast<std::size_t>(y),
                 static_cast<std::size_t>(xx)) = s;
        }
  return out;
}

/// Pixel-by-pixel recurrence h = relu(alpha h_prev + x), visiting pixels in
/// the order the direction names (right: left to right along each row).
inline Tensor naive_scan(const Tensor& x, const Tensor& alpha, Direction d) {
  const std::size_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  Tensor out(x.shape());
  const bool horizontal = d == Direction::left || d == Direction::right;
  const bool reverse = d == Direction::left || d == Direction::up;
  const std::size_t lines = horizontal ? H : W, len = horizontal ? W : H;
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t line = 0; line < lines; ++line) {
      std::vector<double> h(C, 0.0);
      for (std::size_t step = 0; step < len; ++step) {
        const std::size_t pos = reverse ? len - 1 - step : step;
        const std::size_t y = horizontal ? line : pos, xx = horizontal ? pos : line;
        std::vector<double> next(C);
        for (std::size_t o = 0; o < C; ++o) {
          double s = x.at(b, o, y, xx);
          for (std::size_t i = 0; i < C; ++i) s += alpha.data()[o * C + i] * h[i];
          next[o] = std::max(s, 0.0);
          out.at(b, o, y, xx) = next[o];
        }
        h = next;
      }
    }
  }
  return out;
}

// Straightforward per-image evaluation of the weighted cross entropy.
inline double ce_oracle(const Tensor& p, const Tensor& y, bool accuracy_weights) {
  const std::size_t batch = p.dim(0), plane = p.dim(2) * p.dim(3);
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    long np = 0, nn = 0, tp = 0, tn = 0;
    for (std::size_t i = 0; i < plane; ++i) {
      const bool truth = y.data()[b * plane + i] == 1.0;
      const bool pred = p.data()[b * plane + i] >= 0.5;
      np += truth;
      nn += !truth;
      tp += truth && pred;
      tn += !truth && !pred;
    }
    double w_pos, w_neg;
    if (accuracy_weights) {
      w_pos = np ? 1.0 - double(tp) / double(np) : 0.0;
      w_neg = nn ? 1.0 - double(tn) / double(nn) : 0.0;
    } else {
      w_pos = double(nn) / double(plane);
      w_neg = double(np) / double(plane);
    }
    for (std::size_t i = 0; i < plane; ++i) {
      const double q = std::min(std::max(p.data()[b * plane + i], 1e-7), 1.0 - 1e-7);
      total += y.data()[b * plane + i] == 1.0 ? -w_pos * std::log(q) : -w_neg * std::log(1.0 - q);
    }
  }
  return total / double(batch * plane);
}

/// Random 0/1 mask with roughly `fraction` ones.
inline Image8 random_mask(std::size_t w, std::size_t h, Rng& rng, double fraction = 0.5) {
  Image8 m(w, h, 1);
  for (auto& v : m.values) v = rng.uniform() < fraction ? 1 : 0;
  return m;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace dscnet::testing
