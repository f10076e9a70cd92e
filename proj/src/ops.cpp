#include "dscnet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dscnet::ops {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

// Valid output range [lo, hi) along one axis for kernel tap k.
struct TapRange {
  std::size_t lo;
  std::size_t hi;
};

TapRange tap_range(std::size_t in_extent, std::size_t out_extent, std::size_t k,
                   std::size_t padding) {
  // out index o reads input o + k - padding, which must lie in [0, in_extent).
  const std::size_t lo = k < padding ? padding - k : 0;
  const std::size_t limit = in_extent + padding;  // o + k < in_extent + padding
  std::size_t hi = limit > k ? limit - k : 0;
  hi = std::min(hi, out_extent);
  return {std::min(lo, hi), hi};
}

}  // namespace

Tensor conv2d(Graph& g, const Tensor& input, const Tensor& kernel, const Tensor& bias,
              std::size_t padding) {
  require_rank4(input, "conv2d input");
  require_rank4(kernel, "conv2d kernel");
  const std::size_t batch = input.dim(0), cin = input.dim(1), h = input.dim(2), w = input.dim(3);
  const std::size_t cout = kernel.dim(0), kh = kernel.dim(2), kw = kernel.dim(3);
  if (kernel.dim(1) != cin) {
    throw ShapeError("conv2d: input has " + std::to_string(cin) + " channels but kernel expects " +
                     std::to_string(kernel.dim(1)));
  }
  if (bias.defined() && bias.size() != cout) {
    throw ShapeError("conv2d: bias has " + std::to_string(bias.size()) + " entries, expected " +
                     std::to_string(cout));
  }
  if (h + 2 * padding < kh || w + 2 * padding < kw) {
    throw ShapeError("conv2d: kernel larger than padded input");
  }
  const std::size_t ho = h + 2 * padding - kh + 1, wo = w + 2 * padding - kw + 1;

  Tensor out(Shape{batch, cout, ho, wo});
  auto in = input.data();
  auto k = kernel.data();
  auto o = out.data();
  const std::size_t in_plane = h * w, out_plane = ho * wo;

  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t co = 0; co < cout; ++co) {
      double* op = o.data() + (b * cout + co) * out_plane;
      if (bias.defined()) std::fill(op, op + out_plane, bias.data()[co]);
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const double* ip = in.data() + (b * cin + ci) * in_plane;
        for (std::size_t ky = 0; ky < kh; ++ky) {
          const TapRange ry = tap_range(h, ho, ky, padding);
          for (std::size_t kx = 0; kx < kw; ++kx) {
            const TapRange rx = tap_range(w, wo, kx, padding);
            const double wt = k[((co * cin + ci) * kh + ky) * kw + kx];
            if (wt == 0.0) continue;
            for (std::size_t y = ry.lo; y < ry.hi; ++y) {
              double* orow = op + y * wo;
              const double* irow = ip + (y + ky - padding) * w;
              for (std::size_t x = rx.lo; x < rx.hi; ++x) orow[x] += wt * irow[x + kx - padding];
            }
          }
        }
      }
    }
  }

  if (g.wants({&input, &kernel, &bias})) {
    g.record({input, kernel, bias}, out,
             [input, kernel, bias, out, padding, batch, cin, cout, h, w, kh, kw, ho, wo]() mutable {
               auto go = std::as_const(out).grad();
               auto in = std::as_const(input).data();
               auto k = std::as_const(kernel).data();
               const std::size_t in_plane = h * w, out_plane = ho * wo;
               const bool want_in = input.requires_grad();
               const bool want_k = kernel.requires_grad();
               const bool want_b = bias.defined() && bias.requires_grad();
               std::span<double> gi = want_in ? input.grad() : std::span<double>{};
               std::span<double> gk = want_k ? kernel.grad() : std::span<double>{};
               for (std::size_t b = 0; b < batch; ++b) {
                 for (std::size_t co = 0; co < cout; ++co) {
                   const double* gop = go.data() + (b * cout + co) * out_plane;
                   if (want_b) {
                     double s = 0.0;
                     for (std::size_t i = 0; i < out_plane; ++i) s += gop[i];
                     bias.grad()[co] += s;
                   }
                   for (std::size_t ci = 0; ci < cin; ++ci) {
                     const std::size_t plane = (b * cin + ci) * in_plane;
                     for (std::size_t ky = 0; ky < kh; ++ky) {
                       const TapRange ry = tap_range(h, ho, ky, padding);
                       for (std::size_t kx = 0; kx < kw; ++kx) {
                         const TapRange rx = tap_range(w, wo, kx, padding);
                         const std::size_t kidx = ((co * cin + ci) * kh + ky) * kw + kx;
                         const double wt = k[kidx];
                         double acc = 0.0;
                         for (std::size_t y = ry.lo; y < ry.hi; ++y) {
                           const double* grow = gop + y * wo;
                           const std::size_t row = plane + (y + ky - padding) * w;
                           const std::size_t shift = kx - padding;  // modular; x + shift >= 0
                           if (want_k) {
                             const double* irow = in.data() + row;
                             for (std::size_t x = rx.lo; x < rx.hi; ++x) acc += grow[x] * irow[x + shift];
                           }
                           if (want_in && wt != 0.0) {
                             double* girow = gi.data() + row;
                             for (std::size_t x = rx.lo; x < rx.hi; ++x) girow[x + shift] += wt * grow[x];
                           }
                         }
                         if (want_k) gk[kidx] += acc;
                       }
                     }
                   }
                 }
               }
             });
  }
  return out;
}

Tensor relu(Graph& g, const Tensor& x) {
  Tensor out(x.shape());
  auto xv = x.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < xv.size(); ++i) ov[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  if (g.wants({&x})) {
    g.record({x}, out, [x, out]() mutable {
      auto go = std::as_const(out).grad();
      auto xv = std::as_const(x).data();
      auto gx = x.grad();
      for (std::size_t i = 0; i < gx.size(); ++i) {
        if (xv[i] > 0.0) gx[i] += go[i];
      }
    });
  }
  return out;
}

Tensor sigmoid(Graph& g, const Tensor& x) {
  Tensor out(x.shape());
  auto xv = x.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < xv.size(); ++i) {
    // Split by sign so exp never overflows.
    if (xv[i] >= 0.0) {
      ov[i] = 1.0 / (1.0 + std::exp(-xv[i]));
    } else {
      const double e = std::exp(xv[i]);
      ov[i] = e / (1.0 + e);
    }
  }
  if (g.wants({&x})) {
    g.record({x}, out, [x, out]() mutable {
      auto go = std::as_const(out).grad();
      auto s = std::as_const(out).data();
      auto gx = x.grad();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go[i] * s[i] * (1.0 - s[i]);
    });
  }
  return out;
}

Tensor add(Graph& g, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out(a.shape());
  auto av = a.data(), bv = b.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] + bv[i];
  if (g.wants({&a, &b})) {
    g.record({a, b}, out, [a, b, out]() mutable {
      auto go = std::as_const(out).grad();
      for (const Tensor* t : {&a, &b}) {
        if (!t->requires_grad()) continue;
        auto gt = t->grad();
        for (std::size_t i = 0; i < gt.size(); ++i) gt[i] += go[i];
      }
    });
  }
  return out;
}

Tensor mul(Graph& g, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out(a.shape());
  auto av = a.data(), bv = b.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];
  if (g.wants({&a, &b})) {
    g.record({a, b}, out, [a, b, out]() mutable {
      auto go = std::as_const(out).grad();
      auto av = std::as_const(a).data(), bv = std::as_const(b).data();
      if (a.requires_grad()) {
        auto ga = a.grad();
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += go[i] * bv[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += go[i] * av[i];
      }
    });
  }
  return out;
}

Tensor scale(Graph& g, const Tensor& x, double factor) {
  Tensor out(x.shape());
  auto xv = x.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = xv[i] * factor;
  if (g.wants({&x})) {
    g.record({x}, out, [x, out, factor]() mutable {
      auto go = std::as_const(out).grad();
      auto gx = x.grad();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go[i] * factor;
    });
  }
  return out;
}

Tensor mul_gate(Graph& g, const Tensor& features, const Tensor& gate) {
  require_rank4(features, "mul_gate features");
  require_rank4(gate, "mul_gate gate");
  if (gate.dim(1) != 1) {
    throw ShapeError("mul_gate: gate must have exactly one channel, got " +
                     std::to_string(gate.dim(1)));
  }
  if (gate.dim(0) != features.dim(0) || gate.dim(2) != features.dim(2) ||
      gate.dim(3) != features.dim(3)) {
    throw ShapeError("mul_gate: gate " + shape_string(gate.shape()) + " does not match features " +
                     shape_string(features.shape()));
  }
  const std::size_t batch = features.dim(0), channels = features.dim(1);
  const std::size_t plane = features.dim(2) * features.dim(3);
  Tensor out(features.shape());
  auto f = features.data(), gv = gate.data();
  auto o = out.data();
  for (std::size_t b = 0; b < batch; ++b) {
    const double* gp = gv.data() + b * plane;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t base = (b * channels + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) o[base + i] = f[base + i] * gp[i];
    }
  }
  if (g.wants({&features, &gate})) {
    g.record({features, gate}, out, [features, gate, out, batch, channels, plane]() mutable {
      auto go = std::as_const(out).grad();
      auto f = std::as_const(features).data();
      auto gv = std::as_const(gate).data();
      const bool want_f = features.requires_grad(), want_g = gate.requires_grad();
      for (std::size_t b = 0; b < batch; ++b) {
        const double* gp = gv.data() + b * plane;
        for (std::size_t c = 0; c < channels; ++c) {
          const std::size_t base = (b * channels + c) * plane;
          if (want_f) {
            double* gf = features.grad().data() + base;
            for (std::size_t i = 0; i < plane; ++i) gf[i] += go[base + i] * gp[i];
          }
          if (want_g) {
            double* gg = gate.grad().data() + b * plane;
            for (std::size_t i = 0; i < plane; ++i) gg[i] += go[base + i] * f[base + i];
          }
        }
      }
    });
  }
  return out;
}

Tensor concat_channels(Graph& g, const std::vector<Tensor>& inputs) {
  if (inputs.empty()) throw ShapeError("concat_channels: no inputs");
  for (const Tensor& t : inputs) require_rank4(t, "concat_channels input");
  const std::size_t batch = inputs[0].dim(0), h = inputs[0].dim(2), w = inputs[0].dim(3);
  std::size_t total = 0;
  for (const Tensor& t : inputs) {
    if (t.dim(0) != batch || t.dim(2) != h || t.dim(3) != w) {
      throw ShapeError("concat_channels: " + shape_string(t.shape()) + " does not match " +
                       shape_string(inputs[0].shape()));
    }
    total += t.dim(1);
  }
  const std::size_t plane = h * w;
  Tensor out(Shape{batch, total, h, w});
  auto o = out.data();
  for (std::size_t b = 0; b < batch; ++b) {
    std::size_t offset = 0;
    for (const Tensor& t : inputs) {
      const std::size_t c = t.dim(1);
      auto src = t.data().subspan(b * c * plane, c * plane);
      std::copy(src.begin(), src.end(), o.begin() + static_cast<std::ptrdiff_t>((b * total + offset) * plane));
      offset += c;
    }
  }
  if (g.wants(inputs)) {
    g.record(inputs, out, [inputs, out, batch, total, plane]() mutable {
      auto go = std::as_const(out).grad();
      for (std::size_t b = 0; b < batch; ++b) {
        std::size_t offset = 0;
        for (const Tensor& t : inputs) {
          const std::size_t c = t.dim(1);
          if (t.requires_grad()) {
            double* gt = t.grad().data() + b * c * plane;
            const double* src = go.data() + (b * total + offset) * plane;
            for (std::size_t i = 0; i < c * plane; ++i) gt[i] += src[i];
          }
          offset += c;
        }
      }
    });
  }
  return out;
}

Tensor slice_channels(Graph& g, const Tensor& x, std::size_t begin, std::size_t count) {
  require_rank4(x, "slice_channels");
  const std::size_t batch = x.dim(0), channels = x.dim(1), plane = x.dim(2) * x.dim(3);
  if (count == 0 || begin + count > channels) {
    throw ShapeError("slice_channels: range [" + std::to_string(begin) + "," +
                     std::to_string(begin + count) + ") exceeds " + std::to_string(channels) +
                     " channels");
  }
  Tensor out(Shape{batch, count, x.dim(2), x.dim(3)});
  auto xv = x.data();
  auto o = out.data();
  for (std::size_t b = 0; b < batch; ++b) {
    const double* src = xv.data() + (b * channels + begin) * plane;
    std::copy(src, src + count * plane, o.data() + b * count * plane);
  }
  if (g.wants({&x})) {
    g.record({x}, out, [x, out, batch, channels, plane, begin, count]() mutable {
      auto go = std::as_const(out).grad();
      auto gx = x.grad();
      for (std::size_t b = 0; b < batch; ++b) {
        double* dst = gx.data() + (b * channels + begin) * plane;
        const double* src = go.data() + b * count * plane;
        for (std::size_t i = 0; i < count * plane; ++i) dst[i] += src[i];
      }
    });
  }
  return out;
}

namespace {

struct Lerp {
  std::size_t i0, i1;
  double w1;  // weight of i1; i0 gets 1 - w1
};

std::vector<Lerp> lerp_table(std::size_t in, std::size_t out) {
  std::vector<Lerp> table(out);
  for (std::size_t o = 0; o < out; ++o) {
    if (in == 1 || out == 1) {
      table[o] = {0, 0, 0.0};
      continue;
    }
    const double src = static_cast<double>(o) * static_cast<double>(in - 1) /
                       static_cast<double>(out - 1);
    std::size_t i0 = static_cast<std::size_t>(std::floor(src));
    if (i0 >= in - 1) i0 = in - 1;
    const std::size_t i1 = std::min(i0 + 1, in - 1);
    table[o] = {i0, i1, src - static_cast<double>(i0)};
  }
  return table;
}

}  // namespace

Tensor upsample_bilinear(Graph& g, const Tensor& x, std::size_t height, std::size_t width) {
  require_rank4(x, "upsample_bilinear");
  const std::size_t batch = x.dim(0), channels = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (height < h || width < w) {
    throw ShapeError("upsample_bilinear: cannot downsample " + shape_string(x.shape()) + " to " +
                     std::to_string(height) + "x" + std::to_string(width));
  }
  if (height == h && width == w) {
    // Identity; still a distinct node so callers may treat the result as fresh.
    return scale(g, x, 1.0);
  }
  const std::vector<Lerp> ty = lerp_table(h, height), tx = lerp_table(w, width);
  Tensor out(Shape{batch, channels, height, width});
  auto xv = x.data();
  auto o = out.data();
  for (std::size_t p = 0; p < batch * channels; ++p) {
    const double* src = xv.data() + p * h * w;
    double* dst = o.data() + p * height * width;
    for (std::size_t y = 0; y < height; ++y) {
      const Lerp& ly = ty[y];
      const double* r0 = src + ly.i0 * w;
      const double* r1 = src + ly.i1 * w;
      for (std::size_t xx = 0; xx < width; ++xx) {
        const Lerp& lx = tx[xx];
        const double top = r0[lx.i0] + lx.w1 * (r0[lx.i1] - r0[lx.i0]);
        const double bot = r1[lx.i0] + lx.w1 * (r1[lx.i1] - r1[lx.i0]);
        dst[y * width + xx] = top + ly.w1 * (bot - top);
      }
    }
  }
  if (g.wants({&x})) {
    g.record({x}, out, [x, out, ty, tx, batch, channels, h, w, height, width]() mutable {
      auto go = std::as_const(out).grad();
      auto gx = x.grad();
      for (std::size_t p = 0; p < batch * channels; ++p) {
        double* dst = gx.data() + p * h * w;
        const double* src = go.data() + p * height * width;
        for (std::size_t y = 0; y < height; ++y) {
          const Lerp& ly = ty[y];
          for (std::size_t xx = 0; xx < width; ++xx) {
            const Lerp& lx = tx[xx];
            const double gv = src[y * width + xx];
            dst[ly.i0 * w + lx.i0] += gv * (1.0 - ly.w1) * (1.0 - lx.w1);
            dst[ly.i0 * w + lx.i1] += gv * (1.0 - ly.w1) * lx.w1;
            dst[ly.i1 * w + lx.i0] += gv * ly.w1 * (1.0 - lx.w1);
            dst[ly.i1 * w + lx.i1] += gv * ly.w1 * lx.w1;
          }
        }
      }
    });
  }
  return out;
}

Tensor max_pool2x2(Graph& g, const Tensor& x) {
  require_rank4(x, "max_pool2x2");
  const std::size_t batch = x.dim(0), channels = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (h < 2 || w < 2) throw ShapeError("max_pool2x2: input too small " + shape_string(x.shape()));
  const std::size_t ho = h / 2, wo = w / 2;
  Tensor out(Shape{batch, channels, ho, wo});
  std::vector<std::size_t> argmax(out.size());
  auto xv = x.data();
  auto o = out.data();
  for (std::size_t p = 0; p < batch * channels; ++p) {
    const std::size_t base = p * h * w;
    for (std::size_t y = 0; y < ho; ++y) {
      for (std::size_t xx = 0; xx < wo; ++xx) {
        std::size_t best = base + 2 * y * w + 2 * xx;
        for (std::size_t idx : {best + 1, best + w, best + w + 1}) {
          if (xv[idx] > xv[best]) best = idx;
        }
        const std::size_t oi = (p * ho + y) * wo + xx;
        o[oi] = xv[best];
        argmax[oi] = best;
      }
    }
  }
  if (g.wants({&x})) {
    g.record({x}, out, [x, out, argmax = std::move(argmax)]() mutable {
      auto go = std::as_const(out).grad();
      auto gx = x.grad();
      for (std::size_t i = 0; i < go.size(); ++i) gx[argmax[i]] += go[i];
    });
  }
  return out;
}

Tensor sum(Graph& g, const Tensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  Tensor out = Tensor::scalar(s);
  if (g.wants({&x})) {
    g.record({x}, out, [x, out]() mutable {
      const double go = std::as_const(out).grad()[0];
      for (double& v : x.grad()) v += go;
    });
  }
  return out;
}

}  // namespace dscnet::ops
