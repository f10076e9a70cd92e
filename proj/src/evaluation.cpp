#include "dscnet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "dscnet/color.hpp"
#include "dscnet/training.hpp"

namespace dscnet {

std::optional<double> ErrorSum::rmse() const {
  if (pixels == 0) return std::nullopt;
  return std::sqrt(squared / (3.0 * static_cast<double>(pixels)));
}

std::optional<double> SampleMetrics::accuracy() const {
  if (!stats || stats->total() == 0) return std::nullopt;
  return dscnet::accuracy(*stats);
}

std::optional<Ber> SampleMetrics::ber() const {
  if (!stats || stats->total() == 0) return std::nullopt;
  return dscnet::ber(*stats);
}

EvalSummary summarize(const std::vector<SampleMetrics>& samples) {
  EvalSummary out;
  out.samples = samples.size();
  MaskStats pooled;
  bool any_stats = false;
  double ber_sum = 0.0;
  ErrorSum all, shadow, nonshadow;
  for (const SampleMetrics& s : samples) {
    if (s.stats) {
      pooled += *s.stats;
      ber_sum += dscnet::ber(*s.stats).value;
      any_stats = true;
    }
    all += s.all;
    shadow += s.shadow;
    nonshadow += s.nonshadow;
  }
  if (any_stats && pooled.total() > 0) {
    out.accuracy = accuracy(pooled);
    out.ber = ber(pooled);
    out.mean_image_ber = ber_sum / static_cast<double>(samples.size());
  }
  out.rmse_all = all.rmse();
  out.rmse_shadow = shadow.rmse();
  out.rmse_nonshadow = nonshadow.rmse();
  return out;
}

std::string metrics_csv(const std::vector<SampleMetrics>& samples) {
  std::ostringstream out;
  out.precision(17);
  auto field = [&](const std::optional<double>& v) {
    out << ',';
    if (v) out << *v;
  };
  out << "sample_id,accuracy,ber,rmse_all,rmse_shadow,rmse_nonshadow,tp,tn,n_pos,n_neg\n";
  for (const SampleMetrics& s : samples) {
    out << s.id;
    field(s.accuracy());
    const auto b = s.ber();
    field(b ? std::optional<double>(b->value) : std::nullopt);
    field(s.all.rmse());
    field(s.shadow.rmse());
    field(s.nonshadow.rmse());
    if (s.stats) {
      out << ',' << s.stats->tp << ',' << s.stats->tn << ',' << s.stats->n_pos << ',' << s.stats->n_neg;
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
  return out.str();
}

std::size_t eval_threads_from_env() {
  const char* v = std::getenv("DSC_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) return 1;
  return static_cast<std::size_t>(std::min(n, 64L));
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  // Each index is written by exactly one worker, so results do not depend
  // on scheduling.
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

SampleMetrics detection_metrics(const std::string& id, const Image8& predicted, const Image8& truth) {
  SampleMetrics m;
  m.id = id;
  m.stats = mask_stats(predicted, truth);
  return m;
}

SampleMetrics removal_metrics(const std::string& id, const ImageF& predicted_lab,
                              const ImageF& target_lab, const Image8& mask) {
  require_same_size(predicted_lab, target_lab, "removal_metrics");
  if (predicted_lab.channels != 3 || mask.channels != 1 || !mask.same_size(predicted_lab)) {
    throw ShapeError("removal_metrics: expected 3-channel images and a matching mask");
  }
  SampleMetrics m;
  m.id = id;
  for (std::size_t i = 0; i < mask.values.size(); ++i) {
    double sq = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      const double d = predicted_lab.values[3 * i + c] - target_lab.values[3 * i + c];
      sq += d * d;
    }
    const ErrorSum e{sq, 1};
    m.all += e;
    (mask.values[i] ? m.shadow : m.nonshadow) += e;
  }
  return m;
}

namespace {

ImageF target_lab(const LabeledScene& s, RemovalTarget target) {
  if (target == RemovalTarget::transferred) {
    const TransferMatrix t = fit_scene_transfer(s);
    return color::rgb_to_lab(removal_target_rgb(s, &t));
  }
  return color::rgb_to_lab(removal_target_rgb(s, nullptr));
}

}  // namespace

std::vector<SampleMetrics> evaluate_detection(const NetworkState& state,
                                              const std::vector<LabeledScene>& scenes,
                                              std::size_t threads) {
  std::vector<SampleMetrics> out(scenes.size());
  parallel_for(scenes.size(), threads, [&](std::size_t i) {
    const LabeledScene& s = scenes[i];
    s.validate();
    const MaskPrediction p = predict_mask(state, to_float(s.shadow_image));
    out[i] = detection_metrics(s.id, p.mask, s.mask);
  });
  return out;
}

std::vector<SampleMetrics> evaluate_mask_identity(const std::vector<LabeledScene>& scenes) {
  std::vector<SampleMetrics> out;
  for (const LabeledScene& s : scenes) out.push_back(detection_metrics(s.id, s.mask, s.mask));
  return out;
}

std::vector<SampleMetrics> evaluate_removal(const NetworkState& state,
                                            const std::vector<LabeledScene>& scenes,
                                            RemovalTarget target, std::size_t threads) {
  std::vector<SampleMetrics> out(scenes.size());
  parallel_for(scenes.size(), threads, [&](std::size_t i) {
    const LabeledScene& s = scenes[i];
    s.validate();
    const ShadowFreePrediction p = predict_shadow_free(state, to_float(s.shadow_image));
    // Scored on the quantized RGB output, as a user would receive it.
    out[i] = removal_metrics(s.id, color::rgb_to_lab(to_float(p.rgb)), target_lab(s, target), s.mask);
  });
  return out;
}

std::vector<SampleMetrics> evaluate_removal_baseline(const std::vector<LabeledScene>& scenes,
                                                     RemovalTarget target) {
  std::vector<SampleMetrics> out;
  for (const LabeledScene& s : scenes) {
    s.validate();
    out.push_back(removal_metrics(s.id, color::rgb_to_lab(to_float(s.shadow_image)),
                                  target_lab(s, target), s.mask));
  }
  return out;
}

}  // namespace dscnet
