#include "semvox/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace semvox::semantics {

LabelMask::LabelMask(int width, int height)
    : width_(width),
      height_(height),
      labels_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
              kUnlabeled) {
  if (width <= 0 || height <= 0) {
    throw ConfigurationError("label mask needs positive dimensions");
  }
}

LabelMask::LabelMask(int width, int height, std::vector<std::uint8_t> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
  if (width <= 0 || height <= 0 ||
      labels_.size() != static_cast<std::size_t>(width) *
                            static_cast<std::size_t>(height)) {
    throw ConfigurationError("label mask buffer does not match its size");
  }
}

LabelMask remap_mask(const LabelMask& mask, const RemapTable& table) {
  LabelMask out = mask;
  const auto& mapping = table.mapping();
  for (std::uint8_t& l : out.raw()) {
    if (l == LabelMask::kUnlabeled) continue;
    if (l >= mapping.size()) {
      throw CorruptMaskError("mask label " + std::to_string(l) +
                             " is outside the source ontology");
    }
    l = mapping[l];
  }
  return out;
}

LabelMask threshold_prediction(const ConfidenceImage& conf, float threshold) {
  LabelMask out(conf.width(), conf.height());
  for (int v = 0; v < conf.height(); ++v) {
    for (int u = 0; u < conf.width(); ++u) {
      out.set(u, v, thresholded_argmax(conf.at(u, v), threshold));
    }
  }
  return out;
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.n_ != n_) {
    throw ConfigurationError("cannot merge confusion matrices of different size");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  ignored += other.ignored;
  return *this;
}

ConfusionMatrix accumulate_confusion(const LabelMask& gt,
                                     const LabelMask& pred,
                                     std::size_t num_classes) {
  if (gt.width() != pred.width() || gt.height() != pred.height()) {
    throw ConfigurationError(
        "ground truth is " + std::to_string(gt.width()) + "x" +
        std::to_string(gt.height()) + " but prediction is " +
        std::to_string(pred.width()) + "x" + std::to_string(pred.height()));
  }
  ConfusionMatrix cm(num_classes);
  const auto g = gt.raw();
  const auto p = pred.raw();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] == LabelMask::kUnlabeled) continue;
    if (p[i] == LabelMask::kUnlabeled) {
      ++cm.ignored;
      continue;
    }
    if (g[i] >= num_classes || p[i] >= num_classes) {
      throw ConfigurationError("label " + std::to_string(std::max(g[i], p[i])) +
                               " exceeds class count " +
                               std::to_string(num_classes));
    }
    cm.add(g[i], p[i]);
  }
  return cm;
}

std::vector<std::optional<double>> iou_per_class(const ConfusionMatrix& cm) {
  const std::size_t n = cm.num_classes();
  std::vector<std::optional<double>> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::uint64_t row = 0;
    std::uint64_t col = 0;
    for (std::size_t k = 0; k < n; ++k) {
      row += cm.at(j, k);
      col += cm.at(k, j);
    }
    const std::uint64_t tp = cm.at(j, j);
    const std::uint64_t uni = row + col - tp;
    if (uni > 0) out[j] = 100.0 * static_cast<double>(tp) / static_cast<double>(uni);
  }
  return out;
}

std::optional<double> miou(const ConfusionMatrix& cm) {
  double sum = 0.0;
  std::size_t present = 0;
  for (const auto& iou : iou_per_class(cm)) {
    if (!iou) continue;
    sum += *iou;
    ++present;
  }
  if (present == 0) return std::nullopt;
  return sum / static_cast<double>(present);
}

double DatasetStats::labeled_percent() const {
  if (total_pixels == 0) return 0.0;
  return 100.0 * static_cast<double>(labeled_pixels) /
         static_cast<double>(total_pixels);
}

std::vector<double> DatasetStats::class_share_percent() const {
  std::vector<double> shares(class_pixels.size(), 0.0);
  if (labeled_pixels == 0) return shares;
  for (std::size_t j = 0; j < shares.size(); ++j) {
    shares[j] = 100.0 * static_cast<double>(class_pixels[j]) /
                static_cast<double>(labeled_pixels);
  }
  return shares;
}

DatasetStats dataset_stats(std::span<const LabelMask> masks,
                           std::size_t num_classes) {
  if (masks.empty()) throw InsufficientDataError("no masks to summarize");
  DatasetStats s;
  s.images = masks.size();
  s.class_pixels.assign(num_classes, 0);
  for (const LabelMask& m : masks) {
    s.total_pixels += m.pixel_count();
    for (std::uint8_t l : m.raw()) {
      if (l == LabelMask::kUnlabeled) continue;
      if (l >= num_classes) {
        throw CorruptMaskError("mask label " + std::to_string(l) +
                               " is outside the ontology");
      }
      ++s.class_pixels[l];
      ++s.labeled_pixels;
    }
  }
  return s;
}

std::vector<double> class_weights(std::span<const double> share_percent,
                                  double floor_percent) {
  if (!(floor_percent > 0.0)) {
    throw ConfigurationError("class weight floor must be positive");
  }
  std::vector<double> w(share_percent.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    w[j] = 1.0 / std::max(share_percent[j], floor_percent);
  }
  if (w.empty()) return w;
  const double mean =
      std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
  for (double& x : w) x /= mean;
  return w;
}

}  // namespace semvox::semantics
