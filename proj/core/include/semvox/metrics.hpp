#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "semvox/common.hpp"
#include "semvox/ontology.hpp"
#include "semvox/semantic_types.hpp"

namespace semvox::semantics {

/// Per-pixel optional class index. Used both for sparse ground-truth masks
/// and for thresholded predictions; 255 marks an unlabeled pixel.
class LabelMask {
 public:
  static constexpr std::uint8_t kUnlabeled = 255;

  LabelMask() = default;
  LabelMask(int width, int height);
  LabelMask(int width, int height, std::vector<std::uint8_t> labels);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return labels_.size(); }

  std::optional<ClassIndex> at(int u, int v) const {
    const std::uint8_t l = labels_[index(u, v)];
    if (l == kUnlabeled) return std::nullopt;
    return l;
  }
  void set(int u, int v, std::optional<ClassIndex> cls) {
    labels_[index(u, v)] = cls ? *cls : kUnlabeled;
  }
  std::span<const std::uint8_t> raw() const { return labels_; }
  std::span<std::uint8_t> raw() { return labels_; }

  friend bool operator==(const LabelMask&, const LabelMask&) = default;

 private:
  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(u);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> labels_;
};

using SparseLabelMask = LabelMask;

/// Throws CorruptMaskError if a labeled pixel is not a source class.
LabelMask remap_mask(const LabelMask& mask, const RemapTable& table);

/// Argmax class per pixel when its score reaches `threshold`; ties go to the
/// lowest class index.
LabelMask threshold_prediction(const ConfidenceImage& conf, float threshold);

/// Rows are ground truth, columns are predictions.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t num_classes = 0)
      : n_(num_classes), counts_(num_classes * num_classes, 0) {}

  std::size_t num_classes() const { return n_; }
  std::uint64_t at(std::size_t gt, std::size_t pred) const {
    return counts_[gt * n_ + pred];
  }
  void add(std::size_t gt, std::size_t pred, std::uint64_t n = 1) {
    counts_[gt * n_ + pred] += n;
  }
  /// GT-labeled pixels skipped because no class reached the threshold.
  std::uint64_t ignored = 0;

  std::uint64_t total() const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend bool operator==(const ConfusionMatrix&,
                         const ConfusionMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<std::uint64_t> counts_;
};

/// Tallies labeled GT pixels against predictions. Throws ConfigurationError on
/// a size mismatch or a class index outside `num_classes`.
ConfusionMatrix accumulate_confusion(const LabelMask& gt,
                                     const LabelMask& pred,
                                     std::size_t num_classes);

/// IoU per class in percent; classes with an empty union have no score.
std::vector<std::optional<double>> iou_per_class(const ConfusionMatrix& cm);
/// Mean over classes that have a score, in percent.
std::optional<double> miou(const ConfusionMatrix& cm);

struct DatasetStats {
  std::size_t images = 0;
  std::uint64_t total_pixels = 0;
  std::uint64_t labeled_pixels = 0;
  std::vector<std::uint64_t> class_pixels;

  double labeled_percent() const;
  /// Percent of labeled pixels that belong to each class (all zero when
  /// nothing is labeled).
  std::vector<double> class_share_percent() const;
};

/// Throws InsufficientDataError for an empty mask list and CorruptMaskError
/// for labels outside the ontology.
DatasetStats dataset_stats(std::span<const LabelMask> masks,
                           std::size_t num_classes);

/// Floored inverse-frequency weights normalized to mean 1.
std::vector<double> class_weights(std::span<const double> share_percent,
                                  double floor_percent);

}  // namespace semvox::semantics
