#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "semvox/common.hpp"

namespace semvox {

inline bool is_measured(float score) { return !std::isnan(score); }

/// Per-class score vector. Finite entries lie in [0,1]; NaN entries mean the
/// class was not measured.
class ClassConfidence {
 public:
  ClassConfidence() = default;
  /// Throws InvalidMeasurementError if a finite entry lies outside [0,1].
  explicit ClassConfidence(std::vector<float> scores);

  static ClassConfidence none(std::size_t num_classes);
  static ClassConfidence one_hot(std::size_t num_classes, ClassIndex cls,
                                 float score, float others = 0.0f);

  std::size_t size() const { return scores_.size(); }
  float operator[](std::size_t j) const { return scores_[j]; }
  bool measured(std::size_t j) const { return is_measured(scores_[j]); }
  bool any_measured() const;
  std::span<const float> scores() const { return scores_; }

  /// NaN entries compare equal to NaN entries; finite entries compare by value.
  friend bool operator==(const ClassConfidence& a, const ClassConfidence& b);

 private:
  std::vector<float> scores_;
};

/// Argmax over measured entries (lowest index wins ties), reported only when
/// the winning score is >= threshold.
std::optional<ClassIndex> thresholded_argmax(std::span<const float> scores,
                                             float threshold);

inline constexpr float kDefaultClassThreshold = 0.5f;

/// Dense per-pixel class confidences, row-major, classes innermost.
class ConfidenceImage {
 public:
  ConfidenceImage() = default;
  ConfidenceImage(int width, int height, std::size_t num_classes,
                  float fill = kNoMeasurement);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t num_classes() const { return num_classes_; }

  std::span<const float> at(int u, int v) const {
    return {data_.data() + offset(u, v), num_classes_};
  }
  std::span<float> at(int u, int v) {
    return {data_.data() + offset(u, v), num_classes_};
  }
  void set(int u, int v, const ClassConfidence& c);

 private:
  std::size_t offset(int u, int v) const {
    return (static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(u)) *
           num_classes_;
  }

  int width_ = 0;
  int height_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<float> data_;
};

/// World-frame points annotated with class confidences and the range at which
/// each was captured.
class SemanticCloud {
 public:
  explicit SemanticCloud(std::size_t num_classes = 0)
      : num_classes_(num_classes) {}

  std::size_t num_classes() const { return num_classes_; }
  std::size_t size() const { return positions_.size(); }
  bool empty() const { return positions_.empty(); }
  void reserve(std::size_t n);

  /// Throws InvalidMeasurementError on a bad score vector or a non-positive
  /// range, ConfigurationError on a class-count mismatch.
  void push_back(const Vec3& position, std::span<const float> scores,
                 float range);

  const Vec3& position(std::size_t i) const { return positions_[i]; }
  float range(std::size_t i) const { return ranges_[i]; }
  std::span<const float> scores(std::size_t i) const {
    return {scores_.data() + i * num_classes_, num_classes_};
  }

 private:
  std::size_t num_classes_;
  std::vector<Vec3> positions_;
  std::vector<float> ranges_;
  std::vector<float> scores_;
};

}  // namespace semvox
