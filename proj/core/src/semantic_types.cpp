#include "semvox/semantic_types.hpp"

#include <algorithm>
#include <string>

namespace semvox {
namespace {

void validate_scores(std::span<const float> scores) {
  for (std::size_t j = 0; j < scores.size(); ++j) {
    const float s = scores[j];
    if (is_measured(s) && !(s >= 0.0f && s <= 1.0f)) {
      throw InvalidMeasurementError("class score " + std::to_string(j) +
                                    " = " + std::to_string(s) +
                                    " outside [0,1]");
    }
  }
}

}  // namespace

ClassConfidence::ClassConfidence(std::vector<float> scores)
    : scores_(std::move(scores)) {
  validate_scores(scores_);
}

ClassConfidence ClassConfidence::none(std::size_t num_classes) {
  ClassConfidence c;
  c.scores_.assign(num_classes, kNoMeasurement);
  return c;
}

ClassConfidence ClassConfidence::one_hot(std::size_t num_classes,
                                         ClassIndex cls, float score,
                                         float others) {
  std::vector<float> s(num_classes, others);
  s.at(cls) = score;
  return ClassConfidence(std::move(s));
}

bool ClassConfidence::any_measured() const {
  return std::any_of(scores_.begin(), scores_.end(),
                     [](float s) { return is_measured(s); });
}

bool operator==(const ClassConfidence& a, const ClassConfidence& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const bool ma = a.measured(j);
    if (ma != b.measured(j)) return false;
    if (ma && a[j] != b[j]) return false;
  }
  return true;
}

std::optional<ClassIndex> thresholded_argmax(std::span<const float> scores,
                                             float threshold) {
  std::optional<ClassIndex> best;
  float best_score = 0.0f;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    const float s = scores[j];
    if (!is_measured(s)) continue;
    if (!best || s > best_score) {
      best = static_cast<ClassIndex>(j);
      best_score = s;
    }
  }
  if (best && best_score >= threshold) return best;
  return std::nullopt;
}

ConfidenceImage::ConfidenceImage(int width, int height,
                                 std::size_t num_classes, float fill)
    : width_(width), height_(height), num_classes_(num_classes) {
  if (width <= 0 || height <= 0 || num_classes == 0) {
    throw ConfigurationError("confidence image needs positive dimensions");
  }
  data_.assign(static_cast<std::size_t>(width) *
                   static_cast<std::size_t>(height) * num_classes,
               fill);
}

void ConfidenceImage::set(int u, int v, const ClassConfidence& c) {
  if (c.size() != num_classes_) {
    throw ConfigurationError("confidence vector length mismatch");
  }
  std::copy(c.scores().begin(), c.scores().end(), at(u, v).begin());
}

void SemanticCloud::reserve(std::size_t n) {
  positions_.reserve(n);
  ranges_.reserve(n);
  scores_.reserve(n * num_classes_);
}

void SemanticCloud::push_back(const Vec3& position,
                              std::span<const float> scores, float range) {
  if (scores.size() != num_classes_) {
    throw ConfigurationError("semantic point has " +
                             std::to_string(scores.size()) +
                             " scores, cloud expects " +
                             std::to_string(num_classes_));
  }
  if (!(range > 0.0f) || !std::isfinite(range)) {
    throw InvalidMeasurementError("capture range must be positive and finite, got " +
                                  std::to_string(range));
  }
  validate_scores(scores);
  positions_.push_back(position);
  ranges_.push_back(range);
  scores_.insert(scores_.end(), scores.begin(), scores.end());
}

}  // namespace semvox
