#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "mosdist/errors.hpp"

namespace mosdist {

/// The discrete rating levels: ordered numeric centers c_i with a constant
/// bin spacing d, plus display names. The default is the five-level
/// bad/poor/fair/good/excellent scale with centers 1..5 and unit width.
///
/// Equal spacing is required: the two-level interpolation weights
/// (c_{j+1} - mu)/d and (mu - c_j)/d only sum to 1 when every gap equals d.
class LevelScheme {
 public:
  LevelScheme()
      : LevelScheme({1.0, 2.0, 3.0, 4.0, 5.0}, 1.0,
                    {"bad", "poor", "fair", "good", "excellent"}) {}

  LevelScheme(std::vector<double> centers, double width,
              std::vector<std::string> names = {})
      : centers_(std::move(centers)), width_(width), names_(std::move(names)) {
    if (centers_.size() < 2) {
      throw InvalidInputError("level scheme needs at least two centers");
    }
    if (!(width_ > 0.0) || !std::isfinite(width_)) {
      throw InvalidInputError("level width must be positive and finite");
    }
    for (double c : centers_) {
      if (!std::isfinite(c)) {
        throw InvalidInputError("level centers must be finite");
      }
    }
    for (std::size_t i = 1; i < centers_.size(); ++i) {
      const double gap = centers_[i] - centers_[i - 1];
      if (!(gap > 0.0)) {
        throw InvalidInputError("level centers must be strictly increasing");
      }
      if (std::abs(gap - width_) > 1e-9 * width_) {
        throw InvalidInputError("level centers must be spaced by the width");
      }
    }
    if (names_.empty()) {
      names_.reserve(centers_.size());
      for (std::size_t i = 0; i < centers_.size(); ++i) {
        names_.push_back("level" + std::to_string(i));
      }
    } else if (names_.size() != centers_.size()) {
      throw ShapeError("level name count must match center count");
    }
  }

  std::size_t size() const { return centers_.size(); }
  const std::vector<double>& centers() const { return centers_; }
  double center(std::size_t i) const { return centers_[i]; }
  double width() const { return width_; }
  const std::vector<std::string>& names() const { return names_; }

  double min_center() const { return centers_.front(); }
  double max_center() const { return centers_.back(); }
  double center_sum() const {
    return std::accumulate(centers_.begin(), centers_.end(), 0.0);
  }

  bool operator==(const LevelScheme& other) const {
    return centers_ == other.centers_ && width_ == other.width_;
  }

 private:
  std::vector<double> centers_;
  double width_;
  std::vector<std::string> names_;
};

}  // namespace mosdist
