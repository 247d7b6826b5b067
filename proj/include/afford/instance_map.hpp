#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "afford/error.hpp"

namespace afford {

// Pixel coordinates, inclusive at both ends.
struct BoundingBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const { return x_max - x_min + 1; }
  int height() const { return y_max - y_min + 1; }
  bool operator==(const BoundingBox&) const = default;
};

// Scales the box about its center by `factor` per dimension, then clamps to
// the image. New side length is round(old * factor).
BoundingBox expand_bbox(const BoundingBox& box, double factor, int image_width,
                        int image_height);

// H x W grid of instance ids (0 = unlabeled) with per-instance class labels.
class InstanceMap {
 public:
  InstanceMap(int width, int height, std::vector<uint16_t> pixels,
              std::map<int, int> instance_class);

  int width() const { return width_; }
  int height() const { return height_; }
  int pixel(int x, int y) const { return pixels_[static_cast<size_t>(y) * width_ + x]; }
  const std::vector<uint16_t>& pixels() const { return pixels_; }
  const std::map<int, int>& instance_class() const { return instance_class_; }
  int class_of(int instance_id) const;
  size_t instance_count() const { return instance_class_.size(); }

  // 16-bit binary PGM (P5, big-endian samples) plus a JSON sidecar mapping
  // instance id -> class id.
  static InstanceMap load_pgm(const std::string& pgm_path, const std::string& sidecar_path);
  void save_pgm(const std::string& pgm_path, const std::string& sidecar_path) const;

  // {"width":W,"height":H,"pixels":[[...row...],...],"instance_classes":{"1":0,...}}
  static InstanceMap from_json_text(const std::string& text);

 private:
  int width_;
  int height_;
  std::vector<uint16_t> pixels_;
  std::map<int, int> instance_class_;
};

}  // namespace afford
