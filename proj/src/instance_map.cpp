#include "afford/instance_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace afford {

BoundingBox expand_bbox(const BoundingBox& box, double factor, int image_width,
                        int image_height) {
  if (factor < 1.0) throw DataError("expand_bbox: factor must be >= 1");
  auto scale = [factor](int lo, int hi, int bound) {
    double center = 0.5 * (lo + hi);
    long side = std::lround((hi - lo + 1) * factor);
    long new_lo = std::lround(center - 0.5 * (side - 1));
    long new_hi = new_lo + side - 1;
    new_lo = std::clamp(new_lo, 0l, static_cast<long>(bound - 1));
    new_hi = std::clamp(new_hi, 0l, static_cast<long>(bound - 1));
    return std::pair<int, int>(static_cast<int>(new_lo), static_cast<int>(new_hi));
  };
  BoundingBox out;
  std::tie(out.x_min, out.x_max) = scale(box.x_min, box.x_max, image_width);
  std::tie(out.y_min, out.y_max) = scale(box.y_min, box.y_max, image_height);
  return out;
}

InstanceMap::InstanceMap(int width, int height, std::vector<uint16_t> pixels,
                         std::map<int, int> instance_class)
    : width_(width), height_(height), pixels_(std::move(pixels)),
      instance_class_(std::move(instance_class)) {
  if (width_ <= 0 || height_ <= 0) throw DataError("instance map dimensions must be positive");
  if (pixels_.size() != static_cast<size_t>(width_) * height_) {
    throw DataError("instance map pixel buffer size does not match dimensions");
  }
  std::set<int> seen;
  for (uint16_t id : pixels_) {
    if (id != 0) seen.insert(id);
  }
  for (int id : seen) {
    if (!instance_class_.count(id)) {
      throw DataError("instance id " + std::to_string(id) +
                      " appears in pixels but has no class label");
    }
  }
  for (const auto& [id, cls] : instance_class_) {
    if (id <= 0) throw DataError("instance ids must be positive, got " + std::to_string(id));
    if (cls < 0) throw DataError("class ids must be non-negative");
    if (!seen.count(id)) {
      throw DataError("instance id " + std::to_string(id) + " has a class label but no pixels");
    }
  }
}

int InstanceMap::class_of(int instance_id) const {
  auto it = instance_class_.find(instance_id);
  if (it == instance_class_.end()) {
    throw DataError("unknown instance id " + std::to_string(instance_id));
  }
  return it->second;
}

namespace {

std::map<int, int> read_sidecar(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open instance-class sidecar: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad JSON in " + path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("instance_classes")) {
    throw DataError(path + ": expected an object with 'instance_classes'");
  }
  std::map<int, int> out;
  for (const auto& [key, val] : j.at("instance_classes").items()) {
    out[std::stoi(key)] = val.get<int>();
  }
  return out;
}

int read_pnm_token(std::istream& is) {
  // Skips whitespace and '#' comments per the netpbm grammar.
  while (true) {
    int c = is.peek();
    if (c == '#') {
      std::string line;
      std::getline(is, line);
    } else if (std::isspace(c)) {
      is.get();
    } else {
      break;
    }
  }
  int value = 0;
  if (!(is >> value)) throw DataError("malformed PGM header");
  return value;
}

}  // namespace

InstanceMap InstanceMap::load_pgm(const std::string& pgm_path, const std::string& sidecar_path) {
  std::ifstream is(pgm_path, std::ios::binary);
  if (!is) throw DataError("cannot open PGM: " + pgm_path);
  std::string magic(2, '\0');
  is.read(magic.data(), 2);
  if (magic != "P5") throw DataError(pgm_path + ": expected binary PGM (P5)");
  int width = read_pnm_token(is);
  int height = read_pnm_token(is);
  int maxval = read_pnm_token(is);
  if (maxval <= 0 || maxval > 65535) throw DataError(pgm_path + ": bad maxval");
  is.get();  // single whitespace after maxval
  std::vector<uint16_t> pixels(static_cast<size_t>(width) * height);
  if (maxval < 256) {
    std::vector<uint8_t> raw(pixels.size());
    is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    for (size_t i = 0; i < raw.size(); ++i) pixels[i] = raw[i];
  } else {
    // 16-bit samples are most-significant byte first.
    std::vector<uint8_t> raw(pixels.size() * 2);
    is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    for (size_t i = 0; i < pixels.size(); ++i) {
      pixels[i] = static_cast<uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    }
  }
  if (!is) throw DataError(pgm_path + ": truncated pixel data");
  return InstanceMap(width, height, std::move(pixels), read_sidecar(sidecar_path));
}

void InstanceMap::save_pgm(const std::string& pgm_path, const std::string& sidecar_path) const {
  std::ofstream os(pgm_path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot write PGM: " + pgm_path);
  os << "P5\n" << width_ << " " << height_ << "\n65535\n";
  std::vector<uint8_t> raw(pixels_.size() * 2);
  for (size_t i = 0; i < pixels_.size(); ++i) {
    raw[2 * i] = static_cast<uint8_t>(pixels_[i] >> 8);
    raw[2 * i + 1] = static_cast<uint8_t>(pixels_[i] & 0xff);
  }
  os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));

  nlohmann::json classes = nlohmann::json::object();
  for (const auto& [id, cls] : instance_class_) classes[std::to_string(id)] = cls;
  nlohmann::json j;
  j["instance_classes"] = classes;
  std::ofstream sos(sidecar_path, std::ios::trunc);
  if (!sos) throw DataError("cannot write sidecar: " + sidecar_path);
  sos << j.dump(2) << "\n";
}

InstanceMap InstanceMap::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad instance-map JSON: ") + e.what());
  }
  int width = j.at("width").get<int>();
  int height = j.at("height").get<int>();
  std::vector<uint16_t> pixels;
  pixels.reserve(static_cast<size_t>(width) * height);
  for (const auto& row : j.at("pixels")) {
    for (const auto& v : row) pixels.push_back(v.get<uint16_t>());
  }
  std::map<int, int> classes;
  for (const auto& [key, val] : j.at("instance_classes").items()) {
    classes[std::stoi(key)] = val.get<int>();
  }
  return InstanceMap(width, height, std::move(pixels), std::move(classes));
}

}  // namespace afford
