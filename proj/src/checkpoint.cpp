#include "afford/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "afford/error.hpp"

namespace afford {

namespace {

constexpr char kMagic[8] = {'A', 'F', 'G', 'C', 'K', 'P', 'T', '1'};

void write_u32(std::ostream& os, uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_i64(std::ostream& os, int64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void write_values(std::ostream& os, const Tensor& t, Precision p) {
  if (p == Precision::f64) {
    os.write(reinterpret_cast<const char*>(t.data()),
             static_cast<std::streamsize>(t.size() * sizeof(double)));
  } else {
    std::vector<float> narrow(static_cast<size_t>(t.size()));
    for (int i = 0; i < t.size(); ++i) narrow[static_cast<size_t>(i)] = static_cast<float>(t[i]);
    os.write(reinterpret_cast<const char*>(narrow.data()),
             static_cast<std::streamsize>(narrow.size() * sizeof(float)));
  }
}

uint32_t read_u32(std::istream& is) {
  uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

int64_t read_i64(std::istream& is) {
  int64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

std::string read_string(std::istream& is) {
  uint32_t n = read_u32(is);
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  return s;
}

Tensor read_values(std::istream& is, std::vector<int> shape, Precision p) {
  Tensor t = Tensor::zeros(std::move(shape));
  if (p == Precision::f64) {
    is.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
  } else {
    std::vector<float> narrow(static_cast<size_t>(t.size()));
    is.read(reinterpret_cast<char*>(narrow.data()),
            static_cast<std::streamsize>(narrow.size() * sizeof(float)));
    for (int i = 0; i < t.size(); ++i) t[i] = static_cast<double>(narrow[static_cast<size_t>(i)]);
  }
  return t;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& store, int epoch,
                     Precision precision, const std::map<std::string, std::string>& meta) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open checkpoint for writing: " + path);
  os.write(kMagic, sizeof kMagic);
  write_u32(os, precision == Precision::f64 ? 0u : 1u);
  write_i64(os, store.step());
  write_i64(os, epoch);
  write_u32(os, static_cast<uint32_t>(meta.size()));
  for (const auto& [k, v] : meta) {
    write_string(os, k);
    write_string(os, v);
  }
  write_u32(os, static_cast<uint32_t>(store.size()));
  for (const auto& [name, p] : store.entries()) {
    write_string(os, name);
    write_u32(os, static_cast<uint32_t>(p.value.rank()));
    for (int d : p.value.shape()) write_u32(os, static_cast<uint32_t>(d));
    write_values(os, p.value, precision);
    write_values(os, p.m, precision);
    write_values(os, p.v, precision);
  }
  if (!os) throw DataError("short write while saving checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw DataError("not a checkpoint file: " + path);
  }
  Checkpoint ck;
  uint32_t prec = read_u32(is);
  if (prec > 1) throw DataError("checkpoint has unknown precision tag: " + path);
  ck.precision = prec == 0 ? Precision::f64 : Precision::f32;
  int64_t step = read_i64(is);
  ck.epoch = static_cast<int>(read_i64(is));
  uint32_t n_meta = read_u32(is);
  for (uint32_t i = 0; i < n_meta; ++i) {
    std::string k = read_string(is);
    ck.meta[k] = read_string(is);
  }
  uint32_t n_params = read_u32(is);
  for (uint32_t i = 0; i < n_params; ++i) {
    std::string name = read_string(is);
    uint32_t rank = read_u32(is);
    std::vector<int> shape;
    for (uint32_t d = 0; d < rank; ++d) shape.push_back(static_cast<int>(read_u32(is)));
    Param& p = ck.store.add(name, read_values(is, shape, ck.precision));
    p.m = read_values(is, shape, ck.precision);
    p.v = read_values(is, shape, ck.precision);
  }
  ck.store.set_step(step);
  if (!is) throw DataError("truncated checkpoint: " + path);
  return ck;
}

}  // namespace afford
