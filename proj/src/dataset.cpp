#include "spreadpool/dataset.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "spreadpool/errors.hpp"

namespace spreadpool {

namespace {

template <typename U>
void put_le(std::vector<char>& buf, U value) {
  for (std::size_t b = 0; b < sizeof(U); ++b) {
    buf.push_back(static_cast<char>((value >> (8 * b)) & 0xFF));
  }
}

void put_f64(std::vector<char>& buf, double v) { put_le(buf, std::bit_cast<std::uint64_t>(v)); }
void put_f32(std::vector<char>& buf, float v) { put_le(buf, std::bit_cast<std::uint32_t>(v)); }

class Reader {
 public:
  Reader(const std::vector<char>& data, const std::filesystem::path& path) : data_(data), path_(path) {}

  template <typename U>
  U get() {
    if (pos_ + sizeof(U) > data_.size()) throw IoError("truncated file " + path_.string());
    U value = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b) {
      value |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + b])) << (8 * b);
    }
    pos_ += sizeof(U);
    return value;
  }
  double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  float f32() { return std::bit_cast<float>(get<std::uint32_t>()); }

  void expect_magic(const char (&magic)[4]) {
    if (data_.size() < 4 || std::memcmp(data_.data(), magic, 4) != 0) {
      throw IoError("bad magic in " + path_.string());
    }
    pos_ = 4;
  }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  const std::vector<char>& data_;
  const std::filesystem::path& path_;
  std::size_t pos_ = 0;
};

void write_file(const std::filesystem::path& path, const std::vector<char>& buf) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open " + path.string());
  const auto size = static_cast<std::size_t>(in.tellg());
  std::vector<char> buf(size);
  in.seekg(0);
  in.read(buf.data(), static_cast<std::streamsize>(size));
  if (!in) throw IoError("failed reading " + path.string());
  return buf;
}

}  // namespace

void write_dataset(const std::filesystem::path& path, const FrustumBatchView& batch) {
  batch.validate_shape();
  std::vector<char> buf;
  buf.reserve(dataset_size_bytes(batch.n, batch.channels));
  buf.insert(buf.end(), kDatasetMagic, kDatasetMagic + 4);
  put_le(buf, kDatasetVersion);
  put_le(buf, static_cast<std::uint64_t>(batch.n));
  put_le(buf, static_cast<std::uint32_t>(batch.channels));
  for (double v : batch.positions) put_f64(buf, v);
  for (double v : batch.depths) put_f64(buf, v);
  for (float v : batch.features) put_f32(buf, v);
  write_file(path, buf);
}

FrustumBatch read_dataset(const std::filesystem::path& path) {
  const std::vector<char> data = read_file(path);
  Reader r(data, path);
  r.expect_magic(kDatasetMagic);
  const auto version = r.get<std::uint16_t>();
  if (version != kDatasetVersion) {
    throw IoError("unsupported dataset version " + std::to_string(version) + " in " + path.string());
  }
  const auto n = r.get<std::uint64_t>();
  const auto channels = r.get<std::uint32_t>();
  if (r.remaining() != dataset_size_bytes(n, channels) - kDatasetHeaderBytes) {
    throw IoError("dataset " + path.string() + " has the wrong payload size");
  }
  FrustumBatch batch(n, channels);
  for (double& v : batch.positions) v = r.f64();
  for (double& v : batch.depths) v = r.f64();
  for (float& v : batch.features) v = r.f32();
  return batch;
}

void write_feature_map(const std::filesystem::path& path, const BevFeatureMap& map) {
  std::vector<char> buf;
  buf.reserve(4 + 2 + 12 + map.values.size() * 4);
  buf.insert(buf.end(), kMapMagic, kMapMagic + 4);
  put_le(buf, kMapVersion);
  put_le(buf, static_cast<std::uint32_t>(map.nx));
  put_le(buf, static_cast<std::uint32_t>(map.ny));
  put_le(buf, static_cast<std::uint32_t>(map.channels));
  for (float v : map.values) put_f32(buf, v);
  write_file(path, buf);
}

BevFeatureMap read_feature_map(const std::filesystem::path& path) {
  const std::vector<char> data = read_file(path);
  Reader r(data, path);
  r.expect_magic(kMapMagic);
  const auto version = r.get<std::uint16_t>();
  if (version != kMapVersion) throw IoError("unsupported map version in " + path.string());
  BevFeatureMap map;
  map.nx = r.get<std::uint32_t>();
  map.ny = r.get<std::uint32_t>();
  map.channels = r.get<std::uint32_t>();
  const std::size_t count = static_cast<std::size_t>(map.nx * map.ny) * map.channels;
  if (r.remaining() != count * 4) throw IoError("map " + path.string() + " has the wrong payload size");
  map.values.resize(count);
  for (float& v : map.values) v = r.f32();
  return map;
}

FrustumBatch gen_scene(const SceneConfig& config) {
  config.grid.validate();
  if (!(config.depth_min > 0.0) || !(config.depth_min <= config.depth_max)) {
    throw ConfigError("depth range must satisfy 0 < min <= max");
  }
  std::mt19937_64 rng(config.seed);
  const PointBEV lo = config.grid.extent_min();
  const PointBEV hi = config.grid.extent_max();
  std::uniform_real_distribution<double> ux(lo.x, hi.x);
  std::uniform_real_distribution<double> uy(lo.y, hi.y);
  std::uniform_real_distribution<double> ud(config.depth_min, config.depth_max);
  std::normal_distribution<float> normal(0.0f, 1.0f);

  FrustumBatch batch(config.n, config.channels);
  for (std::size_t p = 0; p < config.n; ++p) {
    batch.positions[2 * p] = ux(rng);
    batch.positions[2 * p + 1] = uy(rng);
  }
  for (double& d : batch.depths) d = ud(rng);
  for (float& f : batch.features) f = normal(rng);
  return batch;
}

}  // namespace spreadpool
