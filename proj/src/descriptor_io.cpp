#include "uapr/descriptor_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>
#include <limits>
#include <type_traits>

#include <json.hpp>

namespace uapr::io {

namespace {

using nlohmann::json;

template <typename UInt>
void put_le(std::vector<std::uint8_t>& out, UInt value) {
  for (std::size_t b = 0; b < sizeof(UInt); ++b) {
    out.push_back(static_cast<std::uint8_t>(value >> (8 * b)));
  }
}

template <typename UInt>
UInt get_le(const std::uint8_t* in) {
  UInt value = 0;
  for (std::size_t b = 0; b < sizeof(UInt); ++b) value |= static_cast<UInt>(in[b]) << (8 * b);
  return value;
}

void put_f32(std::vector<std::uint8_t>& out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::vector<std::uint8_t>& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }

  const std::uint8_t* take(std::size_t n) {
    if (remaining() < n) throw Error(ErrorCode::TruncatedPayload, "file ends inside the payload");
    const std::uint8_t* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  float f32() { return std::bit_cast<float>(get_le<std::uint32_t>(take(4))); }
  double f64() { return std::bit_cast<double>(get_le<std::uint64_t>(take(8))); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    throw Error(ErrorCode::ManifestMismatch, "manifest sizes overflow");
  }
  return a * b;
}

template <typename T>
T manifest_field(const json& manifest, const char* key) {
  const auto it = manifest.find(key);
  if (it == manifest.end()) throw Error(ErrorCode::ManifestMismatch, std::string("manifest lacks ") + key);
  if constexpr (std::is_same_v<T, std::size_t>) {
    if (!it->is_number_unsigned()) {
      throw Error(ErrorCode::ManifestMismatch, std::string("manifest field must be unsigned: ") + key);
    }
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::ManifestMismatch, std::string("manifest field has wrong type: ") + key);
  }
}

template <typename T>
void append_number(std::string& out, T value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, end);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

/// Splits on commas and parses every field; nullopt when any field is not a number.
std::optional<std::vector<double>> parse_row(std::string_view line) {
  std::vector<double> values;
  while (true) {
    const std::size_t comma = line.find(',');
    const std::string_view field = trim(line.substr(0, comma));
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) return std::nullopt;
    values.push_back(v);
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return values;
}

}  // namespace

std::vector<std::uint8_t> encode_descriptor_file(const DescriptorSet& set) {
  const json manifest = {
      {"count", set.count},
      {"dim", set.dim},
      {"members", set.member_count()},
      {"has_variances", set.has_variances()},
      {"has_poses", set.has_poses},
      {"has_timestamps", set.has_timestamps},
      {"label", set.label},
  };
  const std::string text = manifest.dump();
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  put_le(out, kFormatVersion);
  put_le(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& member : set.members) {
    for (float v : member) put_f32(out, v);
  }
  for (float v : set.variances) put_f32(out, v);
  if (set.has_poses) {
    for (const Pose& p : set.poses) {
      for (double c : p) put_f64(out, c);
    }
  }
  if (set.has_timestamps) {
    for (double t : set.timestamps) put_f64(out, t);
  }
  return out;
}

DescriptorSet decode_descriptor_file(std::span<const std::uint8_t> bytes) {
  const std::size_t probe = std::min(bytes.size(), kMagic.size());
  if (!std::equal(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(probe), kMagic.begin())) {
    throw Error(ErrorCode::BadMagic, "not a UAPR descriptor file");
  }
  Reader in(bytes);
  in.take(kMagic.size());
  const auto version = get_le<std::uint16_t>(in.take(2));
  if (version != kFormatVersion) {
    throw Error(ErrorCode::VersionUnsupported, "format version " + std::to_string(version));
  }
  const auto manifest_size = get_le<std::uint32_t>(in.take(4));
  const std::uint8_t* text = in.take(manifest_size);
  json manifest;
  try {
    manifest = json::parse(text, text + manifest_size);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ManifestMismatch, std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!manifest.is_object()) throw Error(ErrorCode::ManifestMismatch, "manifest is not an object");

  DescriptorSet set;
  set.count = manifest_field<std::size_t>(manifest, "count");
  set.dim = manifest_field<std::size_t>(manifest, "dim");
  const auto members = manifest_field<std::size_t>(manifest, "members");
  const bool has_variances = manifest_field<bool>(manifest, "has_variances");
  set.has_poses = manifest_field<bool>(manifest, "has_poses");
  set.has_timestamps = manifest_field<bool>(manifest, "has_timestamps");
  set.label = manifest_field<std::string>(manifest, "label");
  if (set.dim == 0 || members == 0) throw Error(ErrorCode::ManifestMismatch, "dim and members must be >= 1");

  const std::uint64_t values = checked_mul(set.count, set.dim);
  std::uint64_t needed = checked_mul(checked_mul(values, members), 4);
  if (has_variances) needed += checked_mul(values, 4);
  if (set.has_poses) needed += checked_mul(set.count, 24);
  if (set.has_timestamps) needed += checked_mul(set.count, 8);
  if (in.remaining() < needed) {
    throw Error(ErrorCode::TruncatedPayload, "payload holds " + std::to_string(in.remaining()) +
                                                 " bytes, manifest declares " + std::to_string(needed));
  }
  if (in.remaining() > needed) {
    throw Error(ErrorCode::ManifestMismatch, "payload is longer than the manifest declares");
  }

  set.members.assign(members, std::vector<float>(values));
  for (auto& member : set.members) {
    for (float& v : member) v = in.f32();
  }
  if (has_variances) {
    set.variances.resize(values);
    for (float& v : set.variances) v = in.f32();
  }
  set.poses.assign(set.count, Pose{0.0, 0.0, 0.0});
  if (set.has_poses) {
    for (Pose& p : set.poses) {
      for (double& c : p) c = in.f64();
    }
  }
  set.timestamps.assign(set.count, 0.0);
  if (set.has_timestamps) {
    for (double& t : set.timestamps) t = in.f64();
  }
  return validate_set(std::move(set));
}

DescriptorSet parse_descriptor_csv(std::string_view text, std::string label) {
  DescriptorSet set;
  set.label = std::move(label);
  set.members.resize(1);
  set.has_poses = true;
  set.has_timestamps = true;
  bool header_allowed = true;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    const std::string_view line = trim(text.substr(0, eol));
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto row = parse_row(line);
    if (!row) {
      if (header_allowed) {
        header_allowed = false;
        continue;
      }
      throw Error(ErrorCode::NonFiniteValue, "CSV line " + std::to_string(line_no) + " is not numeric");
    }
    header_allowed = false;
    if (row->size() < 5) {
      throw Error(ErrorCode::DimensionMismatch,
                  "CSV line " + std::to_string(line_no) + " needs L >= 1 values plus x, y, z, t");
    }
    const std::size_t dim = row->size() - 4;
    if (set.count == 0) set.dim = dim;
    if (dim != set.dim) {
      throw Error(ErrorCode::DimensionMismatch, "CSV line " + std::to_string(line_no) + " has " +
                                                    std::to_string(dim) + " values, expected " +
                                                    std::to_string(set.dim));
    }
    for (std::size_t l = 0; l < dim; ++l) set.members[0].push_back(static_cast<float>((*row)[l]));
    set.poses.push_back({(*row)[dim], (*row)[dim + 1], (*row)[dim + 2]});
    set.timestamps.push_back((*row)[dim + 3]);
    ++set.count;
  }
  if (set.count == 0) throw Error(ErrorCode::DimensionMismatch, "CSV holds no entries");
  return validate_set(std::move(set));
}

std::string format_descriptor_csv(const DescriptorSet& set) {
  std::string out = "# " + std::to_string(set.dim) + " descriptor values, x, y, z, timestamp\n";
  for (std::size_t i = 0; i < set.count; ++i) {
    for (float v : set.row(0, i)) {
      append_number(out, v);
      out += ',';
    }
    for (double c : set.poses[i]) {
      append_number(out, c);
      out += ',';
    }
    append_number(out, set.timestamps[i]);
    out += '\n';
  }
  return out;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

void write_descriptor_file(const DescriptorSet& set, const std::filesystem::path& path) {
  write_bytes(path, encode_descriptor_file(set));
}

void write_descriptor_csv(const DescriptorSet& set, const std::filesystem::path& path) {
  const std::string text = format_descriptor_csv(set);
  write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

DescriptorSet read_descriptor_file(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_bytes(path);
  const bool binary = bytes.size() >= kMagic.size() && std::equal(kMagic.begin(), kMagic.end(), bytes.begin());
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (!binary && ext == ".csv") {
    return parse_descriptor_csv(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                                path.stem().string());
  }
  return decode_descriptor_file(bytes);
}

}  // namespace uapr::io
