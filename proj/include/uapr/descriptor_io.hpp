#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uapr/types.hpp"

namespace uapr::io {

// Binary container layout (all little-endian):
//   "UAPR" | u16 version | u32 manifest length | UTF-8 JSON manifest |
//   f32 descriptors [member][entry][dim] | f32 variances [entry][dim] (optional) |
//   f64 poses [entry][3] (optional) | f64 timestamps [entry] (optional)
inline constexpr std::array<char, 4> kMagic{'U', 'A', 'P', 'R'};
inline constexpr std::uint16_t kFormatVersion = 1;

std::vector<std::uint8_t> encode_descriptor_file(const DescriptorSet& set);

/// Throws BadMagic, VersionUnsupported, TruncatedPayload or ManifestMismatch,
/// then runs validate_set on the decoded result.
DescriptorSet decode_descriptor_file(std::span<const std::uint8_t> bytes);

/// Fixture format: one row per entry holding L descriptor values, x, y, z and
/// a timestamp. Blank lines, '#' comments and one non-numeric header row are
/// ignored.
DescriptorSet parse_descriptor_csv(std::string_view text, std::string label = {});
std::string format_descriptor_csv(const DescriptorSet& set);

void write_descriptor_file(const DescriptorSet& set, const std::filesystem::path& path);
void write_descriptor_csv(const DescriptorSet& set, const std::filesystem::path& path);

/// Binary when the file starts with the magic bytes; CSV when it ends in
/// ".csv"; BadMagic otherwise.
DescriptorSet read_descriptor_file(const std::filesystem::path& path);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace uapr::io
