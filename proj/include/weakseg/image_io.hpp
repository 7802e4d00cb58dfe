#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "weakseg/imaging.hpp"

namespace weakseg {

/// Decodes an 8-bit grayscale PNG or a binary PGM (P5), picked by signature.
/// Color and low-bit-depth PNGs are converted to 8-bit gray.
GrayImage decode_image(std::span<const std::uint8_t> bytes);
GrayImage read_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const GrayImage& img);
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);

/// Writes PNG or PGM depending on the file extension (".pgm" selects PGM).
void write_image(const std::filesystem::path& path, const GrayImage& img);

/// Set pixels become 255, unset 0.
GrayImage mask_to_image(const BinaryMask& mask);
/// Any nonzero pixel is set.
BinaryMask image_to_mask(const GrayImage& img);

BinaryMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const BinaryMask& mask);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace weakseg
