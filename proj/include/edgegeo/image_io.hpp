#pragma once

#include <string>

#include "edgegeo/image.hpp"

namespace edgegeo {

/// PFM, little-endian (scale -1.0), float32, rows stored bottom-up.
/// "Pf" for one channel, "PF" for three. Round trips are bit exact at
/// float32 precision.
void write_pfm(const std::string& path, const ScalarMap& m);
void write_pfm(const std::string& path, const NormalMap& m);
ScalarMap read_pfm_scalar(const std::string& path);
NormalMap read_pfm_normal(const std::string& path);

/// Binary PPM (P6, maxval 255). Values are quantized with round(v * 255);
/// u8 -> [0,1] -> u8 round trips exactly.
void write_ppm(const std::string& path, const ImageF& img);  // 3 channels
ImageF read_ppm(const std::string& path);

/// Binary PGM (P5). 8-bit for intensity / binary maps, 16-bit (MSB first)
/// for label maps.
void write_pgm8(const std::string& path, const ImageF& img);  // 1 channel
ImageF read_pgm8(const std::string& path);
void write_pgm8_binary(const std::string& path, const BinaryMap& m);  // {0, 255}
BinaryMap read_pgm8_binary(const std::string& path);
void write_pgm16(const std::string& path, int width, int height, const std::vector<std::uint16_t>& data);
std::vector<std::uint16_t> read_pgm16(const std::string& path, int& width, int& height);

}  // namespace edgegeo
