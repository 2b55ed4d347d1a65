#include "edgegeo/image_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace edgegeo {

namespace {

static_assert(std::endian::native == std::endian::little, "writer assumes a little-endian host");

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open " + path);
  return f;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open " + path + " for writing");
  return f;
}

[[noreturn]] void parse_fail(const std::string& path, std::istream& f, const std::string& what) {
  f.clear();  // eof/fail bits would make tellg report -1
  const auto pos = f.tellg();
  throw io_error(path + ": " + what, pos == std::streampos(-1) ? -1 : static_cast<std::int64_t>(pos));
}

// Next whitespace-delimited token, skipping '#' comment lines.
std::string pnm_token(const std::string& path, std::istream& f) {
  std::string tok;
  int c;
  while ((c = f.get()) != EOF) {
    if (c == '#') {
      while ((c = f.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) continue;
    tok.push_back(static_cast<char>(c));
    while ((c = f.get()) != EOF && !std::isspace(c)) tok.push_back(static_cast<char>(c));
    return tok;
  }
  parse_fail(path, f, "unexpected end of header");
}

long parse_long(const std::string& path, std::istream& f, const std::string& tok) {
  size_t used = 0;
  long v = 0;
  try {
    v = std::stol(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size()) parse_fail(path, f, "expected an integer, got '" + tok + "'");
  return v;
}

void read_exact(const std::string& path, std::istream& f, char* dst, size_t n) {
  const auto start = f.tellg();
  f.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<size_t>(f.gcount()) != n) {
    const std::int64_t off =
        start == std::streampos(-1) ? -1 : static_cast<std::int64_t>(start) + f.gcount();
    throw io_error(path + ": truncated pixel data", off);
  }
}

struct PnmHeader {
  std::string magic;
  int width = 0;
  int height = 0;
};

PnmHeader read_pnm_header(const std::string& path, std::istream& f, const char* expect_magic) {
  PnmHeader h;
  h.magic = pnm_token(path, f);
  if (h.magic != expect_magic)
    parse_fail(path, f, std::string("expected magic ") + expect_magic + ", got '" + h.magic + "'");
  h.width = static_cast<int>(parse_long(path, f, pnm_token(path, f)));
  h.height = static_cast<int>(parse_long(path, f, pnm_token(path, f)));
  if (h.width <= 0 || h.height <= 0) parse_fail(path, f, "non-positive dimensions");
  return h;
}

void write_pfm_raw(const std::string& path, int width, int height, int channels, const double* data) {
  auto f = open_out(path);
  f << (channels == 3 ? "PF" : "Pf") << "\n" << width << " " << height << "\n" << "-1.0" << "\n";
  std::vector<float> row(static_cast<size_t>(width) * channels);
  for (int y = height - 1; y >= 0; --y) {
    const double* src = data + static_cast<size_t>(y) * width * channels;
    for (size_t i = 0; i < row.size(); ++i) row[i] = static_cast<float>(src[i]);
    f.write(reinterpret_cast<const char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!f) throw io_error("write failed: " + path);
}

void read_pfm_raw(const std::string& path, int channels_expected, int& width, int& height,
                  std::vector<double>& out) {
  auto f = open_in(path);
  const std::string magic = pnm_token(path, f);
  const int channels = magic == "PF" ? 3 : magic == "Pf" ? 1 : 0;
  if (channels == 0) parse_fail(path, f, "not a PFM file (magic '" + magic + "')");
  if (channels != channels_expected)
    parse_fail(path, f, "expected " + std::to_string(channels_expected) + "-channel PFM");
  width = static_cast<int>(parse_long(path, f, pnm_token(path, f)));
  height = static_cast<int>(parse_long(path, f, pnm_token(path, f)));
  if (width <= 0 || height <= 0) parse_fail(path, f, "non-positive dimensions");
  const std::string scale_tok = pnm_token(path, f);
  double scale = 0.0;
  try {
    scale = std::stod(scale_tok);
  } catch (const std::exception&) {
    parse_fail(path, f, "bad scale field '" + scale_tok + "'");
  }
  if (!(scale < 0.0)) parse_fail(path, f, "big-endian PFM not supported (scale must be negative)");

  out.assign(static_cast<size_t>(width) * height * channels, 0.0);
  std::vector<float> row(static_cast<size_t>(width) * channels);
  for (int y = height - 1; y >= 0; --y) {
    read_exact(path, f, reinterpret_cast<char*>(row.data()), row.size() * sizeof(float));
    double* dst = out.data() + static_cast<size_t>(y) * width * channels;
    for (size_t i = 0; i < row.size(); ++i) dst[i] = row[i];
  }
}

}  // namespace

void write_pfm(const std::string& path, const ScalarMap& m) {
  write_pfm_raw(path, m.width, m.height, 1, m.data.data());
}

void write_pfm(const std::string& path, const NormalMap& m) {
  write_pfm_raw(path, m.width, m.height, 3, m.data.data());
}

ScalarMap read_pfm_scalar(const std::string& path) {
  ScalarMap m;
  read_pfm_raw(path, 1, m.width, m.height, m.data);
  return m;
}

NormalMap read_pfm_normal(const std::string& path) {
  NormalMap m;
  read_pfm_raw(path, 3, m.width, m.height, m.data);
  return m;
}

void write_ppm(const std::string& path, const ImageF& img) {
  if (img.channels != 3) throw validation_error("write_ppm expects a 3-channel image");
  auto f = open_out(path);
  f << "P6\n" << img.width << " " << img.height << "\n255\n";
  std::vector<std::uint8_t> row(static_cast<size_t>(img.width) * 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c)
        row[static_cast<size_t>(x) * 3 + c] =
            static_cast<std::uint8_t>(std::lround(std::clamp(img.at(x, y, c), 0.0, 1.0) * 255.0));
    f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!f) throw io_error("write failed: " + path);
}

ImageF read_ppm(const std::string& path) {
  auto f = open_in(path);
  const PnmHeader h = read_pnm_header(path, f, "P6");
  const long maxval = parse_long(path, f, pnm_token(path, f));
  if (maxval != 255) parse_fail(path, f, "only maxval 255 PPM supported");
  ImageF img(h.width, h.height, 3);
  std::vector<std::uint8_t> row(static_cast<size_t>(h.width) * 3);
  for (int y = 0; y < h.height; ++y) {
    read_exact(path, f, reinterpret_cast<char*>(row.data()), row.size());
    for (int x = 0; x < h.width; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = row[static_cast<size_t>(x) * 3 + c] / 255.0;
  }
  return img;
}

void write_pgm8(const std::string& path, const ImageF& img) {
  if (img.channels != 1) throw validation_error("write_pgm8 expects a 1-channel image");
  auto f = open_out(path);
  f << "P5\n" << img.width << " " << img.height << "\n255\n";
  std::vector<std::uint8_t> row(static_cast<size_t>(img.width));
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x)
      row[x] = static_cast<std::uint8_t>(std::lround(std::clamp(img.at(x, y, 0), 0.0, 1.0) * 255.0));
    f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!f) throw io_error("write failed: " + path);
}

ImageF read_pgm8(const std::string& path) {
  auto f = open_in(path);
  const PnmHeader h = read_pnm_header(path, f, "P5");
  const long maxval = parse_long(path, f, pnm_token(path, f));
  if (maxval <= 0 || maxval > 255) parse_fail(path, f, "expected 8-bit PGM");
  ImageF img(h.width, h.height, 1);
  std::vector<std::uint8_t> row(static_cast<size_t>(h.width));
  for (int y = 0; y < h.height; ++y) {
    read_exact(path, f, reinterpret_cast<char*>(row.data()), row.size());
    for (int x = 0; x < h.width; ++x) img.at(x, y, 0) = row[x] / static_cast<double>(maxval);
  }
  return img;
}

void write_pgm8_binary(const std::string& path, const BinaryMap& m) {
  ImageF img(m.width, m.height, 1);
  for (size_t i = 0; i < m.data.size(); ++i) img.data[i] = m.data[i] ? 1.0 : 0.0;
  write_pgm8(path, img);
}

BinaryMap read_pgm8_binary(const std::string& path) {
  const ImageF img = read_pgm8(path);
  BinaryMap m(img.width, img.height);
  for (size_t i = 0; i < m.data.size(); ++i) m.data[i] = img.data[i] > 0.5 ? 1 : 0;
  return m;
}

void write_pgm16(const std::string& path, int width, int height, const std::vector<std::uint16_t>& data) {
  if (data.size() != static_cast<size_t>(width) * height)
    throw validation_error("write_pgm16: data size mismatch");
  auto f = open_out(path);
  f << "P5\n" << width << " " << height << "\n65535\n";
  for (std::uint16_t v : data) {
    const std::uint8_t hi = static_cast<std::uint8_t>(v >> 8);
    const std::uint8_t lo = static_cast<std::uint8_t>(v & 0xff);
    f.put(static_cast<char>(hi));
    f.put(static_cast<char>(lo));
  }
  if (!f) throw io_error("write failed: " + path);
}

std::vector<std::uint16_t> read_pgm16(const std::string& path, int& width, int& height) {
  auto f = open_in(path);
  const PnmHeader h = read_pnm_header(path, f, "P5");
  const long maxval = parse_long(path, f, pnm_token(path, f));
  if (maxval != 65535) parse_fail(path, f, "expected 16-bit PGM (maxval 65535)");
  width = h.width;
  height = h.height;
  std::vector<std::uint16_t> out(static_cast<size_t>(width) * height);
  std::vector<std::uint8_t> raw(out.size() * 2);
  read_exact(path, f, reinterpret_cast<char*>(raw.data()), raw.size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
  return out;
}

}  // namespace edgegeo
