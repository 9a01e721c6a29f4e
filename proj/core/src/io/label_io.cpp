#include "semvox/io/label_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <regex>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace semvox::io {
namespace {

constexpr char kNpyMagic[] = "\x93NUMPY";

}  // namespace

semantics::LabelMask read_mask(const std::filesystem::path& path) {
  const cv::Mat img = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (img.empty()) throw CorruptMaskError("cannot decode mask '" + path.string() + "'");
  if (img.type() != CV_8UC1) {
    throw CorruptMaskError("mask '" + path.string() + "' is not single-channel 8-bit");
  }
  semantics::LabelMask mask(img.cols, img.rows);
  for (int v = 0; v < img.rows; ++v) {
    const auto* row = img.ptr<std::uint8_t>(v);
    std::memcpy(mask.raw().data() + static_cast<std::size_t>(v) * img.cols, row,
                static_cast<std::size_t>(img.cols));
  }
  return mask;
}

void write_mask(const std::filesystem::path& path, const semantics::LabelMask& mask) {
  cv::Mat img(mask.height(), mask.width(), CV_8UC1);
  for (int v = 0; v < mask.height(); ++v) {
    std::memcpy(img.ptr<std::uint8_t>(v),
                mask.raw().data() + static_cast<std::size_t>(v) * mask.width(),
                static_cast<std::size_t>(mask.width()));
  }
  if (!cv::imwrite(path.string(), img)) {
    throw ConfigurationError("cannot write mask '" + path.string() + "'");
  }
}

ConfidenceImage read_npy_confidence(const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot read '" + path.string() + "'");
  const auto bad = [&](const std::string& why) {
    return ConfigurationError("'" + path.string() + "': " + why);
  };
  char magic[6];
  if (!in.read(magic, 6) || std::memcmp(magic, kNpyMagic, 6) != 0) throw bad("not a .npy file");
  unsigned char version[2];
  in.read(reinterpret_cast<char*>(version), 2);
  std::uint32_t header_len = 0;
  if (version[0] == 1) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    header_len = b[0] | (b[1] << 8);
  } else if (version[0] == 2 || version[0] == 3) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    header_len = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  } else {
    throw bad("unsupported .npy version");
  }
  std::string header(header_len, '\0');
  if (!in.read(header.data(), header_len)) throw bad("truncated header");

  std::smatch m;
  if (!std::regex_search(header, m, std::regex(R"('descr'\s*:\s*'([^']*)')")) ||
      (m[1] != "<f4" && m[1] != "=f4")) {
    throw bad("expected little-endian float32 data");
  }
  if (std::regex_search(header, std::regex(R"('fortran_order'\s*:\s*True)"))) {
    throw bad("Fortran-ordered arrays are not supported");
  }
  if (!std::regex_search(header, m,
                         std::regex(R"('shape'\s*:\s*\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*,?\s*\))"))) {
    throw bad("expected a 3-D (H, W, C) array");
  }
  const int h = std::stoi(m[1]);
  const int w = std::stoi(m[2]);
  const std::size_t c = std::stoul(m[3]);
  if (h <= 0 || w <= 0 || c == 0) throw bad("empty array");
  ConfidenceImage img(w, h, c);
  std::vector<float> data(static_cast<std::size_t>(h) * w * c);
  if (!in.read(reinterpret_cast<char*>(data.data()),
               static_cast<std::streamsize>(data.size() * sizeof(float)))) {
    throw bad("truncated data");
  }
  std::size_t i = 0;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      auto px = img.at(u, v);
      for (std::size_t k = 0; k < c; ++k) px[k] = data[i++];
    }
  }
  return img;
}

void write_npy_confidence(const std::filesystem::path& path, const ConfidenceImage& image) {
  std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': (" +
                       std::to_string(image.height()) + ", " + std::to_string(image.width()) +
                       ", " + std::to_string(image.num_classes()) + "), }";
  const std::size_t total = 10 + header.size() + 1;
  header.append((64 - total % 64) % 64, ' ');
  header += '\n';
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("cannot write '" + path.string() + "'");
  out.write(kNpyMagic, 6);
  out.put(1);
  out.put(0);
  const auto len = static_cast<std::uint16_t>(header.size());
  out.put(static_cast<char>(len & 0xff));
  out.put(static_cast<char>(len >> 8));
  out << header;
  for (int v = 0; v < image.height(); ++v) {
    for (int u = 0; u < image.width(); ++u) {
      const auto px = image.at(u, v);
      out.write(reinterpret_cast<const char*>(px.data()),
                static_cast<std::streamsize>(px.size() * sizeof(float)));
    }
  }
  if (!out) throw ConfigurationError("failed writing '" + path.string() + "'");
}

}  // namespace semvox::io
