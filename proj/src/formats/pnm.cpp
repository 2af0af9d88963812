#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dmaze/formats.hpp"

namespace dmaze {

std::uint8_t quantize(float v) {
  const double c = std::clamp(static_cast<double>(v), 0.0, 1.0);
  return static_cast<std::uint8_t>(std::floor(255.0 * c + 0.5));
}

Image render_plane(const ObservationTensor& obs, int channel) {
  if (channel < 0 || channel >= obs.channels)
    throw std::invalid_argument("render: channel out of range");
  Image img{obs.width, obs.height, 1, {}};
  for (float v : obs.plane(channel)) img.pixels.push_back(quantize(v));
  return img;
}

Image render_observation(const ObservationTensor& obs, Representation representation) {
  if (obs.channels < content_channels(representation))
    throw std::invalid_argument("render: observation has too few channels");
  if (representation == Representation::Grayscale) return render_plane(obs, 0);
  // Source plane for R, G, B.
  const std::array<int, 3> src = representation == Representation::Raw
                                     ? std::array<int, 3>{1, 2, 0}
                                     : std::array<int, 3>{0, 1, 2};
  Image img{obs.width, obs.height, 3, {}};
  img.pixels.reserve(obs.plane_size() * 3);
  for (int y = 0; y < obs.height; ++y)
    for (int x = 0; x < obs.width; ++x)
      for (int c : src) img.pixels.push_back(quantize(obs.at(c, y, x)));
  return img;
}

Image side_by_side(const Image& left, const Image& right) {
  if (left.height != right.height || left.channels != right.channels)
    throw std::invalid_argument("side_by_side: heights or channel counts differ");
  Image out{left.width + right.width, left.height, left.channels, {}};
  const auto lrow = static_cast<std::size_t>(left.width * left.channels);
  const auto rrow = static_cast<std::size_t>(right.width * right.channels);
  for (int y = 0; y < left.height; ++y) {
    const auto yy = static_cast<std::size_t>(y);
    out.pixels.insert(out.pixels.end(), left.pixels.begin() + static_cast<long>(yy * lrow),
                      left.pixels.begin() + static_cast<long>((yy + 1) * lrow));
    out.pixels.insert(out.pixels.end(), right.pixels.begin() + static_cast<long>(yy * rrow),
                      right.pixels.begin() + static_cast<long>((yy + 1) * rrow));
  }
  return out;
}

Bytes encode_pnm(const Image& image) {
  if (image.channels != 1 && image.channels != 3)
    throw std::invalid_argument("pnm: channels must be 1 or 3");
  if (image.width < 1 || image.height < 1 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) * image.height *
                                 static_cast<std::size_t>(image.channels))
    throw std::invalid_argument("pnm: pixel count does not match dimensions");
  const std::string header = std::string(image.channels == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(image.width) + " " +
                             std::to_string(image.height) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

Image decode_pnm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto fail = [](const std::string& msg) -> void {
    throw std::invalid_argument("pnm: " + msg);
  };
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&]() -> int {
    skip_space();
    long value = 0;
    const std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(bytes[pos]) && value < (1L << 24))
      value = value * 10 + (bytes[pos++] - '0');
    if (pos == start) fail("expected a number");
    return static_cast<int>(value);
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    fail("not a binary P5/P6 file");
  Image img;
  img.channels = bytes[1] == '5' ? 1 : 3;
  pos = 2;
  img.width = number();
  img.height = number();
  if (number() != 255) fail("maxval must be 255");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) fail("missing header terminator");
  ++pos;
  if (img.width < 1 || img.height < 1) fail("empty image");
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height *
                        static_cast<std::size_t>(img.channels);
  if (bytes.size() - pos != n) fail("pixel data size mismatch");
  img.pixels.assign(bytes.begin() + static_cast<long>(pos), bytes.end());
  return img;
}

void save_pnm(const std::filesystem::path& path, const Image& image) {
  write_file(path, encode_pnm(image));
}

Image load_pnm(const std::filesystem::path& path) { return decode_pnm(read_file(path)); }

}  // namespace dmaze
