#include <charconv>
#include <stdexcept>
#include <string>

#include "dmaze/formats.hpp"

namespace dmaze {
namespace {

template <typename T>
T parse_number(std::string_view token, const char* field) {
  T value{};
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || end != token.data() + token.size())
    throw std::invalid_argument(std::string("DMZ1: bad ") + field + " '" +
                                std::string(token) + "'");
  return value;
}

std::string_view next_token(std::string_view& line) {
  const auto space = line.find(' ');
  const std::string_view token = line.substr(0, space);
  line = space == std::string_view::npos ? std::string_view{} : line.substr(space + 1);
  return token;
}

}  // namespace

std::string encode_dmz(const MazeGrid& grid) {
  std::string out = "DMZ1 " + std::to_string(grid.width()) + " " +
                    std::to_string(grid.height()) + " " + std::to_string(grid.seed()) +
                    " " + std::string(to_string(grid.style())) + "\n";
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) out += grid.is_wall({x, y}) ? '#' : '.';
    out += '\n';
  }
  return out;
}

// Only the canonical encoding is accepted, so parse and write are inverses.
MazeGrid decode_dmz(std::string_view text) {
  const auto eol = text.find('\n');
  if (eol == std::string_view::npos) throw std::invalid_argument("DMZ1: missing header line");
  std::string_view header = text.substr(0, eol);
  if (next_token(header) != "DMZ1") throw std::invalid_argument("DMZ1: bad magic");
  const int width = parse_number<int>(next_token(header), "width");
  const int height = parse_number<int>(next_token(header), "height");
  const auto seed = parse_number<std::uint64_t>(next_token(header), "seed");
  const MazeStyle style = parse_maze_style(next_token(header));
  if (!header.empty()) throw std::invalid_argument("DMZ1: trailing header fields");
  if (width < kMinMazeSize || width > kMaxMazeSize || height < kMinMazeSize ||
      height > kMaxMazeSize)
    throw std::invalid_argument("DMZ1: dimensions out of range");

  std::string_view body = text.substr(eol + 1);
  const std::size_t row_len = static_cast<std::size_t>(width) + 1;
  if (body.size() != row_len * static_cast<std::size_t>(height))
    throw std::invalid_argument("DMZ1: grid body does not match dimensions");
  std::vector<std::uint8_t> walls;
  walls.reserve(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    const std::string_view row = body.substr(static_cast<std::size_t>(y) * row_len, row_len);
    if (row.back() != '\n') throw std::invalid_argument("DMZ1: row length mismatch");
    for (int x = 0; x < width; ++x) {
      const char c = row[static_cast<std::size_t>(x)];
      if (c != '#' && c != '.')
        throw std::invalid_argument(std::string("DMZ1: unexpected cell character '") + c + "'");
      walls.push_back(c == '#' ? 1 : 0);
    }
  }
  MazeGrid grid(width, height, seed, style, std::move(walls));
  if (encode_dmz(grid) != text) throw std::invalid_argument("DMZ1: non-canonical header");
  return grid;
}

void save_dmz(const std::filesystem::path& path, const MazeGrid& grid) {
  write_file(path, encode_dmz(grid));
}

MazeGrid load_dmz(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  return decode_dmz(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace dmaze
