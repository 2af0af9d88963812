#pragma once
// On-disk formats. All binary formats are little-endian.
//
//   DMZ1  text grid: "DMZ1 <w> <h> <seed> <style>" then h rows of '#'/'.'.
//   DVRB  replay buffer: "DVRB", version u32, count u64, c/h/w u32, then per
//         record f32 state, u8 action, f32 reward, f32 next_state, u8 terminal.
//   DVM1  networks: "DVM1", version u32, role u8, latent_dim u32, net count
//         u32; per net a layer count u32 and per layer in u32, out u32,
//         activation u8; then every net's f32 parameters in DenseNet order.
//   PGM/PPM  binary P5/P6, maxval 255.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dmaze/maze.hpp"
#include "dmaze/neural.hpp"
#include "dmaze/observation.hpp"
#include "dmaze/replay.hpp"

namespace dmaze {

using Bytes = std::vector<std::uint8_t>;

// Throws std::runtime_error when the file cannot be opened, read or written.
Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file(const std::filesystem::path& path, std::string_view text);

// Parsers throw std::invalid_argument on malformed input.

std::string encode_dmz(const MazeGrid& grid);
MazeGrid decode_dmz(std::string_view text);
void save_dmz(const std::filesystem::path& path, const MazeGrid& grid);
MazeGrid load_dmz(const std::filesystem::path& path);

inline constexpr std::uint32_t kDvrbVersion = 1;
Bytes encode_dvrb(const ReplayBuffer& buffer);
// The file does not store the buffer kind or capacity; capacity defaults to
// max(record count, 1).
ReplayBuffer decode_dvrb(std::span<const std::uint8_t> bytes,
                         BufferKind kind = BufferKind::Real,
                         std::size_t capacity = 0);
void save_dvrb(const std::filesystem::path& path, const ReplayBuffer& buffer);
ReplayBuffer load_dvrb(const std::filesystem::path& path,
                       BufferKind kind = BufferKind::Real,
                       std::size_t capacity = 0);

enum class ModelRole : std::uint8_t { Dvae = 0, Dqn = 1, Ppo = 2 };
std::string_view to_string(ModelRole role);

inline constexpr std::uint32_t kDvmVersion = 1;

// DVAE files hold {encoder, decoder}; DQN files {online, target}; PPO files
// {policy, value, critic}. latent_dim is 0 for agents.
struct ModelFile {
  ModelRole role = ModelRole::Dvae;
  std::uint32_t latent_dim = 0;
  std::vector<DenseNet<float>> nets;
  friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

Bytes encode_dvm(const ModelFile& model);
ModelFile decode_dvm(std::span<const std::uint8_t> bytes);
void save_dvm(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_dvm(const std::filesystem::path& path);

ModelFile dvae_model_file(const DvaeNets<float>& nets);
// Throws std::invalid_argument unless the file is a two-net DVAE model.
DvaeNets<float> dvae_nets_from(const ModelFile& model);

// 8-bit image, interleaved channels (1 = gray, 3 = RGB).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;
  friend bool operator==(const Image&, const Image&) = default;
};

// round(255 * v) with halves rounded up, v clamped to [0, 1].
std::uint8_t quantize(float v);

// One observation channel as a gray image.
Image render_plane(const ObservationTensor& obs, int channel);
// Grayscale observations give a gray image; raw and rgb give RGB with
// R = player, G = goal, B = walls.
Image render_observation(const ObservationTensor& obs, Representation representation);
// Concatenates horizontally; heights and channel counts must match.
Image side_by_side(const Image& left, const Image& right);

Bytes encode_pnm(const Image& image);
Image decode_pnm(std::span<const std::uint8_t> bytes);
void save_pnm(const std::filesystem::path& path, const Image& image);
Image load_pnm(const std::filesystem::path& path);

}  // namespace dmaze
