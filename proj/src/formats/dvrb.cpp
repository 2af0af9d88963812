#include <algorithm>
#include <limits>

#include "binary_io.hpp"
#include "dmaze/formats.hpp"

namespace dmaze {

Bytes encode_dvrb(const ReplayBuffer& buffer) {
  io::Writer w;
  w.tag("DVRB");
  w.u32(kDvrbVersion);
  w.u64(buffer.size());
  const TensorShape shape = buffer.shape().value_or(TensorShape{});
  w.u32(static_cast<std::uint32_t>(shape.channels));
  w.u32(static_cast<std::uint32_t>(shape.height));
  w.u32(static_cast<std::uint32_t>(shape.width));
  for (const Transition& t : buffer) {
    w.f32s(t.state.values);
    w.u8(static_cast<std::uint8_t>(action_index(t.action)));
    w.f32(t.reward);
    w.f32s(t.next_state.values);
    w.u8(t.terminal ? 1 : 0);
  }
  return w.take();
}

ReplayBuffer decode_dvrb(std::span<const std::uint8_t> bytes, BufferKind kind,
                         std::size_t capacity) {
  io::Reader r(bytes, "DVRB");
  r.expect_tag("DVRB");
  if (r.u32() != kDvrbVersion) r.fail("unsupported version");
  const std::uint64_t count = r.u64();
  const std::uint32_t c = r.u32(), h = r.u32(), w = r.u32();
  constexpr std::uint32_t kMaxDim = 1u << 16;
  if (c > kMaxDim || h > kMaxDim || w > kMaxDim) r.fail("implausible tensor shape");
  const std::size_t n = static_cast<std::size_t>(c) * h * w;
  if (count > 0 && n == 0) r.fail("empty tensor shape with records");
  if (count == 0 && n != 0) r.fail("shape given for an empty buffer");
  const std::size_t record = 2 * 4 * n + 1 + 4 + 1;
  if (count > r.remaining() / std::max<std::size_t>(record, 1)) r.fail("truncated");
  if (capacity == 0) capacity = std::max<std::size_t>(count, 1);
  if (capacity < count) r.fail("capacity smaller than record count");

  ReplayBuffer buffer(capacity, kind);
  const int ci = static_cast<int>(c), hi = static_cast<int>(h), wi = static_cast<int>(w);
  for (std::uint64_t i = 0; i < count; ++i) {
    Transition t;
    t.state = ObservationTensor(ci, hi, wi);
    r.f32s(t.state.values);
    const std::uint8_t action = r.u8();
    if (action >= kNumActions) r.fail("action out of range");
    t.action = action_from_index(action);
    t.reward = r.f32();
    t.next_state = ObservationTensor(ci, hi, wi);
    r.f32s(t.next_state.values);
    const std::uint8_t terminal = r.u8();
    if (terminal > 1) r.fail("terminal flag must be 0 or 1");
    t.terminal = terminal == 1;
    buffer.push(std::move(t));
  }
  r.expect_end();
  return buffer;
}

void save_dvrb(const std::filesystem::path& path, const ReplayBuffer& buffer) {
  write_file(path, encode_dvrb(buffer));
}

ReplayBuffer load_dvrb(const std::filesystem::path& path, BufferKind kind,
                       std::size_t capacity) {
  return decode_dvrb(read_file(path), kind, capacity);
}

}  // namespace dmaze
