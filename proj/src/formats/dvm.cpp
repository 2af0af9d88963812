#include <stdexcept>
#include <string>

#include "binary_io.hpp"
#include "dmaze/formats.hpp"

namespace dmaze {

std::string_view to_string(ModelRole role) {
  switch (role) {
    case ModelRole::Dvae: return "dvae";
    case ModelRole::Dqn: return "dqn";
    case ModelRole::Ppo: return "ppo";
  }
  return "unknown";
}

Bytes encode_dvm(const ModelFile& model) {
  io::Writer w;
  w.tag("DVM1");
  w.u32(kDvmVersion);
  w.u8(static_cast<std::uint8_t>(model.role));
  w.u32(model.latent_dim);
  w.u32(static_cast<std::uint32_t>(model.nets.size()));
  for (const DenseNet<float>& net : model.nets) {
    w.u32(static_cast<std::uint32_t>(net.layers().size()));
    for (const LayerSpec& l : net.layers()) {
      w.u32(static_cast<std::uint32_t>(l.in));
      w.u32(static_cast<std::uint32_t>(l.out));
      w.u8(static_cast<std::uint8_t>(l.activation));
    }
  }
  for (const DenseNet<float>& net : model.nets) w.f32s(net.params());
  return w.take();
}

ModelFile decode_dvm(std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes, "DVM1");
  r.expect_tag("DVM1");
  if (r.u32() != kDvmVersion) r.fail("unsupported version");
  ModelFile model;
  const std::uint8_t role = r.u8();
  if (role > static_cast<std::uint8_t>(ModelRole::Ppo)) r.fail("unknown role tag");
  model.role = static_cast<ModelRole>(role);
  model.latent_dim = r.u32();
  const std::uint32_t net_count = r.u32();
  if (net_count > 64) r.fail("implausible net count");
  std::vector<std::vector<LayerSpec>> specs(net_count);
  constexpr std::uint32_t kMaxWidth = 1u << 20;
  for (auto& layers : specs) {
    const std::uint32_t count = r.u32();
    if (count == 0 || count > 256) r.fail("implausible layer count");
    std::uint64_t params = 0;
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::uint32_t in = r.u32(), out = r.u32();
      const std::uint8_t act = r.u8();
      if (in == 0 || out == 0 || in > kMaxWidth || out > kMaxWidth) r.fail("bad layer dims");
      if (act > static_cast<std::uint8_t>(Activation::Sigmoid)) r.fail("unknown activation");
      if (!layers.empty() && static_cast<std::uint32_t>(layers.back().out) != in)
        r.fail("layer dims do not chain");
      layers.push_back({static_cast<int>(in), static_cast<int>(out),
                        static_cast<Activation>(act)});
      params += static_cast<std::uint64_t>(in + 1) * out;
    }
    if (params * 4 > r.remaining()) r.fail("truncated");
  }
  for (auto& layers : specs) {
    DenseNet<float> net(std::move(layers));
    r.f32s(net.params());
    model.nets.push_back(std::move(net));
  }
  r.expect_end();
  return model;
}

void save_dvm(const std::filesystem::path& path, const ModelFile& model) {
  write_file(path, encode_dvm(model));
}

ModelFile load_dvm(const std::filesystem::path& path) { return decode_dvm(read_file(path)); }

ModelFile dvae_model_file(const DvaeNets<float>& nets) {
  return {ModelRole::Dvae, static_cast<std::uint32_t>(nets.latent_dim),
          {nets.encoder, nets.decoder}};
}

DvaeNets<float> dvae_nets_from(const ModelFile& model) {
  if (model.role != ModelRole::Dvae || model.nets.size() != 2)
    throw std::invalid_argument("model file is not a DVAE (role dvae, two nets)");
  const auto& enc = model.nets[0];
  const auto& dec = model.nets[1];
  const int latent = static_cast<int>(model.latent_dim);
  if (latent < 1 || enc.output_dim() != 2 * latent || dec.input_dim() != latent ||
      enc.input_dim() != dec.output_dim() + kNumActions)
    throw std::invalid_argument("DVAE model dims are inconsistent");
  return {enc, dec, latent};
}

}  // namespace dmaze
