#include "gef/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace gef {

namespace {

constexpr const char* kMagic = "GEFCKPT 1";

void to_little_endian(std::uint64_t& bits) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= ((bits >> (8 * i)) & 0xFFu) << (8 * (7 - i));
    bits = out;
  }
}

}  // namespace

const Tensor& Checkpoint::get(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t.tensor;
  throw ValidationError("checkpoint has no tensor '" + name + "'");
}

bool Checkpoint::contains(const std::string& name) const {
  return std::any_of(tensors.begin(), tensors.end(),
                     [&](const NamedTensor& t) { return t.name == name; });
}

void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& manifest,
                     std::span<const NamedTensor> tensors) {
  nlohmann::json header;
  header["manifest"] = manifest;
  header["tensors"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& t : tensors) {
    header["tensors"].push_back({{"name", t.name},
                                 {"shape", t.tensor.shape()},
                                 {"offset", offset},
                                 {"count", t.tensor.numel()}});
    offset += t.tensor.numel() * sizeof(double);
  }
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open checkpoint for writing: " + path.string());
  out << kMagic << '\n' << text.size() << '\n' << text << '\n';
  for (const auto& t : tensors) {
    for (double v : t.tensor.values()) {
      std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
      to_little_endian(bits);
      out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
    }
  }
  if (!out) throw ValidationError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint: " + path.string());
  std::string magic, length_line;
  std::getline(in, magic);
  if (magic != kMagic) throw ValidationError("not a checkpoint file: " + path.string());
  std::getline(in, length_line);
  std::size_t header_len = 0;
  try {
    header_len = std::stoull(length_line);
  } catch (const std::exception&) {
    throw ValidationError("corrupt checkpoint header length in " + path.string());
  }
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));
  if (in.get() != '\n') throw ValidationError("corrupt checkpoint header in " + path.string());
  const auto payload_start = in.tellg();

  nlohmann::json header = nlohmann::json::parse(text);
  Checkpoint ckpt;
  ckpt.manifest = header.at("manifest");
  for (const auto& entry : header.at("tensors")) {
    Shape shape = entry.at("shape").get<Shape>();
    const auto count = entry.at("count").get<std::size_t>();
    const auto offset = entry.at("offset").get<std::uint64_t>();
    std::vector<double> values(count);
    in.seekg(payload_start + static_cast<std::streamoff>(offset));
    for (auto& v : values) {
      std::uint64_t bits = 0;
      in.read(reinterpret_cast<char*>(&bits), sizeof(bits));
      to_little_endian(bits);
      v = std::bit_cast<double>(bits);
    }
    if (!in) throw ValidationError("truncated checkpoint payload in " + path.string());
    ckpt.tensors.push_back(
        {entry.at("name").get<std::string>(), Tensor::from(std::move(shape), std::move(values))});
  }
  return ckpt;
}

void restore_parameters(const Checkpoint& ckpt, const ParameterList& params) {
  copy_values(ckpt.tensors, params);
}

}  // namespace gef
