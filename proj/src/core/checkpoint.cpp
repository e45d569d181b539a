#include "core/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace jumper {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'J', 'M', 'P', 'R', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kFormatVersion = 1;

static_assert(sizeof(float) == 4, "checkpoint format requires 4-byte floats");
static_assert(std::endian::native == std::endian::little,
              "checkpoint buffers are little-endian");

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in, const std::string& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) fail_format(path + ": truncated checkpoint");
  return value;
}

}  // namespace

void save_checkpoint(const std::string& path, const RunConfig& cfg,
                     const SlotSchema& schema, const Vocabulary& vocab,
                     const ParamStore& params) {
  json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["config"] = config_to_json(cfg);
  manifest["schema"] = json::parse(schema_to_json(schema));
  manifest["vocab"] = vocab.tokens();
  json ptable = json::array();
  for (const auto& [name, t] : params)
    ptable.push_back({{"name", name}, {"shape", t.shape}});
  manifest["params"] = ptable;
  const std::string text = manifest.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail_io("cannot open checkpoint for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_raw(out, kFormatVersion);
  write_raw(out, static_cast<std::uint64_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));

  std::vector<float> buffer;
  for (const auto& [name, t] : params) {
    buffer.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
      buffer[i] = static_cast<float>(t.v[i]);
    out.write(reinterpret_cast<const char*>(buffer.data()),
              static_cast<std::streamsize>(buffer.size() * sizeof(float)));
  }
  out.flush();
  if (!out) fail_io("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_io("cannot open checkpoint: " + path);

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    fail_format(path + ": not a checkpoint file (bad magic)");
  const auto version = read_raw<std::uint32_t>(in, path);
  if (version != kFormatVersion)
    fail_format(path + ": unsupported checkpoint version " +
                std::to_string(version));
  const auto manifest_len = read_raw<std::uint64_t>(in, path);
  std::string text(manifest_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(manifest_len));
  if (!in) fail_format(path + ": truncated manifest");

  json manifest;
  try {
    manifest = json::parse(text);
  } catch (const json::exception& e) {
    fail_format(path + ": invalid manifest JSON: " + e.what());
  }

  Checkpoint ckpt{
      config_from_json(manifest.at("config"), path),
      parse_schema_json(manifest.at("schema").dump(), path),
      Vocabulary(manifest.at("vocab").get<std::vector<std::string>>()),
      ParamStore(0)};

  ckpt.params = ParamStore(ckpt.config.seed);
  std::vector<float> buffer;
  for (const auto& entry : manifest.at("params")) {
    const std::string name = entry.at("name").get<std::string>();
    const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
    Tensor& t = ckpt.params.add_zeros(name, shape);
    buffer.resize(t.size());
    in.read(reinterpret_cast<char*>(buffer.data()),
            static_cast<std::streamsize>(buffer.size() * sizeof(float)));
    if (!in) fail_format(path + ": truncated parameter data for " + name);
    for (std::size_t i = 0; i < t.size(); ++i)
      t.v[i] = static_cast<Real>(buffer[i]);
  }
  return ckpt;
}

}  // namespace jumper
