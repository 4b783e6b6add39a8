#include "gailpen/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "gailpen/errors.hpp"
#include "gailpen/version.hpp"

namespace gailpen {
namespace {

constexpr char kMagic[4] = {'G', 'P', 'C', 'K'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class Reader {
 public:
  Reader(const unsigned char* data, std::size_t size, std::string path)
      : data_(data), size_(size), path_(std::move(path)) {}

  std::uint16_t u16() { return static_cast<std::uint16_t>(u(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(u(4)); }
  std::uint64_t u64() { return u(8); }
  double f64() { return std::bit_cast<double>(u(8)); }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == size_; }

 private:
  std::uint64_t u(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(data_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  void need(std::size_t n) {
    if (size_ - pos_ < n) throw io_error(path_, "truncated checkpoint");
  }

  const unsigned char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
  std::string path_;
};

std::string squash_name(Squash s) {
  return s == Squash::logistic ? "logistic" : "identity";
}

Squash squash_from_name(const std::string& name, const std::string& path) {
  if (name == "logistic") return Squash::logistic;
  if (name == "identity") return Squash::identity;
  throw io_error(path, "unknown squash '" + name + "'");
}

}  // namespace

void save_checkpoint(const std::filesystem::path& destination,
                     const ParameterSet& params, const CheckpointMeta& meta) {
  nlohmann::json manifest = {
      {"kind", meta.kind},
      {"seed", meta.seed},
      {"spec",
       {{"output_dim", params.spec.output_dim},
        {"sequence_length", params.spec.sequence_length},
        {"squash", squash_name(params.spec.squash)}}},
      {"step", meta.step},
      {"version", std::string(kVersion)},
  };
  const std::string manifest_text = manifest.dump();

  std::string blob;
  blob.append(kMagic, 4);
  put_u32(blob, kFormatVersion);
  put_u64(blob, manifest_text.size());
  blob.append(manifest_text);

  const auto arrays = params.arrays();
  put_u32(blob, static_cast<std::uint32_t>(arrays.size()));
  for (const auto& a : arrays) {
    const std::string name = a.name;
    put_u16(blob, static_cast<std::uint16_t>(name.size()));
    blob.append(name);
    put_u64(blob, static_cast<std::uint64_t>(a.size));
    for (std::ptrdiff_t i = 0; i < a.size; ++i) put_f64(blob, a.data[i]);
  }

  const std::filesystem::path tmp = destination.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error(tmp.string(), "cannot open for writing");
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw io_error(tmp.string(), "write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, destination, ec);
  if (ec) throw io_error(destination.string(), "rename failed: " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& source) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw io_error(source.string(), "cannot open");
  std::vector<unsigned char> raw((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  Reader r(raw.data(), raw.size(), source.string());

  if (r.bytes(4) != std::string(kMagic, 4)) {
    throw io_error(source.string(), "not a checkpoint file");
  }
  if (const auto v = r.u32(); v != kFormatVersion) {
    throw io_error(source.string(),
                   "unsupported checkpoint format version " + std::to_string(v));
  }

  const std::uint64_t manifest_len = r.u64();
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(r.bytes(manifest_len));
  } catch (const nlohmann::json::exception& e) {
    throw io_error(source.string(), std::string("bad manifest: ") + e.what());
  }

  Checkpoint ck;
  try {
    ck.meta.kind = manifest.at("kind").get<std::string>();
    ck.meta.seed = manifest.at("seed").get<std::uint64_t>();
    ck.meta.step = manifest.at("step").get<int>();
    ck.meta.version = manifest.at("version").get<std::string>();
    const auto& spec = manifest.at("spec");
    NetworkSpec ns;
    ns.sequence_length = spec.at("sequence_length").get<int>();
    ns.output_dim = spec.at("output_dim").get<int>();
    ns.squash = squash_from_name(spec.at("squash").get<std::string>(),
                                 source.string());
    ck.params = ParameterSet::zeros(ns);
  } catch (const nlohmann::json::exception& e) {
    throw io_error(source.string(), std::string("bad manifest: ") + e.what());
  }

  const std::uint32_t array_count = r.u32();
  auto arrays = ck.params.arrays();
  if (array_count != arrays.size()) {
    throw io_error(source.string(), "unexpected array count");
  }
  for (auto& a : arrays) {
    const std::uint16_t name_len = r.u16();
    if (r.bytes(name_len) != a.name) {
      throw io_error(source.string(),
                     std::string("array order mismatch, expected ") + a.name);
    }
    const std::uint64_t count = r.u64();
    if (count != static_cast<std::uint64_t>(a.size)) {
      throw io_error(source.string(),
                     std::string("size mismatch for ") + a.name);
    }
    for (std::ptrdiff_t i = 0; i < a.size; ++i) a.data[i] = r.f64();
  }
  if (!r.done()) throw io_error(source.string(), "trailing bytes");
  return ck;
}

}  // namespace gailpen
