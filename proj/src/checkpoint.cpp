#include "specgrid/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iterator>

#include <zlib.h>

namespace specgrid {

using nlohmann::json;

namespace {

constexpr std::uint8_t kMagic[4] = {'W', 'D', 'Q', 'N'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, const std::string& source)
      : bytes_(bytes), source_(source) {}

  std::span<const std::uint8_t> take(std::size_t n) {
    if (bytes_.size() - pos_ < n) {
      throw CheckpointError(CheckpointErrorKind::LengthMismatch, source_ + ": truncated file");
    }
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32() {
    auto s = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(s[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    auto s = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(s[i]) << (8 * i);
    return v;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  const std::string& source_;
};

json meta_to_json(const ModelCheckpoint& c) {
  return json{{"schema_version", c.meta.schema_version},
              {"architecture",
               {{"layer_dims", c.arch.layer_dims},
                {"k", c.arch.k},
                {"n_p", c.arch.n_p},
                {"n_f", c.arch.n_f}}},
              {"scenario", c.meta.scenario},
              {"training_step", c.meta.training_step},
              {"created", c.meta.created},
              {"extra", c.meta.extra}};
}

void meta_from_json(const json& j, ModelCheckpoint& c, const std::string& source) {
  try {
    c.meta.schema_version = j.at("schema_version").get<int>();
    const json& a = j.at("architecture");
    c.arch.layer_dims = a.at("layer_dims").get<std::vector<std::size_t>>();
    c.arch.k = a.at("k").get<std::size_t>();
    c.arch.n_p = a.at("n_p").get<std::size_t>();
    c.arch.n_f = a.at("n_f").get<std::size_t>();
    c.meta.scenario = j.at("scenario").get<std::string>();
    c.meta.training_step = j.at("training_step").get<std::uint64_t>();
    c.meta.created = j.at("created").get<std::string>();
    c.meta.extra = j.value("extra", json::object());
  } catch (const json::exception& e) {
    throw CheckpointError(CheckpointErrorKind::Malformed, source + ": metadata: " + e.what());
  }
  if (c.meta.schema_version != kCheckpointSchemaVersion) {
    throw CheckpointError(CheckpointErrorKind::BadVersion,
                          source + ": unsupported metadata schema_version");
  }
}

void check_name(const std::string& name) {
  if (name.empty() || name.find('/') != std::string::npos || name == "." || name == "..") {
    throw ConfigError("invalid checkpoint name '" + name + "'");
  }
}

}  // namespace

const char* to_string(CheckpointErrorKind kind) {
  switch (kind) {
    case CheckpointErrorKind::Missing: return "checkpoint missing";
    case CheckpointErrorKind::BadMagic: return "bad checkpoint magic";
    case CheckpointErrorKind::BadVersion: return "unsupported checkpoint version";
    case CheckpointErrorKind::LengthMismatch: return "checkpoint length mismatch";
    case CheckpointErrorKind::CrcMismatch: return "checkpoint CRC mismatch";
    case CheckpointErrorKind::ArchitectureMismatch: return "architecture mismatch";
    case CheckpointErrorKind::Malformed: return "malformed checkpoint";
    case CheckpointErrorKind::Io: return "checkpoint I/O error";
  }
  return "checkpoint error";
}

ModelCheckpoint ModelCheckpoint::from_network(const QNetwork& net, std::size_t k, std::size_t n_p,
                                              std::size_t n_f, CheckpointMeta meta) {
  ModelCheckpoint c;
  c.arch = {net.layer_dims(), k, n_p, n_f};
  c.params.assign(net.params().begin(), net.params().end());
  c.meta = std::move(meta);
  return c;
}

QNetwork ModelCheckpoint::to_network() const {
  QNetwork net(arch.layer_dims);
  if (net.params().size() != params.size()) {
    throw CheckpointError(CheckpointErrorKind::LengthMismatch,
                          "parameter count does not match layer_dims");
  }
  std::copy(params.begin(), params.end(), net.params().begin());
  return net;
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> encode_checkpoint(const ModelCheckpoint& ckpt) {
  if (ckpt.params.size() != parameter_count(ckpt.arch.layer_dims)) {
    throw CheckpointError(CheckpointErrorKind::LengthMismatch,
                          "parameter count does not match layer_dims");
  }
  const std::string meta = meta_to_json(ckpt).dump();
  std::vector<std::uint8_t> out;
  out.reserve(24 + meta.size() + 8 * ckpt.params.size());
  for (std::uint8_t b : kMagic) out.push_back(b);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(meta.size()));
  out.insert(out.end(), meta.begin(), meta.end());
  put_u64(out, ckpt.params.size());
  const std::size_t param_start = out.size();
  for (double p : ckpt.params) put_u64(out, std::bit_cast<std::uint64_t>(p));
  const std::uint32_t crc = crc32_of(std::span(out).subspan(param_start));
  put_u32(out, crc);
  return out;
}

ModelCheckpoint decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& source) {
  Reader r(bytes, source);
  if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw CheckpointError(CheckpointErrorKind::BadMagic, source);
  }
  r.take(4);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError(CheckpointErrorKind::BadVersion,
                          source + ": version " + std::to_string(version));
  }
  const std::uint32_t meta_len = r.u32();
  auto meta_bytes = r.take(meta_len);
  json meta;
  try {
    meta = json::parse(meta_bytes.begin(), meta_bytes.end());
  } catch (const json::exception& e) {
    throw CheckpointError(CheckpointErrorKind::Malformed, source + ": metadata: " + e.what());
  }
  ModelCheckpoint c;
  meta_from_json(meta, c, source);

  const std::uint64_t count = r.u64();
  const std::size_t expected = parameter_count(c.arch.layer_dims);
  if (count != expected || r.remaining() != count * 8 + 4) {
    throw CheckpointError(CheckpointErrorKind::LengthMismatch,
                          source + ": declared " + std::to_string(count) + " parameters, " +
                              "architecture needs " + std::to_string(expected));
  }
  auto payload = r.take(count * 8);
  const std::uint32_t stored_crc = r.u32();
  if (crc32_of(payload) != stored_crc) {
    throw CheckpointError(CheckpointErrorKind::CrcMismatch, source);
  }
  c.params.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(payload[8 * i + b]) << (8 * b);
    c.params[i] = std::bit_cast<double>(v);
  }
  return c;
}

void write_checkpoint_file(const std::filesystem::path& path, const ModelCheckpoint& ckpt) {
  const std::vector<std::uint8_t> bytes = encode_checkpoint(ckpt);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError(CheckpointErrorKind::Io, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError(CheckpointErrorKind::Io, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ModelCheckpoint read_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointErrorKind::Missing, path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes, path.string());
}

void require_architecture(const Architecture& have, const Architecture& want,
                          const std::string& what) {
  if (!(have == want)) {
    auto dims = [](const Architecture& a) {
      std::string s;
      for (std::size_t d : a.layer_dims) s += (s.empty() ? "" : "-") + std::to_string(d);
      return s + " (K=" + std::to_string(a.k) + ", n_p=" + std::to_string(a.n_p) +
             ", n_f=" + std::to_string(a.n_f) + ")";
    };
    throw CheckpointError(CheckpointErrorKind::ArchitectureMismatch,
                          what + ": have " + dims(have) + ", need " + dims(want));
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

CheckpointStore::CheckpointStore(std::filesystem::path root) : root_(std::move(root)) {}

CheckpointStore CheckpointStore::from_env(const std::filesystem::path& fallback) {
  if (const char* env = std::getenv("SPECGRID_STORE"); env != nullptr && *env != '\0') {
    return CheckpointStore(env);
  }
  return CheckpointStore(fallback);
}

std::filesystem::path CheckpointStore::path_for(const std::string& name) const {
  check_name(name);
  return root_ / (name + ".ckpt");
}

void CheckpointStore::save(const std::string& name, const ModelCheckpoint& ckpt) {
  const auto path = path_for(name);
  std::lock_guard lock(write_mutex_);
  write_checkpoint_file(path, ckpt);
}

ModelCheckpoint CheckpointStore::load(const std::string& name) const {
  return read_checkpoint_file(path_for(name));
}

bool CheckpointStore::contains(const std::string& name) const {
  return std::filesystem::exists(path_for(name));
}

std::vector<std::string> CheckpointStore::names() const {
  std::vector<std::string> out;
  if (!std::filesystem::exists(root_)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(root_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ckpt") {
      out.push_back(entry.path().stem().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace specgrid
