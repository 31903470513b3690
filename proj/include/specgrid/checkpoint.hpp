#pragma once

// Binary model checkpoints.
//
// Layout (all integers little-endian):
//   "WDQN"                      4 bytes magic
//   u32 version                 = 1
//   u32 metadata length         bytes of the UTF-8 JSON block that follows
//   metadata JSON               architecture, scenario, step, timestamp, extra
//   u64 parameter count
//   f64 parameters              canonical order (per layer: weights row-major, biases)
//   u32 CRC32                   over the parameter bytes only

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "specgrid/dqn.hpp"
#include "specgrid/error.hpp"

namespace specgrid {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr int kCheckpointSchemaVersion = 1;

struct Architecture {
  std::vector<std::size_t> layer_dims;
  std::size_t k = 0;
  std::size_t n_p = 0;
  std::size_t n_f = 0;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct CheckpointMeta {
  std::string scenario;
  std::uint64_t training_step = 0;
  std::string created;  // ISO-8601 UTC
  int schema_version = kCheckpointSchemaVersion;
  nlohmann::json extra = nlohmann::json::object();
};

struct ModelCheckpoint {
  Architecture arch;
  std::vector<double> params;
  CheckpointMeta meta;

  static ModelCheckpoint from_network(const QNetwork& net, std::size_t k, std::size_t n_p,
                                      std::size_t n_f, CheckpointMeta meta);
  QNetwork to_network() const;
};

enum class CheckpointErrorKind {
  Missing,
  BadMagic,
  BadVersion,
  LengthMismatch,
  CrcMismatch,
  ArchitectureMismatch,
  Malformed,
  Io,
};

const char* to_string(CheckpointErrorKind kind);

class CheckpointError : public Error {
 public:
  CheckpointError(CheckpointErrorKind kind, const std::string& what)
      : Error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  CheckpointErrorKind kind() const { return kind_; }

 private:
  CheckpointErrorKind kind_;
};

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_checkpoint(const ModelCheckpoint& ckpt);
ModelCheckpoint decode_checkpoint(std::span<const std::uint8_t> bytes,
                                  const std::string& source = "checkpoint");

/// Writes to a temporary sibling and renames it into place.
void write_checkpoint_file(const std::filesystem::path& path, const ModelCheckpoint& ckpt);
ModelCheckpoint read_checkpoint_file(const std::filesystem::path& path);

/// Throws CheckpointError(ArchitectureMismatch) unless the shapes agree.
void require_architecture(const Architecture& have, const Architecture& want,
                          const std::string& what);

/// Current UTC time as an ISO-8601 string.
std::string utc_timestamp();

/// Directory of named checkpoints: <root>/<name>.ckpt.
class CheckpointStore {
 public:
  explicit CheckpointStore(std::filesystem::path root);

  /// Root from the SPECGRID_STORE environment variable, else `fallback`.
  static CheckpointStore from_env(const std::filesystem::path& fallback);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path path_for(const std::string& name) const;

  void save(const std::string& name, const ModelCheckpoint& ckpt);
  ModelCheckpoint load(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::filesystem::path root_;
  mutable std::mutex write_mutex_;
};

}  // namespace specgrid
