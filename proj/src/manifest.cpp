#include "gailpen/manifest.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include "gailpen/errors.hpp"

namespace gailpen {

std::string iso_utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_json_file(const std::filesystem::path& destination,
                     const nlohmann::json& body) {
  const std::filesystem::path tmp = destination.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out) throw io_error(tmp.string(), "cannot open for writing");
    out << body.dump(2) << '\n';
    if (!out) throw io_error(tmp.string(), "write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, destination, ec);
  if (ec) throw io_error(destination.string(), "rename failed: " + ec.message());
}

std::string fingerprint_hex(std::uint64_t fingerprint) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fingerprint));
  return buf;
}

std::string optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::adam ? "adam" : "sgd_momentum";
}

OptimizerKind optimizer_from_name(const std::string& name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "sgd_momentum" || name == "sgd") return OptimizerKind::sgd_momentum;
  throw std::invalid_argument("unknown optimizer '" + name + "'");
}

std::string prefix_mode_name(PrefixMode mode) {
  return mode == PrefixMode::random_prefix ? "random_prefix" : "first_point";
}

PrefixMode prefix_mode_from_name(const std::string& name) {
  if (name == "first_point") return PrefixMode::first_point;
  if (name == "random_prefix") return PrefixMode::random_prefix;
  throw std::invalid_argument("unknown prefix mode '" + name + "'");
}

nlohmann::json config_json(const TrainingConfig& config) {
  return {
      {"horizon", config.horizon},
      {"gamma", config.gamma},
      {"actor_lr", config.actor_lr},
      {"critic_lr", config.critic_lr},
      {"discriminator_lr", config.discriminator_lr},
      {"batch_size", config.batch_size},
      {"total_steps", config.total_steps},
      {"noise_scale", config.noise_scale},
      {"tau", config.tau},
      {"seed", config.seed},
      {"checkpoint_interval", config.checkpoint_interval},
      {"metrics_interval", config.metrics_interval},
      {"optimizer", optimizer_name(config.optimizer)},
      {"momentum", config.momentum},
      {"episodes_per_step", config.episodes_per_step},
      {"replay_capacity", config.replay_capacity},
      {"prefix_mode", prefix_mode_name(config.prefix_mode)},
      {"workers", config.workers},
  };
}

nlohmann::json provenance_json(const DataProvenance& provenance) {
  return {
      {"path", provenance.path},
      {"fingerprint", fingerprint_hex(provenance.fingerprint)},
  };
}

}  // namespace gailpen
