#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>

#include "secagg/session.hpp"

namespace secagg {

/// A single-round job read from a key=value file. `#` starts a comment.
///
///   variant         v1..v6 | hetero | baseline
///   n, t, k         party count, threshold (or t_rule = all|majority|fixed:N), universe size
///   aggregator      crypto | tee            (hetero only)
///   party_mechs     comma list of crypto|tee (hetero only, length n)
///   query           e.g. "sum where value >= 10"
///   query_id        candidate index under a confidential query
///   datasets        comma list of files, one per party, relative to the config
///   generator_seed, generator_size   synthetic data when no datasets are given
///   value_bound     per-row magnitude bound
///   timeout_ms, transport, secure_channels, plaintext_bound, seed
///   platform_seed   shared root key for multi-process runs
///   host, port      aggregator address for multi-process runs
///   rounds          rounds to run (default 1)
struct JobConfig {
  SessionOptions session;
  RoundRequest request;
  std::uint32_t rounds = 1;
  std::optional<std::uint64_t> platform_seed;
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

/// Raises ParseError (with line number), InvalidConfig, or dataset errors.
JobConfig parse_job_config(std::istream& in, const std::filesystem::path& base_dir = ".");
JobConfig load_job_config(const std::filesystem::path& path);

}  // namespace secagg
