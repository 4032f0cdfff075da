#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "secagg/session.hpp"

namespace secagg {

struct BenchSpec {
  std::vector<Variant> variants;
  std::vector<std::uint32_t> party_counts;
  std::vector<std::size_t> db_sizes;
  std::uint32_t k = 16;
  std::string t_rule = "all";
  std::uint32_t repetitions = 10;
  TransportKind transport = TransportKind::InProc;
  std::uint64_t seed = 1;
  /// Per-row magnitude bound of the synthetic datasets.
  std::uint64_t value_bound = 16;
  /// Every variant evaluates candidates[query_id] of the k-candidate universe.
  std::uint32_t query_id = 0;
  /// Heterogeneous runs alternate TEE and CRYPTO parties under this aggregator.
  Mechanism hetero_aggregator = Mechanism::Tee;
  std::chrono::milliseconds timeout{30000};

  /// Raises InvalidConfig.
  void validate() const;
};

struct RoundMetrics {
  std::string variant;
  std::uint32_t n = 0;
  std::size_t db_size = 0;
  /// Repetition index in raw rows; number of repetitions in median rows.
  std::uint32_t rep = 0;
  double total_s = 0;
  /// Unset for OT variants, whose computation and exchange interleave.
  std::optional<double> compute_s;
  std::optional<double> comm_s;
  std::uint64_t bytes_total = 0;
  std::uint64_t payload_bytes = 0;
  std::int64_t aggregate = 0;
  bool ok = false;
  /// Not part of the CSV.
  std::string error;

  bool operator==(const RoundMetrics& o) const {
    return variant == o.variant && n == o.n && db_size == o.db_size && rep == o.rep &&
           total_s == o.total_s && compute_s == o.compute_s && comm_s == o.comm_s &&
           bytes_total == o.bytes_total && payload_bytes == o.payload_bytes &&
           aggregate == o.aggregate && ok == o.ok;
  }
};

/// Session config for one grid point.
VariantConfig bench_config(const BenchSpec& spec, Variant v, std::uint32_t n);
/// Synthetic datasets for one grid point; identical across variants.
std::vector<Dataset> bench_datasets(const BenchSpec& spec, std::uint32_t n, std::size_t db_size);

/// Runs every (variant, n, db_size) point and returns one median row per
/// point. Protocol errors are recorded in the row and the sweep continues;
/// an aggregate that disagrees with the plaintext oracle raises
/// OracleMismatch. `raw`, when given, receives every repetition.
std::vector<RoundMetrics> run_bench(const BenchSpec& spec, std::vector<RoundMetrics>* raw = nullptr,
                                    const std::function<void(const RoundMetrics&)>& progress = {});

/// Baseline at the first grid point of `spec`.
RoundMetrics run_baseline(const BenchSpec& spec);

struct ScalabilityFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
};

enum class FitAxis { Parties, DbSize };
enum class FitMetric { TotalTime, ComputeTime, BytesTotal };

/// Ordinary least squares; needs at least 3 points with two distinct x.
ScalabilityFit fit_linear(std::span<const double> x, std::span<const double> y);
ScalabilityFit fit_scalability(std::span<const RoundMetrics> rows, FitAxis axis,
                               FitMetric metric = FitMetric::TotalTime);

inline constexpr std::string_view kCsvHeader =
    "variant,n,db_size,rep,total_s,compute_s,comm_s,bytes_total,payload_bytes,aggregate,ok";

void emit_csv(std::span<const RoundMetrics> rows, std::ostream& out);
/// Raises IoError.
void emit_csv(std::span<const RoundMetrics> rows, const std::filesystem::path& path);
/// Raises ParseError.
std::vector<RoundMetrics> parse_csv(std::istream& in);

}  // namespace secagg
