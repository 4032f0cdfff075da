#include "secagg/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

namespace secagg {

namespace {

double seconds(std::chrono::nanoseconds d) { return std::chrono::duration<double>(d).count(); }

template <class T>
T median_of(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  if (v.size() % 2 == 1) return v[m];
  if constexpr (std::is_floating_point_v<T>) return (v[m - 1] + v[m]) / 2;
  else return v[m - 1] + (v[m] - v[m - 1]) / 2;
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

void BenchSpec::validate() const {
  if (variants.empty() || party_counts.empty() || db_sizes.empty())
    fail(Errc::InvalidConfig, "variant, party and db-size lists must be non-empty");
  if (repetitions < 1) fail(Errc::InvalidConfig, "repetitions must be at least 1");
  for (auto n : party_counts)
    if (n == 0) fail(Errc::InvalidConfig, "party counts must be positive");
  if (k < 1 || k > kMaxCandidates) fail(Errc::InvalidConfig, "k must be in [1, 1024]");
  if (query_id >= k) fail(Errc::InvalidConfig, "query_id must be below k");
  (void)threshold_from_rule(t_rule, 1);
}

VariantConfig bench_config(const BenchSpec& spec, Variant v, std::uint32_t n) {
  const std::uint32_t t = threshold_from_rule(spec.t_rule, n);
  if (v != Variant::Heterogeneous) return VariantConfig::homogeneous(v, n, t, spec.k);
  VariantConfig c;
  c.query_conf = QueryConf::Confidential;
  c.aggregator_mech = spec.hetero_aggregator;
  c.t = t;
  c.k = spec.k;
  for (std::uint32_t i = 0; i < n; ++i) c.party_mechs.push_back(i % 2 == 0 ? Mechanism::Tee : Mechanism::Crypto);
  return c;
}

std::vector<Dataset> bench_datasets(const BenchSpec& spec, std::uint32_t n, std::size_t db_size) {
  std::vector<Dataset> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i)
    out.push_back(generate_dataset(spec.seed * 1'000'003 + std::uint64_t{n} * 7919 + i, db_size,
                                   spec.value_bound, i + 1));
  return out;
}

std::vector<RoundMetrics> run_bench(const BenchSpec& spec, std::vector<RoundMetrics>* raw,
                                    const std::function<void(const RoundMetrics&)>& progress) {
  spec.validate();
  std::vector<RoundMetrics> rows;
  const Query query = candidate_universe(spec.k, spec.value_bound)[spec.query_id];

  for (Variant v : spec.variants) {
    for (std::uint32_t n : spec.party_counts) {
      for (std::size_t db : spec.db_sizes) {
        RoundMetrics row;
        row.variant = std::string(variant_name(v));
        row.n = n;
        row.db_size = db;
        row.rep = spec.repetitions;
        std::vector<RoundMetrics> reps;
        try {
          SessionOptions so;
          so.config = bench_config(spec, v, n);
          so.datasets = bench_datasets(spec, n, db);
          so.transport = spec.transport;
          so.timeout = spec.timeout;
          auto session = Session::start(std::move(so));
          const RoundRequest req{query, spec.query_id};
          const bool split = !session->config().uses_ot();
          for (std::uint32_t r = 0; r < spec.repetitions; ++r) {
            const RoundReport rep = session->run_round(req);
            RoundMetrics m = row;
            m.rep = r;
            m.total_s = seconds(rep.outcome.wall);
            if (split) {
              m.compute_s = seconds(rep.compute);
              m.comm_s = m.total_s - *m.compute_s;
            }
            m.bytes_total = rep.outcome.aggregator_io.bytes_sent + rep.outcome.aggregator_io.bytes_received;
            m.payload_bytes = rep.outcome.payload_bytes;
            m.aggregate = rep.outcome.value();
            const std::int64_t expected = session->oracle(req, rep.outcome.contributors);
            if (m.aggregate != expected)
              fail(Errc::OracleMismatch, row.variant + " n=" + std::to_string(n) + " db=" +
                                             std::to_string(db) + ": aggregate " +
                                             std::to_string(m.aggregate) + " != oracle " +
                                             std::to_string(expected));
            m.ok = true;
            reps.push_back(m);
            if (raw) raw->push_back(m);
          }
        } catch (const Error& e) {
          if (e.code() == Errc::OracleMismatch) throw;
          row.ok = false;
          row.error = std::string(errc_name(e.code())) + ": " + e.what();
        }
        if (!reps.empty() && reps.size() == spec.repetitions) {
          const auto col = [&](auto get) {
            std::vector<decltype(get(reps[0]))> v;
            for (const auto& r : reps) v.push_back(get(r));
            return median_of(v);
          };
          row.total_s = col([](const RoundMetrics& r) { return r.total_s; });
          if (reps[0].compute_s) {
            row.compute_s = col([](const RoundMetrics& r) { return *r.compute_s; });
            row.comm_s = col([](const RoundMetrics& r) { return *r.comm_s; });
          }
          row.bytes_total = col([](const RoundMetrics& r) { return r.bytes_total; });
          row.payload_bytes = col([](const RoundMetrics& r) { return r.payload_bytes; });
          row.aggregate = reps[0].aggregate;
          row.ok = true;
        }
        if (progress) progress(row);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

RoundMetrics run_baseline(const BenchSpec& spec) {
  BenchSpec b = spec;
  b.variants = {Variant::Baseline};
  b.party_counts = {spec.party_counts.at(0)};
  b.db_sizes = {spec.db_sizes.at(0)};
  return run_bench(b).at(0);
}

ScalabilityFit fit_linear(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(Errc::LengthMismatch, "x and y differ in length");
  if (x.size() < 3) fail(Errc::InsufficientPoints, "a fit needs at least 3 points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) fail(Errc::InsufficientPoints, "all points share one x value");
  ScalabilityFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

ScalabilityFit fit_scalability(std::span<const RoundMetrics> rows, FitAxis axis, FitMetric metric) {
  std::vector<double> x, y;
  for (const RoundMetrics& r : rows) {
    if (!r.ok) continue;
    double v = 0;
    switch (metric) {
      case FitMetric::TotalTime: v = r.total_s; break;
      case FitMetric::ComputeTime:
        if (!r.compute_s) continue;
        v = *r.compute_s;
        break;
      case FitMetric::BytesTotal: v = static_cast<double>(r.bytes_total); break;
    }
    x.push_back(axis == FitAxis::Parties ? r.n : static_cast<double>(r.db_size));
    y.push_back(v);
  }
  return fit_linear(x, y);
}

void emit_csv(std::span<const RoundMetrics> rows, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const RoundMetrics& r : rows) {
    out << r.variant << ',' << r.n << ',' << r.db_size << ',' << r.rep << ',' << format_double(r.total_s)
        << ',' << (r.compute_s ? format_double(*r.compute_s) : "") << ','
        << (r.comm_s ? format_double(*r.comm_s) : "") << ',' << r.bytes_total << ',' << r.payload_bytes
        << ',' << r.aggregate << ',' << (r.ok ? 1 : 0) << '\n';
  }
}

void emit_csv(std::span<const RoundMetrics> rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::IoError, "cannot write " + path.string());
  emit_csv(rows, out);
  out.flush();
  if (!out) fail(Errc::IoError, "write failed for " + path.string());
}

namespace {

template <class T>
T parse_field(std::string_view s, int line, std::string_view name) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    fail(Errc::ParseError, "line " + std::to_string(line) + ": bad " + std::string(name));
  return v;
}

}  // namespace

std::vector<RoundMetrics> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) fail(Errc::ParseError, "line 1: unexpected CSV header");
  std::vector<RoundMetrics> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest = line;
    for (;;) {
      const auto c = rest.find(',');
      f.push_back(rest.substr(0, c));
      if (c == std::string_view::npos) break;
      rest.remove_prefix(c + 1);
    }
    if (f.size() != 11) fail(Errc::ParseError, "line " + std::to_string(lineno) + ": expected 11 fields");
    RoundMetrics r;
    r.variant = std::string(f[0]);
    r.n = parse_field<std::uint32_t>(f[1], lineno, "n");
    r.db_size = parse_field<std::size_t>(f[2], lineno, "db_size");
    r.rep = parse_field<std::uint32_t>(f[3], lineno, "rep");
    r.total_s = parse_field<double>(f[4], lineno, "total_s");
    if (!f[5].empty()) r.compute_s = parse_field<double>(f[5], lineno, "compute_s");
    if (!f[6].empty()) r.comm_s = parse_field<double>(f[6], lineno, "comm_s");
    r.bytes_total = parse_field<std::uint64_t>(f[7], lineno, "bytes_total");
    r.payload_bytes = parse_field<std::uint64_t>(f[8], lineno, "payload_bytes");
    r.aggregate = parse_field<std::int64_t>(f[9], lineno, "aggregate");
    const auto ok = parse_field<int>(f[10], lineno, "ok");
    if (ok != 0 && ok != 1) fail(Errc::ParseError, "line " + std::to_string(lineno) + ": ok must be 0 or 1");
    r.ok = ok == 1;
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace secagg
