#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <iostream>
#include <thread>

#include "secagg/bench.hpp"
#include "secagg/session_config.hpp"

using namespace secagg;

namespace {

template <class T>
std::vector<T> parse_list(const std::string& s, const char* what) {
  std::vector<T> out;
  std::string_view rest = s;
  while (!rest.empty()) {
    const auto c = rest.find(',');
    const std::string_view item = rest.substr(0, c);
    T v{};
    const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || p != item.data() + item.size())
      fail(Errc::InvalidConfig, std::string("bad ") + what + " entry '" + std::string(item) + "'");
    out.push_back(v);
    if (c == std::string_view::npos) break;
    rest.remove_prefix(c + 1);
  }
  return out;
}

std::vector<Variant> parse_variants(const std::string& s) {
  if (s == "all") {
    return {Variant::V1, Variant::V2, Variant::V3, Variant::V4, Variant::V5, Variant::V6,
            Variant::Heterogeneous, Variant::Baseline};
  }
  std::vector<Variant> out;
  std::string_view rest = s;
  while (!rest.empty()) {
    const auto c = rest.find(',');
    out.push_back(parse_variant(rest.substr(0, c)));
    if (c == std::string_view::npos) break;
    rest.remove_prefix(c + 1);
  }
  return out;
}

void print_outcome(const RoundOutcome& o) {
  if (o.ok()) {
    std::printf("round %u: aggregate=%lld contributors=%zu bytes=%llu time=%.6fs\n", o.round_id,
                static_cast<long long>(*o.aggregate), o.contributors.size(),
                static_cast<unsigned long long>(o.aggregator_io.bytes_sent + o.aggregator_io.bytes_received),
                std::chrono::duration<double>(o.wall).count());
  } else {
    std::printf("round %u: error %s: %s\n", o.round_id,
                std::string(errc_name(o.error.value_or(Errc::ProtocolViolation))).c_str(),
                o.error_message.c_str());
  }
}

int cmd_bench(BenchSpec spec, const std::string& variants, const std::string& parties,
              const std::string& dbs, const std::string& out, const std::string& raw_out) {
  spec.variants = parse_variants(variants);
  spec.party_counts = parse_list<std::uint32_t>(parties, "party count");
  spec.db_sizes = parse_list<std::size_t>(dbs, "db size");
  std::vector<RoundMetrics> raw;
  const auto rows = run_bench(spec, raw_out.empty() ? nullptr : &raw, [](const RoundMetrics& r) {
    if (r.ok) {
      std::fprintf(stderr, "%-8s n=%-4u db=%-8zu total=%.6fs bytes=%llu aggregate=%lld\n", r.variant.c_str(),
                   r.n, r.db_size, r.total_s, static_cast<unsigned long long>(r.bytes_total),
                   static_cast<long long>(r.aggregate));
    } else {
      std::fprintf(stderr, "%-8s n=%-4u db=%-8zu FAILED %s\n", r.variant.c_str(), r.n, r.db_size,
                   r.error.c_str());
    }
  });
  if (out.empty() || out == "-") {
    emit_csv(rows, std::cout);
  } else {
    emit_csv(rows, std::filesystem::path(out));
  }
  if (!raw_out.empty()) emit_csv(raw, std::filesystem::path(raw_out));
  for (const auto& r : rows)
    if (!r.ok) return 1;
  return 0;
}

int cmd_run(const std::string& path) {
  JobConfig job = load_job_config(path);
  const std::uint32_t rounds = job.rounds;
  const RoundRequest req = job.request;
  auto session = Session::start(std::move(job.session));
  int rc = 0;
  for (std::uint32_t r = 0; r < rounds; ++r) {
    const RoundReport rep = session->run_round(req);
    print_outcome(rep.outcome);
    if (!rep.outcome.ok()) rc = 1;
  }
  return rc;
}

int cmd_aggregator(const std::string& path) {
  JobConfig job = load_job_config(path);
  if (!job.platform_seed && job.session.config.uses_tee())
    fail(Errc::InvalidConfig, "multi-process TEE runs need platform_seed");
  TcpListener listener(job.port, job.host);
  std::fprintf(stderr, "aggregator listening on %s:%u\n", job.host.c_str(), listener.port());
  std::vector<ChannelPtr> channels;
  for (std::uint32_t i = 0; i < job.session.config.n(); ++i)
    channels.push_back(listener.accept(std::chrono::seconds(60)));

  std::uint64_t value_bound = 1;
  for (const auto& d : job.session.datasets) value_bound = std::max(value_bound, d.value_bound());
  AggregatorOptions ao;
  ao.config = job.session.config;
  ao.platform = job.session.platform;
  ao.timeout = job.session.timeout;
  ao.secure_channels = job.session.secure_channels;
  ao.plaintext_bound = job.session.plaintext_bound;
  ao.value_bound = value_bound;
  AggregatorNode node(std::move(ao), std::move(channels));
  node.setup();
  int rc = 0;
  for (std::uint32_t r = 0; r < job.rounds; ++r) {
    const RoundOutcome o = node.run_round(job.request);
    print_outcome(o);
    if (!o.ok()) rc = 1;
  }
  node.shutdown();
  return rc;
}

int cmd_party(const std::string& path, std::uint32_t index) {
  JobConfig job = load_job_config(path);
  if (index < 1 || index > job.session.config.n())
    fail(Errc::InvalidPartyIndex, "party index must be in [1, n]");
  if (job.port == 0) fail(Errc::InvalidConfig, "party needs the aggregator port");
  ChannelPtr ch;
  for (int attempt = 0;; ++attempt) {
    try {
      ch = tcp_connect(job.host, job.port);
      break;
    } catch (const Error&) {
      if (attempt >= 100) throw;
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
  }
  PartyOptions po;
  po.index = index;
  po.mechanism = job.session.config.party_mechs[index - 1];
  po.data = job.session.datasets[index - 1];
  po.platform = job.session.platform;
  po.secure_channel = job.session.secure_channels;
  PartyNode node(std::move(po), std::move(ch));
  node.serve();
  if (auto f = node.failure()) {
    std::fprintf(stderr, "party %u: %s\n", index, f->c_str());
    return 1;
  }
  return 0;
}

int cmd_gen_data(std::uint64_t seed, std::size_t size, std::uint64_t bound, const std::string& out) {
  save_dataset(out, generate_dataset(seed, size, bound));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secure aggregation engine and benchmark harness"};
  app.require_subcommand(1);

  BenchSpec spec;
  std::string variants = "v1", parties = "3", dbs = "1000", out, raw_out, t_rule = "all", transport = "inproc",
              hetero_agg = "tee";
  unsigned timeout_ms = 30000;
  auto* bench = app.add_subcommand("bench", "Sweep variants over party counts and dataset sizes");
  bench->add_option("--variant", variants, "v1..v6, hetero, baseline, comma list or 'all'");
  bench->add_option("--parties", parties, "Comma list of party counts");
  bench->add_option("--db-sizes", dbs, "Comma list of rows per party");
  bench->add_option("--t-rule", t_rule, "all | majority | fixed:N");
  bench->add_option("--k", spec.k, "Candidate-universe size");
  bench->add_option("--query-id", spec.query_id, "Candidate evaluated by every variant");
  bench->add_option("--reps", spec.repetitions, "Repetitions per grid point (median reported)");
  bench->add_option("--transport", transport, "inproc | tcp");
  bench->add_option("--seed", spec.seed, "Dataset seed");
  bench->add_option("--value-bound", spec.value_bound, "Per-row magnitude bound");
  bench->add_option("--aggregator", hetero_agg, "Aggregator mechanism for hetero: tee | crypto");
  bench->add_option("--timeout-ms", timeout_ms, "Per-phase straggler timeout");
  bench->add_option("--out", out, "CSV output path ('-' for stdout)");
  bench->add_option("--raw", raw_out, "Also write one CSV row per repetition");

  std::string config;
  auto* run = app.add_subcommand("run", "Run rounds of one session in this process");
  run->add_option("--config", config, "Session config file")->required();

  auto* agg = app.add_subcommand("aggregator", "Aggregator role over TCP");
  agg->add_option("--config", config, "Session config file")->required();

  std::uint32_t index = 0;
  auto* party = app.add_subcommand("party", "Party role over TCP");
  party->add_option("--config", config, "Session config file")->required();
  party->add_option("--index", index, "1-based party index")->required();

  std::uint64_t gen_seed = 1, gen_bound = kDefaultValueBound;
  std::size_t gen_size = 100;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic dataset, one integer per line");
  gen->add_option("--seed", gen_seed);
  gen->add_option("--size", gen_size);
  gen->add_option("--bound", gen_bound);
  gen->add_option("--out", gen_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bench) {
      spec.t_rule = t_rule;
      spec.transport = parse_transport(transport);
      spec.hetero_aggregator = parse_mechanism(hetero_agg);
      spec.timeout = std::chrono::milliseconds(timeout_ms);
      return cmd_bench(spec, variants, parties, dbs, out, raw_out);
    }
    if (*run) return cmd_run(config);
    if (*agg) return cmd_aggregator(config);
    if (*party) return cmd_party(config, index);
    if (*gen) return cmd_gen_data(gen_seed, gen_size, gen_bound, gen_out);
  } catch (const Error& e) {
    std::fprintf(stderr, "error %s: %s\n", std::string(errc_name(e.code())).c_str(), e.what());
    return 2;
  }
  return 0;
}
