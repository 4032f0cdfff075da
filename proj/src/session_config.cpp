#include "secagg/session_config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>

namespace secagg {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  while (!s.empty()) {
    const auto comma = s.find(',');
    out.emplace_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

template <class T>
T number(const std::string& key, const Entry& e) {
  T v{};
  const char* end = e.value.data() + e.value.size();
  const auto [p, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc() || p != end)
    fail(Errc::ParseError, "line " + std::to_string(e.line) + ": " + key + " expects a number");
  return v;
}

bool flag(const std::string& key, const Entry& e) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  fail(Errc::ParseError, "line " + std::to_string(e.line) + ": " + key + " expects true|false");
}

}  // namespace

JobConfig parse_job_config(std::istream& in, const std::filesystem::path& base_dir) {
  static const std::set<std::string> known = {
      "variant",  "n",          "t",          "t_rule",         "k",
      "aggregator", "party_mechs", "query",    "query_id",       "datasets",
      "generator_seed", "generator_size", "value_bound", "timeout_ms", "transport",
      "secure_channels", "plaintext_bound", "seed", "platform_seed", "host",
      "port",     "rounds"};
  std::map<std::string, Entry> kv;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      fail(Errc::ParseError, "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    if (!known.count(key)) fail(Errc::ParseError, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (kv.count(key)) fail(Errc::ParseError, "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv[key] = Entry{std::string(trim(line.substr(eq + 1))), lineno};
  }
  const auto get = [&](const std::string& k) -> const Entry* {
    auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };
  const auto need = [&](const std::string& k) -> const Entry& {
    if (const Entry* e = get(k)) return *e;
    fail(Errc::InvalidConfig, "missing required key '" + k + "'");
  };

  JobConfig job;
  const Variant v = parse_variant(need("variant").value);
  const auto n = number<std::uint32_t>("n", need("n"));
  if (n == 0) fail(Errc::InvalidConfig, "n must be positive");
  std::uint32_t t = n;
  if (const Entry* e = get("t")) t = number<std::uint32_t>("t", *e);
  else if (const Entry* r = get("t_rule")) t = threshold_from_rule(r->value, n);
  const std::uint32_t k = get("k") ? number<std::uint32_t>("k", *get("k")) : 1;

  VariantConfig& cfg = job.session.config;
  if (v == Variant::Heterogeneous) {
    cfg.query_conf = QueryConf::Confidential;
    cfg.t = t;
    cfg.k = k;
    if (const Entry* a = get("aggregator")) cfg.aggregator_mech = parse_mechanism(a->value);
    for (const auto& m : split_list(need("party_mechs").value)) cfg.party_mechs.push_back(parse_mechanism(m));
    if (cfg.party_mechs.size() != n) fail(Errc::InvalidConfig, "party_mechs must list n mechanisms");
  } else {
    cfg = VariantConfig::homogeneous(v, n, t, k);
  }
  cfg.validate();

  const std::uint64_t bound =
      get("value_bound") ? number<std::uint64_t>("value_bound", *get("value_bound")) : kDefaultValueBound;
  if (const Entry* d = get("datasets")) {
    const auto files = split_list(d->value);
    if (files.size() != n) fail(Errc::InvalidConfig, "datasets must list n files");
    for (std::uint32_t i = 0; i < n; ++i) {
      std::filesystem::path p = files[i];
      if (p.is_relative()) p = base_dir / p;
      job.session.datasets.push_back(load_dataset(p, i + 1, bound));
    }
  } else {
    const auto seed = get("generator_seed") ? number<std::uint64_t>("generator_seed", *get("generator_seed")) : 1;
    const auto size = get("generator_size") ? number<std::size_t>("generator_size", *get("generator_size")) : 100;
    for (std::uint32_t i = 0; i < n; ++i)
      job.session.datasets.push_back(generate_dataset(seed * 7919 + i, size, bound, i + 1));
  }

  if (const Entry* q = get("query")) job.request.query = parse_query(q->value);
  if (const Entry* q = get("query_id")) job.request.query_id = number<std::uint32_t>("query_id", *q);
  if (const Entry* e = get("timeout_ms")) job.session.timeout = std::chrono::milliseconds(number<std::uint32_t>("timeout_ms", *e));
  if (const Entry* e = get("transport")) job.session.transport = parse_transport(e->value);
  if (const Entry* e = get("secure_channels")) job.session.secure_channels = flag("secure_channels", *e);
  if (const Entry* e = get("plaintext_bound")) job.session.plaintext_bound = number<std::uint64_t>("plaintext_bound", *e);
  if (const Entry* e = get("seed")) job.session.seed = number<std::uint64_t>("seed", *e);
  if (const Entry* e = get("platform_seed")) job.platform_seed = number<std::uint64_t>("platform_seed", *e);
  if (const Entry* e = get("host")) job.host = e->value;
  if (const Entry* e = get("port")) job.port = number<std::uint16_t>("port", *e);
  if (const Entry* e = get("rounds")) job.rounds = number<std::uint32_t>("rounds", *e);
  if (job.rounds == 0) fail(Errc::InvalidConfig, "rounds must be positive");
  if (job.platform_seed) job.session.platform = Platform::from_seed(*job.platform_seed);
  return job;
}

JobConfig load_job_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open config " + path.string());
  return parse_job_config(in, path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace secagg
