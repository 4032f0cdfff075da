#include "secagg/datastore.hpp"

#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

#include "secagg/error.hpp"

namespace secagg {

namespace {

bool magnitude_within(std::int64_t v, std::uint64_t bound) {
  if (v >= 0) return static_cast<std::uint64_t>(v) <= bound;
  if (v == INT64_MIN) return false;
  return static_cast<std::uint64_t>(-v) <= bound;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::string_view op_symbol(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "==";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "?";
}

}  // namespace

bool Predicate::matches(std::int64_t v) const {
  switch (op) {
    case CompareOp::Eq: return v == constant;
    case CompareOp::Ne: return v != constant;
    case CompareOp::Lt: return v < constant;
    case CompareOp::Le: return v <= constant;
    case CompareOp::Gt: return v > constant;
    case CompareOp::Ge: return v >= constant;
  }
  return false;
}

Bytes Query::serialize() const {
  ByteWriter w(kWireBytes);
  w.u8(static_cast<std::uint8_t>(kind))
      .u8(predicate ? static_cast<std::uint8_t>(predicate->op) : 0)
      .i64(predicate ? predicate->constant : 0)
      .u32(column)
      .u32(query_id);
  return std::move(w).take();
}

Query Query::parse(ByteView b) {
  ByteReader in(b);
  Query q;
  auto kind = in.u8();
  if (kind < 1 || kind > 3) fail(Errc::QueryMalformed, "unknown query kind");
  q.kind = static_cast<QueryKind>(kind);
  auto op = in.u8();
  auto constant = in.i64();
  if (op > 6) fail(Errc::QueryMalformed, "unknown comparison operator");
  if (op != 0) q.predicate = Predicate{static_cast<CompareOp>(op), constant};
  q.column = in.u32();
  q.query_id = in.u32();
  if (!in.done()) fail(Errc::QueryMalformed, "trailing bytes after query");
  return q;
}

std::string Query::to_string() const {
  std::string s = kind == QueryKind::Sum ? "sum" : kind == QueryKind::Count ? "count" : "avg";
  if (predicate)
    s += " where value " + std::string(op_symbol(predicate->op)) + " " +
         std::to_string(predicate->constant);
  return s;
}

Query parse_query(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string kind, where, column, op;
  in >> kind;
  Query q;
  if (kind == "sum") q.kind = QueryKind::Sum;
  else if (kind == "count") q.kind = QueryKind::Count;
  else if (kind == "avg") q.kind = QueryKind::AvgPair;
  else fail(Errc::QueryMalformed, "unknown query kind '" + kind + "'");
  if (!(in >> where)) return q;
  std::int64_t constant = 0;
  if (where != "where" || !(in >> column >> op >> constant) || column != "value")
    fail(Errc::QueryMalformed, "expected 'where value <op> <constant>'");
  CompareOp cmp;
  if (op == "==") cmp = CompareOp::Eq;
  else if (op == "!=") cmp = CompareOp::Ne;
  else if (op == "<") cmp = CompareOp::Lt;
  else if (op == "<=") cmp = CompareOp::Le;
  else if (op == ">") cmp = CompareOp::Gt;
  else if (op == ">=") cmp = CompareOp::Ge;
  else fail(Errc::QueryMalformed, "unknown operator '" + op + "'");
  q.predicate = Predicate{cmp, constant};
  return q;
}

Dataset::Dataset(std::uint32_t party_id, std::vector<std::int64_t> values,
                 std::uint64_t value_bound)
    : party_id_(party_id), values_(std::move(values)), value_bound_(value_bound) {
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!magnitude_within(values_[i], value_bound_))
      fail(Errc::BoundViolation, "row " + std::to_string(i + 1) + ": |" +
                                     std::to_string(values_[i]) + "| exceeds bound " +
                                     std::to_string(value_bound_));
}

Dataset load_dataset(const std::filesystem::path& path, std::uint32_t party_id,
                     std::uint64_t value_bound) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open dataset " + path.string());
  std::vector<std::int64_t> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto field = trim(line);
    std::int64_t v = 0;
    auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || end != field.data() + field.size())
      fail(Errc::ParseError, path.string() + ": line " + std::to_string(lineno) +
                                 ": expected a signed integer");
    if (!magnitude_within(v, value_bound))
      fail(Errc::BoundViolation, path.string() + ": line " + std::to_string(lineno) +
                                     ": value exceeds bound " + std::to_string(value_bound));
    values.push_back(v);
  }
  return Dataset(party_id, std::move(values), value_bound);
}

void save_dataset(const std::filesystem::path& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) fail(Errc::IoError, "cannot write dataset " + path.string());
  for (auto v : d.values()) out << v << '\n';
  if (!out) fail(Errc::IoError, "write failed for " + path.string());
}

Dataset generate_dataset(std::uint64_t seed, std::size_t size, std::uint64_t bound,
                         std::uint32_t party_id) {
  if (bound == 0) fail(Errc::BoundViolation, "generator bound must be positive");
  std::mt19937_64 gen(seed);
  // Explicit rejection sampling so output does not depend on the standard
  // library's distribution implementation.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::vector<std::int64_t> values;
  values.reserve(size);
  while (values.size() < size) {
    std::uint64_t v = gen();
    if (v < limit) values.push_back(static_cast<std::int64_t>(v % bound));
  }
  return Dataset(party_id, std::move(values), bound);
}

Subresult eval_query(const Query& q, const Dataset& d) {
  if (q.column != 0)
    fail(Errc::QueryMalformed, "query references missing column " + std::to_string(q.column));
  if (q.kind == QueryKind::AvgPair)
    fail(Errc::QueryMalformed, "AVG must be split into SUM and COUNT before evaluation");
  Int128 acc = 0;
  for (auto v : d.values()) {
    if (q.predicate && !q.predicate->matches(v)) continue;
    acc += q.kind == QueryKind::Sum ? v : 1;
  }
  const Int128 limit = q.kind == QueryKind::Count
                             ? static_cast<Int128>(d.size())
                             : static_cast<Int128>(d.value_bound()) * d.size();
  if (acc > limit || -acc > limit || acc > INT64_MAX || acc < INT64_MIN)
    fail(Errc::Overflow, "subresult exceeds rows * bound");
  return {static_cast<std::int64_t>(acc), q.query_id};
}

std::vector<Subresult> eval_candidate_set(std::span<const Query> candidates, const Dataset& d) {
  if (candidates.empty()) fail(Errc::EmptyCandidateSet, "candidate query set is empty");
  std::vector<Subresult> out;
  out.reserve(candidates.size());
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    try {
      out.push_back(eval_query(candidates[j], d));
    } catch (const Error& e) {
      throw Error(e.code(), "candidate " + std::to_string(j) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Query> candidate_universe(std::uint32_t k, std::uint64_t value_bound) {
  if (k == 0) fail(Errc::EmptyCandidateSet, "candidate universe size must be positive");
  const std::uint64_t step = (value_bound + k - 1) / k;
  std::vector<Query> out;
  out.reserve(k);
  for (std::uint32_t j = 0; j < k; ++j) {
    Query q;
    q.kind = QueryKind::Sum;
    q.query_id = j;
    if (j > 0) q.predicate = Predicate{CompareOp::Ge, static_cast<std::int64_t>(j * step)};
    out.push_back(q);
  }
  return out;
}

}  // namespace secagg
